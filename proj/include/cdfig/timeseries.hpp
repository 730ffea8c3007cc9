#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdfig {

inline constexpr int kLogSchemaVersion = 1;

// Fixed column order of schema 1.
const std::vector<std::string>& core_columns();
// Appended when abc reconstructions are logged.
const std::vector<std::string>& abc_columns();

// Column-major record of one run.
class TimeSeriesLog
{
public:
    TimeSeriesLog() = default;
    explicit TimeSeriesLog(std::vector<std::string> names);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
    bool has(std::string_view name) const;
    // Throws std::out_of_range for an unknown column.
    std::span<const double> column(std::string_view name) const;

    // Values in column order; throws std::invalid_argument on a width mismatch.
    void append(std::span<const double> row);
    void reserve(std::size_t n);

    void write_csv(std::ostream& out) const;
    void write_csv(const std::filesystem::path& path) const;
    // Throws std::runtime_error on a missing schema line or malformed row.
    static TimeSeriesLog read_csv(std::istream& in);
    static TimeSeriesLog read_csv(const std::filesystem::path& path);

private:
    std::size_t index(std::string_view name) const;

    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

}  // namespace cdfig
