#include "cdfig/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cdfig {

const std::vector<std::string>& core_columns()
{
    static const std::vector<std::string> cols{
        "t",     "wind",  "beta",  "cp",      "lambda",  "omega_r", "slip",  "ps1",
        "qs1",   "ps1_ref", "qs1_ref", "ps2",  "qs2",     "pgrid",   "qgrid", "i_ds2",
        "i_qs2", "v_ds2", "v_qs2", "s_d",     "s_q",     "overmod"};
    return cols;
}

const std::vector<std::string>& abc_columns()
{
    static const std::vector<std::string> cols{"va1", "vb1", "vc1", "ia1",   "ib1",  "ic1",
                                               "va2", "ia2", "ib2", "ic2", "va_in", "ia_in"};
    return cols;
}

TimeSeriesLog::TimeSeriesLog(std::vector<std::string> names)
    : names_(std::move(names)), columns_(names_.size())
{
}

std::size_t TimeSeriesLog::index(std::string_view name) const
{
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end())
        throw std::out_of_range("no column '" + std::string(name) + "' in log");
    return static_cast<std::size_t>(it - names_.begin());
}

bool TimeSeriesLog::has(std::string_view name) const
{
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::span<const double> TimeSeriesLog::column(std::string_view name) const
{
    return columns_[index(name)];
}

void TimeSeriesLog::append(std::span<const double> row)
{
    if (row.size() != names_.size())
        throw std::invalid_argument("log row width does not match the column count");
    for (std::size_t i = 0; i < row.size(); ++i)
        columns_[i].push_back(row[i]);
}

void TimeSeriesLog::reserve(std::size_t n)
{
    for (auto& c : columns_)
        c.reserve(n);
}

void TimeSeriesLog::write_csv(std::ostream& out) const
{
    out << "# schema=" << kLogSchemaVersion << '\n';
    for (std::size_t i = 0; i < names_.size(); ++i)
        out << (i ? "," : "") << names_[i];
    out << '\n';
    // shortest representation that round-trips
    char buf[32];
    const std::size_t n = rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i)
                out << ',';
            const auto res = std::to_chars(buf, buf + sizeof buf, columns_[i][r]);
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

void TimeSeriesLog::write_csv(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write log '" + path.string() + "'");
    write_csv(out);
}

TimeSeriesLog TimeSeriesLog::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "# schema=" + std::to_string(kLogSchemaVersion))
        throw std::runtime_error("log: expected '# schema=1' on the first line");
    if (!std::getline(in, line))
        throw std::runtime_error("log: missing column header");
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ','))
            names.push_back(item);
    }
    TimeSeriesLog log(names);
    std::vector<double> row(names.size());
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const char* p = line.data();
        const char* end = p + line.size();
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto res = std::from_chars(p, end, row[i]);
            if (res.ec != std::errc())
                throw std::runtime_error("log: bad number on line " + std::to_string(line_no));
            p = res.ptr;
            if (i + 1 < names.size()) {
                if (p == end || *p != ',')
                    throw std::runtime_error("log: short row on line " + std::to_string(line_no));
                ++p;
            }
        }
        if (p != end)
            throw std::runtime_error("log: long row on line " + std::to_string(line_no));
        log.append(row);
    }
    return log;
}

TimeSeriesLog TimeSeriesLog::read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open log '" + path.string() + "'");
    return read_csv(in);
}

}  // namespace cdfig
