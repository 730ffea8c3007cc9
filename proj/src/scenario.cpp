#include "cdfig/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cdfig {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Tracks which keys of one section were read so leftovers can be reported.
class Section
{
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    bool has(const std::string& key) const
    {
        return tree_ != nullptr && tree_->find(key) != tree_->not_found();
    }

    std::string path(const std::string& key) const { return name_ + "." + key; }

    std::string raw(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            throw ScenarioError(path(key) + ": missing required key");
        return trim(tree_->get<std::string>(key));
    }

    double number(const std::string& key)
    {
        const std::string text = raw(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size() || !std::isfinite(v))
                throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw ScenarioError(path(key) + ": expected a finite number, got '" + text + "'");
        }
    }

    double number(const std::string& key, double fallback)
    {
        return has(key) ? number(key) : (used_.insert(key), fallback);
    }

    long long integer(const std::string& key)
    {
        const std::string text = raw(key);
        try {
            std::size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size())
                throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw ScenarioError(path(key) + ": expected an integer, got '" + text + "'");
        }
    }

    long long integer(const std::string& key, long long fallback)
    {
        return has(key) ? integer(key) : (used_.insert(key), fallback);
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        return has(key) ? raw(key) : (used_.insert(key), fallback);
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) {
            used_.insert(key);
            return fallback;
        }
        const std::string t = raw(key);
        if (t == "true" || t == "1" || t == "yes")
            return true;
        if (t == "false" || t == "0" || t == "no")
            return false;
        throw ScenarioError(path(key) + ": expected true or false, got '" + t + "'");
    }

    // "t:v, t:v, ..."
    std::vector<std::pair<double, double>> pairs(const std::string& key)
    {
        const std::string t = raw(key);
        std::vector<std::pair<double, double>> out;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty())
                continue;
            const auto colon = item.find(':');
            try {
                if (colon == std::string::npos)
                    throw std::invalid_argument(item);
                std::size_t u1 = 0;
                std::size_t u2 = 0;
                const std::string a = trim(item.substr(0, colon));
                const std::string b = trim(item.substr(colon + 1));
                const double x = std::stod(a, &u1);
                const double y = std::stod(b, &u2);
                if (u1 != a.size() || u2 != b.size() || !std::isfinite(x) || !std::isfinite(y))
                    throw std::invalid_argument(item);
                out.emplace_back(x, y);
            } catch (const std::exception&) {
                throw ScenarioError(path(key) + ": expected 'time:value' pairs, got '" + item +
                                    "'");
            }
        }
        if (out.empty())
            throw ScenarioError(path(key) + ": empty list");
        for (std::size_t i = 1; i < out.size(); ++i)
            if (!(out[i].first > out[i - 1].first))
                throw ScenarioError(path(key) + ": times must be strictly increasing");
        return out;
    }

    void reject_unknown() const
    {
        if (tree_ == nullptr)
            return;
        for (const auto& [key, child] : *tree_)
            if (!used_.count(key))
                throw ScenarioError(path(key) + ": unknown key");
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> used_;
};

template <typename Fn>
void checked(const std::string& section, Fn&& fn)
{
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        // parameter-struct validators already prefix their messages with the path
        std::string msg = e.what();
        if (msg.rfind(section + ".", 0) != 0)
            msg = section + ": " + msg;
        throw ScenarioError(msg);
    }
}

bool aligned(double big, double small)
{
    const double n = std::round(big / small);
    return n >= 1.0 && std::abs(n * small - big) <= 1e-9 * big;
}

MachineParams read_machine(Section& s)
{
    MachineParams m;
    m.Rs2 = s.number("Rs2");
    m.Ls1 = s.number("Ls1");
    m.Ls2 = s.number("Ls2");
    m.Lm1 = s.number("Lm1");
    m.Lm2 = s.number("Lm2");
    m.Lr1 = s.number("Lr1");
    m.Lr2 = s.number("Lr2");
    m.p1 = static_cast<int>(s.integer("p1"));
    m.p2 = static_cast<int>(s.integer("p2"));
    m.J = s.number("J");
    m.f_visc = s.number("f_visc");
    m.Vs = s.number("Vs");
    m.omega_s = s.number("omega_s");
    return m;
}

TurbineParams read_turbine(Section& s)
{
    TurbineParams t;
    t.rotor_radius = s.number("rotor_radius");
    t.air_density = s.number("air_density");
    t.lambda_opt = s.number("lambda_opt");
    t.cp_max = s.number("cp_max");
    t.rated_power = s.number("rated_power");
    t.rated_wind = s.number("rated_wind");
    t.gearbox_ratio = s.number("gearbox_ratio");
    t.beta_max = s.number("beta_max");
    t.beta_rate_limit = s.number("beta_rate_limit");
    t.pitch_kp = s.number("pitch_kp");
    t.pitch_ki = s.number("pitch_ki");
    const CpCoefficients d;
    t.cp.c1 = s.number("cp_c1", d.c1);
    t.cp.c2 = s.number("cp_c2", d.c2);
    t.cp.c3 = s.number("cp_c3", d.c3);
    t.cp.c4 = s.number("cp_c4", d.c4);
    t.cp.c5 = s.number("cp_c5", d.c5);
    t.cp.c6 = s.number("cp_c6", d.c6);
    return t;
}

std::vector<WindProfile::Point> wind_points(Section& s)
{
    if (s.has("points")) {
        if (s.has("speed"))
            throw ScenarioError(s.path("speed") + ": give either speed or points, not both");
        std::vector<WindProfile::Point> pts;
        for (auto [t, v] : s.pairs("points")) {
            if (v < 0.0)
                throw ScenarioError(s.path("points") + ": wind speed must be >= 0");
            pts.push_back({t, v});
        }
        return pts;
    }
    const double v = s.number("speed");
    if (v < 0.0)
        throw ScenarioError(s.path("speed") + ": must be >= 0");
    return {{0.0, v}};
}

WindProfile read_wind(Section& s, std::uint64_t seed)
{
    const std::string kind = s.text("kind", "constant");
    if (kind == "constant") {
        const double v = s.number("speed");
        if (v < 0.0)
            throw ScenarioError(s.path("speed") + ": must be >= 0");
        return WindProfile::constant(v);
    }
    if (kind == "piecewise")
        return WindProfile::piecewise(wind_points(s));
    if (kind == "turbulent") {
        auto pts = wind_points(s);
        const double ti = s.number("turbulence_intensity");
        const long long n = s.integer("components", 20);
        const double f_min = s.number("f_min", 0.02);
        const double f_max = s.number("f_max", 1.0);
        WindProfile w = WindProfile::piecewise({{0.0, 0.0}});
        checked("wind", [&] {
            w = WindProfile::turbulent(std::move(pts), ti, static_cast<int>(n), f_min, f_max,
                                       seed);
        });
        return w;
    }
    throw ScenarioError(s.path("kind") + ": expected constant, piecewise or turbulent, got '" +
                        kind + "'");
}

SmcGains read_gains(Section& s)
{
    SmcGains g;
    g.K1 = s.number("K1");
    g.K2 = s.number("K2");
    g.phi = s.number("phi");
    checked("gains", [&] { g.smoothing = parse_smoothing(s.text("smoothing", "saturation")); });
    g.Ts_control = s.number("Ts_control");
    return g;
}

ConverterConfig read_converter(Section& s)
{
    ConverterConfig c;
    const std::string mode = s.text("mode", "averaged");
    if (mode == "averaged")
        c.mode = ConverterMode::averaged;
    else if (mode == "switched")
        c.mode = ConverterMode::switched;
    else
        throw ScenarioError(s.path("mode") + ": expected averaged or switched, got '" + mode +
                            "'");
    c.Ts = s.number("Ts", c.Ts);
    c.sub_step = s.number("sub_step", c.sub_step);
    const std::string policy = s.text("overmodulation", "clamp");
    if (policy != "clamp")
        throw ScenarioError(s.path("overmodulation") + ": only 'clamp' is supported");
    if (s.has("v_in"))
        c.v_in = s.number("v_in");
    c.gate_dump = s.text("gate_dump", "");
    return c;
}

StepSchedule read_schedule(Section& s, const std::string& key, double ramp)
{
    StepSchedule out;
    out.ramp = ramp;
    if (!s.has(key))
        return out;
    for (auto [t, v] : s.pairs(key))
        out.steps.push_back({t, v});
    return out;
}

const pt::ptree* child(const pt::ptree& root, const std::string& name)
{
    auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
}

}  // namespace

double StepSchedule::value(double t) const
{
    if (steps.empty())
        return 0.0;
    if (t < steps.front().t)
        return steps.front().value;
    double v = steps.front().value;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        const Step& s = steps[i];
        if (t < s.t)
            break;
        if (ramp > 0.0 && t < s.t + ramp)
            return v + (s.value - v) * (t - s.t) / ramp;
        v = s.value;
    }
    return v;
}

double Scenario::plant_step() const
{
    return converter.mode == ConverterMode::switched ? converter.sub_step : dt_plant;
}

void Scenario::validate() const
{
    if (!(duration > 0.0))
        throw ScenarioError("run.duration: must be > 0");
    if (!(dt_plant > 0.0))
        throw ScenarioError("run.dt_plant: must be > 0");
    if (log_decimation < 1)
        throw ScenarioError("run.log_decimation: must be >= 1");
    checked("machine", [&] { machine.validate(); });
    checked("turbine", [&] { turbine.validate(); });
    checked("gains", [&] { gains.validate(); });
    if (dt_plant > gains.Ts_control * (1.0 + 1e-12))
        throw ScenarioError("run.dt_plant: must not exceed gains.Ts_control");
    if (!aligned(gains.Ts_control, dt_plant))
        throw ScenarioError("run.dt_plant: gains.Ts_control must be an integer multiple of it");
    if (!(converter.Ts > 0.0))
        throw ScenarioError("converter.Ts: must be > 0");
    if (!(converter.sub_step > 0.0))
        throw ScenarioError("converter.sub_step: must be > 0");
    if (converter.v_in && !(*converter.v_in > 0.0))
        throw ScenarioError("converter.v_in: must be > 0");
    if (converter.mode == ConverterMode::switched) {
        if (!aligned(gains.Ts_control, converter.Ts))
            throw ScenarioError(
                "converter.Ts: gains.Ts_control must be an integer multiple of the switching period");
        if (!aligned(converter.Ts, converter.sub_step))
            throw ScenarioError(
                "converter.sub_step: must divide the switching period into an integer count");
    }
    if (reference_mode == ReferenceMode::explicit_schedule && p_schedule.empty())
        throw ScenarioError("run.p_schedule: required when reference_mode = explicit");
    if (!std::isfinite(omega_r0) || omega_r0 < 0.0)
        throw ScenarioError("run.omega_r0: must be >= 0");
    if (metrics_start && (*metrics_start < 0.0 || *metrics_start >= duration))
        throw ScenarioError("run.metrics_start: must lie in [0, duration)");
}

Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides)
{
    pt::ptree root;
    try {
        std::istringstream in(text);
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ScenarioError(std::string("parse error: ") + e.what());
    }

    static const std::set<std::string> kSections{"run",   "machine",   "turbine",
                                                  "wind",  "gains",     "converter"};
    for (const auto& [key, node] : root) {
        if (!kSections.count(key))
            throw ScenarioError(key + ": unknown section");
        if (node.empty())
            throw ScenarioError(key + ": empty section");
    }
    for (const auto& [path, value] : overrides) {
        const auto dot = path.find('.');
        if (dot == std::string::npos || !kSections.count(path.substr(0, dot)))
            throw ScenarioError(path + ": override must be <section>.<key>");
        root.put(pt::ptree::path_type(path, '.'), value);
    }

    Section run(child(root, "run"), "run");
    Section mach(child(root, "machine"), "machine");
    Section turb(child(root, "turbine"), "turbine");
    Section wind(child(root, "wind"), "wind");
    Section gains(child(root, "gains"), "gains");
    Section conv(child(root, "converter"), "converter");

    Scenario sc;
    sc.duration = run.number("duration");
    sc.dt_plant = run.number("dt_plant");
    sc.log_decimation = static_cast<int>(run.integer("log_decimation", 10));
    const long long seed = run.integer("seed", 1);
    if (seed < 0)
        throw ScenarioError("run.seed: must be >= 0");
    sc.seed = static_cast<std::uint64_t>(seed);
    sc.output_path = run.text("output", "");
    sc.log_abc = run.boolean("log_abc", true);
    if (run.has("metrics_start"))
        sc.metrics_start = run.number("metrics_start");

    const std::string ref_mode = run.text("reference_mode", "mppt");
    if (ref_mode == "mppt")
        sc.reference_mode = ReferenceMode::mppt;
    else if (ref_mode == "explicit")
        sc.reference_mode = ReferenceMode::explicit_schedule;
    else
        throw ScenarioError("run.reference_mode: expected mppt or explicit, got '" + ref_mode +
                            "'");
    const double ramp = run.number("reference_ramp", 0.0);
    if (ramp < 0.0)
        throw ScenarioError("run.reference_ramp: must be >= 0");
    sc.p_schedule = read_schedule(run, "p_schedule", ramp);
    sc.q_schedule = read_schedule(run, "q_schedule", ramp);
    if (sc.reference_mode == ReferenceMode::mppt && !sc.p_schedule.empty())
        throw ScenarioError("run.p_schedule: only valid with reference_mode = explicit");

    const std::string speed_mode = run.text("speed_mode", "free");
    if (speed_mode == "free")
        sc.speed_mode = SpeedMode::free;
    else if (speed_mode == "fixed")
        sc.speed_mode = SpeedMode::fixed;
    else
        throw ScenarioError("run.speed_mode: expected free or fixed, got '" + speed_mode + "'");

    sc.machine = read_machine(mach);
    checked("machine", [&] { sc.machine.validate(); });
    if (run.has("omega_r0") && run.has("initial_slip"))
        throw ScenarioError("run.initial_slip: give either omega_r0 or initial_slip, not both");
    if (run.has("initial_slip"))
        sc.omega_r0 = omega_r_at_slip(run.number("initial_slip"), sc.machine);
    else
        sc.omega_r0 = run.number("omega_r0");

    sc.turbine = read_turbine(turb);
    sc.wind = read_wind(wind, sc.seed);
    sc.gains = read_gains(gains);
    sc.converter = read_converter(conv);

    for (const Section* s : {&run, &mach, &turb, &wind, &gains, &conv})
        s->reject_unknown();

    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<Override>& overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), overrides);
}

}  // namespace cdfig
