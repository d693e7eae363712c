#include "flapopt/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "flapopt/kinematics.hpp"

namespace flapopt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError("not a boolean: " + v);
}

double parse_double(const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw ValidationError("not a number: " + v);
        return d;
    } catch (const std::logic_error&) {
        throw ValidationError("not a number: " + v);
    }
}

int parse_int(const std::string& v) {
    try {
        size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw ValidationError("not an integer: " + v);
        return i;
    } catch (const std::logic_error&) {
        throw ValidationError("not an integer: " + v);
    }
}

} // namespace

void RunConfig::set(const std::string& full_key, const std::string& value) {
    const auto dot = full_key.find('.');
    const std::string key = dot == std::string::npos ? full_key : full_key.substr(dot + 1);
    const std::string v = trim(value);

    if (key == "kappa") kappa = parse_double(v);
    else if (key == "omega") omega = parse_double(v);
    else if (key == "amplitude_deg") amplitude_deg = parse_double(v);
    else if (key == "pitch_deg") pitch_deg = parse_double(v);
    else if (key == "u_inf") u_inf = parse_double(v);
    else if (key == "rho") rho = parse_double(v);
    else if (key == "scheme") scheme = v;
    else if (key == "degree") degree = parse_int(v);
    else if (key == "semispan") semispan = parse_double(v);
    else if (key == "cambered") cambered = parse_bool(v);
    else if (key == "n_chord") n_chord = parse_int(v);
    else if (key == "n_span") n_span = parse_int(v);
    else if (key == "n_ts") n_ts = parse_int(v);
    else if (key == "cycles") cycles = parse_int(v);
    else if (key == "truncation_radius") truncation_radius = parse_double(v);
    else if (key == "core_radius") core_radius = parse_double(v);
    else if (key == "constraints") constraints = v;
    else if (key == "max_outer") max_outer = parse_int(v);
    else if (key == "max_inner") max_inner = parse_int(v);
    else if (key == "kkt_tol") kkt_tol = parse_double(v);
    else if (key == "step_tol") step_tol = parse_double(v);
    else if (key == "fd_step") fd_step = parse_double(v);
    else if (key == "theta_cr_deg") theta_cr_deg = parse_double(v);
    else if (key == "out_dir") out_dir = v;
    else if (key == "snapshot_stride") snapshot_stride = parse_int(v);
    else if (key == "workers") workers = parse_int(v);
    else throw ValidationError("unknown configuration key: " + full_key);
}

void RunConfig::validate() const {
    if (omega <= 0.0 && kappa <= 0.0)
        throw ValidationError("kinematics: either kappa or omega must be positive");
    if (u_inf <= 0.0) throw ValidationError("kinematics.u_inf must be positive");
    if (rho <= 0.0) throw ValidationError("kinematics.rho must be positive");
    if (!(amplitude_deg > 0.0 && amplitude_deg < 90.0))
        throw ValidationError("kinematics.amplitude_deg must lie in (0, 90)");
    dof_scheme();  // validates the scheme name
    if (degree < 1 || degree > 5) throw ValidationError("geometry.degree must be 1..5");
    if (semispan <= 0.0) throw ValidationError("geometry.semispan must be positive");
    if (n_chord < 1 || n_span < 1)
        throw ValidationError("discretization: mesh sizes must be at least 1");
    if (n_ts < 8) throw ValidationError("discretization.n_ts must be at least 8");
    if (cycles < 1) throw ValidationError("discretization.cycles must be at least 1");
    if (truncation_radius <= 0.0)
        throw ValidationError("discretization.truncation_radius must be positive");
    if (core_radius <= 0.0) throw ValidationError("discretization.core_radius must be positive");
    constraint_list();  // validates names
    if (max_outer < 1) throw ValidationError("optimizer.max_outer must be at least 1");
    if (fd_step <= 0.0) throw ValidationError("optimizer.fd_step must be positive");
    if (!(theta_cr_deg > 0.0)) throw ValidationError("optimizer.theta_cr_deg must be positive");
    if (snapshot_stride < 0) throw ValidationError("output.snapshot_stride must be >= 0");
    if (workers < 1) throw ValidationError("output.workers must be at least 1");
    motion().validate();
}

FlappingMotion RunConfig::motion() const {
    FlappingMotion m;
    m.amplitude = amplitude_deg * M_PI / 180.0;
    m.pitch = pitch_deg * M_PI / 180.0;
    m.u_inf = u_inf;
    m.rho = rho;
    m.omega = omega > 0.0 ? omega : omega_for_reduced_frequency(kappa, u_inf, kBaselineChord);
    return m;
}

EvalSettings RunConfig::eval_settings() const {
    EvalSettings s;
    s.motion = motion();
    s.n_chord = n_chord;
    s.n_span = n_span;
    s.n_ts = n_ts;
    s.cycles = cycles;
    s.truncation_radius = truncation_radius;
    s.core_radius = core_radius;
    s.workers = workers;
    return s;
}

DofScheme RunConfig::dof_scheme() const {
    if (scheme == "baseline") return DofScheme::Baseline;
    if (scheme == "single-knot-span" || scheme == "sks") return DofScheme::SingleKnotSpan;
    if (scheme == "fixed12") return DofScheme::Fixed12;
    if (scheme == "camber") return DofScheme::Camber;
    if (scheme == "le-only") return DofScheme::LeadingOnly;
    if (scheme == "te-only") return DofScheme::TrailingOnly;
    throw ValidationError("geometry.scheme: unknown scheme '" + scheme + "'");
}

WingParametrization RunConfig::wing() const {
    return baseline_wing(dof_scheme(), degree, semispan, cambered);
}

std::vector<std::string> RunConfig::constraint_list() const {
    std::vector<std::string> out;
    std::stringstream ss(constraints);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item != "lift" && item != "thrust" && item != "area" && item != "power" &&
            item != "angle")
            throw ValidationError("optimizer.constraints: unknown constraint '" + item + "'");
        out.push_back(item);
    }
    return out;
}

bool RunConfig::power_constrained() const {
    const auto list = constraint_list();
    return std::find(list.begin(), list.end(), "power") != list.end();
}

void merge_config_stream(RunConfig& config, std::istream& is) {
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        config.set(section.empty() ? key : section + "." + key, value);
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config file " + path);
    RunConfig config;
    merge_config_stream(config, is);
    return config;
}

} // namespace flapopt
