#include "ekrelax/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "ekrelax/equilibrium_solver.hpp"
#include "ekrelax/errors.hpp"

namespace ekrelax {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        out.push_back(trim(item));
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    int v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
    return v;
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// "0.1", "eps^3" or "0.5*eps^2"
NuSpec parse_nu(const std::string& key, const std::string& text) {
    NuSpec spec;
    const auto at = text.find("eps^");
    if (at == std::string::npos) {
        spec.value = parse_double(key, text);
        return spec;
    }
    spec.eps_power = true;
    spec.power = parse_double(key, trim(text.substr(at + 4)));
    const std::string head = trim(text.substr(0, at));
    if (!head.empty()) {
        if (head.back() != '*') {
            throw ConfigError(key + ": expected c*eps^p, got '" + text + "'");
        }
        spec.coeff = parse_double(key, trim(head.substr(0, head.size() - 1)));
    }
    return spec;
}

PowerLawCoefficient parse_power_law(const std::string& key, const std::string& text) {
    const auto parts = split_list(text);
    if (parts.size() != 2) {
        throw ConfigError(key + ": expected 'coeff, exponent', got '" + text + "'");
    }
    return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

}  // namespace

double NuSpec::at(double eps) const { return eps_power ? coeff * std::pow(eps, power) : value; }

std::string NuSpec::label() const {
    if (!eps_power) {
        return fmt(value);
    }
    return coeff == 1.0 ? "eps^" + fmt(power) : fmt(coeff) + "*eps^" + fmt(power);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "model.type",          "fluid.gamma",          "fluid.s",
        "fluid.nu",            "fluid.lame",           "fluid.lame_mu",
        "fluid.lame_lambda",   "sweep.epsilon",        "sweep.workers",
        "grid.n",              "grid.length",          "ic.rho_mean",
        "ic.amplitude",        "ic.wavenumber",        "ic.delta",
        "ic.prepared",         "time.t_final",         "time.outputs",
        "solver.cfl_advective", "solver.cfl_dispersive", "solver.cfl_viscous",
        "solver.dt_max",       "solver.scheme",        "equilibrium.refine",
        "equilibrium.levels",  "equilibrium.substeps", "equilibrium.margin",
        "tol.slack",           "out.dir",
    };
    return keys;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "model.type") {
        if (value == "ek") {
            c.model = ModelType::ek;
        } else if (value == "nsk") {
            c.model = ModelType::nsk;
        } else {
            throw ConfigError("model.type: expected ek or nsk, got '" + value + "'");
        }
    } else if (key == "fluid.gamma") {
        c.gamma = parse_double(key, value);
    } else if (key == "fluid.s") {
        c.s = parse_double(key, value);
    } else if (key == "fluid.nu") {
        c.nu.clear();
        for (const auto& item : split_list(value)) {
            c.nu.push_back(parse_nu(key, item));
        }
    } else if (key == "fluid.lame") {
        if (value == "capillarity") {
            c.lame_mode = LameMode::match_capillarity;
        } else if (value == "custom") {
            c.lame_mode = LameMode::custom;
        } else {
            throw ConfigError("fluid.lame: expected capillarity or custom, got '" + value + "'");
        }
    } else if (key == "fluid.lame_mu") {
        c.lame_mu = parse_power_law(key, value);
    } else if (key == "fluid.lame_lambda") {
        c.lame_lambda = parse_power_law(key, value);
    } else if (key == "sweep.epsilon") {
        c.epsilon.clear();
        for (const auto& item : split_list(value)) {
            c.epsilon.push_back(parse_double(key, item));
        }
    } else if (key == "sweep.workers") {
        c.workers = parse_int(key, value);
    } else if (key == "grid.n") {
        c.n = parse_int(key, value);
    } else if (key == "grid.length") {
        c.length = value == "2pi" ? 2.0 * std::numbers::pi : parse_double(key, value);
    } else if (key == "ic.rho_mean") {
        c.rho_mean = parse_double(key, value);
    } else if (key == "ic.amplitude") {
        c.amplitude = parse_double(key, value);
    } else if (key == "ic.wavenumber") {
        c.wavenumber = parse_int(key, value);
    } else if (key == "ic.delta") {
        c.delta = parse_double(key, value);
    } else if (key == "ic.prepared") {
        if (value == "well") {
            c.prepared = Preparation::well;
        } else if (value == "ill") {
            c.prepared = Preparation::ill;
        } else {
            throw ConfigError("ic.prepared: expected well or ill, got '" + value + "'");
        }
    } else if (key == "time.t_final") {
        c.t_final = parse_double(key, value);
    } else if (key == "time.outputs") {
        c.outputs = parse_int(key, value);
    } else if (key == "solver.cfl_advective") {
        c.cfl_advective = parse_double(key, value);
    } else if (key == "solver.cfl_dispersive") {
        c.cfl_dispersive = parse_double(key, value);
    } else if (key == "solver.cfl_viscous") {
        c.cfl_viscous = parse_double(key, value);
    } else if (key == "solver.dt_max") {
        c.dt_max = parse_double(key, value);
    } else if (key == "solver.scheme") {
        if (value == "integrating_factor") {
            c.scheme = StepScheme::integrating_factor;
        } else if (value == "strang") {
            c.scheme = StepScheme::strang;
        } else {
            throw ConfigError("solver.scheme: expected integrating_factor or strang, got '" + value + "'");
        }
    } else if (key == "equilibrium.refine") {
        c.equilibrium_refine = parse_int(key, value);
    } else if (key == "equilibrium.levels") {
        c.equilibrium_levels = parse_int(key, value);
    } else if (key == "equilibrium.substeps") {
        c.equilibrium_substeps = parse_int(key, value);
    } else if (key == "equilibrium.margin") {
        c.equilibrium_margin = parse_double(key, value);
    } else if (key == "tol.slack") {
        c.tol_slack = parse_double(key, value);
    } else if (key == "out.dir") {
        if (value.empty()) {
            throw ConfigError("out.dir: empty path");
        }
        c.out_dir = value;
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

void ExperimentConfig::validate() const {
    std::ostringstream os;
    if (epsilon.empty()) {
        os << "sweep.epsilon is empty";
    } else if (std::any_of(epsilon.begin(), epsilon.end(), [](double e) { return !(e > 0.0); })) {
        os << "sweep.epsilon entries must be > 0";
    } else if (!std::is_sorted(epsilon.begin(), epsilon.end(), std::greater<>())) {
        os << "sweep.epsilon must be in descending order";
    } else if (nu.empty()) {
        os << "fluid.nu is empty";
    } else if (workers < 0) {
        os << "sweep.workers must be >= 0";
    } else if (!(amplitude >= 0.0)) {
        os << "ic.amplitude must be >= 0";
    } else if (!(delta > 0.0) || !(rho_mean - amplitude >= delta)) {
        os << "ic.rho_mean - ic.amplitude must be >= ic.delta > 0 (got " << rho_mean - amplitude << ")";
    } else if (wavenumber < 1) {
        os << "ic.wavenumber must be >= 1";
    } else if (2 * wavenumber > n / 3) {
        os << "ic.wavenumber " << wavenumber << " not resolved on grid.n = " << n;
    } else if (!(t_final > 0.0)) {
        os << "time.t_final must be > 0";
    } else if (outputs < 1) {
        os << "time.outputs must be >= 1";
    } else if (!(dt_max >= 0.0)) {
        os << "solver.dt_max must be >= 0";
    } else if (equilibrium_refine < 1) {
        os << "equilibrium.refine must be >= 1";
    } else if (outputs * equilibrium_refine < 3) {
        os << "time.outputs * equilibrium.refine must be >= 3";
    } else if (!(tol_slack > 0.0)) {
        os << "tol.slack must be > 0";
    }
    for (const auto& spec : nu) {
        if (!os.str().empty()) {
            break;
        }
        if (model == ModelType::ek && (spec.eps_power || spec.value != 0.0)) {
            os << "model.type = ek requires fluid.nu = 0";
        } else if (model == ModelType::nsk && !(spec.eps_power ? spec.coeff > 0.0 : spec.value > 0.0)) {
            os << "model.type = nsk requires fluid.nu > 0 for every series";
        }
    }
    if (!os.str().empty()) {
        throw ConfigError(os.str());
    }
    // grid, fluid and solver checks with the first sweep entry
    const TorusGrid grid(n, length);
    fluid(epsilon.front(), nu.front().at(epsilon.front())).validate();
    SolverConfig sc;
    sc.params = fluid(epsilon.front(), nu.front().at(epsilon.front()));
    sc.grid = grid;
    sc.t_final = t_final;
    sc.n_outputs = outputs;
    sc.cfl_advective = cfl_advective;
    sc.cfl_dispersive = cfl_dispersive;
    sc.cfl_viscous = cfl_viscous;
    sc.validate();
    EquilibriumConfig ec;
    ec.params = sc.params;
    ec.grid = grid;
    ec.t_final = t_final;
    ec.n_outputs = outputs * equilibrium_refine;
    ec.margin = equilibrium_margin;
    ec.base_substeps = equilibrium_substeps;
    ec.richardson_levels = equilibrium_levels;
    ec.validate();
}

FluidParams ExperimentConfig::fluid(double eps, double nu_value) const {
    FluidParams p;
    p.gamma = gamma;
    p.s = s;
    p.epsilon = eps;
    p.nu = nu_value;
    p.lame_mode = lame_mode;
    p.lame_mu = lame_mu;
    p.lame_lambda = lame_lambda;
    return p;
}

Field ExperimentConfig::initial_density() const {
    const TorusGrid grid(n, length);
    const double k = 2.0 * std::numbers::pi * wavenumber / length;
    const double r = rho_mean;
    const double a = amplitude;
    return Field::from_function(grid, [=](double x) { return r + a * std::cos(k * x); });
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        if (!seen.insert(key).second) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": repeated key '" + key + "'");
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_key_values(text.str(), path);
}

ExperimentConfig load_config(const std::string& path) {
    ExperimentConfig c;
    for (const auto& [key, value] : read_key_values(path)) {
        try {
            apply_setting(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
    return c;
}

std::string render_config(const ExperimentConfig& c) {
    auto join = [](const auto& items, auto&& f) {
        std::string s;
        for (std::size_t i = 0; i < items.size(); ++i) {
            s += (i ? ", " : "") + f(items[i]);
        }
        return s;
    };
    std::ostringstream os;
    os << "model.type = " << (c.model == ModelType::ek ? "ek" : "nsk") << '\n'
       << "fluid.gamma = " << fmt(c.gamma) << '\n'
       << "fluid.s = " << fmt(c.s) << '\n'
       << "fluid.nu = " << join(c.nu, [](const NuSpec& n) { return n.label(); }) << '\n'
       << "fluid.lame = " << (c.lame_mode == LameMode::custom ? "custom" : "capillarity") << '\n'
       << "fluid.lame_mu = " << fmt(c.lame_mu.coeff) << ", " << fmt(c.lame_mu.exponent) << '\n'
       << "fluid.lame_lambda = " << fmt(c.lame_lambda.coeff) << ", " << fmt(c.lame_lambda.exponent) << '\n'
       << "sweep.epsilon = " << join(c.epsilon, [](double e) { return fmt(e); }) << '\n'
       << "sweep.workers = " << c.workers << '\n'
       << "grid.n = " << c.n << '\n'
       << "grid.length = " << fmt(c.length) << '\n'
       << "ic.rho_mean = " << fmt(c.rho_mean) << '\n'
       << "ic.amplitude = " << fmt(c.amplitude) << '\n'
       << "ic.wavenumber = " << c.wavenumber << '\n'
       << "ic.delta = " << fmt(c.delta) << '\n'
       << "ic.prepared = " << (c.prepared == Preparation::well ? "well" : "ill") << '\n'
       << "time.t_final = " << fmt(c.t_final) << '\n'
       << "time.outputs = " << c.outputs << '\n'
       << "solver.cfl_advective = " << fmt(c.cfl_advective) << '\n'
       << "solver.cfl_dispersive = " << fmt(c.cfl_dispersive) << '\n'
       << "solver.cfl_viscous = " << fmt(c.cfl_viscous) << '\n'
       << "solver.dt_max = " << fmt(c.dt_max) << '\n'
       << "solver.scheme = " << (c.scheme == StepScheme::strang ? "strang" : "integrating_factor") << '\n'
       << "equilibrium.refine = " << c.equilibrium_refine << '\n'
       << "equilibrium.levels = " << c.equilibrium_levels << '\n'
       << "equilibrium.substeps = " << c.equilibrium_substeps << '\n'
       << "equilibrium.margin = " << fmt(c.equilibrium_margin) << '\n'
       << "tol.slack = " << fmt(c.tol_slack) << '\n'
       << "out.dir = " << c.out_dir << '\n';
    return os.str();
}

}  // namespace ekrelax
