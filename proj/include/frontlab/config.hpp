#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "frontlab/dynamics.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/nonlocal_ops.hpp"

namespace frontlab {

using json = nlohmann::json;

struct grid_config {
    double dx = 0.0;
    double x_max = 0.0;
};

struct time_config {
    double horizon = 0.0;
    double dt = 0.0;        // explicit step; 0 derives it from the stability bound
    double dt_factor = 0.9;
    double log_dt = 0.0;    // 0 picks horizon/400
};

struct initial_config {
    double h0 = 0.0;
    std::string u_shape = "constant";  // constant
    double u_amplitude = 0.0;
    std::string v_shape = "bump";      // bump | cosine | plateau
    double v_amplitude = 0.0;
};

struct output_config {
    bool snapshots = false;
    bool plot_script = false;
};

struct eigen_config {
    std::vector<double> lengths;
    double dx_target = 0.0;
};

struct critical_length_config {
    double lambda_tol = 1e-6;
    double dx_target = 0.0;
};

struct speed_config {
    std::string field = "v";  // v: (j2, d2, r2);  u: (j1, d1, r1*a)
};

struct semiwave_config {
    std::string field = "v";
    double truncation = 0.0;
    double dx = 0.0;
    double psi_tol = 1e-6;
    bool refine_truncation = true;
};

struct critical_mu_config {
    double mu_lo = 0.05;
    double mu_hi = 5.0;
    double rel_tol = 0.01;
    double horizon = 200.0;
    double horizon_cap = 4.0;
};

struct sweep_config {
    std::string parameter;  // one of: mu d1 d2 r1 r2 a b c h0 u_amplitude v_amplitude
    std::vector<double> values;
};

struct compare_config {
    double factor = 1.2;        // the larger run scales both initial fields by this
    double front_offset = 0.0;  // and starts its front this much further out
};

struct experiment_config {
    mass_mode mode = mass_mode::half_line;
    model_params params;
    grid_config grid_c;
    time_config time_c;
    initial_config initial_c;
    std::vector<double> probes;
    conv_backend backend = conv_backend::direct;
    output_config output_c;
    eigen_config eigen_c;
    critical_length_config critical_length_c;
    speed_config speed_c;
    semiwave_config semiwave_c;
    critical_mu_config critical_mu_c;
    std::optional<sweep_config> sweep_c;
    compare_config compare_c;
    json echo;  // the fully materialized configuration, defaults included
};

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) {
        throw config_error("missing required field: " + join_path(path, key));
    }
    return j.at(key);
}

inline double need_number(const json& j, const std::string& key,
                          const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) {
        throw config_error(join_path(path, key) + " must be a number");
    }
    return v.get<double>();
}

inline double opt_number(const json& j, const std::string& key, double fallback,
                         const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw config_error(join_path(path, key) + " must be a number");
    }
    return v.get<double>();
}

inline bool opt_bool(const json& j, const std::string& key, bool fallback,
                     const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
        throw config_error(join_path(path, key) + " must be a boolean");
    }
    return v.get<bool>();
}

inline std::string opt_string(const json& j, const std::string& key,
                              const std::string& fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) {
        throw config_error(join_path(path, key) + " must be a string");
    }
    return v.get<std::string>();
}

inline void check_positive(double x, const std::string& path) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw config_error(path + " must be positive and finite");
    }
}

inline kernel_spec parse_kernel(const json& j, const std::string& path) {
    const std::string family = opt_string(j, "family", "", path);
    if (family.empty()) {
        throw config_error("missing required field: " + join_path(path, "family"));
    }
    if (family == "triangle") {
        const double radius = need_number(j, "radius", path);
        check_positive(radius, join_path(path, "radius"));
        return kernel_spec::triangle(radius);
    }
    if (family == "laplace") {
        const double scale = need_number(j, "scale", path);
        check_positive(scale, join_path(path, "scale"));
        return kernel_spec::laplace(scale);
    }
    if (family == "gaussian") {
        const double scale = need_number(j, "scale", path);
        check_positive(scale, join_path(path, "scale"));
        return kernel_spec::gaussian(scale);
    }
    if (family == "algebraic") {
        const double gamma = need_number(j, "gamma", path);
        if (!(gamma > 1.0)) {
            throw config_error(join_path(path, "gamma") +
                               " must exceed 1 for an integrable tail");
        }
        const double shift = opt_number(j, "shift", 1.0, path);
        check_positive(shift, join_path(path, "shift"));
        return kernel_spec::algebraic(gamma, shift);
    }
    if (family == "tabulated") {
        const json& xs = need(j, "x", path);
        const json& ys = need(j, "y", path);
        if (!xs.is_array() || !ys.is_array()) {
            throw config_error(join_path(path, "x") + " and " + join_path(path, "y") +
                               " must be arrays");
        }
        std::vector<double> x, y;
        for (const auto& e : xs) x.push_back(e.get<double>());
        for (const auto& e : ys) y.push_back(e.get<double>());
        const bool j1 = opt_bool(j, "declares_j1", true, path);
        const bool j2 = opt_bool(j, "declares_j2", false, path);
        try {
            return kernel_spec::tabulated(x, y, j1, j2);
        } catch (const error& e) {
            throw config_error(path + ": " + e.what());
        }
    }
    throw config_error(join_path(path, "family") + " must be one of: triangle, " +
                       "laplace, gaussian, algebraic, tabulated (got \"" + family +
                       "\")");
}

inline json kernel_echo(const kernel_spec& k) {
    json j;
    j["family"] = kernel_family_name(k.family());
    switch (k.family()) {
        case kernel_family::triangle: j["radius"] = k.param1(); break;
        case kernel_family::laplace:
        case kernel_family::gaussian: j["scale"] = k.param1(); break;
        case kernel_family::algebraic:
            j["gamma"] = k.param1();
            j["shift"] = k.param2();
            break;
        case kernel_family::tabulated:
            j["declares_j1"] = k.satisfies_j1();
            j["declares_j2"] = k.satisfies_j2();
            j["samples"] = k.sample_count();
            break;
    }
    return j;
}

}  // namespace detail

inline experiment_config parse_config(const json& root) {
    using namespace detail;
    if (!root.is_object()) throw config_error("configuration must be a JSON object");

    experiment_config cfg;

    const std::string mode = opt_string(root, "mode", "half_line", "");
    if (mode == "half_line") {
        cfg.mode = mass_mode::half_line;
    } else if (mode == "whole_line") {
        cfg.mode = mass_mode::whole_line;
    } else {
        throw config_error("mode must be \"half_line\" or \"whole_line\"");
    }

    const json& params = need(root, "params", "");
    cfg.params.d1 = need_number(params, "d1", "params");
    cfg.params.d2 = need_number(params, "d2", "params");
    cfg.params.r1 = need_number(params, "r1", "params");
    cfg.params.r2 = need_number(params, "r2", "params");
    cfg.params.a = need_number(params, "a", "params");
    cfg.params.b = need_number(params, "b", "params");
    cfg.params.c = need_number(params, "c", "params");
    cfg.params.mu = need_number(params, "mu", "params");
    for (const char* f : {"d1", "d2", "r1", "r2", "a", "b", "c", "mu"}) {
        check_positive(params.at(f).get<double>(), std::string("params.") + f);
    }

    const json& kernels = need(root, "kernels", "");
    cfg.params.j1 = parse_kernel(need(kernels, "j1", "kernels"), "kernels.j1");
    cfg.params.j2 = parse_kernel(need(kernels, "j2", "kernels"), "kernels.j2");

    const json& gridj = need(root, "grid", "");
    cfg.grid_c.dx = need_number(gridj, "dx", "grid");
    cfg.grid_c.x_max = need_number(gridj, "x_max", "grid");
    check_positive(cfg.grid_c.dx, "grid.dx");
    check_positive(cfg.grid_c.x_max, "grid.x_max");
    if (cfg.grid_c.x_max / cfg.grid_c.dx > 4.0e6) {
        throw config_error("grid.x_max / grid.dx exceeds the node-count cap");
    }
    const double scale2 = cfg.params.j2.length_scale();
    if (cfg.grid_c.dx > 0.5 * scale2) {
        throw config_error(
            "grid.dx must resolve the dispersal kernel (at most half its length scale)");
    }

    const json& timej = need(root, "time", "");
    cfg.time_c.horizon = need_number(timej, "horizon", "time");
    check_positive(cfg.time_c.horizon, "time.horizon");
    cfg.time_c.dt = opt_number(timej, "dt", 0.0, "time");
    cfg.time_c.dt_factor = opt_number(timej, "dt_factor", 0.9, "time");
    cfg.time_c.log_dt = opt_number(timej, "log_dt", 0.0, "time");
    if (cfg.time_c.dt < 0.0 || cfg.time_c.log_dt < 0.0) {
        throw config_error("time.dt and time.log_dt must be nonnegative");
    }
    if (!(cfg.time_c.dt_factor > 0.0) || cfg.time_c.dt_factor > 1.0) {
        throw config_error("time.dt_factor must lie in (0, 1]");
    }

    const json& init = need(root, "initial", "");
    cfg.initial_c.h0 = need_number(init, "h0", "initial");
    check_positive(cfg.initial_c.h0, "initial.h0");
    if (!(cfg.initial_c.h0 < cfg.grid_c.x_max)) {
        throw config_error("initial.h0 must lie inside grid.x_max");
    }
    const json& uj = need(init, "u", "initial");
    cfg.initial_c.u_shape = opt_string(uj, "shape", "constant", "initial.u");
    if (cfg.initial_c.u_shape != "constant") {
        throw config_error("initial.u.shape must be \"constant\"");
    }
    cfg.initial_c.u_amplitude = need_number(uj, "amplitude", "initial.u");
    check_positive(cfg.initial_c.u_amplitude, "initial.u.amplitude");
    const json& vj = need(init, "v", "initial");
    cfg.initial_c.v_shape = opt_string(vj, "shape", "bump", "initial.v");
    if (cfg.initial_c.v_shape != "bump" && cfg.initial_c.v_shape != "cosine" &&
        cfg.initial_c.v_shape != "plateau") {
        throw config_error("initial.v.shape must be \"bump\", \"cosine\" or \"plateau\"");
    }
    cfg.initial_c.v_amplitude = need_number(vj, "amplitude", "initial.v");
    check_positive(cfg.initial_c.v_amplitude, "initial.v.amplitude");

    if (root.contains("probes")) {
        const json& pj = root.at("probes");
        if (!pj.is_array()) throw config_error("probes must be an array of positions");
        for (const auto& e : pj) {
            if (!e.is_number()) throw config_error("probes must be numbers");
            cfg.probes.push_back(e.get<double>());
        }
    }

    const std::string backend = opt_string(root, "backend", "direct", "");
    if (backend == "direct") {
        cfg.backend = conv_backend::direct;
    } else if (backend == "fft") {
        cfg.backend = conv_backend::fft;
    } else {
        throw config_error("backend must be \"direct\" or \"fft\"");
    }

    if (root.contains("output")) {
        const json& oj = root.at("output");
        cfg.output_c.snapshots = opt_bool(oj, "snapshots", false, "output");
        cfg.output_c.plot_script = opt_bool(oj, "plot_script", false, "output");
    }

    if (root.contains("eigen")) {
        const json& ej = root.at("eigen");
        cfg.eigen_c.dx_target = opt_number(ej, "dx_target", 0.0, "eigen");
        if (ej.contains("lengths")) {
            const json& ls = ej.at("lengths");
            if (!ls.is_array() || ls.empty()) {
                throw config_error("eigen.lengths must be a nonempty array");
            }
            for (const auto& e : ls) {
                const double l = e.get<double>();
                check_positive(l, "eigen.lengths[]");
                cfg.eigen_c.lengths.push_back(l);
            }
        }
    }

    if (root.contains("critical_length")) {
        const json& cj = root.at("critical_length");
        cfg.critical_length_c.lambda_tol =
            opt_number(cj, "lambda_tol", 1e-6, "critical_length");
        cfg.critical_length_c.dx_target =
            opt_number(cj, "dx_target", 0.0, "critical_length");
        check_positive(cfg.critical_length_c.lambda_tol, "critical_length.lambda_tol");
    }

    if (root.contains("speed")) {
        cfg.speed_c.field = opt_string(root.at("speed"), "field", "v", "speed");
        if (cfg.speed_c.field != "u" && cfg.speed_c.field != "v") {
            throw config_error("speed.field must be \"u\" or \"v\"");
        }
    }

    if (root.contains("semiwave")) {
        const json& sj = root.at("semiwave");
        cfg.semiwave_c.field = opt_string(sj, "field", "v", "semiwave");
        if (cfg.semiwave_c.field != "u" && cfg.semiwave_c.field != "v") {
            throw config_error("semiwave.field must be \"u\" or \"v\"");
        }
        cfg.semiwave_c.truncation = opt_number(sj, "truncation", 0.0, "semiwave");
        cfg.semiwave_c.dx = opt_number(sj, "dx", 0.0, "semiwave");
        cfg.semiwave_c.psi_tol = opt_number(sj, "psi_tol", 1e-6, "semiwave");
        cfg.semiwave_c.refine_truncation =
            opt_bool(sj, "refine_truncation", true, "semiwave");
        check_positive(cfg.semiwave_c.psi_tol, "semiwave.psi_tol");
    }

    if (root.contains("critical_mu")) {
        const json& mj = root.at("critical_mu");
        cfg.critical_mu_c.mu_lo = opt_number(mj, "mu_lo", 0.05, "critical_mu");
        cfg.critical_mu_c.mu_hi = opt_number(mj, "mu_hi", 5.0, "critical_mu");
        cfg.critical_mu_c.rel_tol = opt_number(mj, "rel_tol", 0.01, "critical_mu");
        cfg.critical_mu_c.horizon = opt_number(mj, "horizon", 200.0, "critical_mu");
        cfg.critical_mu_c.horizon_cap = opt_number(mj, "horizon_cap", 4.0, "critical_mu");
        check_positive(cfg.critical_mu_c.mu_lo, "critical_mu.mu_lo");
        check_positive(cfg.critical_mu_c.rel_tol, "critical_mu.rel_tol");
        check_positive(cfg.critical_mu_c.horizon, "critical_mu.horizon");
        if (!(cfg.critical_mu_c.mu_hi > cfg.critical_mu_c.mu_lo)) {
            throw config_error("critical_mu.mu_hi must exceed critical_mu.mu_lo");
        }
        if (!(cfg.critical_mu_c.horizon_cap >= 1.0)) {
            throw config_error("critical_mu.horizon_cap must be at least 1");
        }
    }

    if (root.contains("sweep")) {
        const json& sj = root.at("sweep");
        sweep_config sw;
        sw.parameter = opt_string(sj, "parameter", "", "sweep");
        static const std::vector<std::string> allowed = {
            "mu", "d1", "d2", "r1", "r2", "a", "b", "c",
            "h0", "u_amplitude", "v_amplitude"};
        if (std::find(allowed.begin(), allowed.end(), sw.parameter) == allowed.end()) {
            throw config_error("sweep.parameter must name a model or initial scalar");
        }
        const json& vs = need(sj, "values", "sweep");
        if (!vs.is_array() || vs.empty()) {
            throw config_error("sweep.values must be a nonempty array");
        }
        for (const auto& e : vs) {
            const double x = e.get<double>();
            check_positive(x, "sweep.values[]");
            sw.values.push_back(x);
        }
        cfg.sweep_c = std::move(sw);
    }

    if (root.contains("compare")) {
        const json& cj = root.at("compare");
        cfg.compare_c.factor = opt_number(cj, "factor", 1.2, "compare");
        cfg.compare_c.front_offset = opt_number(cj, "front_offset", 0.0, "compare");
        if (!(cfg.compare_c.factor >= 1.0)) {
            throw config_error("compare.factor must be at least 1");
        }
        if (cfg.compare_c.front_offset < 0.0) {
            throw config_error("compare.front_offset must be nonnegative");
        }
        if (cfg.initial_c.h0 + cfg.compare_c.front_offset >= cfg.grid_c.x_max) {
            throw config_error("compare.front_offset pushes the front outside the grid");
        }
    }

    // Echo with every default materialized; nlohmann objects iterate in key
    // order, so dumping this is deterministic.
    json echo;
    echo["mode"] = mode;
    echo["params"] = {{"d1", cfg.params.d1}, {"d2", cfg.params.d2},
                      {"r1", cfg.params.r1}, {"r2", cfg.params.r2},
                      {"a", cfg.params.a},   {"b", cfg.params.b},
                      {"c", cfg.params.c},   {"mu", cfg.params.mu}};
    echo["kernels"] = {{"j1", detail::kernel_echo(cfg.params.j1)},
                       {"j2", detail::kernel_echo(cfg.params.j2)}};
    echo["grid"] = {{"dx", cfg.grid_c.dx}, {"x_max", cfg.grid_c.x_max}};
    echo["time"] = {{"horizon", cfg.time_c.horizon},
                    {"dt", cfg.time_c.dt},
                    {"dt_factor", cfg.time_c.dt_factor},
                    {"log_dt", cfg.time_c.log_dt}};
    echo["initial"] = {
        {"h0", cfg.initial_c.h0},
        {"u", {{"shape", cfg.initial_c.u_shape}, {"amplitude", cfg.initial_c.u_amplitude}}},
        {"v", {{"shape", cfg.initial_c.v_shape}, {"amplitude", cfg.initial_c.v_amplitude}}}};
    echo["probes"] = cfg.probes;
    echo["backend"] = backend;
    echo["output"] = {{"snapshots", cfg.output_c.snapshots},
                      {"plot_script", cfg.output_c.plot_script}};
    echo["eigen"] = {{"dx_target", cfg.eigen_c.dx_target}};
    // an empty lengths list means "use the built-in ladder"; the parser
    // refuses an explicit empty array, so only echo the field when set
    if (!cfg.eigen_c.lengths.empty()) echo["eigen"]["lengths"] = cfg.eigen_c.lengths;
    echo["critical_length"] = {{"lambda_tol", cfg.critical_length_c.lambda_tol},
                               {"dx_target", cfg.critical_length_c.dx_target}};
    echo["speed"] = {{"field", cfg.speed_c.field}};
    echo["semiwave"] = {{"field", cfg.semiwave_c.field},
                        {"truncation", cfg.semiwave_c.truncation},
                        {"dx", cfg.semiwave_c.dx},
                        {"psi_tol", cfg.semiwave_c.psi_tol},
                        {"refine_truncation", cfg.semiwave_c.refine_truncation}};
    echo["critical_mu"] = {{"mu_lo", cfg.critical_mu_c.mu_lo},
                           {"mu_hi", cfg.critical_mu_c.mu_hi},
                           {"rel_tol", cfg.critical_mu_c.rel_tol},
                           {"horizon", cfg.critical_mu_c.horizon},
                           {"horizon_cap", cfg.critical_mu_c.horizon_cap}};
    if (cfg.sweep_c) {
        echo["sweep"] = {{"parameter", cfg.sweep_c->parameter},
                         {"values", cfg.sweep_c->values}};
    }
    echo["compare"] = {{"factor", cfg.compare_c.factor},
                       {"front_offset", cfg.compare_c.front_offset}};
    cfg.echo = std::move(echo);
    return cfg;
}

inline experiment_config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error("config file is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

/// Materialize the initial fields on a grid. u is a constant; v is one of a
/// few standard shapes vanishing at the front(s), centered on [0, h0) for the
/// half-line and on (-h0, h0) for the whole line.
inline std::vector<double> build_initial_u(const experiment_config& cfg, const grid& g) {
    return std::vector<double>(g.n, cfg.initial_c.u_amplitude);
}

inline std::vector<double> build_initial_v(const experiment_config& cfg, const grid& g) {
    std::vector<double> v(g.n, 0.0);
    const double h0 = cfg.initial_c.h0;
    const double amp = cfg.initial_c.v_amplitude;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        const double r = cfg.mode == mass_mode::half_line ? x : std::abs(x);
        if (cfg.mode == mass_mode::half_line && x < 0.0) continue;
        if (r >= h0) continue;
        const double s = r / h0;
        double val = 0.0;
        if (cfg.initial_c.v_shape == "bump") {
            val = amp * (1.0 - s * s);
        } else if (cfg.initial_c.v_shape == "cosine") {
            val = amp * std::cos(0.5 * std::numbers::pi * s);
        } else {  // plateau: flat to 3/4 of the span, then linear to 0
            val = amp * std::min(1.0, 4.0 * (1.0 - s));
        }
        v[i] = std::max(val, 0.0);
    }
    return v;
}

inline grid build_grid(const experiment_config& cfg) {
    return cfg.mode == mass_mode::half_line
               ? grid::half_line(cfg.grid_c.dx, cfg.grid_c.x_max)
               : grid::symmetric(cfg.grid_c.dx, cfg.grid_c.x_max);
}

}  // namespace frontlab
