#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "frontlab/analysis.hpp"
#include "frontlab/config.hpp"
#include "frontlab/dynamics.hpp"
#include "frontlab/io.hpp"
#include "frontlab/spectral.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

struct run_context {
    std::filesystem::path out_dir = "out";
    std::size_t workers = 1;
    bool seedless = false;
};

namespace detail {

inline double pick_log_dt(const experiment_config& cfg, double horizon) {
    return cfg.time_c.log_dt > 0.0 ? cfg.time_c.log_dt : horizon / 400.0;
}

inline front_sim_options sim_options(const experiment_config& cfg, double dt_override) {
    front_sim_options opt;
    opt.dt_override = dt_override > 0.0 ? dt_override : cfg.time_c.dt;
    opt.dt_factor = cfg.time_c.dt_factor;
    opt.backend = cfg.backend;
    return opt;
}

// One full simulation for the given configuration; mu_override >= 0 replaces
// params.mu, horizon_override > 0 replaces time.horizon.
inline front_trajectory run_one(const experiment_config& cfg, double mu_override,
                                double horizon_override, bool snapshots,
                                double dt_override) {
    experiment_config c = cfg;
    if (mu_override >= 0.0) c.params.mu = mu_override;
    const double horizon =
        horizon_override > 0.0 ? horizon_override : c.time_c.horizon;
    const grid g = build_grid(c);
    auto u0 = build_initial_u(c, g);
    auto v0 = build_initial_v(c, g);
    const auto opt = sim_options(c, dt_override);
    if (c.mode == mass_mode::half_line) {
        single_front_stepper st(c.params, g, std::move(u0), std::move(v0),
                                c.initial_c.h0, opt);
        return run_front_simulation(st, horizon, pick_log_dt(c, horizon), c.probes,
                                    snapshots);
    }
    double_front_stepper st(c.params, g, std::move(u0), std::move(v0),
                            -c.initial_c.h0, c.initial_c.h0, opt);
    return run_front_simulation(st, horizon, pick_log_dt(c, horizon), c.probes,
                                snapshots);
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const front_trajectory& traj,
                                 const std::vector<double>& probes) {
    std::vector<std::string> header = {"t", "h", "g", "sup_u", "sup_v"};
    for (std::size_t k = 0; k < probes.size(); ++k) {
        header.push_back("u_at_" + format_double(probes[k]));
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
        header.push_back("v_at_" + format_double(probes[k]));
    }
    csv_writer csv(path, header);
    std::vector<double> row;
    for (const auto& r : traj.records) {
        row.clear();
        row.insert(row.end(), {r.t, r.h, r.g, r.sup_u, r.sup_v});
        row.insert(row.end(), r.u_probe.begin(), r.u_probe.end());
        row.insert(row.end(), r.v_probe.begin(), r.v_probe.end());
        csv.row(row);
    }
}

inline void write_state_csv(const std::filesystem::path& path, const grid& g,
                            const std::vector<double>& u,
                            const std::vector<double>& v) {
    csv_writer csv(path, {"x", "u", "v"});
    for (std::size_t i = 0; i < g.n; ++i) {
        csv.row(std::vector<double>{g.coord(i), u[i], v[i]});
    }
}

inline void write_snapshot_csv(const std::filesystem::path& path,
                               const front_trajectory& traj) {
    csv_writer csv(path, {"t", "x", "u", "v"});
    for (const auto& s : traj.snapshots) {
        for (std::size_t i = 0; i < traj.mesh.n; ++i) {
            csv.row(std::vector<double>{s.t, traj.mesh.coord(i), s.u[i], s.v[i]});
        }
    }
}

inline json classification_json(const classification& c) {
    return json{{"verdict", outcome_name(c.verdict)},
                {"h_final", c.h_final},
                {"sup_v_final", c.sup_v_final},
                {"tail_growth", c.tail_growth},
                {"reason", c.reason}};
}

// Critical length of the v-operator when the parameters admit one; 0 when
// growth dominates at every length (then the escape threshold in the
// classifier falls back to the kernel scale term alone).
inline double ell_star_or_zero(const experiment_config& cfg) {
    try {
        return critical_length(cfg.params.j2, cfg.params.d2, cfg.params.r2, cfg.mode)
            .length;
    } catch (const error& e) {
        if (e.code() == errc::no_critical_length) return 0.0;
        throw;
    }
}

inline classification classify_run(const experiment_config& cfg,
                                   const front_trajectory& traj, double ell_star) {
    classify_options copt;
    copt.ell_star = ell_star;
    copt.length_scale = cfg.params.j2.length_scale();
    copt.h0 = cfg.initial_c.h0;
    return classify_outcome(traj, copt);
}

inline std::string plot_script_text() {
    return std::string(
        "#!/usr/bin/env python3\n"
        "# Quick look at the run in this directory.\n"
        "import csv, os, sys\n"
        "import matplotlib\n"
        "matplotlib.use(\"Agg\")\n"
        "import matplotlib.pyplot as plt\n"
        "here = os.path.dirname(os.path.abspath(__file__))\n"
        "def load(name):\n"
        "    with open(os.path.join(here, name)) as f:\n"
        "        rows = list(csv.DictReader(f))\n"
        "    return rows\n"
        "if os.path.exists(os.path.join(here, \"trajectory.csv\")):\n"
        "    rows = load(\"trajectory.csv\")\n"
        "    t = [float(r[\"t\"]) for r in rows]\n"
        "    h = [float(r[\"h\"]) for r in rows]\n"
        "    g = [float(r[\"g\"]) for r in rows]\n"
        "    sv = [float(r[\"sup_v\"]) for r in rows]\n"
        "    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))\n"
        "    ax1.plot(t, h, label=\"h(t)\")\n"
        "    if min(g) < 0:\n"
        "        ax1.plot(t, g, label=\"g(t)\")\n"
        "    ax1.set_xlabel(\"t\"); ax1.legend()\n"
        "    ax2.plot(t, sv, label=\"sup v\")\n"
        "    ax2.set_xlabel(\"t\"); ax2.legend()\n"
        "    fig.tight_layout()\n"
        "    fig.savefig(os.path.join(here, \"trajectory.png\"), dpi=130)\n"
        "    print(\"wrote trajectory.png\")\n"
        "if os.path.exists(os.path.join(here, \"sweep.csv\")):\n"
        "    rows = load(\"sweep.csv\")\n"
        "    x = [float(r[\"value\"]) for r in rows]\n"
        "    hf = [float(r[\"h_final\"]) for r in rows]\n"
        "    fig, ax = plt.subplots(figsize=(6, 4))\n"
        "    ax.plot(x, hf, \"o-\")\n"
        "    ax.set_xlabel(\"parameter\"); ax.set_ylabel(\"final front\")\n"
        "    fig.tight_layout()\n"
        "    fig.savefig(os.path.join(here, \"sweep.png\"), dpi=130)\n"
        "    print(\"wrote sweep.png\")\n");
}

inline void write_manifest(const experiment_config& cfg, const run_context& ctx,
                           const std::string& subcommand) {
    json m;
    m["tool"] = "frontlab";
    m["version"] = "1.0.0";
    m["subcommand"] = subcommand;
    m["workers"] = ctx.workers;
    m["seedless"] = ctx.seedless;
    if (!ctx.seedless) m["created"] = iso_timestamp();
    m["config"] = cfg.echo;
    write_json_file(ctx.out_dir / "manifest.json", m);
}

inline void prepare_out_dir(const run_context& ctx) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) {
        throw error(errc::generic,
                    "cannot create output directory: " + ctx.out_dir.string());
    }
}

}  // namespace detail

inline json run_simulate(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    const auto traj =
        detail::run_one(cfg, -1.0, 0.0, cfg.output_c.snapshots, 0.0);

    detail::write_trajectory_csv(ctx.out_dir / "trajectory.csv", traj, cfg.probes);
    detail::write_state_csv(ctx.out_dir / "final_state.csv", traj.mesh, traj.u_final,
                            traj.v_final);
    if (cfg.output_c.snapshots) {
        detail::write_snapshot_csv(ctx.out_dir / "snapshots.csv", traj);
    }
    if (cfg.output_c.plot_script) {
        write_text_file(ctx.out_dir / "plot.py", detail::plot_script_text());
    }

    json summary;
    summary["t_final"] = traj.t_final;
    summary["h_final"] = traj.h_final;
    summary["g_final"] = traj.g_final;
    summary["sup_u_final"] = traj.records.back().sup_u;
    summary["sup_v_final"] = traj.records.back().sup_v;
    summary["steps"] = traj.steps;
    summary["dt"] = traj.dt;
    summary["k1"] = traj.k1;
    summary["k2"] = traj.k2;
    summary["edge_hit"] = traj.edge_hit;
    summary["records"] = traj.records.size();
    if (traj.records.size() >= 8) {
        summary["classification"] = detail::classification_json(
            detail::classify_run(cfg, traj, detail::ell_star_or_zero(cfg)));
    }
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "simulate");
    return summary;
}

inline json run_eigen(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    std::vector<double> lengths = cfg.eigen_c.lengths;
    if (lengths.empty()) {
        const double s = cfg.params.j2.length_scale();
        lengths = {0.25 * s, 0.5 * s, s, 2.0 * s, 4.0 * s, 8.0 * s, 16.0 * s};
    }

    csv_writer csv(ctx.out_dir / "eigen.csv",
                   {"length", "lambda_p", "spacing", "residual", "iterations"});
    json rows = json::array();
    for (double l : lengths) {
        const double lo = cfg.mode == mass_mode::half_line ? 0.0 : -0.5 * l;
        const double hi = cfg.mode == mass_mode::half_line ? l : 0.5 * l;
        // an absent mesh target means "resolve the kernel, at least 8 cells"
        double dxt = cfg.eigen_c.dx_target;
        if (dxt <= 0.0) dxt = std::min(cfg.params.j2.length_scale() / 12.0, l / 8.0);
        const auto r = principal_eigenvalue(cfg.params.j2, cfg.params.d2,
                                            cfg.params.r2, lo, hi, cfg.mode, dxt);
        csv.row(std::vector<double>{l, r.lambda_p, r.spacing, r.residual,
                                    static_cast<double>(r.iterations)});
        rows.push_back({{"length", l}, {"lambda_p", r.lambda_p}});
    }

    json summary;
    summary["curve"] = rows;
    summary["d"] = cfg.params.d2;
    summary["growth"] = cfg.params.r2;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "eigen");
    return summary;
}

inline json run_critical_length(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    const auto r =
        critical_length(cfg.params.j2, cfg.params.d2, cfg.params.r2, cfg.mode,
                        cfg.critical_length_c.lambda_tol,
                        cfg.critical_length_c.dx_target);
    json summary;
    summary["length"] = r.length;
    summary["lambda_at_length"] = r.lambda_at_length;
    summary["spacing"] = r.spacing;
    summary["intervals"] = r.intervals;
    summary["evaluations"] = r.evaluations;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "critical-length");
    return summary;
}

inline json run_speed(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    const bool u_field = cfg.speed_c.field == "u";
    const kernel_spec& kernel = u_field ? cfg.params.j1 : cfg.params.j2;
    const double d = u_field ? cfg.params.d1 : cfg.params.d2;
    const double r = u_field ? cfg.params.r1 * cfg.params.a : cfg.params.r2;
    const auto res = minimal_speed_kpp(kernel, d, r);

    csv_writer csv(ctx.out_dir / "dispersion.csv", {"lambda", "s"});
    for (const auto& [lam, s] : res.scan) csv.row(std::vector<double>{lam, s});

    json summary;
    summary["c_star"] = res.c_star;
    summary["lambda_at_min"] = res.lambda_at_min;
    summary["field"] = cfg.speed_c.field;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "speed");
    return summary;
}

inline json run_semiwave(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    const bool u_field = cfg.semiwave_c.field == "u";
    const kernel_spec& kernel = u_field ? cfg.params.j1 : cfg.params.j2;
    const double d = u_field ? cfg.params.d1 : cfg.params.d2;
    const kpp_reaction reaction = u_field
                                      ? kpp_reaction(cfg.params.r1, cfg.params.a)
                                      : kpp_reaction(cfg.params.r2, 1.0);
    semi_wave_options opt;
    opt.L = cfg.semiwave_c.truncation;
    opt.dx = cfg.semiwave_c.dx;
    opt.psi_tol = cfg.semiwave_c.psi_tol;
    opt.refine_truncation = cfg.semiwave_c.refine_truncation;
    const auto res = semi_wave_speed(kernel, d, reaction, cfg.params.mu, opt);

    csv_writer csv(ctx.out_dir / "profile.csv", {"x", "phi"});
    for (std::size_t i = 0; i < res.x.size(); ++i) {
        csv.row(std::vector<double>{res.x[i], res.phi[i]});
    }

    json summary;
    summary["c0"] = res.c0;
    summary["ustar"] = res.ustar;
    summary["mu"] = res.mu;
    summary["flux_residual"] = res.flux_residual;
    summary["truncation"] = res.L;
    summary["dx"] = res.dx;
    summary["profile_solves"] = res.profile_solves;
    summary["field"] = cfg.semiwave_c.field;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "semiwave");
    return summary;
}

inline json run_critical_mu(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    const double ell_star =
        critical_mu_preconditions(cfg.params.j2, cfg.params.d2, cfg.params.r2,
                                  cfg.initial_c.h0, cfg.mode);

    struct probe_row {
        double mu, horizon, h_final, sup_v;
        std::string verdict;
    };
    std::vector<probe_row> probe_log;

    auto classifier = [&](double mu, double horizon) {
        const auto traj = detail::run_one(cfg, mu, horizon, false, 0.0);
        const auto cls = detail::classify_run(cfg, traj, ell_star);
        probe_log.push_back(
            {mu, horizon, cls.h_final, cls.sup_v_final, outcome_name(cls.verdict)});
        return cls.verdict;
    };

    critical_mu_options opt;
    opt.mu_lo = cfg.critical_mu_c.mu_lo;
    opt.mu_hi = cfg.critical_mu_c.mu_hi;
    opt.rel_tol = cfg.critical_mu_c.rel_tol;
    opt.horizon = cfg.critical_mu_c.horizon;
    opt.horizon_cap = cfg.critical_mu_c.horizon_cap;
    const auto res = critical_mu(classifier, opt);

    csv_writer csv(ctx.out_dir / "probes.csv",
                   {"mu", "horizon", "verdict", "h_final", "sup_v_final"});
    for (const auto& p : probe_log) {
        csv.row(std::vector<std::string>{format_double(p.mu), format_double(p.horizon),
                                         p.verdict, format_double(p.h_final),
                                         format_double(p.sup_v)});
    }

    json summary;
    summary["mu_star"] = res.mu_star;
    summary["bracket_lo"] = res.bracket_lo;
    summary["bracket_hi"] = res.bracket_hi;
    summary["probes"] = res.probes;
    summary["horizon_used"] = res.horizon_used;
    summary["critical_length"] = ell_star;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "critical-mu");
    return summary;
}

inline json run_sweep(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);
    if (!cfg.sweep_c) {
        throw config_error("sweep run needs a \"sweep\" section in the config");
    }
    const auto& sw = *cfg.sweep_c;

    struct cell_result {
        double value = 0.0;
        std::string verdict;
        double h_final = 0.0, g_final = 0.0, sup_u = 0.0, sup_v = 0.0, t_final = 0.0;
        bool edge_hit = false;
        std::string failure;
    };
    std::vector<cell_result> cells(sw.values.size());

    auto variant_of = [&](double value) {
        experiment_config c = cfg;
        if (sw.parameter == "mu") c.params.mu = value;
        else if (sw.parameter == "d1") c.params.d1 = value;
        else if (sw.parameter == "d2") c.params.d2 = value;
        else if (sw.parameter == "r1") c.params.r1 = value;
        else if (sw.parameter == "r2") c.params.r2 = value;
        else if (sw.parameter == "a") c.params.a = value;
        else if (sw.parameter == "b") c.params.b = value;
        else if (sw.parameter == "c") c.params.c = value;
        else if (sw.parameter == "h0") c.initial_c.h0 = value;
        else if (sw.parameter == "u_amplitude") c.initial_c.u_amplitude = value;
        else c.initial_c.v_amplitude = value;
        return c;
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= sw.values.size()) break;
            cell_result& cell = cells[k];
            cell.value = sw.values[k];
            try {
                const auto variant = variant_of(sw.values[k]);
                const auto traj = detail::run_one(variant, -1.0, 0.0, false, 0.0);
                const auto cls =
                    detail::classify_run(variant, traj, detail::ell_star_or_zero(variant));
                cell.verdict = outcome_name(cls.verdict);
                cell.h_final = traj.h_final;
                cell.g_final = traj.g_final;
                cell.sup_u = traj.records.back().sup_u;
                cell.sup_v = traj.records.back().sup_v;
                cell.t_final = traj.t_final;
                cell.edge_hit = traj.edge_hit;
            } catch (const error& e) {
                cell.verdict = "error";
                cell.failure = std::string(errc_name(e.code())) + ": " + e.what();
            }
        }
    };

    const std::size_t nw = std::max<std::size_t>(1, ctx.workers);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t + 1 < nw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Cells land in the CSV in input order no matter which thread ran them.
    csv_writer csv(ctx.out_dir / "sweep.csv",
                   {"value", "verdict", "h_final", "g_final", "sup_u_final",
                    "sup_v_final", "t_final", "edge_hit", "note"});
    std::size_t failures = 0;
    for (const auto& cell : cells) {
        if (!cell.failure.empty()) ++failures;
        csv.row(std::vector<std::string>{
            format_double(cell.value), cell.verdict, format_double(cell.h_final),
            format_double(cell.g_final), format_double(cell.sup_u),
            format_double(cell.sup_v), format_double(cell.t_final),
            cell.edge_hit ? "1" : "0", cell.failure});
    }
    if (cfg.output_c.plot_script) {
        write_text_file(ctx.out_dir / "plot.py", detail::plot_script_text());
    }

    json summary;
    summary["parameter"] = sw.parameter;
    summary["cells"] = sw.values.size();
    summary["failures"] = failures;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "sweep");
    return summary;
}

inline json run_compare(const experiment_config& cfg, const run_context& ctx) {
    detail::prepare_out_dir(ctx);

    // Both runs must share the step so their records align; take the tighter
    // of the two stability bounds.
    experiment_config big = cfg;
    big.initial_c.u_amplitude *= cfg.compare_c.factor;
    big.initial_c.v_amplitude *= cfg.compare_c.factor;
    big.initial_c.h0 += cfg.compare_c.front_offset;

    const grid g = build_grid(cfg);
    const operator_table t1(g, cfg.params.j1,
                            cfg.mode == mass_mode::half_line ? mass_mode::half_line
                                                             : mass_mode::whole_line);
    const operator_table t2(g, cfg.params.j2, t1.mode);
    double mmax = 0.0;
    for (double m : t1.mass) mmax = std::max(mmax, m);
    for (double m : t2.mass) mmax = std::max(mmax, m);

    auto bound_for = [&](const experiment_config& c) {
        const double k1 = std::max(c.initial_c.u_amplitude, c.params.a);
        const double k2 = std::max(c.initial_c.v_amplitude, 1.0);
        return dt_positivity_bound(c.params, k1, k2, mmax);
    };
    double dt = cfg.time_c.dt;
    if (!(dt > 0.0)) {
        dt = cfg.time_c.dt_factor * std::min(bound_for(cfg), bound_for(big));
    }

    const auto small_traj = detail::run_one(cfg, -1.0, 0.0, true, dt);
    const auto big_traj = detail::run_one(big, -1.0, 0.0, true, dt);
    const auto rep = check_trajectory_ordering(small_traj, big_traj, 1e-12);

    detail::write_trajectory_csv(ctx.out_dir / "trajectory_small.csv", small_traj,
                                 cfg.probes);
    detail::write_trajectory_csv(ctx.out_dir / "trajectory_large.csv", big_traj,
                                 cfg.probes);

    json summary;
    summary["ordered"] = rep.ordered;
    summary["worst_gap"] = rep.worst_gap;
    summary["t_worst"] = rep.t_worst;
    summary["what"] = rep.what;
    summary["factor"] = cfg.compare_c.factor;
    summary["front_offset"] = cfg.compare_c.front_offset;
    summary["dt"] = dt;
    write_json_file(ctx.out_dir / "summary.json", summary);
    detail::write_manifest(cfg, ctx, "compare");

    if (!rep.ordered) {
        throw ordering_violated("trajectory ordering failed: " + rep.what + " at t=" +
                                format_double(rep.t_worst) + " by " +
                                format_double(rep.worst_gap));
    }
    return summary;
}

}  // namespace frontlab
