#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "frontlab/dynamics.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/spectral.hpp"

namespace frontlab {

/// Unique positive coexistence state: the root of f1 = f2 = 0 with
/// u in [a/2, a), v in [1/2, 1). Solved by the monotone fixed-point map
///   v(u) = (1 + c u) / (2 + c u),   u(v) = a (1 + b v) / (2 + b v),
/// starting from u = a/2; the iterates increase and converge geometrically.
struct equilibrium {
    double ustar = 0.0;
    double vstar = 0.0;
    std::size_t iterations = 0;
};

inline equilibrium coexistence_equilibrium(const model_params& p, double tol = 1e-14,
                                           std::size_t max_iter = 100000) {
    double u = 0.5 * p.a;
    double v = 0.0;
    equilibrium out;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const double v_next = (1.0 + p.c * u) / (2.0 + p.c * u);
        const double u_next = p.a * (1.0 + p.b * v_next) / (2.0 + p.b * v_next);
        const double move = std::abs(u_next - u) + std::abs(v_next - v);
        u = u_next;
        v = v_next;
        out.iterations = it;
        if (move <= tol) {
            out.ustar = u;
            out.vstar = v;
            return out;
        }
    }
    throw numerical_error("coexistence iteration failed to converge");
}

enum class outcome { spreading, vanishing, undetermined };

inline const char* outcome_name(outcome o) {
    switch (o) {
        case outcome::spreading: return "spreading";
        case outcome::vanishing: return "vanishing";
        default: return "undetermined";
    }
}

/// Heuristic verdict from a finished trajectory. Spreading needs the front
/// well past both the critical length and its starting point and still
/// moving; vanishing needs the density gone and the front stalled. Anything
/// else stays undetermined so the caller can rerun with a longer horizon.
struct classification {
    outcome verdict = outcome::undetermined;
    double h_final = 0.0;
    double sup_v_final = 0.0;
    double tail_growth = 0.0;  // front advance over the last quarter of the run
    std::string reason;
};

struct classify_options {
    double eps_v = 1e-3;        // sup v below this counts as extinct
    double eps_h = 1e-3;        // front advance below this counts as stalled
    double ell_star = 0.0;      // critical length when one exists, else 0
    double length_scale = 1.0;  // kernel scale for the escape threshold
    double h0 = 0.0;
};

inline classification classify_outcome(const front_trajectory& traj,
                                       const classify_options& opt) {
    if (traj.records.size() < 8) {
        throw contract_violation("classification needs at least 8 logged records");
    }
    classification out;
    const auto& rec = traj.records;
    out.h_final = rec.back().h;
    out.sup_v_final = rec.back().sup_v;

    const double t_last = rec.back().t;
    const double t_q = t_last * 0.75;
    double h_at_q = rec.front().h;
    for (const auto& r : rec) {
        if (r.t <= t_q) h_at_q = r.h;
    }
    out.tail_growth = out.h_final - h_at_q;

    const double escape =
        std::max(2.0 * opt.ell_star, opt.h0 + 5.0 * opt.length_scale);
    if (traj.edge_hit) {
        out.verdict = outcome::spreading;
        out.reason = "front reached the grid edge";
        return out;
    }
    if (out.h_final > escape && out.tail_growth > opt.eps_h) {
        out.verdict = outcome::spreading;
        out.reason = "front escaped the critical region and keeps advancing";
        return out;
    }
    if (out.sup_v_final < opt.eps_v && out.tail_growth < opt.eps_h) {
        out.verdict = outcome::vanishing;
        out.reason = "density collapsed and the front stalled";
        return out;
    }
    out.verdict = outcome::undetermined;
    out.reason = "no decisive signal within the horizon";
    return out;
}

namespace detail {

inline std::pair<double, double> linear_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) {
        throw contract_violation("linear fit needs at least two points");
    }
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw numerical_error("degenerate abscissas in linear fit");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace detail

struct speed_fit {
    double speed = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
};

/// Least-squares front speed over the logged records with t in [t_lo, t_hi].
inline speed_fit estimate_front_speed(const front_trajectory& traj, double t_lo,
                                      double t_hi) {
    std::vector<double> ts, hs;
    for (const auto& r : traj.records) {
        if (r.t >= t_lo && r.t <= t_hi) {
            ts.push_back(r.t);
            hs.push_back(r.h);
        }
    }
    if (ts.size() < 8) {
        throw contract_violation("speed fit needs at least 8 records in the window");
    }
    const auto [slope, icept] = detail::linear_fit(ts, hs);
    return {slope, icept, ts.front(), ts.back(), ts.size()};
}

struct exponent_fit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
};

/// Fit h(t) ~ C t^p on a log-log scale over records with t in [t_lo, t_hi];
/// the exponent diagnoses accelerated front growth for heavy-tailed kernels.
inline exponent_fit estimate_acceleration_exponent(const front_trajectory& traj,
                                                   double t_lo, double t_hi) {
    std::vector<double> lt, lh;
    for (const auto& r : traj.records) {
        if (r.t >= t_lo && r.t <= t_hi && r.t > 0.0 && r.h > 0.0) {
            lt.push_back(std::log(r.t));
            lh.push_back(std::log(r.h));
        }
    }
    if (lt.size() < 8) {
        throw contract_violation("exponent fit needs at least 8 records in the window");
    }
    const auto [slope, icept] = detail::linear_fit(lt, lh);
    return {slope, icept, std::exp(lt.front()), std::exp(lt.back()), lt.size()};
}

/// Check that the small-density regime really is bistable in mu before
/// hunting for the threshold: diffusion must dominate the growth rate and
/// the initial front must sit below the critical length. Returns that
/// critical length for the caller's later use.
inline double critical_mu_preconditions(const kernel_spec& j2, double d2, double r2,
                                        double h0, mass_mode mode) {
    const double bound = mode == mass_mode::half_line ? 0.5 * d2 : d2;
    if (!(r2 < bound)) {
        throw no_critical_mu(
            "spreading happens for every expansion coefficient: the growth rate "
            "exceeds the diffusive loss, so no threshold exists");
    }
    const auto cl = critical_length(j2, d2, r2, mode);
    if (!(h0 < cl.length)) {
        throw no_critical_mu(
            "spreading happens for every expansion coefficient: the initial span "
            "already meets the critical length");
    }
    return cl.length;
}

struct critical_mu_options {
    double mu_lo = 0.05;
    double mu_hi = 5.0;
    double rel_tol = 0.01;       // bracket width target relative to the midpoint
    double horizon = 200.0;      // classifier horizon; doubled while undetermined
    double horizon_cap = 4.0;    // max escalation factor
    std::size_t max_probes = 64;
};

struct critical_mu_result {
    double mu_star = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::size_t probes = 0;
    double horizon_used = 0.0;
};

/// Bisect the spreading/vanishing threshold in mu. The classifier runs one
/// simulation and returns its verdict; undetermined verdicts escalate the
/// horizon (sticky, up to the cap) before giving up as inconclusive.
inline critical_mu_result critical_mu(
    const std::function<outcome(double mu, double horizon)>& classifier,
    const critical_mu_options& opt = {}) {
    if (!classifier) throw contract_violation("critical_mu needs a classifier");
    if (!(opt.mu_lo > 0.0) || !(opt.mu_hi > opt.mu_lo)) {
        throw contract_violation("critical_mu needs 0 < mu_lo < mu_hi");
    }

    double horizon = opt.horizon;
    const double horizon_max = opt.horizon * opt.horizon_cap;
    std::size_t probes = 0;

    auto probe = [&](double mu) {
        while (true) {
            if (probes >= opt.max_probes) {
                throw inconclusive("threshold search ran out of probes");
            }
            ++probes;
            const outcome o = classifier(mu, horizon);
            if (o != outcome::undetermined) return o;
            if (horizon >= horizon_max) {
                throw inconclusive(
                    "simulation verdict stayed undetermined at the horizon cap (mu=" +
                    std::to_string(mu) + ")");
            }
            horizon = std::min(2.0 * horizon, horizon_max);
        }
    };

    double lo = opt.mu_lo, hi = opt.mu_hi;
    int guard = 0;
    while (probe(lo) != outcome::vanishing) {
        lo *= 0.5;
        if (++guard > 12) {
            throw no_critical_mu(
                "spreading persisted down to a vanishing expansion coefficient");
        }
    }
    guard = 0;
    while (probe(hi) != outcome::spreading) {
        hi *= 2.0;
        if (++guard > 12) {
            throw inconclusive("no spreading observed up to a huge expansion coefficient");
        }
    }

    while (hi - lo > opt.rel_tol * 0.5 * (hi + lo)) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) == outcome::spreading) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    critical_mu_result out;
    out.mu_star = 0.5 * (lo + hi);
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    out.probes = probes;
    out.horizon_used = horizon;
    return out;
}

/// Pointwise ordering check between two trajectories logged on the same grid
/// and cadence: fronts ordered at every record, fields ordered at every
/// stored snapshot. Reports the worst signed violation instead of throwing,
/// so tests can assert with their own tolerance.
struct ordering_report {
    bool ordered = true;
    double worst_gap = 0.0;  // most positive violation of (small <= large)
    double t_worst = 0.0;
    std::string what;
};

inline ordering_report check_trajectory_ordering(const front_trajectory& small,
                                                 const front_trajectory& large,
                                                 double tol = 1e-12) {
    if (small.records.size() != large.records.size()) {
        throw contract_violation("ordering check needs equal record counts");
    }
    ordering_report rep;
    auto note = [&](double gap, double t, const char* what) {
        if (gap > rep.worst_gap) {
            rep.worst_gap = gap;
            rep.t_worst = t;
            rep.what = what;
        }
        if (gap > tol) rep.ordered = false;
    };
    for (std::size_t k = 0; k < small.records.size(); ++k) {
        const auto& r1 = small.records[k];
        const auto& r2 = large.records[k];
        if (std::abs(r1.t - r2.t) > 1e-9) {
            throw contract_violation("ordering check needs matching record times");
        }
        note(r1.h - r2.h, r1.t, "front h");
        note(r2.g - r1.g, r1.t, "front g");
    }
    if (small.snapshots.size() != large.snapshots.size()) {
        throw contract_violation("ordering check needs equal snapshot counts");
    }
    for (std::size_t k = 0; k < small.snapshots.size(); ++k) {
        const auto& s1 = small.snapshots[k];
        const auto& s2 = large.snapshots[k];
        for (std::size_t i = 0; i < s1.u.size(); ++i) {
            note(s1.u[i] - s2.u[i], s1.t, "field u");
        }
        for (std::size_t i = 0; i < s1.v.size(); ++i) {
            note(s1.v[i] - s2.v[i], s1.t, "field v");
        }
    }
    return rep;
}

}  // namespace frontlab
