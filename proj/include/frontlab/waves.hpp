#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/kernels.hpp"

namespace frontlab {

/// KPP-type reaction f(s) = rho * s * (q - 2 s): linear growth rate rho*q at
/// s = 0, positive root U* = q/2. The two scalar waves of interest are the
/// u-wave (rho = r1, q = a) and the v-wave (rho = r2, q = 1).
struct kpp_reaction {
    double rho = 1.0;
    double q = 1.0;

    kpp_reaction(double rho_, double q_) : rho(rho_), q(q_) {
        if (!(rho > 0.0) || !(q > 0.0)) {
            throw contract_violation("kpp_reaction requires positive coefficients");
        }
    }
    double ustar() const { return 0.5 * q; }
    double growth_rate() const { return rho * q; }
    double operator()(double s) const { return rho * s * (q - 2.0 * s); }
    // sup |f'| over [0, U*]; f'(s) = rho (q - 4 s)
    double lipschitz() const { return rho * q; }
};

/// Minimal wave speed of the linearized full-line problem:
///   c_* = inf_{0 < λ < Λ} s(λ),  s(λ) = [d (M(λ) - 1) + r] / λ,
/// where M is the kernel's two-sided exponential moment and Λ its abscissa.
/// Requires a light tail (finite exponential moment). The minimizer is
/// located by a geometric grid scan (which doubles as a unimodality check)
/// followed by golden-section refinement.
struct dispersion_result {
    double c_star = 0.0;
    double lambda_at_min = 0.0;
    std::vector<std::pair<double, double>> scan;  // (lambda, s(lambda))
};

inline dispersion_result minimal_speed_kpp(const kernel_spec& kernel, double d,
                                           double r, std::size_t n_scan = 400) {
    if (!(d > 0.0) || !(r > 0.0)) {
        throw contract_violation("minimal_speed_kpp: d and r must be positive");
    }
    if (!kernel.satisfies_j2()) {
        throw light_tail_required(
            "minimal wave speed undefined: kernel lacks a finite exponential moment");
    }
    const double abscissa = kernel.mgf_abscissa();
    auto s_of = [&](double lam) {
        return (d * (kernel.mgf(lam) - 1.0) + r) / lam;
    };

    const double lam0 = 1.0 / kernel.length_scale();
    std::vector<double> ls;
    ls.reserve(n_scan);
    if (std::isfinite(abscissa)) {
        for (std::size_t i = 1; i <= n_scan; ++i) {
            ls.push_back(abscissa * static_cast<double>(i) /
                         static_cast<double>(n_scan + 1));
        }
    } else {
        double lo = lam0 * 1e-4, hi = lam0 * 1e3;
        const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(n_scan - 1));
        double v = lo;
        for (std::size_t i = 0; i < n_scan; ++i, v *= ratio) ls.push_back(v);
    }

    dispersion_result out;
    std::vector<double> sv;
    sv.reserve(ls.size());
    for (double lam : ls) {
        double val = s_of(lam);
        if (!std::isfinite(val)) break;  // overflow region; truncate the scan there
        sv.push_back(val);
        out.scan.emplace_back(lam, val);
    }
    if (sv.size() < 8) {
        throw numerical_error("minimal_speed_kpp: dispersion scan degenerated");
    }

    std::size_t imin = 0;
    for (std::size_t i = 1; i < sv.size(); ++i) {
        if (sv[i] < sv[imin]) imin = i;
    }
    // Extend toward 0 if the minimum hugs the left end of the scan.
    int guard = 0;
    while (imin == 0 && guard++ < 60) {
        const double lam = ls.front() * 0.25;
        ls.insert(ls.begin(), lam);
        sv.insert(sv.begin(), s_of(lam));
        out.scan.insert(out.scan.begin(), {lam, sv.front()});
        imin = 0;
        for (std::size_t i = 1; i < sv.size(); ++i) {
            if (sv[i] < sv[imin]) imin = i;
        }
    }
    if (imin == 0 || imin + 1 >= sv.size()) {
        throw numerical_error("minimal_speed_kpp: failed to bracket the minimum");
    }

    // Unimodality: differences must change sign exactly once, minus to plus.
    int transitions = 0;
    int last_sign = 0;
    for (std::size_t i = 1; i < sv.size(); ++i) {
        const double diff = sv[i] - sv[i - 1];
        if (std::abs(diff) <= 1e-13 * std::max(std::abs(sv[i]), 1.0)) continue;
        const int sign = diff > 0.0 ? 1 : -1;
        if (last_sign == 1 && sign == -1) {
            throw numerical_error(
                "minimal_speed_kpp: dispersion curve is not unimodal on the scan");
        }
        if (last_sign == -1 && sign == 1) ++transitions;
        last_sign = sign;
    }
    if (transitions > 1) {
        throw numerical_error("minimal_speed_kpp: multiple interior minima detected");
    }

    // Golden-section refinement on the bracketing triple.
    double a = ls[imin - 1], b = ls[imin + 1];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = s_of(x1), f2 = s_of(x2);
    for (int it = 0; it < 400 && (b - a) > 1e-10 * b; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = s_of(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = s_of(x2);
        }
    }
    out.lambda_at_min = 0.5 * (a + b);
    out.c_star = s_of(out.lambda_at_min);
    return out;
}

/// Semi-wave profile on (-infinity, 0]: the nonincreasing solution of
///   d ( ∫_{-∞}^0 J(x-y) φ(y) dy - φ ) + c φ' + f(φ) = 0,
///   φ(-∞) = U*, φ(0) = 0,
/// truncated to [-L, 0] with the left boundary clamped to U* and zero
/// extension on the right. Solved by pseudo-time relaxation with upwind
/// differencing of the advection term, which keeps iterates in [0, U*] and
/// monotone under the CFL bound on the pseudo step.
struct semi_wave_profile_result {
    std::vector<double> x;
    std::vector<double> phi;
    bool collapsed = false;   // interface retreated to the truncation boundary
    std::size_t sweeps = 0;
    double sup_change = 0.0;
};

namespace detail {

inline double edge_w(std::size_t j, std::size_t m) {
    return (j == 0 || j == m) ? 0.5 : 1.0;
}

struct semi_wave_mesh {
    double dx = 0.0;
    double L = 0.0;
    std::size_t m = 0;                // nodes 0..m at x = (i - m) dx
    std::vector<double> ksamp;        // J(k dx)
    std::vector<double> tail_left;    // T(i dx): mass of the clamped extension
    std::vector<double> tmass;        // T((m - i) dx) = T(-x_i), flux weights
    std::size_t k_halfwidth = 0;

    semi_wave_mesh(const kernel_spec& kernel, double L_, double dx_) : dx(dx_), L(L_) {
        m = static_cast<std::size_t>(std::max<long long>(16, std::llround(L / dx)));
        L = static_cast<double>(m) * dx;  // snap so the left end is a node
        ksamp.resize(m + 1);
        tail_left.resize(m + 1);
        tmass.resize(m + 1);
        for (std::size_t k = 0; k <= m; ++k) {
            ksamp[k] = kernel.evaluate(static_cast<double>(k) * dx);
            tail_left[k] = kernel.tail_mass(static_cast<double>(k) * dx);
        }
        for (std::size_t i = 0; i <= m; ++i) tmass[i] = tail_left[m - i];
        const double cutoff = kernel.effective_radius();
        k_halfwidth = m;
        if (std::isfinite(cutoff)) {
            k_halfwidth = std::min<std::size_t>(
                m, static_cast<std::size_t>(std::ceil(cutoff / dx)) + 1);
        }
    }
};

inline semi_wave_profile_result relax_semi_wave_profile(
    const semi_wave_mesh& mesh, double d, const kpp_reaction& f, double c,
    double sup_tol, std::size_t max_sweeps, std::span<const double> warm_start) {
    const std::size_t m = mesh.m;
    const double dx = mesh.dx;
    const double ustar = f.ustar();

    std::vector<double> phi(m + 1);
    if (warm_start.size() == m + 1) {
        for (std::size_t i = 0; i <= m; ++i) {
            phi[i] = std::clamp(warm_start[i], 0.0, ustar);
        }
    } else {
        for (std::size_t i = 0; i <= m; ++i) phi[i] = ustar;
    }
    phi[0] = ustar;
    phi[m] = 0.0;

    const double dtau = 0.8 / (d + c / dx + f.lipschitz());
    std::vector<double> next(m + 1);
    next[0] = ustar;
    next[m] = 0.0;

    semi_wave_profile_result out;
    double change = std::numeric_limits<double>::infinity();
    std::size_t sweep = 0;
    for (; sweep < max_sweeps && change > sup_tol; ++sweep) {
        change = 0.0;
        for (std::size_t i = 1; i < m; ++i) {
            const std::size_t kmax = std::min(mesh.k_halfwidth, std::max(i, m - i));
            double conv = 0.0;
            for (std::size_t k = kmax; k >= 1; --k) {
                const double wl = i >= k ? phi[i - k] * edge_w(i - k, m) : 0.0;
                const double wr = i + k <= m ? phi[i + k] * edge_w(i + k, m) : 0.0;
                conv += mesh.ksamp[k] * (wl + wr);
            }
            conv += mesh.ksamp[0] * phi[i];
            conv *= dx;
            conv += ustar * mesh.tail_left[i];
            const double rhs = d * (conv - phi[i]) + c * (phi[i + 1] - phi[i]) / dx +
                               f(phi[i]);
            double val = phi[i] + dtau * rhs;
            val = std::clamp(val, 0.0, ustar);
            change = std::max(change, std::abs(val - phi[i]));
            next[i] = val;
        }
        phi.swap(next);
        next[0] = ustar;
        next[m] = 0.0;
    }
    out.sweeps = sweep;
    out.sup_change = change;
    if (change > sup_tol) {
        throw numerical_error("semi-wave relaxation failed to converge within " +
                              std::to_string(max_sweeps) + " sweeps");
    }

    // Verify the profile is monotone up to relaxation noise, then make it
    // exactly nonincreasing.
    for (std::size_t i = 0; i < m; ++i) {
        if (phi[i + 1] > phi[i] + 1e-8 * ustar) {
            throw numerical_error("semi-wave profile came out non-monotone");
        }
    }
    for (std::size_t i = m; i-- > 0;) {
        phi[i] = std::max(phi[i], phi[i + 1]);
    }

    // Interface position: rightmost node still above half amplitude.
    std::size_t interface_i = 0;
    for (std::size_t i = m + 1; i-- > 0;) {
        if (phi[i] >= 0.5 * ustar) {
            interface_i = i;
            break;
        }
    }
    out.collapsed = interface_i * 8 < m;

    out.x.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        out.x[i] = (static_cast<double>(i) - static_cast<double>(m)) * dx;
    }
    out.phi = std::move(phi);
    return out;
}

// μ ∫_{-∞}^0 φ(x) T(-x) dx against the truncated profile, with the clamped
// extension integrated in closed form.
inline double semi_wave_flux(const semi_wave_mesh& mesh, const kernel_spec& kernel,
                             std::span<const double> phi, double ustar, double mu) {
    const std::size_t m = mesh.m;
    double s = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        s += edge_w(i, m) * phi[i] * mesh.tmass[i] * mesh.dx;
    }
    s += ustar * kernel.tail_mass_integral(mesh.L);
    return mu * s;
}

}  // namespace detail

inline semi_wave_profile_result solve_semi_wave_profile(
    const kernel_spec& kernel, double d, const kpp_reaction& f, double c, double L,
    double dx, double sup_tol = 1e-10, std::size_t max_sweeps = 2'000'000) {
    if (!(d > 0.0)) throw contract_violation("solve_semi_wave_profile: d must be positive");
    if (!(c >= 0.0)) throw contract_violation("solve_semi_wave_profile: c must be >= 0");
    if (!(L > 0.0) || !(dx > 0.0) || !(L > 4.0 * dx)) {
        throw contract_violation("solve_semi_wave_profile: bad truncation or mesh");
    }
    detail::semi_wave_mesh mesh(kernel, L, dx);
    auto res = detail::relax_semi_wave_profile(mesh, d, f, c, sup_tol, max_sweeps, {});
    if (res.collapsed) {
        throw no_profile(
            "semi-wave profile collapsed toward 0: no profile exists at this speed "
            "(c at or beyond the minimal full-line speed)");
    }
    return res;
}

/// Semi-wave speed: the unique c0 > 0 with Psi(c0) = 0 where
///   Psi(c) = μ ∫_{-∞}^0 φ_c(x) T(-x) dx - c
/// and φ_c is the truncated semi-wave profile at speed c. Psi is strictly
/// decreasing with Psi(0) > 0, so bisection with an expanding upper bracket
/// converges; profiles are warm-started from the previous probe. Requires a
/// finite kernel first moment; heavier tails admit no semi-wave.
struct semi_wave_options {
    double L = 0.0;            // truncation; 0 -> 40 kernel length scales
    double dx = 0.0;           // mesh; 0 -> scale / 32
    double psi_tol = 1e-6;     // |Psi(c0)| target
    double sup_tol = 0.0;      // relaxation stop; 0 -> min(1e-10, 1e-8/mu)
    bool refine_truncation = true;  // double L until c0 moves < 1e-4
    std::size_t max_sweeps = 2'000'000;
};

struct semi_wave_result {
    double c0 = 0.0;
    double ustar = 0.0;
    double mu = 0.0;
    double flux_residual = 0.0;  // Psi(c0)
    double L = 0.0;
    double dx = 0.0;
    std::vector<double> x;
    std::vector<double> phi;
    std::size_t profile_solves = 0;
};

namespace detail {

inline semi_wave_result semi_wave_speed_fixed_mesh(const kernel_spec& kernel, double d,
                                                   const kpp_reaction& f, double mu,
                                                   double L, double dx,
                                                   const semi_wave_options& opt) {
    semi_wave_mesh mesh(kernel, L, dx);
    const double ustar = f.ustar();
    const double sup_tol = opt.sup_tol > 0.0
                               ? opt.sup_tol
                               : std::min(1e-10, 1e-8 / std::max(mu, 1.0));

    std::vector<double> warm;
    std::size_t solves = 0;
    auto psi_of = [&](double c, semi_wave_profile_result& prof) {
        prof = relax_semi_wave_profile(mesh, d, f, c, sup_tol, opt.max_sweeps, warm);
        warm = prof.phi;
        ++solves;
        return semi_wave_flux(mesh, kernel, prof.phi, ustar, mu) - c;
    };

    semi_wave_profile_result prof;
    double lo = 0.0;
    double psi_lo = psi_of(0.0, prof);
    if (!(psi_lo > 0.0)) {
        throw numerical_error("semi_wave_speed: boundary flux at c = 0 is not positive");
    }

    // Upper bracket: the flux identity bounds c0 by mu * U* * ∫_0^∞ T.
    double hi = std::min(mu * ustar * kernel.tail_mass_integral(0.0) * 1.05 + 1e-8,
                         1e6);
    if (kernel.satisfies_j2()) {
        const double cstar = minimal_speed_kpp(kernel, d, f.growth_rate()).c_star;
        hi = std::min(hi, 1.25 * cstar);
    }
    double psi_hi = psi_of(hi, prof);
    int guard = 0;
    while (psi_hi > 0.0 && guard++ < 64) {
        hi *= 2.0;
        psi_hi = psi_of(hi, prof);
    }
    if (psi_hi > 0.0) {
        throw numerical_error("semi_wave_speed: failed to bracket the flux identity");
    }

    semi_wave_result out;
    out.ustar = ustar;
    out.mu = mu;
    out.L = mesh.L;
    out.dx = mesh.dx;

    double mid = hi, psi_mid = psi_hi;
    semi_wave_profile_result best = prof;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        psi_mid = psi_of(mid, prof);
        if (std::abs(psi_mid) <= opt.psi_tol) {
            best = prof;
            break;
        }
        (psi_mid > 0.0 ? lo : hi) = mid;
        best = prof;
        if ((hi - lo) <= 1e-13 * std::max(1.0, mid)) {
            throw numerical_error(
                "semi_wave_speed: bisection bracket collapsed before the flux "
                "residual met tolerance");
        }
    }
    if (std::abs(psi_mid) > opt.psi_tol) {
        throw numerical_error("semi_wave_speed: flux residual did not converge");
    }
    out.c0 = mid;
    out.flux_residual = psi_mid;
    out.x = best.x;
    out.phi = best.phi;
    out.profile_solves = solves;
    return out;
}

}  // namespace detail

inline semi_wave_result semi_wave_speed(const kernel_spec& kernel, double d,
                                        const kpp_reaction& f, double mu,
                                        const semi_wave_options& opt = {}) {
    if (!(d > 0.0)) throw contract_violation("semi_wave_speed: d must be positive");
    if (!(mu > 0.0)) throw contract_violation("semi_wave_speed: mu must be positive");
    if (!kernel.satisfies_j1()) {
        throw no_semi_wave(
            "no semi-wave: kernel first moment diverges, fronts accelerate instead");
    }
    const double scale = kernel.length_scale();
    double L = opt.L > 0.0 ? opt.L : 40.0 * scale;
    const double dx = opt.dx > 0.0 ? opt.dx : scale / 32.0;

    auto res = detail::semi_wave_speed_fixed_mesh(kernel, d, f, mu, L, dx, opt);
    if (opt.refine_truncation) {
        for (int round = 0; round < 4; ++round) {
            auto wider = detail::semi_wave_speed_fixed_mesh(kernel, d, f, mu, 2.0 * L,
                                                            dx, opt);
            const double move = std::abs(wider.c0 - res.c0);
            res = std::move(wider);
            L *= 2.0;
            if (move < 1e-4 * std::max(1.0, res.c0)) break;
        }
    }
    return res;
}

}  // namespace frontlab
