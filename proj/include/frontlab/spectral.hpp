#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/nonlocal_ops.hpp"

namespace frontlab {

/// Principal eigenpair of the interval operator
///   (L φ)(x) = d ∫_I J(x-y) φ(y) dy - d m(x) φ(x) + a0 φ(x),
/// discretized with trapezoid quadrature on a uniform mesh over I. The mass
/// here is the continuum one (j(x) on the half line, 1 on the whole line):
/// the spectral module approximates the continuum eigenvalue, while the
/// dynamics module uses its quadrature-consistent row mass; both agree to
/// O(dx^2).
struct eigen_result {
    double lambda_p = 0.0;
    std::vector<double> x;    // mesh nodes
    std::vector<double> phi;  // positive eigenfunction, sup-normalized
    double residual = 0.0;    // sup norm of (A - lambda I) phi
    std::size_t iterations = 0;
    double spacing = 0.0;
};

struct eigen_options {
    double rel_tol = 1e-10;      // Collatz-Wielandt gap, relative to shifted value
    double residual_tol = 1e-8;
    std::size_t max_iterations = 2'000'000;
    std::size_t max_nodes = 2800;
};

inline eigen_result principal_eigenvalue(const kernel_spec& kernel, double d,
                                         double a0, double lo, double hi,
                                         mass_mode mode, double dx_target,
                                         const eigen_options& opt = {}) {
    if (!(d > 0.0)) throw contract_violation("principal_eigenvalue: d must be positive");
    if (!(hi > lo)) throw contract_violation("principal_eigenvalue: empty interval");
    if (!(dx_target > 0.0)) {
        throw contract_violation("principal_eigenvalue: mesh target must be positive");
    }
    if (mode == mass_mode::half_line && lo != 0.0) {
        throw contract_violation(
            "principal_eigenvalue: half-line intervals are anchored at 0");
    }
    const double len = hi - lo;
    const auto m = static_cast<std::size_t>(
        std::max<long long>(8, std::llround(std::ceil(len / dx_target - 1e-12))));
    const std::size_t n = m + 1;
    if (n > opt.max_nodes) {
        throw numerical_error("principal_eigenvalue: mesh of " + std::to_string(n) +
                              " nodes exceeds the cap; coarsen dx or shorten the interval");
    }
    const double h = len / static_cast<double>(m);

    std::vector<double> x(n), mass(n);
    double mass_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = lo + static_cast<double>(i) * h;
        mass[i] = mode == mass_mode::whole_line ? 1.0 : kernel.half_line_mass(x[i]);
        mass_max = std::max(mass_max, mass[i]);
    }

    // Dense operator matrix, row-major. theta_j are trapezoid weights.
    std::vector<double> A(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double theta = (j == 0 || j == n - 1) ? 0.5 : 1.0;
            const double dist = (i >= j ? x[i] - x[j] : x[j] - x[i]);
            A[i * n + j] = d * theta * kernel.evaluate(dist) * h;
        }
        A[i * n + i] += a0 - d * mass[i];
    }

    // Shift so the matrix is entrywise nonnegative with positive diagonal,
    // then power-iterate. Collatz-Wielandt ratios bracket the Perron value.
    const double shift = d * mass_max + std::abs(a0) + 1.0;
    std::vector<double> v(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(m);
        v[i] = 0.05 + std::sin(std::numbers::pi * t);
        if (v[i] <= 0.0) v[i] = 0.05;
    }

    double lambda_shifted = 0.0;
    std::size_t it = 0;
    bool converged = false;
    while (it < opt.max_iterations) {
        ++it;
        double rmin = std::numeric_limits<double>::infinity();
        double rmax = 0.0;
        double sup = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &A[i * n];
            double acc = shift * v[i];
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
            y[i] = acc;
            const double ratio = acc / v[i];
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
            sup = std::max(sup, std::abs(acc));
        }
        if (!(sup > 0.0) || !std::isfinite(sup)) {
            throw numerical_error("principal_eigenvalue: power iteration degenerated");
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / sup;
        lambda_shifted = 0.5 * (rmin + rmax);
        if (rmax - rmin <= opt.rel_tol * std::abs(rmax)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw numerical_error(
            "principal_eigenvalue: power iteration failed to converge within " +
            std::to_string(opt.max_iterations) + " iterations");
    }

    eigen_result res;
    res.lambda_p = lambda_shifted - shift;
    res.iterations = it;
    res.spacing = h;
    res.x = std::move(x);
    double sup = 0.0;
    for (double t : v) sup = std::max(sup, std::abs(t));
    res.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.phi[i] = v[i] / sup;

    double rnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &A[i * n];
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * res.phi[j];
        rnorm = std::max(rnorm, std::abs(acc - res.lambda_p * res.phi[i]));
    }
    res.residual = rnorm;
    if (rnorm > opt.residual_tol) {
        throw numerical_error("principal_eigenvalue: residual " + std::to_string(rnorm) +
                              " exceeds tolerance");
    }
    return res;
}

/// Interval length at which the principal eigenvalue of L + r2 crosses zero.
/// Exists iff 0 < r2 < d/2 (half line) resp. 0 < r2 < d (whole line); outside
/// that range lambda_p stays one-signed and the request is refused.
///
/// The bisection evaluates a fixed discrete family: the interval [0,l] (or a
/// centered one of length l) meshed with a constant number of subintervals,
/// so lambda_p(l) varies continuously in l and the zero can be located to
/// |lambda_p| <= lambda_tol. The returned spacing/intervals reproduce the
/// discretization at which that residual holds.
struct critical_length_result {
    double length = 0.0;
    double lambda_at_length = 0.0;
    double spacing = 0.0;
    std::size_t intervals = 0;
    std::size_t evaluations = 0;
};

inline critical_length_result critical_length(const kernel_spec& kernel, double d,
                                              double r2, mass_mode mode,
                                              double lambda_tol = 1e-6,
                                              double dx_target = 0.0,
                                              const eigen_options& opt = {}) {
    if (!(d > 0.0) || !(r2 > 0.0)) {
        throw contract_violation("critical_length: d and r2 must be positive");
    }
    const double cap = mode == mass_mode::half_line ? 0.5 * d : d;
    if (!(r2 < cap)) {
        throw no_critical_length(
            "no finite critical length: the principal eigenvalue is positive for every "
            "interval length when r2 >= " +
            std::string(mode == mass_mode::half_line ? "d/2" : "d") +
            " (unconditional spreading regime)");
    }
    const double scale = kernel.length_scale();
    if (dx_target <= 0.0) dx_target = scale / 12.0;

    std::size_t evals = 0;
    auto lam_adaptive = [&](double l) {
        ++evals;
        const auto mm = static_cast<std::size_t>(
            std::max<long long>(8, std::llround(std::ceil(l / dx_target - 1e-12))));
        const double a = mode == mass_mode::half_line ? 0.0 : -0.5 * l;
        const double b = mode == mass_mode::half_line ? l : 0.5 * l;
        return principal_eigenvalue(kernel, d, r2, a, b, mode, l / static_cast<double>(mm),
                                    opt)
            .lambda_p;
    };

    // Bracket the sign change; lambda_p is increasing in l with negative
    // small-length limit and positive large-length limit.
    double lo = std::max(dx_target, 1e-3 * scale);
    double lam_lo = lam_adaptive(lo);
    while (lam_lo >= 0.0 && lo > 1e-8 * scale) {
        lo *= 0.25;
        lam_lo = lam_adaptive(lo);
    }
    if (lam_lo >= 0.0) {
        throw numerical_error("critical_length: failed to find a negative lower bracket");
    }
    double hi = std::max(2.0 * scale, 4.0 * lo);
    double lam_hi = lam_adaptive(hi);
    while (lam_hi <= 0.0) {
        hi *= 2.0;
        if (hi > 512.0 * scale) {
            throw numerical_error(
                "critical_length: no sign change below 512 kernel scales");
        }
        lam_hi = lam_adaptive(hi);
    }

    // Freeze one mesh family for the bisection so lambda(l) is continuous.
    const auto m = static_cast<std::size_t>(
        std::max<long long>(8, std::llround(std::ceil(hi / dx_target - 1e-12))));
    auto lam_fixed = [&](double l) {
        ++evals;
        const double a = mode == mass_mode::half_line ? 0.0 : -0.5 * l;
        const double b = mode == mass_mode::half_line ? l : 0.5 * l;
        return principal_eigenvalue(kernel, d, r2, a, b, mode, l / static_cast<double>(m),
                                    opt)
            .lambda_p;
    };
    lam_lo = lam_fixed(lo);
    lam_hi = lam_fixed(hi);
    if (lam_lo >= 0.0 || lam_hi <= 0.0) {
        // The frozen family shifted a marginal endpoint; widen slightly.
        if (lam_lo >= 0.0) {
            lo *= 0.5;
            lam_lo = lam_fixed(lo);
        }
        if (lam_hi <= 0.0) {
            hi *= 2.0;
            lam_hi = lam_fixed(hi);
        }
        if (lam_lo >= 0.0 || lam_hi <= 0.0) {
            throw numerical_error("critical_length: bracket lost under mesh freezing");
        }
    }

    critical_length_result out;
    out.intervals = m;
    double mid = 0.5 * (lo + hi);
    double lam_mid = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        lam_mid = lam_fixed(mid);
        if (std::abs(lam_mid) <= lambda_tol) {
            out.length = mid;
            out.lambda_at_length = lam_mid;
            out.spacing = mid / static_cast<double>(m);
            out.evaluations = evals;
            return out;
        }
        (lam_mid < 0.0 ? lo : hi) = mid;
        if ((hi - lo) < 1e-14 * mid) break;
    }
    throw numerical_error(
        "critical_length: bisection stalled before reaching the eigenvalue tolerance");
}

}  // namespace frontlab
