#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/quadrature.hpp"

namespace frontlab {

enum class kernel_family { triangle, laplace, gaussian, algebraic, tabulated };

inline const char* kernel_family_name(kernel_family f) {
    switch (f) {
        case kernel_family::triangle: return "triangle";
        case kernel_family::laplace: return "laplace";
        case kernel_family::gaussian: return "gaussian";
        case kernel_family::algebraic: return "algebraic";
        case kernel_family::tabulated: return "tabulated";
    }
    return "?";
}

/// A dispersal kernel J: even, nonnegative, continuous, bounded, J(0) > 0,
/// with total integral 1. Tail masses and moments come from closed forms for
/// the analytic families; the tabulated family integrates its piecewise-linear
/// interpolant exactly and is treated as compactly supported on its sample
/// range.
///
/// The light/heavy tail structure is exposed as two flags:
///   satisfies_j1(): finite half first moment (∫_0^∞ z J(z) dz < ∞)
///   satisfies_j2(): finite exponential moment (∫_0^∞ J e^{λz} dz < ∞, some λ>0)
/// For tabulated kernels the flags are declared at load, never inferred.
class kernel_spec {
public:
    static kernel_spec triangle(double radius) {
        require_positive(radius, "triangle radius");
        kernel_spec k;
        k.family_ = kernel_family::triangle;
        k.p1_ = radius;
        k.norm_ = 1.0 / radius;
        k.j1_ = true;
        k.j2_ = true;
        return k;
    }

    static kernel_spec laplace(double scale) {
        require_positive(scale, "laplace scale");
        kernel_spec k;
        k.family_ = kernel_family::laplace;
        k.p1_ = scale;
        k.norm_ = 1.0 / (2.0 * scale);
        k.j1_ = true;
        k.j2_ = true;
        return k;
    }

    static kernel_spec gaussian(double scale) {
        require_positive(scale, "gaussian scale");
        kernel_spec k;
        k.family_ = kernel_family::gaussian;
        k.p1_ = scale;
        k.norm_ = 1.0 / (scale * std::sqrt(2.0 * std::numbers::pi));
        k.j1_ = true;
        k.j2_ = true;
        return k;
    }

    // J(x) = c (shift + |x|)^{-gamma} with c = (gamma-1) shift^{gamma-1} / 2,
    // so that the total integral is exactly 1 for every gamma > 1.
    static kernel_spec algebraic(double gamma, double shift = 1.0) {
        if (!(gamma > 1.0)) {
            throw config_error("algebraic kernel requires gamma > 1, got " +
                               std::to_string(gamma));
        }
        require_positive(shift, "algebraic shift");
        kernel_spec k;
        k.family_ = kernel_family::algebraic;
        k.p1_ = gamma;
        k.p2_ = shift;
        k.norm_ = 0.5 * (gamma - 1.0) * std::pow(shift, gamma - 1.0);
        k.j1_ = gamma > 2.0;
        k.j2_ = false;
        return k;
    }

    // Samples of J on [0, x_back] (even extension implied). The raw values are
    // rescaled so the interpolant integrates to exactly 1; queries beyond the
    // sample range are refused rather than extrapolated. Tail-moment structure
    // cannot be inferred from a finite table, so the flags are declared.
    static kernel_spec tabulated(std::vector<double> x, std::vector<double> y,
                                 bool declares_j1, bool declares_j2) {
        if (x.size() != y.size()) {
            throw contract_violation("tabulated kernel: sample arrays differ in length");
        }
        if (x.size() < 3) {
            throw config_error("tabulated kernel needs at least 3 samples");
        }
        if (x.front() != 0.0) {
            throw config_error("tabulated kernel samples must start at x = 0");
        }
        for (std::size_t i = 1; i < x.size(); ++i) {
            if (!(x[i] > x[i - 1])) {
                throw config_error("tabulated kernel abscissae must be strictly increasing");
            }
        }
        double ymax = 0.0;
        for (double v : y) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw config_error("tabulated kernel values must be finite and nonnegative");
            }
            ymax = std::max(ymax, v);
        }
        if (!(y.front() > 0.0)) {
            throw config_error("tabulated kernel requires J(0) > 0");
        }
        if (y.back() > 1e-6 * ymax) {
            throw config_error(
                "tabulated kernel must decay to ~0 at the end of its range; "
                "the sample range is treated as the support");
        }
        // raw half-integral of the interpolant (trapezoid is exact here)
        double half = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            half += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
        }
        if (!(half > 0.0)) {
            throw config_error("tabulated kernel has zero mass");
        }
        kernel_spec k;
        k.family_ = kernel_family::tabulated;
        k.norm_ = 0.5 / half;
        k.tx_ = std::move(x);
        k.ty_ = std::move(y);
        for (double& v : k.ty_) v *= k.norm_;
        k.j1_ = declares_j1;
        k.j2_ = declares_j2;
        k.build_tab_prefixes();
        return k;
    }

    kernel_family family() const { return family_; }
    bool satisfies_j1() const { return j1_; }
    bool satisfies_j2() const { return j2_; }
    double normalization_constant() const { return norm_; }

    // Family parameters, meaningful per family (radius/scale/gamma/shift).
    double param1() const { return p1_; }
    double param2() const { return p2_; }

    // Number of stored samples; zero for the closed-form families.
    std::size_t sample_count() const { return tx_.size(); }

    double evaluate(double x) const {
        const double r = std::abs(x);
        switch (family_) {
            case kernel_family::triangle:
                return r >= p1_ ? 0.0 : norm_ * (1.0 - r / p1_);
            case kernel_family::laplace:
                return norm_ * std::exp(-r / p1_);
            case kernel_family::gaussian: {
                const double z = r / p1_;
                return norm_ * std::exp(-0.5 * z * z);
            }
            case kernel_family::algebraic:
                return norm_ * std::pow(p2_ + r, -p1_);
            case kernel_family::tabulated:
                return tab_interp(r);
        }
        return 0.0;
    }

    // T(s) = ∫_s^∞ J(z) dz for s >= 0. T(0) = 1/2.
    double tail_mass(double s) const {
        if (!(s >= 0.0)) {
            throw contract_violation("tail_mass requires s >= 0");
        }
        switch (family_) {
            case kernel_family::triangle: {
                if (s >= p1_) return 0.0;
                const double d = p1_ - s;
                return d * d / (2.0 * p1_ * p1_);
            }
            case kernel_family::laplace:
                return 0.5 * std::exp(-s / p1_);
            case kernel_family::gaussian:
                return 0.5 * std::erfc(s / (p1_ * std::numbers::sqrt2));
            case kernel_family::algebraic:
                // c (shift+s)^{1-gamma} / (gamma-1) = (shift/(shift+s))^{gamma-1} / 2
                return 0.5 * std::pow(p2_ / (p2_ + s), p1_ - 1.0);
            case kernel_family::tabulated:
                return tab_tail(s);
        }
        return 0.0;
    }

    // ∫_s^∞ T(z) dz = ∫_s^∞ (z-s) J(z) dz. Finite iff the first moment is.
    double tail_mass_integral(double s) const {
        if (!(s >= 0.0)) {
            throw contract_violation("tail_mass_integral requires s >= 0");
        }
        switch (family_) {
            case kernel_family::triangle: {
                if (s >= p1_) return 0.0;
                const double d = p1_ - s;
                return d * d * d / (6.0 * p1_ * p1_);
            }
            case kernel_family::laplace:
                return 0.5 * p1_ * std::exp(-s / p1_);
            case kernel_family::gaussian:
                return p1_ * p1_ * evaluate(s) - s * tail_mass(s);
            case kernel_family::algebraic: {
                if (!(p1_ > 2.0)) {
                    throw no_semi_wave(
                        "tail_mass_integral diverges: algebraic kernel with gamma <= 2 "
                        "has infinite first moment");
                }
                return 0.5 * std::pow(p2_, p1_ - 1.0) * std::pow(p2_ + s, 2.0 - p1_) /
                       (p1_ - 2.0);
            }
            case kernel_family::tabulated:
                return tab_tail_integral(s);
        }
        return 0.0;
    }

    // j(x) = ∫_0^∞ J(x-y) dy; equals 1 - T(x) for x >= 0 and T(-x) for x < 0.
    double half_line_mass(double x) const {
        return x >= 0.0 ? 1.0 - tail_mass(x) : tail_mass(-x);
    }

    // ∫_0^∞ z J(z) dz. Infinite (throws) when the J1 flag is off.
    double half_first_moment() const {
        switch (family_) {
            case kernel_family::triangle:
                return p1_ / 6.0;
            case kernel_family::laplace:
                return 0.5 * p1_;
            case kernel_family::gaussian:
                return p1_ / std::sqrt(2.0 * std::numbers::pi);
            case kernel_family::algebraic:
                if (!(p1_ > 2.0)) {
                    throw no_semi_wave(
                        "half_first_moment diverges for algebraic kernel with gamma <= 2");
                }
                return 0.5 * p2_ / (p1_ - 2.0);
            case kernel_family::tabulated:
                return tab_first_moment();
        }
        return 0.0;
    }

    // ∫_0^M z J(z) dz, numeric. Intended for divergence probes in tests.
    double first_moment_partial(double up_to) const {
        if (!(up_to >= 0.0)) {
            throw contract_violation("first_moment_partial requires a nonnegative bound");
        }
        // Clamp to the support: beyond it the integrand is identically zero,
        // and sampling only zeros would fool the adaptive rule.
        double hi = up_to;
        if (const auto s = compact_support()) hi = std::min(hi, *s);
        return adaptive_simpson([this](double z) { return z * evaluate(z); }, 0.0, hi,
                                1e-13);
    }

    // M(λ) = ∫_R J(z) e^{λz} dz, defined for |λ| < mgf_abscissa().
    double mgf(double lam) const {
        if (!j2_) {
            throw light_tail_required("mgf undefined: kernel lacks a finite exponential moment");
        }
        const double l = std::abs(lam);
        switch (family_) {
            case kernel_family::triangle: {
                const double t = l * p1_;
                if (t < 1e-5) {
                    // series of 2(cosh t - 1)/t^2
                    return 1.0 + t * t / 12.0 + t * t * t * t / 360.0;
                }
                return 2.0 * (std::cosh(t) - 1.0) / (t * t);
            }
            case kernel_family::laplace: {
                const double z = l * p1_;
                if (!(z < 1.0)) {
                    throw numerical_error("laplace mgf evaluated at or beyond 1/scale");
                }
                return 1.0 / (1.0 - z * z);
            }
            case kernel_family::gaussian: {
                const double z = l * p1_;
                return std::exp(0.5 * z * z);
            }
            case kernel_family::algebraic:
                throw light_tail_required("algebraic kernels have no exponential moment");
            case kernel_family::tabulated:
                return tab_mgf(l);
        }
        return 1.0;
    }

    // Supremum of λ for which mgf(λ) is finite.
    double mgf_abscissa() const {
        if (!j2_) return 0.0;
        if (family_ == kernel_family::laplace) return 1.0 / p1_;
        return std::numeric_limits<double>::infinity();
    }

    std::optional<double> compact_support() const {
        if (family_ == kernel_family::triangle) return p1_;
        if (family_ == kernel_family::tabulated) return tx_.back();
        return std::nullopt;
    }

    // A representative length for grid sizing: the natural family scale, or
    // the half-mass radius (T(r) = 1/4) for tabulated data.
    double length_scale() const {
        switch (family_) {
            case kernel_family::triangle:
            case kernel_family::laplace:
            case kernel_family::gaussian:
                return p1_;
            case kernel_family::algebraic:
                return p2_;
            case kernel_family::tabulated: {
                double lo = 0.0, hi = tx_.back();
                for (int i = 0; i < 200; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    (tab_tail(mid) > 0.25 ? lo : hi) = mid;
                }
                return std::max(0.5 * (lo + hi), 1e-3 * tx_.back());
            }
        }
        return 1.0;
    }

    // Distance beyond which |J| < eps * J(0); grid-span for table truncation.
    double effective_radius(double eps = 1e-16) const {
        switch (family_) {
            case kernel_family::triangle: return p1_;
            case kernel_family::laplace: return -p1_ * std::log(eps);
            case kernel_family::gaussian: return p1_ * std::sqrt(-2.0 * std::log(eps));
            case kernel_family::algebraic:
                return p2_ * (std::pow(eps, -1.0 / p1_) - 1.0);
            case kernel_family::tabulated: return tx_.back();
        }
        return std::numeric_limits<double>::infinity();
    }

private:
    kernel_spec() = default;

    static void require_positive(double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw config_error(std::string(what) + " must be positive and finite");
        }
    }

    double tab_interp(double r) const {
        if (r > tx_.back()) {
            throw numerical_error(
                "tabulated kernel queried outside its sample range (extrapolation refused)");
        }
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), r);
        if (it == tx_.begin()) return ty_.front();
        const std::size_t i = static_cast<std::size_t>(it - tx_.begin());
        if (i >= tx_.size()) return ty_.back();
        const double t = (r - tx_[i - 1]) / (tx_[i] - tx_[i - 1]);
        return ty_[i - 1] + t * (ty_[i] - ty_[i - 1]);
    }

    void build_tab_prefixes() {
        const std::size_t n = tx_.size();
        tp_.assign(n, 0.0);   // ∫_0^{x_i} J
        tq_.assign(n, 0.0);   // ∫_0^{x_i} T(z) dz with T(z) = half - ∫_0^z J
        for (std::size_t i = 1; i < n; ++i) {
            tp_[i] = tp_[i - 1] + 0.5 * (ty_[i] + ty_[i - 1]) * (tx_[i] - tx_[i - 1]);
        }
        const double half = tp_.back();
        for (std::size_t i = 1; i < n; ++i) {
            const double h = tx_[i] - tx_[i - 1];
            // On the segment, ∫ T = h*(half - P_{i-1}) - ∫_0^h ∫ J, with the inner
            // double integral of the linear interpolant in closed form.
            const double a = ty_[i - 1];
            const double b = (ty_[i] - ty_[i - 1]) / h;
            const double inner = a * h * h / 2.0 + b * h * h * h / 6.0;
            tq_[i] = tq_[i - 1] + h * (half - tp_[i - 1]) - inner;
        }
    }

    double tab_tail(double s) const {
        if (s >= tx_.back()) return 0.0;
        const double half = tp_.back();
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), s);
        const std::size_t i = it == tx_.begin() ? 1 : static_cast<std::size_t>(it - tx_.begin());
        const double h = s - tx_[i - 1];
        const double a = ty_[i - 1];
        const double b = (ty_[i] - ty_[i - 1]) / (tx_[i] - tx_[i - 1]);
        const double seg = a * h + 0.5 * b * h * h;
        return half - (tp_[i - 1] + seg);
    }

    double tab_tail_integral(double s) const {
        if (s >= tx_.back()) return 0.0;
        const double total = tq_.back();
        const auto it = std::upper_bound(tx_.begin(), tx_.end(), s);
        const std::size_t i = it == tx_.begin() ? 1 : static_cast<std::size_t>(it - tx_.begin());
        const double h = s - tx_[i - 1];
        const double half = tp_.back();
        const double a = ty_[i - 1];
        const double b = (ty_[i] - ty_[i - 1]) / (tx_[i] - tx_[i - 1]);
        const double inner = a * h * h / 2.0 + b * h * h * h / 6.0;
        const double q_at_s = tq_[i - 1] + h * (half - tp_[i - 1]) - inner;
        return total - q_at_s;
    }

    double tab_first_moment() const {
        double m = 0.0;
        for (std::size_t i = 1; i < tx_.size(); ++i) {
            const double x0 = tx_[i - 1], x1 = tx_[i];
            const double h = x1 - x0;
            const double a = ty_[i - 1];
            const double b = (ty_[i] - ty_[i - 1]) / h;
            // ∫ z (a + b (z - x0)) dz over [x0, x1]
            m += a * 0.5 * (x1 * x1 - x0 * x0) +
                 b * ((x1 * x1 * x1 - x0 * x0 * x0) / 3.0 -
                      x0 * 0.5 * (x1 * x1 - x0 * x0));
        }
        return m;
    }

    double tab_mgf(double l) const {
        if (l < 1e-9) return 1.0;
        // 2 ∫_0^X J(z) cosh(λz) dz, per-segment closed form for linear J.
        double acc = 0.0;
        for (std::size_t i = 1; i < tx_.size(); ++i) {
            const double x0 = tx_[i - 1], x1 = tx_[i];
            const double a0 = ty_[i - 1];
            const double b = (ty_[i] - ty_[i - 1]) / (x1 - x0);
            const double a = a0 - b * x0;  // J(z) = a + b z on the segment
            auto prim = [&](double z) {
                return (a + b * z) * std::sinh(l * z) / l - b * std::cosh(l * z) / (l * l);
            };
            acc += prim(x1) - prim(x0);
        }
        return 2.0 * acc;
    }

    kernel_family family_ = kernel_family::triangle;
    double p1_ = 1.0;
    double p2_ = 1.0;
    double norm_ = 1.0;
    bool j1_ = true;
    bool j2_ = true;
    std::vector<double> tx_, ty_, tp_, tq_;
};

}  // namespace frontlab
