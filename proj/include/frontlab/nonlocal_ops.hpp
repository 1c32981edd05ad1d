#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/kernels.hpp"

namespace frontlab {

/// Uniform grid. Node i sits at (base + i) * dx, so coordinates are exact
/// integer multiples of dx; the symmetric constructor places node (n-1)/2 at
/// the origin and mirror nodes at exactly opposite coordinates, which the
/// double-front stepper relies on for bitwise even/odd symmetry.
struct grid {
    double dx = 0.0;
    long base = 0;
    std::size_t n = 0;

    static grid half_line(double dx, double x_max) {
        check(dx, x_max);
        grid g;
        g.dx = dx;
        g.base = 0;
        g.n = static_cast<std::size_t>(std::llround(x_max / dx)) + 1;
        if (g.n < 2) throw contract_violation("grid needs at least 2 nodes");
        return g;
    }

    static grid symmetric(double dx, double x_max) {
        check(dx, x_max);
        const long m = std::llround(x_max / dx);
        if (m < 1) throw contract_violation("grid needs at least 2 nodes");
        grid g;
        g.dx = dx;
        g.base = -m;
        g.n = static_cast<std::size_t>(2 * m + 1);
        return g;
    }

    double coord(std::size_t i) const {
        return static_cast<double>(base + static_cast<long>(i)) * dx;
    }
    double x_min() const { return coord(0); }
    double x_max() const { return coord(n - 1); }

    // Largest node index with coord <= x, with a small forgiving nudge so a
    // position that is a node coordinate up to rounding resolves to that node.
    std::size_t floor_index(double x) const {
        const double t = x / dx - static_cast<double>(base) + 1e-9;
        if (t <= 0.0) return 0;
        const auto i = static_cast<std::size_t>(t);
        return std::min(i, n - 1);
    }

private:
    static void check(double dx, double x_max) {
        if (!(dx > 0.0) || !std::isfinite(dx)) {
            throw contract_violation("grid spacing must be positive");
        }
        if (!(x_max > 0.0) || !std::isfinite(x_max)) {
            throw contract_violation("grid extent must be positive");
        }
        if (x_max / dx > 4.0e6) {
            throw contract_violation("grid would exceed the node-count cap");
        }
    }
};

// Which mass function multiplies the local term of the operator:
// half_line uses j(x) = ∫_0^∞ J(x-y) dy, whole_line uses the constant 1.
enum class mass_mode { half_line, whole_line };

// Far-field closure for the convolution: fields are either zero beyond the
// active range or extended by their boundary value.
enum class far_field { zero, constant_extension };

enum class conv_backend { direct, fft };

namespace detail {

// Iterative radix-2 complex FFT, in place. Deterministic, no planning state.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool invert) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) *
                           (invert ? -1.0 : 1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (invert) {
        for (auto& z : a) z /= static_cast<double>(n);
    }
}

// Linear convolution out[k] = sum_j x[j] y[k-j], sizes nx and ny, via FFT.
inline std::vector<double> fft_linear_convolution(std::span<const double> x,
                                                  std::span<const double> y) {
    const std::size_t need = x.size() + y.size() - 1;
    std::size_t m = 1;
    while (m < need) m <<= 1;
    std::vector<std::complex<double>> fa(m), fb(m);
    for (std::size_t i = 0; i < x.size(); ++i) fa[i] = x[i];
    for (std::size_t i = 0; i < y.size(); ++i) fb[i] = y[i];
    fft_inplace(fa, false);
    fft_inplace(fb, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_inplace(fa, true);
    std::vector<double> out(need);
    for (std::size_t i = 0; i < need; ++i) out[i] = fa[i].real();
    return out;
}

}  // namespace detail

/// Precomputed kernel samples and diagonal mass for one (kernel, grid, mode)
/// triple. The diagonal mass is the discrete row mass: the same trapezoid
/// quadrature applied to w ≡ 1 over the full grid, plus the exact analytic
/// tail mass beyond the grid on the side(s) the mass integral covers. With
/// this choice constants are discrete steady states of the diffusion part up
/// to rounding, so the stepped system preserves its invariant boxes and the
/// comparison ordering at the 1e-12 level instead of O(dx^2). The samples
/// still converge to the continuum mass (j(x_i), or 1) at second order, and
/// the continuum values are kept alongside for reference.
struct operator_table {
    grid g;
    kernel_spec kernel;
    mass_mode mode = mass_mode::half_line;
    std::vector<double> ksamp;       // J(k dx), k = 0 .. n-1
    std::vector<double> mass;        // discrete row mass per node
    std::vector<double> mass_cont;   // continuum mass samples (j(x_i) or 1)
    std::size_t k_halfwidth = 0;     // ksamp negligible beyond this offset

    operator_table(const grid& gr, const kernel_spec& k, mass_mode m)
        : g(gr), kernel(k), mode(m) {
        if (m == mass_mode::half_line && g.base != 0) {
            throw contract_violation("half-line mass requires a grid anchored at 0");
        }
        const std::size_t n = g.n;
        ksamp.resize(n);
        for (std::size_t k2 = 0; k2 < n; ++k2) {
            ksamp[k2] = kernel.evaluate(static_cast<double>(k2) * g.dx);
        }
        const double cutoff = kernel.effective_radius();
        k_halfwidth = n - 1;
        if (std::isfinite(cutoff)) {
            const auto kc = static_cast<std::size_t>(std::ceil(cutoff / g.dx)) + 1;
            k_halfwidth = std::min(k_halfwidth, kc);
        }

        mass.resize(n);
        mass_cont.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            mass[i] = row_quadrature(i) + tail_terms(i);
            mass_cont[i] = m == mass_mode::whole_line ? 1.0
                                                      : kernel.half_line_mass(g.coord(i));
        }
    }

    double dx() const { return g.dx; }
    std::size_t size() const { return g.n; }

private:
    // Trapezoid row sum over the full grid, summed center-out in mirror pairs
    // in the same order apply_nonlocal uses.
    double row_quadrature(std::size_t i) const {
        const std::size_t n = g.n;
        const std::size_t kmax = std::min(k_halfwidth, std::max(i, n - 1 - i));
        double s = 0.0;
        for (std::size_t k = kmax; k >= 1; --k) {
            const double wl = i >= k ? end_weight(i - k) : 0.0;
            const double wr = i + k <= n - 1 ? end_weight(i + k) : 0.0;
            s += ksamp[k] * (wl + wr);
        }
        s += ksamp[0] * end_weight(i);
        return s * g.dx;
    }

    double end_weight(std::size_t j) const {
        return (j == 0 || j == g.n - 1) ? 0.5 : 1.0;
    }

    double tail_terms(std::size_t i) const {
        const std::size_t n = g.n;
        const double right = kernel.tail_mass(static_cast<double>(n - 1 - i) * g.dx);
        if (mode == mass_mode::half_line) return right;
        const double left = kernel.tail_mass(static_cast<double>(i) * g.dx);
        return left + right;
    }
};

struct conv_workspace {
    std::vector<double> scaled;
    std::vector<double> kernel_two_sided;
};

inline double closure_tails(const operator_table& tbl, std::span<const double> w,
                            std::size_t i) {
    const std::size_t n = tbl.size();
    const double right =
        w[n - 1] * tbl.kernel.tail_mass(static_cast<double>(n - 1 - i) * tbl.dx());
    if (tbl.mode == mass_mode::half_line) return right;
    const double left = w[0] * tbl.kernel.tail_mass(static_cast<double>(i) * tbl.dx());
    return left + right;
}

/// out[i] = d * [ Σ_{j in [lo,hi]} θ_j w_j J((i-j) dx) dx  (+ far-field tails)
///               - mass_i w_i ]                     for i in [out_lo, out_hi],
/// with trapezoid end-weights θ halved at the ends of the active range. Zero
/// closure drops everything beyond the range; constant extension (valid only
/// for a full-grid range) adds the boundary value times the exact analytic
/// kernel tail mass. An empty range (hi < lo) yields zero output.
///
/// The direct path sums center-out in mirrored pairs: at mirror nodes of an
/// even field the partial sums are bitwise identical, which keeps the
/// double-front scheme exactly symmetric.
inline void apply_nonlocal(const operator_table& tbl, std::span<const double> w,
                           std::size_t lo, std::size_t hi, double d,
                           far_field closure, conv_backend backend,
                           std::span<double> out, std::size_t out_lo,
                           std::size_t out_hi, conv_workspace& ws) {
    const std::size_t n = tbl.size();
    if (w.size() != n || out.size() != n) {
        throw contract_violation("apply_nonlocal: field length does not match the grid");
    }
    if (out_hi >= n || out_lo > out_hi) {
        throw contract_violation("apply_nonlocal: bad output range");
    }
    const bool empty = hi < lo;
    if (!empty && hi >= n) {
        throw contract_violation("apply_nonlocal: active range exceeds the grid");
    }
    if (closure == far_field::constant_extension && !empty &&
        (lo != 0 || hi != n - 1)) {
        throw contract_violation(
            "constant-extension closure requires the full grid as active range");
    }

    if (empty) {
        for (std::size_t i = out_lo; i <= out_hi; ++i) out[i] = 0.0;
        return;
    }

    auto& a = ws.scaled;
    a.assign(n, 0.0);
    for (std::size_t j = lo; j <= hi; ++j) a[j] = w[j];
    a[lo] *= 0.5;
    if (hi != lo) a[hi] *= 0.5;

    const double dx = tbl.dx();

    if (backend == conv_backend::fft) {
        auto& k2 = ws.kernel_two_sided;
        if (k2.size() != 2 * n - 1) {
            k2.assign(2 * n - 1, 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                k2[n - 1 + k] = tbl.ksamp[k];
                k2[n - 1 - k] = tbl.ksamp[k];
            }
        }
        const auto conv = detail::fft_linear_convolution(a, k2);
        for (std::size_t i = out_lo; i <= out_hi; ++i) {
            double s = conv[i + n - 1] * dx;
            if (closure == far_field::constant_extension) {
                s += closure_tails(tbl, w, i);
            }
            out[i] = d * (s - tbl.mass[i] * w[i]);
        }
        return;
    }

    for (std::size_t i = out_lo; i <= out_hi; ++i) {
        const std::size_t dl = i >= lo ? i - lo : lo - i;
        const std::size_t dr = hi >= i ? hi - i : i - hi;
        const std::size_t kmax =
            std::min(tbl.k_halfwidth, std::max(std::max(dl, dr), std::size_t{1}));
        double s = 0.0;
        for (std::size_t k = kmax; k >= 1; --k) {
            const double wl = i >= k ? a[i - k] : 0.0;
            const double wr = i + k <= n - 1 ? a[i + k] : 0.0;
            s += tbl.ksamp[k] * (wl + wr);
        }
        s += tbl.ksamp[0] * a[i];
        s *= dx;
        if (closure == far_field::constant_extension) {
            s += closure_tails(tbl, w, i);
        }
        out[i] = d * (s - tbl.mass[i] * w[i]);
    }
}

/// Convenience overload: full output over the grid, fresh workspace.
inline std::vector<double> apply_nonlocal(const operator_table& tbl,
                                          std::span<const double> w, std::size_t lo,
                                          std::size_t hi, double d,
                                          far_field closure = far_field::zero,
                                          conv_backend backend = conv_backend::direct) {
    conv_workspace ws;
    std::vector<double> out(tbl.size(), 0.0);
    apply_nonlocal(tbl, w, lo, hi, d, closure, backend, out, 0, tbl.size() - 1, ws);
    return out;
}

/// μ ∫_{x_lo}^{h} v(x) T(h - x) dx with trapezoid over the nodes in
/// [x_lo, floor(h)] and the fractional end cell [x_floor, h] integrated with
/// v interpolated linearly down to v(h) = 0 (midpoint rule on the cell).
/// Nonnegative for nonnegative v; zero iff v vanishes on the range.
inline double boundary_flux_right(const operator_table& tbl, std::span<const double> v,
                                  std::size_t lo, double h, double mu) {
    const std::size_t n = tbl.size();
    if (v.size() != n) {
        throw contract_violation("boundary_flux_right: field length does not match grid");
    }
    if (!(h >= tbl.g.coord(lo)) || !(h <= tbl.g.x_max())) {
        throw contract_violation("boundary_flux_right: front position outside the grid");
    }
    const double dx = tbl.dx();
    const std::size_t hi = tbl.g.floor_index(h);
    double s = 0.0;
    if (hi > lo) {
        for (std::size_t i = lo; i <= hi; ++i) {
            if (v[i] < 0.0) {
                throw contract_violation("boundary_flux_right: negative density sample");
            }
            const double th = (i == lo || i == hi) ? 0.5 : 1.0;
            const double dist = h - tbl.g.coord(i);
            s += th * v[i] * tbl.kernel.tail_mass(std::max(dist, 0.0)) * dx;
        }
    } else if (v[hi] < 0.0) {
        throw contract_violation("boundary_flux_right: negative density sample");
    }
    const double frac = h - tbl.g.coord(hi);
    if (frac > 0.0) {
        s += 0.5 * v[hi] * tbl.kernel.tail_mass(0.5 * frac) * frac;
    }
    return mu * s;
}

/// -μ ∫_{g}^{x_hi} v(x) T(x - g) dx, the mirror of boundary_flux_right; the
/// node loop runs from the right end downward so that on a mirrored
/// configuration the partial sums match boundary_flux_right bitwise.
/// Nonpositive for nonnegative v.
inline double boundary_flux_left(const operator_table& tbl, std::span<const double> v,
                                 std::size_t hi, double gpos, double mu) {
    const std::size_t n = tbl.size();
    if (v.size() != n) {
        throw contract_violation("boundary_flux_left: field length does not match grid");
    }
    if (hi >= n) throw contract_violation("boundary_flux_left: bad range");
    if (!(gpos <= tbl.g.coord(hi)) || !(gpos >= tbl.g.x_min())) {
        throw contract_violation("boundary_flux_left: front position outside the grid");
    }
    const double dx = tbl.dx();
    std::size_t lo = tbl.g.floor_index(gpos);
    if (tbl.g.coord(lo) < gpos) ++lo;  // first node at or right of gpos
    double s = 0.0;
    if (hi > lo) {
        for (std::size_t i = hi + 1; i-- > lo;) {
            if (v[i] < 0.0) {
                throw contract_violation("boundary_flux_left: negative density sample");
            }
            const double th = (i == hi || i == lo) ? 0.5 : 1.0;
            const double dist = tbl.g.coord(i) - gpos;
            s += th * v[i] * tbl.kernel.tail_mass(std::max(dist, 0.0)) * dx;
        }
    } else if (v[lo] < 0.0) {
        throw contract_violation("boundary_flux_left: negative density sample");
    }
    const double frac = tbl.g.coord(lo) - gpos;
    if (frac > 0.0) {
        s += 0.5 * v[lo] * tbl.kernel.tail_mass(0.5 * frac) * frac;
    }
    return -mu * s;
}

}  // namespace frontlab
