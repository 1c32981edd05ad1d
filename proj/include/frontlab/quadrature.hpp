#pragma once

#include <cmath>
#include <cstddef>

#include "frontlab/errors.hpp"

namespace frontlab {

// Adaptive Simpson quadrature with absolute tolerance. Used where no closed
// form exists (tabulated-kernel moments, verification integrals in tests).
// The recursion carries the classic Richardson correction term S2 + (S2-S)/15.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-12,
                        int max_depth = 48) {
    auto simpson = [](double fa, double fm, double fb, double h) {
        return h / 6.0 * (fa + 4.0 * fm + fb);
    };

    struct helper {
        const F& f;
        int max_depth;

        double recurse(double a, double m, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) const {
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double hl = m - a;
            const double hr = b - m;
            const double left = hl / 6.0 * (fa + 4.0 * flm + fm);
            const double right = hr / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth >= max_depth || std::abs(delta) <= 15.0 * tol) {
                return left + right + delta / 15.0;
            }
            return recurse(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
                   recurse(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        }
    };

    if (!(b >= a)) {
        throw contract_violation("adaptive_simpson: interval end precedes start");
    }
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    helper h{f, max_depth};
    return h.recurse(a, m, b, fa, fm, fb, simpson(fa, fm, fb, b - a), abs_tol, 0);
}

}  // namespace frontlab
