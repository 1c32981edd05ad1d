#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/kernels.hpp"
#include "frontlab/nonlocal_ops.hpp"

namespace frontlab {

/// Parameters of the two-species system. Both reactions are cooperative in
/// the other species, which is what makes the explicit scheme order
/// preserving under the step-size bound below.
struct model_params {
    double d1 = 1.0;
    double d2 = 1.0;
    double r1 = 1.0;
    double r2 = 1.0;
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    double mu = 1.0;
    kernel_spec j1 = kernel_spec::triangle(1.0);
    kernel_spec j2 = kernel_spec::triangle(1.0);

    // mu = 0 is allowed here so a frozen-front run can be set up directly;
    // the config layer is stricter and demands mu > 0.
    void validate() const {
        auto positive = [](double x, const char* name) {
            if (!(x > 0.0) || !std::isfinite(x)) {
                throw config_error(std::string(name) + " must be positive and finite");
            }
        };
        positive(d1, "d1");
        positive(d2, "d2");
        positive(r1, "r1");
        positive(r2, "r2");
        positive(a, "a");
        positive(b, "b");
        positive(c, "c");
        if (!(mu >= 0.0) || !std::isfinite(mu)) {
            throw config_error("mu must be nonnegative and finite");
        }
    }
};

inline double reaction_f1(const model_params& p, double u, double v) {
    return p.r1 * u * (p.a - u - u / (1.0 + p.b * v));
}

inline double reaction_f2(const model_params& p, double u, double v) {
    return p.r2 * v * (1.0 - v - v / (1.0 + p.c * u));
}

// Bound on |∂f/∂(own variable)| + |∂f/∂(other variable)| over the invariant
// box [0,K1]x[0,K2]; used for the step-size restriction.
inline double reaction_lipschitz(const model_params& p, double k1, double k2) {
    const double l1 = p.r1 * (p.a + 4.0 * k1) + p.r1 * p.b * k1 * k1;
    const double l2 = p.r2 * (1.0 + 4.0 * k2) + p.r2 * p.c * k2 * k2;
    return std::max(l1, l2);
}

/// Largest explicit step that keeps the update map monotone and the box
/// [0,K1]x[0,K2] invariant, including the front-ordering margin mu*K2/2
/// (the boundary flux of two ordered runs can differ by at most mu*K2/2 per
/// unit front gap, so this term keeps front ordering from overshooting).
inline double dt_positivity_bound(const model_params& p, double k1, double k2,
                                  double mass_max = 1.0) {
    const double denom = std::max(p.d1, p.d2) * mass_max +
                         reaction_lipschitz(p, k1, k2) + 0.5 * p.mu * k2;
    if (!(denom > 0.0)) throw numerical_error("degenerate step-size bound");
    return 1.0 / denom;
}

struct front_sim_options {
    double dt_override = 0.0;  // 0: derive from the positivity bound
    double dt_factor = 0.9;
    conv_backend backend = conv_backend::direct;
    bool check_invariants = true;
    double invariant_tol = 1e-12;
};

struct front_record {
    double t = 0.0;
    double h = 0.0;
    double g = 0.0;
    double sup_u = 0.0;
    double sup_v = 0.0;
    std::vector<double> u_probe;
    std::vector<double> v_probe;
};

struct front_snapshot {
    double t = 0.0;
    double h = 0.0;
    double g = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

struct front_trajectory {
    grid mesh{};
    double dt = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    std::vector<front_record> records;
    std::vector<front_snapshot> snapshots;
    std::vector<double> u_final;
    std::vector<double> v_final;
    double t_final = 0.0;
    double h_final = 0.0;
    double g_final = 0.0;
    bool edge_hit = false;
    std::size_t steps = 0;
};

namespace detail {

inline void check_initial_field(std::span<const double> w, std::size_t n,
                                const char* name) {
    if (w.size() != n) {
        throw contract_violation(std::string(name) +
                                 ": initial field length does not match the grid");
    }
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw contract_violation(std::string(name) +
                                     ": initial field must be finite and nonnegative");
        }
    }
}

inline double sup_of(std::span<const double> w) {
    double m = 0.0;
    for (double x : w) m = std::max(m, x);
    return m;
}

inline void guard_box(std::span<const double> w, double hi, double tol, double t,
                      const grid& g, const char* name) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!std::isfinite(w[i]) || w[i] < -tol || w[i] > hi + tol) {
            throw invariant_breach(std::string(name) + " left [0," +
                                   std::to_string(hi) + "] at t=" + std::to_string(t) +
                                   ", x=" + std::to_string(g.coord(i)) +
                                   ", value=" + std::to_string(w[i]));
        }
    }
}

}  // namespace detail

/// Half-line system: u on [0, x_max] with constant extension beyond the
/// truncation, v supported on [0, h(t)) with h driven by the boundary flux.
/// Fully explicit; each step uses the previous step's fields everywhere, so
/// ordered initial data stay ordered step by step (up to rounding) and the
/// invariant box is preserved exactly.
class single_front_stepper {
public:
    single_front_stepper(const model_params& p, const grid& g,
                         std::vector<double> u0, std::vector<double> v0, double h0,
                         const front_sim_options& opt = {})
        : p_(p),
          g_(g),
          t1_(g, p.j1, mass_mode::half_line),
          t2_(g, p.j2, mass_mode::half_line),
          u_(std::move(u0)),
          v_(std::move(v0)),
          h_(h0),
          opt_(opt) {
        p_.validate();
        detail::check_initial_field(u_, g_.n, "u0");
        detail::check_initial_field(v_, g_.n, "v0");
        if (!(h0 > 0.0) || !(h0 < g_.x_max())) {
            throw contract_violation("initial front must lie inside the grid");
        }
        for (std::size_t i = 0; i < g_.n; ++i) {
            if (g_.coord(i) >= h0 && v_[i] != 0.0) {
                throw contract_violation("initial v must vanish at and beyond the front");
            }
        }
        k1_ = std::max(detail::sup_of(u_), p_.a);
        k2_ = std::max(detail::sup_of(v_), 1.0);
        const double mmax = std::max(detail::sup_of(t1_.mass), detail::sup_of(t2_.mass));
        dt_ = opt_.dt_override > 0.0
                  ? opt_.dt_override
                  : opt_.dt_factor * dt_positivity_bound(p_, k1_, k2_, mmax);
        lu_.assign(g_.n, 0.0);
        lv_.assign(g_.n, 0.0);
        un_.assign(g_.n, 0.0);
        vn_.assign(g_.n, 0.0);
        act_hi_ = active_hi(h_);
    }

    void step() {
        if (edge_) {
            throw contract_violation("stepping a front that already hit the grid edge");
        }
        const std::size_t n = g_.n;
        const double flux = boundary_flux_right(t2_, v_, 0, h_, p_.mu);
        if (!(flux >= 0.0)) {
            throw invariant_breach("boundary flux turned negative at t=" +
                                   std::to_string(t_));
        }
        apply_nonlocal(t1_, u_, 0, n - 1, p_.d1, far_field::constant_extension,
                       opt_.backend, lu_, 0, n - 1, ws1_);
        apply_nonlocal(t2_, v_, 0, act_hi_, p_.d2, far_field::zero, opt_.backend, lv_,
                       0, act_hi_, ws2_);

        for (std::size_t i = 0; i < n; ++i) {
            un_[i] = u_[i] + dt_ * (lu_[i] + reaction_f1(p_, u_[i], v_[i]));
        }
        for (std::size_t i = 0; i <= act_hi_; ++i) {
            vn_[i] = v_[i] + dt_ * (lv_[i] + reaction_f2(p_, u_[i], v_[i]));
        }
        for (std::size_t i = act_hi_ + 1; i < n; ++i) vn_[i] = 0.0;

        double h_new = h_ + dt_ * flux;
        if (opt_.check_invariants) {
            detail::guard_box(un_, k1_, opt_.invariant_tol, t_, g_, "u");
            detail::guard_box(vn_, k2_, opt_.invariant_tol, t_, g_, "v");
        }
        if (h_new >= g_.x_max()) {
            h_new = g_.x_max();
        }
        u_.swap(un_);
        v_.swap(vn_);
        h_ = h_new;
        act_hi_ = active_hi(h_);
        edge_ = h_ > g_.x_max() - 2.0 * g_.dx;
        t_ += dt_;
        ++steps_;
    }

    front_record record(const std::vector<double>& probes) const {
        front_record r;
        r.t = t_;
        r.h = h_;
        r.g = 0.0;
        r.sup_u = detail::sup_of(u_);
        r.sup_v = detail::sup_of(v_);
        r.u_probe.reserve(probes.size());
        r.v_probe.reserve(probes.size());
        for (double x : probes) {
            const std::size_t i = g_.floor_index(x);
            r.u_probe.push_back(u_[i]);
            r.v_probe.push_back(v_[i]);
        }
        return r;
    }

    const grid& mesh() const { return g_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& v() const { return v_; }
    double h() const { return h_; }
    double g_front() const { return 0.0; }
    double t() const { return t_; }
    double dt() const { return dt_; }
    double k1() const { return k1_; }
    double k2() const { return k2_; }
    bool edge_hit() const { return edge_; }
    std::size_t steps() const { return steps_; }

private:
    std::size_t active_hi(double h) const {
        std::size_t i = g_.floor_index(h);
        while (i > 0 && g_.coord(i) >= h) --i;
        return i;
    }

    model_params p_;
    grid g_;
    operator_table t1_, t2_;
    conv_workspace ws1_, ws2_;
    std::vector<double> u_, v_, lu_, lv_, un_, vn_;
    double h_ = 0.0;
    double t_ = 0.0;
    double dt_ = 0.0;
    double k1_ = 0.0, k2_ = 0.0;
    front_sim_options opt_;
    std::size_t act_hi_ = 0;
    bool edge_ = false;
    std::size_t steps_ = 0;
};

/// Whole-line system with two fronts. The update is arranged so that exactly
/// even initial data on a symmetric grid stay even to the last bit and
/// g(t) = -h(t) exactly: convolutions sum mirror pairs center-out, the left
/// flux walks its nodes in the mirror order of the right flux, and the active
/// window predicates are sign-symmetric.
class double_front_stepper {
public:
    double_front_stepper(const model_params& p, const grid& g,
                         std::vector<double> u0, std::vector<double> v0, double g0,
                         double h0, const front_sim_options& opt = {})
        : p_(p),
          g_(g),
          t1_(g, p.j1, mass_mode::whole_line),
          t2_(g, p.j2, mass_mode::whole_line),
          u_(std::move(u0)),
          v_(std::move(v0)),
          gpos_(g0),
          h_(h0),
          opt_(opt) {
        p_.validate();
        detail::check_initial_field(u_, g_.n, "u0");
        detail::check_initial_field(v_, g_.n, "v0");
        if (!(g0 < h0) || !(g0 > g_.x_min()) || !(h0 < g_.x_max())) {
            throw contract_violation("initial fronts must satisfy x_min < g0 < h0 < x_max");
        }
        for (std::size_t i = 0; i < g_.n; ++i) {
            const double x = g_.coord(i);
            if ((x <= g0 || x >= h0) && v_[i] != 0.0) {
                throw contract_violation("initial v must vanish outside the fronts");
            }
        }
        k1_ = std::max(detail::sup_of(u_), p_.a);
        k2_ = std::max(detail::sup_of(v_), 1.0);
        const double mmax = std::max(detail::sup_of(t1_.mass), detail::sup_of(t2_.mass));
        dt_ = opt_.dt_override > 0.0
                  ? opt_.dt_override
                  : opt_.dt_factor * dt_positivity_bound(p_, k1_, k2_, mmax);
        lu_.assign(g_.n, 0.0);
        lv_.assign(g_.n, 0.0);
        un_.assign(g_.n, 0.0);
        vn_.assign(g_.n, 0.0);
        refresh_active();
    }

    void step() {
        if (edge_) {
            throw contract_violation("stepping a front that already hit the grid edge");
        }
        const std::size_t n = g_.n;
        const double flux_r = boundary_flux_right(t2_, v_, act_lo_, h_, p_.mu);
        const double flux_l = boundary_flux_left(t2_, v_, act_hi_, gpos_, p_.mu);
        if (!(flux_r >= 0.0) || !(flux_l <= 0.0)) {
            throw invariant_breach("boundary flux lost its sign at t=" +
                                   std::to_string(t_));
        }
        apply_nonlocal(t1_, u_, 0, n - 1, p_.d1, far_field::constant_extension,
                       opt_.backend, lu_, 0, n - 1, ws1_);
        apply_nonlocal(t2_, v_, act_lo_, act_hi_, p_.d2, far_field::zero, opt_.backend,
                       lv_, act_lo_, act_hi_, ws2_);

        for (std::size_t i = 0; i < n; ++i) {
            un_[i] = u_[i] + dt_ * (lu_[i] + reaction_f1(p_, u_[i], v_[i]));
        }
        for (std::size_t i = 0; i < act_lo_; ++i) vn_[i] = 0.0;
        for (std::size_t i = act_lo_; i <= act_hi_; ++i) {
            vn_[i] = v_[i] + dt_ * (lv_[i] + reaction_f2(p_, u_[i], v_[i]));
        }
        for (std::size_t i = act_hi_ + 1; i < n; ++i) vn_[i] = 0.0;

        double h_new = h_ + dt_ * flux_r;
        double g_new = gpos_ + dt_ * flux_l;
        if (opt_.check_invariants) {
            detail::guard_box(un_, k1_, opt_.invariant_tol, t_, g_, "u");
            detail::guard_box(vn_, k2_, opt_.invariant_tol, t_, g_, "v");
        }
        if (h_new >= g_.x_max()) h_new = g_.x_max();
        if (g_new <= g_.x_min()) g_new = g_.x_min();
        u_.swap(un_);
        v_.swap(vn_);
        h_ = h_new;
        gpos_ = g_new;
        refresh_active();
        edge_ = (h_ > g_.x_max() - 2.0 * g_.dx) || (gpos_ < g_.x_min() + 2.0 * g_.dx);
        t_ += dt_;
        ++steps_;
    }

    front_record record(const std::vector<double>& probes) const {
        front_record r;
        r.t = t_;
        r.h = h_;
        r.g = gpos_;
        r.sup_u = detail::sup_of(u_);
        r.sup_v = detail::sup_of(v_);
        r.u_probe.reserve(probes.size());
        r.v_probe.reserve(probes.size());
        for (double x : probes) {
            const std::size_t i = g_.floor_index(x);
            r.u_probe.push_back(u_[i]);
            r.v_probe.push_back(v_[i]);
        }
        return r;
    }

    const grid& mesh() const { return g_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& v() const { return v_; }
    double h() const { return h_; }
    double g_front() const { return gpos_; }
    double t() const { return t_; }
    double dt() const { return dt_; }
    double k1() const { return k1_; }
    double k2() const { return k2_; }
    bool edge_hit() const { return edge_; }
    std::size_t steps() const { return steps_; }

private:
    void refresh_active() {
        std::size_t hi = g_.floor_index(h_);
        while (hi > 0 && g_.coord(hi) >= h_) --hi;
        std::size_t lo = g_.floor_index(gpos_);
        while (lo + 1 < g_.n && g_.coord(lo) <= gpos_) ++lo;
        if (lo > hi) {
            throw invariant_breach("active window between the fronts became empty");
        }
        act_lo_ = lo;
        act_hi_ = hi;
    }

    model_params p_;
    grid g_;
    operator_table t1_, t2_;
    conv_workspace ws1_, ws2_;
    std::vector<double> u_, v_, lu_, lv_, un_, vn_;
    double gpos_ = 0.0, h_ = 0.0;
    double t_ = 0.0;
    double dt_ = 0.0;
    double k1_ = 0.0, k2_ = 0.0;
    front_sim_options opt_;
    std::size_t act_lo_ = 0, act_hi_ = 0;
    bool edge_ = false;
    std::size_t steps_ = 0;
};

/// Scalar density with prescribed moving boundaries: the logistic field
///   w_t = d ( ∫_{s1(t)}^{s2(t)} P(x-y) w dy - m(x) w ) + w (alpha - beta w)
/// on a half-line grid (s1 absent, half-line mass) or a symmetric grid
/// (whole-line mass). Used to observe the locally-uniform approach of w to
/// alpha/beta behind fronts that expand at a prescribed rate.
class prescribed_front_stepper {
public:
    prescribed_front_stepper(const kernel_spec& kernel, double d, double alpha,
                             double beta, const grid& g, std::vector<double> w0,
                             std::function<double(double)> right_front,
                             std::function<double(double)> left_front = {},
                             const front_sim_options& opt = {})
        : g_(g),
          tbl_(g, kernel, g.base == 0 ? mass_mode::half_line : mass_mode::whole_line),
          w_(std::move(w0)),
          s2_(std::move(right_front)),
          s1_(std::move(left_front)),
          d_(d),
          alpha_(alpha),
          beta_(beta),
          opt_(opt) {
        if (!(d > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
            throw contract_violation("prescribed-front run needs positive d, alpha, beta");
        }
        detail::check_initial_field(w_, g_.n, "w0");
        if (!s2_) throw contract_violation("right front schedule is required");
        kbox_ = std::max(detail::sup_of(w_), alpha_ / beta_);
        const double lip = alpha_ + 2.0 * beta_ * kbox_;
        const double mmax = detail::sup_of(tbl_.mass);
        dt_ = opt_.dt_override > 0.0 ? opt_.dt_override
                                     : opt_.dt_factor / (d_ * mmax + lip);
        lw_.assign(g_.n, 0.0);
        wn_.assign(g_.n, 0.0);
    }

    void step() {
        const double hpos = std::min(s2_(t_), g_.x_max());
        const double gpos = s1_ ? std::max(s1_(t_), g_.x_min()) : g_.x_min();
        std::size_t hi = g_.floor_index(hpos);
        while (hi > 0 && g_.coord(hi) >= hpos) --hi;
        std::size_t lo = 0;
        if (s1_) {
            lo = g_.floor_index(gpos);
            while (lo + 1 < g_.n && g_.coord(lo) <= gpos) ++lo;
        }
        if (lo > hi) throw invariant_breach("prescribed window became empty");

        apply_nonlocal(tbl_, w_, lo, hi, d_, far_field::zero, opt_.backend, lw_, lo,
                       hi, ws_);
        for (std::size_t i = 0; i < lo; ++i) wn_[i] = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            wn_[i] = w_[i] + dt_ * (lw_[i] + w_[i] * (alpha_ - beta_ * w_[i]));
        }
        for (std::size_t i = hi + 1; i < g_.n; ++i) wn_[i] = 0.0;
        if (opt_.check_invariants) {
            detail::guard_box(wn_, kbox_, opt_.invariant_tol, t_, g_, "w");
        }
        w_.swap(wn_);
        t_ += dt_;
        ++steps_;
    }

    const grid& mesh() const { return g_; }
    const std::vector<double>& w() const { return w_; }
    double t() const { return t_; }
    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }

private:
    grid g_;
    operator_table tbl_;
    conv_workspace ws_;
    std::vector<double> w_, lw_, wn_;
    std::function<double(double)> s2_, s1_;
    double d_ = 0.0, alpha_ = 0.0, beta_ = 0.0;
    double t_ = 0.0, dt_ = 0.0, kbox_ = 0.0;
    front_sim_options opt_;
    std::size_t steps_ = 0;
};

/// Drive a stepper to the horizon, logging records every log_dt (and full
/// snapshots when asked). Stops early when a front reaches the grid edge;
/// the trajectory notes that, and the caller decides whether the truncation
/// was too small for its purpose.
template <typename Stepper>
front_trajectory run_front_simulation(Stepper& st, double horizon, double log_dt,
                                      const std::vector<double>& probes = {},
                                      bool store_snapshots = false) {
    if (!(horizon > 0.0)) throw contract_violation("horizon must be positive");
    if (!(log_dt > 0.0)) log_dt = horizon / 400.0;

    front_trajectory out;
    out.mesh = st.mesh();
    out.dt = st.dt();

    auto log_now = [&] {
        out.records.push_back(st.record(probes));
        if (store_snapshots) {
            front_snapshot s;
            s.t = st.t();
            s.h = st.h();
            s.g = st.g_front();
            s.u = st.u();
            s.v = st.v();
            out.snapshots.push_back(std::move(s));
        }
    };

    log_now();
    double next_log = log_dt;
    while (st.t() + 0.5 * st.dt() < horizon) {
        st.step();
        if (st.t() >= next_log - 0.5 * st.dt()) {
            log_now();
            while (next_log <= st.t() + 0.5 * st.dt()) next_log += log_dt;
        }
        if (st.edge_hit()) break;
    }
    if (out.records.empty() || out.records.back().t != st.t()) log_now();

    out.u_final = st.u();
    out.v_final = st.v();
    out.t_final = st.t();
    out.h_final = st.h();
    out.g_final = st.g_front();
    out.edge_hit = st.edge_hit();
    out.steps = st.steps();
    out.k1 = st.k1();
    out.k2 = st.k2();
    return out;
}

}  // namespace frontlab
