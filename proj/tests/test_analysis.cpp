#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "frontlab/analysis.hpp"

using namespace frontlab;

namespace {

front_record rec(double t, double h, double sup_v) {
    front_record r;
    r.t = t;
    r.h = h;
    r.g = 0.0;
    r.sup_u = 0.5;
    r.sup_v = sup_v;
    return r;
}

// independent root finder for the coexistence state: eliminate v and bisect
//   F(u) = a (1 + b v(u)) / (2 + b v(u)) - u,   v(u) = (1 + c u) / (2 + c u)
std::pair<double, double> equilibrium_oracle(const model_params& p) {
    auto vo = [&](double u) { return (1.0 + p.c * u) / (2.0 + p.c * u); };
    auto F = [&](double u) {
        const double v = vo(u);
        return p.a * (1.0 + p.b * v) / (2.0 + p.b * v) - u;
    };
    double lo = 0.5 * p.a, hi = p.a;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) > 0.0 ? lo : hi) = mid;
    }
    const double u = 0.5 * (lo + hi);
    return {u, vo(u)};
}

}  // namespace

TEST_CASE("coexistence state matches an independent bisection", "[analysis]") {
    for (auto [a, b, c] : {std::array<double, 3>{1.0, 1.0, 1.0},
                           std::array<double, 3>{2.5, 0.3, 4.0},
                           std::array<double, 3>{0.4, 5.0, 0.2}}) {
        model_params p;
        p.a = a;
        p.b = b;
        p.c = c;
        p.r1 = 0.7;
        p.r2 = 1.3;
        const auto eq = coexistence_equilibrium(p);
        const auto [u_ref, v_ref] = equilibrium_oracle(p);
        CHECK(std::abs(eq.ustar - u_ref) <= 1e-10);
        CHECK(std::abs(eq.vstar - v_ref) <= 1e-10);
        // a true root of both reactions
        CHECK(std::abs(reaction_f1(p, eq.ustar, eq.vstar)) <= 1e-12);
        CHECK(std::abs(reaction_f2(p, eq.ustar, eq.vstar)) <= 1e-12);
        CHECK(eq.ustar > 0.5 * p.a);
        CHECK(eq.ustar < p.a);
        CHECK(eq.vstar > 0.5);
        CHECK(eq.vstar < 1.0);
        CHECK(eq.iterations > 0);
    }
}

TEST_CASE("trajectory classification", "[analysis]") {
    classify_options opt;
    opt.ell_star = 4.0;
    opt.length_scale = 1.0;
    opt.h0 = 3.0;  // escape threshold is max(8, 8) = 8

    front_trajectory spreading;
    for (int k = 0; k <= 20; ++k) {
        spreading.records.push_back(rec(k * 10.0, 3.0 + 0.9 * k, 0.5));
    }
    const auto cs = classify_outcome(spreading, opt);
    CHECK(cs.verdict == outcome::spreading);
    CHECK(cs.h_final == 21.0);
    CHECK(cs.tail_growth > 0.0);

    front_trajectory vanishing;
    for (int k = 0; k <= 20; ++k) {
        vanishing.records.push_back(rec(k * 10.0, 3.0001, std::exp(-0.2 * k * 10.0)));
    }
    const auto cv = classify_outcome(vanishing, opt);
    CHECK(cv.verdict == outcome::vanishing);
    CHECK(cv.sup_v_final < 1e-3);

    // front moved but never escaped, and the density is still there
    front_trajectory undecided;
    for (int k = 0; k <= 20; ++k) {
        undecided.records.push_back(rec(k * 10.0, 3.0 + 0.15 * k, 0.4));
    }
    CHECK(classify_outcome(undecided, opt).verdict == outcome::undetermined);

    // hitting the window edge counts as spreading however it looks otherwise
    front_trajectory edge = undecided;
    edge.edge_hit = true;
    CHECK(classify_outcome(edge, opt).verdict == outcome::spreading);

    front_trajectory tiny;
    for (int k = 0; k < 7; ++k) tiny.records.push_back(rec(k, 3.0, 0.5));
    CHECK_THROWS_AS(classify_outcome(tiny, opt), contract_violation);

    CHECK(std::string(outcome_name(outcome::spreading)) == "spreading");
    CHECK(std::string(outcome_name(outcome::vanishing)) == "vanishing");
    CHECK(std::string(outcome_name(outcome::undetermined)) == "undetermined");
}

TEST_CASE("front speed fit recovers a linear trajectory", "[analysis]") {
    front_trajectory traj;
    for (int k = 0; k <= 40; ++k) {
        traj.records.push_back(rec(0.5 * k, 1.0 + 3.0 * (0.5 * k), 0.5));
    }
    const auto fit = estimate_front_speed(traj, 5.0, 15.0);
    CHECK(fit.speed == Catch::Approx(3.0).margin(1e-12));
    CHECK(fit.intercept == Catch::Approx(1.0).margin(1e-10));
    CHECK(fit.t_lo >= 5.0);
    CHECK(fit.t_hi <= 15.0);
    CHECK(fit.points == 21);
    CHECK_THROWS_AS(estimate_front_speed(traj, 19.0, 20.0), contract_violation);
}

TEST_CASE("acceleration exponent fit recovers a power law", "[analysis]") {
    front_trajectory traj;
    for (int k = 1; k <= 100; ++k) {
        const double t = static_cast<double>(k);
        traj.records.push_back(rec(t, 2.5 * std::pow(t, 0.8), 0.5));
    }
    const auto fit = estimate_acceleration_exponent(traj, 1.0, 100.0);
    CHECK(fit.exponent == Catch::Approx(0.8).margin(1e-9));
    CHECK(std::exp(fit.log_prefactor) == Catch::Approx(2.5).epsilon(1e-9));
    CHECK(fit.points == 100);
}

TEST_CASE("threshold search brackets a synthetic transition", "[analysis]") {
    // true threshold at 0.7; verdicts near it need a horizon of 400
    std::size_t calls = 0;
    auto classifier = [&](double mu, double horizon) {
        ++calls;
        if (std::abs(mu - 0.7) < 0.1 && horizon < 400.0) {
            return outcome::undetermined;
        }
        return mu >= 0.7 ? outcome::spreading : outcome::vanishing;
    };
    critical_mu_options opt;  // defaults: [0.05, 5], rel_tol 1%, horizon 200 cap 4
    const auto res = critical_mu(classifier, opt);
    CHECK(std::abs(res.mu_star - 0.7) <= 0.01 * 0.7);
    CHECK(res.bracket_lo < 0.7);
    CHECK(res.bracket_hi >= 0.7);
    CHECK(res.horizon_used == 400.0);  // escalated once, then sticky
    CHECK(res.probes <= opt.max_probes);
    CHECK(res.probes == calls);
}

TEST_CASE("threshold search failure modes", "[analysis]") {
    auto always = [](outcome o) {
        return [o](double, double) { return o; };
    };
    CHECK_THROWS_AS(critical_mu(always(outcome::spreading)), no_critical_mu);
    CHECK_THROWS_AS(critical_mu(always(outcome::vanishing)), inconclusive);
    CHECK_THROWS_AS(critical_mu(always(outcome::undetermined)), inconclusive);

    critical_mu_options opt;
    opt.max_probes = 3;
    auto threshold = [](double mu, double) {
        return mu >= 0.7 ? outcome::spreading : outcome::vanishing;
    };
    CHECK_THROWS_AS(critical_mu(threshold, opt), inconclusive);
    CHECK_THROWS_AS(critical_mu({}), contract_violation);
    opt = {};
    opt.mu_lo = -1.0;
    CHECK_THROWS_AS(critical_mu(threshold, opt), contract_violation);
}

TEST_CASE("threshold preconditions", "[analysis]") {
    const auto tri = kernel_spec::triangle(1.0);
    const double ell_ref = critical_length(tri, 1.0, 0.25, mass_mode::half_line).length;
    const double ell = critical_mu_preconditions(tri, 1.0, 0.25, 0.5 * ell_ref,
                                                 mass_mode::half_line);
    CHECK(ell == Catch::Approx(ell_ref).epsilon(1e-9));
    // same setup but the region already exceeds the critical length
    CHECK_THROWS_AS(critical_mu_preconditions(tri, 1.0, 0.25, 1.1 * ell,
                                              mass_mode::half_line),
                    no_critical_mu);
    // growth dominates diffusion: spreading for every mu
    CHECK_THROWS_AS(
        critical_mu_preconditions(tri, 1.0, 0.6, 1.0, mass_mode::half_line),
        no_critical_mu);
    // whole line uses the full diffusive loss d rather than d/2
    const double ellw_ref = critical_length(tri, 1.0, 0.8, mass_mode::whole_line).length;
    const double ellw = critical_mu_preconditions(tri, 1.0, 0.8, 0.5 * ellw_ref,
                                                  mass_mode::whole_line);
    CHECK(ellw == Catch::Approx(ellw_ref).epsilon(1e-9));
    CHECK_THROWS_AS(
        critical_mu_preconditions(tri, 1.0, 1.0, 0.5, mass_mode::whole_line),
        no_critical_mu);
}

TEST_CASE("ordering check reports the worst violation", "[analysis]") {
    front_trajectory small, large;
    for (int k = 0; k < 10; ++k) {
        small.records.push_back(rec(k, 3.0 + 0.1 * k, 0.5));
        large.records.push_back(rec(k, 3.2 + 0.1 * k, 0.6));
    }
    front_snapshot ss, sl;
    ss.t = sl.t = 9.0;
    ss.u = {0.1, 0.2, 0.30001};
    sl.u = {0.2, 0.3, 0.3};  // planted violation of 1e-5 in the last entry
    ss.v = sl.v = {0.0, 0.0, 0.0};
    small.snapshots.push_back(ss);
    large.snapshots.push_back(sl);

    const auto rep = check_trajectory_ordering(small, large, 1e-12);
    CHECK(!rep.ordered);
    CHECK(rep.what == "field u");
    CHECK(rep.worst_gap == Catch::Approx(1e-5).epsilon(1e-6));
    CHECK(rep.t_worst == 9.0);

    // fully ordered data passes
    sl.u = {0.2, 0.3, 0.4};
    large.snapshots.back() = sl;
    const auto ok = check_trajectory_ordering(small, large, 1e-12);
    CHECK(ok.ordered);

    // structural mismatches are contract errors, not verdicts
    front_trajectory shorter = small;
    shorter.records.pop_back();
    CHECK_THROWS_AS(check_trajectory_ordering(shorter, large, 1e-12),
                    contract_violation);
    front_trajectory shifted = small;
    shifted.records[3].t += 0.5;
    CHECK_THROWS_AS(check_trajectory_ordering(shifted, large, 1e-12),
                    contract_violation);
    front_trajectory nosnap = small;
    nosnap.snapshots.clear();
    CHECK_THROWS_AS(check_trajectory_ordering(nosnap, large, 1e-12),
                    contract_violation);
}
