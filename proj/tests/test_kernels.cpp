#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "frontlab/kernels.hpp"
#include "frontlab/quadrature.hpp"

using namespace frontlab;

// Frozen closed-form values, worked out by hand once. These pin the analytic
// families; anything that changes them is a behavior change, not a refactor.

TEST_CASE("triangle kernel closed forms", "[kernels]") {
    const auto k = kernel_spec::triangle(1.0);
    CHECK(k.evaluate(0.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(k.evaluate(0.5) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(k.evaluate(1.0) == 0.0);
    CHECK(k.evaluate(-0.25) == Catch::Approx(0.75).epsilon(1e-14));
    CHECK(k.tail_mass(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(k.tail_mass(0.5) == Catch::Approx(0.125).epsilon(1e-14));
    CHECK(k.tail_mass(2.0) == 0.0);
    CHECK(k.tail_mass_integral(0.0) == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(k.half_first_moment() == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(k.half_line_mass(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(k.half_line_mass(0.25) == Catch::Approx(1.0 - 0.28125).epsilon(1e-14));
    CHECK(k.half_line_mass(-0.5) == Catch::Approx(0.125).epsilon(1e-14));
    CHECK(k.mgf(1.0) == Catch::Approx(2.0 * (std::cosh(1.0) - 1.0)).epsilon(1e-13));
    CHECK(k.mgf(0.0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(k.mgf_abscissa()));
    REQUIRE(k.compact_support().has_value());
    CHECK(*k.compact_support() == 1.0);
    CHECK(k.satisfies_j1());
    CHECK(k.satisfies_j2());

    const auto k3 = kernel_spec::triangle(3.0);
    CHECK(k3.evaluate(0.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(k3.tail_mass(1.5) == Catch::Approx(2.25 / 18.0).epsilon(1e-14));
    CHECK(k3.half_first_moment() == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("laplace kernel closed forms", "[kernels]") {
    const auto k = kernel_spec::laplace(1.0);
    CHECK(k.evaluate(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(k.tail_mass(2.0) == Catch::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(k.half_line_mass(1.0) ==
          Catch::Approx(1.0 - 0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(k.tail_mass_integral(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(k.half_first_moment() == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(k.mgf(0.5) == Catch::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(k.mgf_abscissa() == Catch::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(k.mgf(1.0), numerical_error);

    const auto k2 = kernel_spec::laplace(0.25);
    CHECK(k2.evaluate(0.0) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(k2.mgf_abscissa() == Catch::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("gaussian kernel closed forms", "[kernels]") {
    const auto k = kernel_spec::gaussian(1.0);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    CHECK(k.evaluate(0.0) == Catch::Approx(inv_sqrt_2pi).epsilon(1e-14));
    CHECK(k.tail_mass(1.0) ==
          Catch::Approx(0.5 * std::erfc(1.0 / std::numbers::sqrt2)).epsilon(1e-14));
    CHECK(k.half_first_moment() == Catch::Approx(inv_sqrt_2pi).epsilon(1e-14));
    CHECK(k.tail_mass_integral(0.0) == Catch::Approx(inv_sqrt_2pi).epsilon(1e-14));
    CHECK(k.mgf(1.0) == Catch::Approx(std::exp(0.5)).epsilon(1e-14));
    CHECK(std::isinf(k.mgf_abscissa()));
    CHECK_FALSE(k.compact_support().has_value());
}

TEST_CASE("algebraic kernel closed forms and tail flags", "[kernels]") {
    const auto heavy = kernel_spec::algebraic(1.5, 1.0);
    CHECK(heavy.evaluate(0.0) == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(heavy.tail_mass(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(heavy.tail_mass(3.0) == Catch::Approx(0.25).epsilon(1e-14));
    CHECK_FALSE(heavy.satisfies_j1());
    CHECK_FALSE(heavy.satisfies_j2());
    CHECK_THROWS_AS(heavy.half_first_moment(), no_semi_wave);
    CHECK_THROWS_AS(heavy.tail_mass_integral(0.0), no_semi_wave);
    CHECK_THROWS_AS(heavy.mgf(0.1), light_tail_required);
    CHECK(heavy.mgf_abscissa() == 0.0);

    // gamma = 3, shift = 2: c = 4, J(0) = 1/2, T(s) = 2/(2+s)^2,
    // TI(s) = 2/(2+s), first moment 1.
    const auto mid = kernel_spec::algebraic(3.0, 2.0);
    CHECK(mid.evaluate(0.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(mid.tail_mass(2.0) == Catch::Approx(0.125).epsilon(1e-14));
    CHECK(mid.tail_mass_integral(0.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(mid.tail_mass_integral(2.0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(mid.half_first_moment() == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(mid.satisfies_j1());
    CHECK_FALSE(mid.satisfies_j2());

    CHECK_THROWS_AS(kernel_spec::algebraic(1.0), config_error);
    CHECK_THROWS_AS(kernel_spec::algebraic(0.5), config_error);
}

TEST_CASE("closed forms agree with numerical quadrature", "[kernels]") {
    const std::vector<kernel_spec> ks = {
        kernel_spec::triangle(1.3), kernel_spec::laplace(0.7),
        kernel_spec::gaussian(0.9), kernel_spec::algebraic(2.5, 1.2)};
    for (const auto& k : ks) {
        // total mass: 2 * integral of J over the effective support is 1
        const double R = std::min(k.effective_radius(1e-14), 1e6);
        const double mass =
            2.0 * adaptive_simpson([&](double z) { return k.evaluate(z); }, 0.0, R, 1e-12);
        CHECK(mass == Catch::Approx(1.0).margin(1e-8));
        // tail identity T(s) - T(s+M) = integral of J over [s, s+M]
        for (double s : {0.0, 0.4, 1.1}) {
            const double M = 3.0 * k.length_scale();
            const double seg =
                adaptive_simpson([&](double z) { return k.evaluate(z); }, s, s + M, 1e-13);
            CHECK(k.tail_mass(s) - k.tail_mass(s + M) == Catch::Approx(seg).margin(1e-10));
        }
        // half-line mass is the complement of the tail
        CHECK(k.half_line_mass(0.6) + k.tail_mass(0.6) == Catch::Approx(1.0).epsilon(1e-14));
    }

    // mgf against two-sided quadrature for an even kernel
    const auto tri = kernel_spec::triangle(1.0);
    const double lam = 0.7;
    const double num = adaptive_simpson(
        [&](double z) { return tri.evaluate(z) * (std::exp(lam * z) + std::exp(-lam * z)); },
        0.0, 1.0, 1e-13);
    CHECK(tri.mgf(lam) == Catch::Approx(num).epsilon(1e-11));

    // partial first moments build up to the closed form
    CHECK(tri.first_moment_partial(1.0) == Catch::Approx(1.0 / 6.0).margin(1e-10));
    CHECK(tri.first_moment_partial(5.0) == Catch::Approx(1.0 / 6.0).margin(1e-10));
    const auto lap = kernel_spec::laplace(1.0);
    CHECK(lap.first_moment_partial(40.0) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("tabulated kernel reproduces its interpolant exactly", "[kernels]") {
    // samples form exactly the unit triangle, so every closed form must match
    const std::vector<double> x = {0.0, 0.5, 1.0};
    const std::vector<double> y = {1.0, 0.5, 0.0};
    const auto tab = kernel_spec::tabulated(x, y, true, true);
    const auto tri = kernel_spec::triangle(1.0);

    CHECK(tab.sample_count() == 3);
    CHECK(tab.normalization_constant() == Catch::Approx(1.0).epsilon(1e-14));
    for (double s : {0.0, 0.1, 0.25, 0.5, 0.77, 0.99, 1.0}) {
        CHECK(tab.evaluate(s) == Catch::Approx(tri.evaluate(s)).margin(1e-14));
        CHECK(tab.tail_mass(s) == Catch::Approx(tri.tail_mass(s)).margin(1e-14));
        CHECK(tab.tail_mass_integral(s) ==
              Catch::Approx(tri.tail_mass_integral(s)).margin(1e-14));
    }
    CHECK(tab.half_first_moment() == Catch::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(tab.mgf(1.0) == Catch::Approx(tri.mgf(1.0)).epsilon(1e-12));
    REQUIRE(tab.compact_support().has_value());
    CHECK(*tab.compact_support() == 1.0);
    // half-mass radius for the triangle: T(r) = 1/4 at r = 1 - 1/sqrt(2)
    CHECK(tab.length_scale() ==
          Catch::Approx(1.0 - 1.0 / std::numbers::sqrt2).margin(1e-9));
    CHECK_THROWS_AS(tab.evaluate(1.5), numerical_error);

    // declared flags are taken at face value
    const auto declared = kernel_spec::tabulated(x, y, false, false);
    CHECK_FALSE(declared.satisfies_j1());
    CHECK_FALSE(declared.satisfies_j2());

    // raw samples that do not integrate to 1 get rescaled so they do
    std::vector<double> y2 = {3.0, 1.5, 0.0};
    const auto scaled = kernel_spec::tabulated(x, y2, true, false);
    CHECK(scaled.tail_mass(0.0) == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(scaled.evaluate(0.0) == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("tabulated kernel rejects malformed samples", "[kernels]") {
    using V = std::vector<double>;
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.0, 1.0}, V{1.0, 0.0, 0.0}, true, false),
                    contract_violation);
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.0, 1.0}, V{1.0, 0.0}, true, false),
                    config_error);
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.1, 0.5, 1.0}, V{1.0, 0.5, 0.0}, true, false),
                    config_error);
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.0, 0.5, 0.5}, V{1.0, 0.5, 0.0}, true, false),
                    config_error);
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.0, 0.5, 1.0}, V{1.0, -0.5, 0.0}, true, false),
                    config_error);
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.0, 0.5, 1.0}, V{1.0, 0.9, 0.8}, true, false),
                    config_error);
    CHECK_THROWS_AS(kernel_spec::tabulated(V{0.0, 0.5, 1.0}, V{0.0, 0.5, 0.0}, true, false),
                    config_error);
}

TEST_CASE("kernel construction contracts", "[kernels]") {
    CHECK_THROWS_AS(kernel_spec::triangle(0.0), config_error);
    CHECK_THROWS_AS(kernel_spec::triangle(-1.0), config_error);
    CHECK_THROWS_AS(kernel_spec::laplace(0.0), config_error);
    CHECK_THROWS_AS(kernel_spec::gaussian(-0.5), config_error);
    CHECK_THROWS_AS(kernel_spec::algebraic(3.0, 0.0), config_error);
    const auto k = kernel_spec::triangle(1.0);
    CHECK_THROWS_AS(k.tail_mass(-0.1), contract_violation);
    CHECK_THROWS_AS(k.tail_mass_integral(-0.1), contract_violation);
}

TEST_CASE("effective radius and length scale are sane", "[kernels]") {
    CHECK(kernel_spec::triangle(2.0).effective_radius() == 2.0);
    CHECK(kernel_spec::triangle(2.0).length_scale() == 2.0);
    CHECK(kernel_spec::laplace(1.0).effective_radius(1e-16) ==
          Catch::Approx(-std::log(1e-16)).epsilon(1e-12));
    CHECK(kernel_spec::algebraic(1.5).length_scale() == 1.0);
    // below the effective radius the kernel is genuinely negligible
    const auto g = kernel_spec::gaussian(0.8);
    CHECK(g.evaluate(g.effective_radius(1e-12)) <= 1.1e-12 * g.evaluate(0.0));
}
