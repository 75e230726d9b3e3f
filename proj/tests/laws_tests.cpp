// Unit tests for the closed-form laws: the last-zero supermartingale, the
// generalized arc sine law, the conditional last-zero law, the meander law,
// the excursion-length tail, barrier-crossing probabilities, and the
// predictable projection of the terminal local time.
//
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bessellab/laws.hpp"
#include "bessellab/quadrature.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace bessellab;

TEST_CASE("last-zero supermartingale matches frozen values") {
    CHECK_THAT(z_supermartingale(BesselParams::from_mu(0.5), 1.0, 0.0, 1.0),
               WithinRel(0.317310507862914103, 1e-12));
    CHECK_THAT(z_supermartingale(BesselParams::from_mu(0.25), 0.8, 0.5, 1.0),
               WithinRel(0.120015052832280861, 1e-12));
    CHECK_THAT(z_supermartingale(BesselParams::from_mu(0.75), 0.3, 0.25, 1.0),
               WithinRel(0.871420919918115793, 1e-12));
    CHECK_THAT(z_supermartingale(BesselParams::from_mu(0.5), 2.0, 0.75, 1.0),
               WithinRel(0.0000633424836662398425, 1e-11));

    const auto params = BesselParams::from_mu(0.25);
    CHECK(z_supermartingale(params, 0.0, 0.3, 1.0) == 1.0);  // on the zero set
    // Decreasing in r: farther from 0 makes a further zero less likely.
    CHECK(z_supermartingale(params, 0.5, 0.3, 1.0) > z_supermartingale(params, 1.0, 0.3, 1.0));
    CHECK_THROWS_AS(z_supermartingale(params, 0.5, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(z_supermartingale(params, 0.5, -0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(z_supermartingale(params, -0.5, 0.3, 1.0), std::domain_error);
}

TEST_CASE("arc sine law density differentiates the CDF") {
    struct Case {
        double mu, t;
    };
    for (const Case c : {Case{0.25, 0.3}, Case{0.5, 0.7}, Case{0.75, 0.45}}) {
        const auto params = BesselParams::from_mu(c.mu);
        const double h = 1e-6;
        const double diff = (gmu_cdf(params, c.t + h) - gmu_cdf(params, c.t - h)) / (2.0 * h);
        CHECK_THAT(gmu_density(params, c.t), WithinRel(diff, 1e-5));
    }
}

TEST_CASE("arc sine CDF matches frozen beta values and edge conventions") {
    const auto p25 = BesselParams::from_mu(0.25);
    CHECK_THAT(gmu_cdf(p25, 0.1), WithinRel(0.508909260881114225, 1e-12));
    CHECK_THAT(gmu_cdf(p25, 0.5), WithinRel(0.780549926169590064, 1e-12));
    CHECK_THAT(gmu_cdf(p25, 0.9), WithinRel(0.944815044032139294, 1e-12));

    const auto p50 = BesselParams::from_mu(0.5);
    CHECK_THAT(gmu_cdf(p50, 0.1), WithinRel(0.204832764699133452, 1e-12));
    CHECK_THAT(gmu_cdf(p50, 0.5), WithinRel(0.5, 1e-12));
    // Classical arc sine symmetry at mu = 1/2.
    CHECK_THAT(gmu_cdf(p50, 0.1) + gmu_cdf(p50, 0.9), WithinRel(1.0, 1e-12));

    const auto p75 = BesselParams::from_mu(0.75);
    CHECK_THAT(gmu_cdf(p75, 0.1), WithinRel(0.0551849559678607065, 1e-12));
    CHECK_THAT(gmu_cdf(p75, 0.5), WithinRel(0.219450073830409936, 1e-12));
    CHECK_THAT(gmu_cdf(p75, 0.9), WithinRel(0.491090739118885775, 1e-12));

    CHECK(gmu_cdf(p25, 0.0) == 0.0);
    CHECK(gmu_cdf(p25, -0.5) == 0.0);
    CHECK(gmu_cdf(p25, 1.0) == 1.0);
    CHECK(gmu_cdf(p25, 7.0) == 1.0);
    CHECK_THROWS_AS(gmu_density(p25, 0.0), std::domain_error);
    CHECK_THROWS_AS(gmu_density(p25, 1.0), std::domain_error);
}

TEST_CASE("conditional last-zero law splits mass between atom and density") {
    // The absolutely continuous mass must equal Z_t; checked through the
    // quadrature path of conditional_h_integral with h == 1 against the
    // closed-form Q values.
    struct Case {
        double mu, r, t, q;
    };
    for (const Case c : {Case{0.5, 1.0, 0.3, 0.2319977236287341},
                         Case{0.25, 0.5, 0.0, 0.3598427939169159},
                         Case{0.75, 0.2, 0.6, 0.8873776938460207}}) {
        const auto params = BesselParams::from_mu(c.mu);
        const auto law = conditional_g_law(params, c.r, c.t, 1.0);
        CHECK(law.atom_location == c.t);
        CHECK_THAT(law.atom_weight,
                   WithinRel(1.0 - z_supermartingale(params, c.r, c.t, 1.0), 1e-12));
        const double cont_mass =
            conditional_h_integral(params, [](double) { return 1.0; }, c.r, c.t, 1.0);
        CHECK_THAT(cont_mass, WithinRel(c.q, 1e-7));
        CHECK_THAT(law.atom_weight + cont_mass, WithinAbs(1.0, 1e-7));
    }

    // From the zero set at t = 0 with unit horizon, the conditional density
    // collapses to the unconditional arc sine density.
    const auto params = BesselParams::from_mu(0.5);
    const auto law = conditional_g_law(params, 0.0, 0.0, 1.0);
    CHECK(law.atom_weight == 0.0);
    for (double z : {0.1, 0.45, 0.9}) {
        CHECK_THAT(law.density(z), WithinRel(gmu_density(params, z), 1e-13));
    }
    CHECK(law.density(0.0) == 0.0);
    CHECK(law.density(1.0) == 0.0);
    CHECK(law.density(-0.2) == 0.0);

    CHECK_THROWS_AS(conditional_g_law(params, 0.5, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(conditional_g_law(params, -0.5, 0.2, 1.0), std::domain_error);
}

TEST_CASE("conditional expectation of the identity pins the mean last zero") {
    // From the zero set, E[g | F_t] = t + mu (T - t).
    for (double mu : {0.25, 0.5, 0.75}) {
        const auto params = BesselParams::from_mu(mu);
        const double v =
            conditional_h_integral(params, [](double g) { return g; }, 0.0, 0.2, 1.0);
        CHECK_THAT(v, WithinAbs(0.2 + mu * 0.8, 1e-7));
    }
    const auto params = BesselParams::from_mu(0.5);
    CHECK_THROWS_AS(
        conditional_h_integral(params, [](double) { return 1.0; }, 0.0, 1.2, 1.0),
        std::domain_error);
    CHECK_THROWS_AS(
        conditional_h_integral(params, [](double) { return 1.0; }, -1.0, 0.2, 1.0),
        std::domain_error);
}

TEST_CASE("meander law is the Rayleigh distribution") {
    CHECK_THAT(meander_law(1.0).second, WithinRel(0.393469340287366576, 1e-13));
    // Median.
    CHECK_THAT(meander_law(1.17741002251547469).second, WithinRel(0.5, 1e-12));
    // Density differentiates the CDF.
    const double h = 1e-6;
    const double diff = (meander_law(0.8 + h).second - meander_law(0.8 - h).second) / (2.0 * h);
    CHECK_THAT(meander_law(0.8).first, WithinRel(diff, 1e-8));
    CHECK(meander_law(0.0).first == 0.0);
    CHECK(meander_law(0.0).second == 0.0);
    CHECK_THROWS_AS(meander_law(-0.1), std::domain_error);

    // E[m^{2 mu}] against frozen moments of the Rayleigh law.
    struct Case {
        double mu, moment;
    };
    for (const Case c : {Case{0.25, 1.07790027477046397}, Case{0.5, 1.25331413731550025},
                         Case{0.75, 1.54567276844249337}}) {
        const double v = integrate_to_inf(
            [&](double x) { return std::pow(x, 2.0 * c.mu) * meander_law(x).first; }, 0.0);
        CHECK_THAT(v, WithinRel(c.moment, 1e-9));
    }
}

TEST_CASE("excursion-length tail matches frozen values and scales as x^-mu") {
    struct Case {
        double mu, x, tail;
    };
    for (const Case c : {Case{0.25, 0.01, 2.93373861588612921},
                         Case{0.25, 0.1, 1.64976246101950639},
                         Case{0.25, 1.0, 0.927729608579000844},
                         Case{0.5, 0.03, 4.60658865961780639},
                         Case{0.5, 1.0, 0.797884560802865356},
                         Case{0.75, 0.01, 20.4589077632186518},
                         Case{0.75, 0.03, 8.97514561352135752},
                         Case{0.75, 1.0, 0.646967469710717697}}) {
        CHECK_THAT(levy_tail(BesselParams::from_mu(c.mu), c.x), WithinRel(c.tail, 1e-13));
    }
    const auto params = BesselParams::from_mu(0.75);
    CHECK_THAT(levy_tail(params, 0.2) / levy_tail(params, 1.0),
               WithinRel(std::pow(0.2, -0.75), 1e-13));
    CHECK_THROWS_AS(levy_tail(params, 0.0), std::domain_error);
    CHECK_THROWS_AS(levy_tail(params, -1.0), std::domain_error);
}

TEST_CASE("barrier hitting probability integrates the barrier in closed form") {
    // Constant barrier phi == c gives 1 - exp(-u c^{-2 mu}); c = 1 makes the
    // value mu-independent.
    for (double mu : {0.25, 0.5, 0.75}) {
        const auto params = BesselParams::from_mu(mu);
        CHECK_THAT(hitting_probability(params, [](double) { return 1.0; }, 1.0),
                   WithinRel(0.6321205588285577, 1e-10));
    }
    const auto params = BesselParams::from_mu(0.5);
    CHECK_THAT(hitting_probability(params, [](double) { return 10.0; }, 1.0),
               WithinRel(0.09516258196404043, 1e-10));

    // Staircase barrier: 0.5 before local time 1/2, then 2.0.
    const auto stairs = [](double x) { return x < 0.5 ? 0.5 : 2.0; };
    CHECK_THAT(hitting_probability(params, stairs, 1.0),
               WithinRel(0.7134952031398099, 1e-9));

    CHECK(hitting_probability(params, [](double) { return 1.0; }, 0.0) == 0.0);
    // Unbounded local-time budget: a constant barrier is crossed surely...
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(hitting_probability(params, [](double) { return 1.0; }, inf) == 1.0);
    // ...while a fast-growing barrier keeps the probability below 1.
    CHECK_THAT(hitting_probability(params, [](double x) { return std::exp(x); }, inf),
               WithinRel(0.632120558828557678, 1e-9));

    CHECK_THROWS_AS(hitting_probability(params, [](double) { return 0.0; }, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(hitting_probability(params, [](double) { return 1.0; }, -1.0),
                    std::domain_error);
}

TEST_CASE("terminal local-time projection matches frozen quadrature values") {
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.5), 0.7, 0.2, 0.25, 1.0),
               WithinRel(0.4051801348205751, 1e-12));
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.25), 1.1, 0.0, 0.0, 1.0),
               WithinRel(0.09490467222214965, 1e-12));
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.75), 0.4, 0.5, 0.5, 1.0),
               WithinRel(0.6531677708386966, 1e-12));
}

TEST_CASE("terminal local-time projection on the zero set and at expiry") {
    // r = 0 display: l + 2^mu (T-t)^mu / Gamma(1-mu).
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.25), 0.0, 0.0, 0.0, 1.0),
               WithinRel(0.970451204566076545, 1e-13));
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.5), 0.0, 0.0, 0.0, 1.0),
               WithinRel(0.797884560802865356, 1e-13));
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.75), 0.0, 0.0, 0.0, 1.0),
               WithinRel(0.463864804289500422, 1e-13));
    CHECK_THAT(martingale_X_closed_form(BesselParams::from_mu(0.5), 0.0, 0.3, 0.64, 1.0),
               WithinRel(0.778730736481719214, 1e-13));

    const auto params = BesselParams::from_mu(0.5);
    // At expiry the projection is the accumulated local time itself.
    CHECK(martingale_X_closed_form(params, 0.9, 1.7, 1.0, 1.0) == 1.7);
    // The general branch passes continuously through the r = 0 display.
    CHECK_THAT(martingale_X_closed_form(params, 1e-8, 0.0, 0.0, 1.0),
               WithinAbs(martingale_X_closed_form(params, 0.0, 0.0, 0.0, 1.0), 1e-7));
    CHECK_THROWS_AS(martingale_X_closed_form(params, 0.5, 0.0, 1.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(martingale_X_closed_form(params, -0.5, 0.0, 0.5, 1.0), std::domain_error);
}
