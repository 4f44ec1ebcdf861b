#include <doctest.h>

#include <cmath>

#include "reinopt/premium.hpp"
#include "test_scenarios.hpp"

using namespace reinopt;

namespace {

PremiumPrinciple make(PremiumPrinciple::Kind kind, const ClaimModel& claims, double theta = 0.1,
                      double horizon = 5.0) {
    switch (kind) {
    case PremiumPrinciple::Kind::ExpectedValue: return PremiumPrinciple::expected_value(theta, claims);
    case PremiumPrinciple::Kind::Variance: return PremiumPrinciple::variance(theta, claims);
    default: return PremiumPrinciple::intensity_adjusted(theta, claims, horizon);
    }
}

} // namespace

TEST_CASE("expected-value premium at full protection") {
    const auto claims = ClaimModel::exponential(2.0); // E[Z] = 0.5
    const auto evp = PremiumPrinciple::expected_value(0.1, claims);
    CHECK(evp.q(0.0, 0.1, 1.0) == doctest::Approx(0.055).epsilon(1e-14));
}

TEST_CASE("every principle charges nothing for a null protection") {
    const auto claims = ClaimModel::exponential(2.0);
    for (auto kind : {PremiumPrinciple::Kind::ExpectedValue, PremiumPrinciple::Kind::Variance,
                      PremiumPrinciple::Kind::IntensityAdjustedVariance}) {
        const auto principle = make(kind, claims);
        for (double lambda : {0.05, 0.2, 1.0}) {
            CHECK(principle.q(0.3, lambda, 0.0) == 0.0);
        }
    }
}

TEST_CASE("intensity-adjusted premium collapses to the variance principle as lambda vanishes") {
    const auto claims = ClaimModel::exponential(2.0);
    const auto iavp = PremiumPrinciple::intensity_adjusted(0.1, claims, 5.0);
    const double lambda = 1e-9;
    const double u = 0.7;
    const double scaled = iavp.q(0.0, lambda, u) / lambda;
    const double vp_density = claims.mean() * u + 0.1 * claims.second_moment() * u * u;
    CHECK(scaled == doctest::Approx(vp_density).epsilon(1e-6));
}

TEST_CASE("analytic u-derivatives match central differences") {
    const auto claims = ClaimModel::pareto(1.8182, 0.0545);
    const double h = 1e-6;
    for (auto kind : {PremiumPrinciple::Kind::ExpectedValue, PremiumPrinciple::Kind::Variance,
                      PremiumPrinciple::Kind::IntensityAdjustedVariance}) {
        const auto principle = make(kind, claims);
        for (double lambda : {0.05, 0.16, 0.9}) {
            for (double u : {0.1, 0.5, 0.9}) {
                const auto eval = principle.evaluate(1.0, lambda, u);
                const double fd =
                    (principle.q(1.0, lambda, u + h) - principle.q(1.0, lambda, u - h)) / (2 * h);
                CHECK(eval.dq_du == doctest::Approx(fd).epsilon(1e-8));
                CHECK(eval.d2q_du2 >= 0.0);
                CHECK(eval.dq_du >= 0.0);
            }
        }
    }
}

TEST_CASE("expected-value and variance premiums factor through the intensity") {
    const auto claims = ClaimModel::exponential(2.0);
    const auto sc = test_scenarios::exponential_claims();
    const double u = 0.6;
    for (auto kind : {PremiumPrinciple::Kind::ExpectedValue, PremiumPrinciple::Kind::Variance}) {
        const auto principle = make(kind, claims);
        double reference = -1.0;
        for (double y : {-2.0, 0.0, 1.0, 3.0}) {
            const double lambda = sc.factor.intensity(0.7, y);
            const double density = principle.q(0.7, lambda, u) / lambda;
            if (reference < 0) reference = density;
            CHECK(density == doctest::Approx(reference).epsilon(1e-12));
        }
    }
    // the intensity-adjusted principle must break the factorization
    const auto iavp = make(PremiumPrinciple::Kind::IntensityAdjustedVariance, claims);
    const double d1 = iavp.q(0.7, sc.factor.intensity(0.7, 0.0), u) / sc.factor.intensity(0.7, 0.0);
    const double d2 = iavp.q(0.7, sc.factor.intensity(0.7, 3.0), u) / sc.factor.intensity(0.7, 3.0);
    CHECK(std::abs(d1 - d2) > 1e-3);
}

TEST_CASE("custom premium tables interpolate and validate derivatives") {
    // table sampled from the variance principle so the interpolant can be
    // checked against the closed form
    const auto claims = ClaimModel::exponential(2.0);
    const auto vp = PremiumPrinciple::variance(0.1, claims);
    CustomPremiumTable table;
    const int nl = 9, nu = 21;
    for (int i = 0; i < nl; ++i) table.lambda_nodes.push_back(0.05 + 0.15 * i);
    for (int j = 0; j < nu; ++j) table.u_nodes.push_back(j / double(nu - 1));
    for (int i = 0; i < nl; ++i) {
        for (int j = 0; j < nu; ++j) {
            const auto pe = vp.evaluate(0.0, table.lambda_nodes[i], table.u_nodes[j]);
            table.q.push_back(pe.q);
            table.dq_du.push_back(pe.dq_du);
            table.d2q_du2.push_back(pe.d2q_du2);
        }
    }
    const auto custom = PremiumPrinciple::custom(table);
    for (double lambda : {0.1, 0.33, 0.8}) {
        for (double u : {0.0, 0.23, 0.57, 1.0}) {
            const auto a = custom.evaluate(0.0, lambda, u);
            const auto b = vp.evaluate(0.0, lambda, u);
            CHECK(a.q == doctest::Approx(b.q).epsilon(1e-4));
            CHECK(a.dq_du == doctest::Approx(b.dq_du).epsilon(1e-3));
        }
    }

    // corrupting the derivative table must be rejected at load
    table.dq_du[5 * nu + 10] += 0.5;
    CHECK_THROWS_AS(PremiumPrinciple::custom(table), ConfigInvalid);
}

TEST_CASE("iavp premium collects the dynamic variance price for full cession at constant intensity") {
    auto sc = test_scenarios::constant_intensity(0.1);
    const auto u_one = [](double, double) { return 1.0; };
    const auto report = iavp_dominance_check(u_one, sc, 20000, 2024, {});
    CHECK(report.holds);
    // slack = theta_r E[Z^2] T^2 lambda^2 for constant lambda
    const double expected_slack = 0.1 * 0.5 * 25.0 * 0.01;
    CHECK(report.slack == doctest::Approx(expected_slack).epsilon(0.25));
    CHECK(report.lhs >= report.rhs - 3.0 * report.se_slack);
}

TEST_CASE("iavp dominance check is trivial for a null cession") {
    auto sc = test_scenarios::constant_intensity(0.1);
    const auto u_zero = [](double, double) { return 0.0; };
    const auto report = iavp_dominance_check(u_zero, sc, 2000, 2024, {});
    CHECK(report.lhs == 0.0);
    CHECK(report.rhs == 0.0);
    CHECK(report.holds);
}

TEST_CASE("iavp premium dominates under the stochastic intensity") {
    auto sc = test_scenarios::exponential_claims();
    const auto u_one = [](double, double) { return 1.0; };
    const auto report = iavp_dominance_check(u_one, sc, 20000, 99, {});
    CHECK(report.holds);
    CHECK(report.var_ceded > 0.0);
}
