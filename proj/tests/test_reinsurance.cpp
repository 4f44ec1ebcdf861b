#include <doctest.h>

#include <cmath>

#include "reinopt/reinsurance.hpp"
#include "oracles.hpp"
#include "test_scenarios.hpp"

using namespace reinopt;

namespace {

struct Fixture {
    ScenarioConfig sc;
    PremiumPrinciple principle;
    ReinsuranceProblem problem;

    explicit Fixture(PremiumPrinciple::Kind kind,
                     ScenarioConfig scenario = test_scenarios::exponential_claims())
        : sc(std::move(scenario)), principle(sc.principle_of(kind)),
          problem{&sc.claims, &principle, sc.factor.intensity, sc.prefs.eta, sc.prefs.horizon,
                  sc.market.rate} {}
};

ExponentialClosedFormParams table1_params() {
    return {2.0, 0.5, 0.05, 5.0, 0.1};
}

} // namespace

TEST_CASE("retention objective at full cession is the pure premium penalty") {
    Fixture fx(PremiumPrinciple::Kind::Variance);
    const double t = 1.3, y = 0.4;
    const double lambda = fx.problem.lambda_at(t, y);
    const auto psi = psi_u(fx.problem, t, y, 1.0);
    const double w = fx.sc.prefs.eta * std::exp(fx.sc.market.rate * (fx.sc.prefs.horizon - t));
    CHECK(psi.value == doctest::Approx(-w * fx.principle.q(t, lambda, 1.0)).epsilon(1e-12));
}

TEST_CASE("retention objective matches an independent quadrature") {
    Fixture fx(PremiumPrinciple::Kind::ExpectedValue);
    const double t = 0.0, y = 1.0, u = 0.5;
    const double lambda = fx.problem.lambda_at(t, y);
    const double w = fx.sc.prefs.eta * std::exp(fx.sc.market.rate * fx.sc.prefs.horizon);
    const double c = fx.sc.prefs.eta * (1.0 - u) * std::exp(fx.sc.market.rate * fx.sc.prefs.horizon);
    const double zeta = 2.0;
    const double integral = oracles::integrate_simpson(
        [&](double z) { return (1.0 - std::exp(c * z)) * zeta * std::exp(-zeta * z); }, 0.0, 120.0,
        1e-12);
    const double expected = -w * fx.principle.q(t, lambda, u) + lambda * integral;
    const auto psi = psi_u(fx.problem, t, y, u);
    CHECK(psi.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("vanishing intensity makes zero retention optimal for a sticky premium") {
    // a premium that does not scale with the intensity: paying for
    // protection against no risk is never worth it
    CustomPremiumTable table;
    table.lambda_nodes = {1e-10, 0.5, 1.0};
    for (int j = 0; j <= 10; ++j) table.u_nodes.push_back(j / 10.0);
    for (std::size_t i = 0; i < table.lambda_nodes.size(); ++i) {
        for (double u : table.u_nodes) {
            table.q.push_back(0.05 * u);
            table.dq_du.push_back(0.05);
            table.d2q_du2.push_back(0.0);
        }
    }
    const auto sticky = PremiumPrinciple::custom(table);
    auto sc = test_scenarios::constant_intensity(1e-9);
    ReinsuranceProblem problem{&sc.claims, &sticky, sc.factor.intensity, sc.prefs.eta,
                               sc.prefs.horizon, sc.market.rate};
    const auto sol = optimal_u(problem, 0.0, 0.0);
    CHECK(sol.region == Region::NoReinsurance);
    CHECK(sol.u == 0.0);
    // Psi^u collapses to the pure premium penalty as lambda -> 0
    const auto psi = psi_u(problem, 0.0, 0.0, 0.4);
    const double w = 0.5 * std::exp(0.05 * 5.0);
    CHECK(psi.value == doctest::Approx(-w * 0.05 * 0.4).epsilon(1e-6));
}

TEST_CASE("expected-value principle never cedes everything") {
    Fixture fx(PremiumPrinciple::Kind::ExpectedValue);
    for (double t : {0.0, 1.0, 2.5, 4.0, 5.0}) {
        for (double y : {-2.0, 0.0, 1.0, 3.0}) {
            CHECK(classify_region(fx.problem, t, y) != Region::FullReinsurance);
        }
    }
}

TEST_CASE("quadratic premium principles always have an interior optimum") {
    for (auto kind :
         {PremiumPrinciple::Kind::Variance, PremiumPrinciple::Kind::IntensityAdjustedVariance}) {
        Fixture fx(kind);
        for (double t : {0.0, 2.5, 5.0}) {
            for (double y : {-2.0, 1.0, 3.0}) {
                CHECK(classify_region(fx.problem, t, y) == Region::Interior);
                const auto sol = optimal_u(fx.problem, t, y);
                CHECK(sol.u > 0.0);
                CHECK(sol.u < 1.0);
                CHECK(std::abs(sol.foc_residual) <= 1e-8);
            }
        }
    }
}

TEST_CASE("a generous enough loading makes zero cession optimal") {
    // E[Z e^{eta Z e^{RT}}] / E[Z] is about 2.17 at t=0, so any loading
    // above that ratio puts the whole horizon in the no-reinsurance set.
    auto sc = test_scenarios::exponential_claims();
    sc.theta_r = 1.3;
    Fixture fx(PremiumPrinciple::Kind::ExpectedValue, sc);
    CHECK(classify_region(fx.problem, 0.0, 1.0) == Region::NoReinsurance);
    const auto sol = optimal_u(fx.problem, 0.0, 1.0);
    CHECK(sol.u == 0.0);
}

TEST_CASE("expected-value retention switches off at the closed-form time") {
    // theta_r = 0.9 puts the switch inside the horizon
    ExponentialClosedFormParams params{2.0, 0.5, 0.05, 5.0, 0.9};
    const auto at0 = closed_form_exponential(PremiumPrinciple::Kind::ExpectedValue, 0.0, 0.1, params);
    REQUIRE(at0.switch_time.has_value());
    const double t0 = *at0.switch_time;
    CHECK(t0 > 0.0);
    CHECK(t0 < 5.0);
    CHECK(at0.u > 0.0);
    const auto late = closed_form_exponential(PremiumPrinciple::Kind::ExpectedValue, t0 + 0.1, 0.1,
                                              params);
    CHECK(late.u == 0.0);

    auto sc = test_scenarios::exponential_claims();
    sc.theta_r = 0.9;
    Fixture fx(PremiumPrinciple::Kind::ExpectedValue, sc);
    CHECK(classify_region(fx.problem, t0 + 0.1, 1.0) == Region::NoReinsurance);
    CHECK(classify_region(fx.problem, t0 - 0.1, 1.0) == Region::Interior);
}

TEST_CASE("expected-value closed form matches the worked value and the solver") {
    const auto params = table1_params();
    const auto cf = closed_form_exponential(PremiumPrinciple::Kind::ExpectedValue, 0.0, 0.1, params);
    CHECK(cf.u == doctest::Approx(0.8550265122494065).epsilon(1e-12));
    REQUIRE(cf.switch_time.has_value());
    CHECK(*cf.switch_time == doctest::Approx(38.624087927575104).epsilon(1e-12));
    CHECK(*cf.switch_time > params.horizon); // zero-retention regime never activates

    Fixture fx(PremiumPrinciple::Kind::ExpectedValue);
    const auto sol = optimal_u(fx.problem, 0.0, 1.0);
    CHECK(std::abs(sol.u - cf.u) <= 1e-8);
}

TEST_CASE("variance closed form at zero loading is the full-cession limit") {
    auto params = table1_params();
    params.theta_r = 0.0;
    const auto cf = closed_form_exponential(PremiumPrinciple::Kind::Variance, 2.0, 0.1, params);
    CHECK(cf.u == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("intensity-adjusted closed form matches the bisection root") {
    const auto params = table1_params();
    const double lambda = 0.1 * std::exp(0.5);
    const auto cf =
        closed_form_exponential(PremiumPrinciple::Kind::IntensityAdjustedVariance, 0.0, lambda,
                                params);
    Fixture fx(PremiumPrinciple::Kind::IntensityAdjustedVariance);
    const auto sol = optimal_u_at_lambda(fx.problem, 0.0, lambda);
    CHECK(std::abs(sol.u - cf.u) <= 1e-8);
    CHECK(cf.u > 0.0);
    CHECK(cf.u < 1.0);
}

TEST_CASE("intensity-adjusted closed form collapses to the variance form at zero intensity") {
    const auto params = table1_params();
    for (double t : {0.0, 2.0, 5.0}) {
        const auto vp = closed_form_exponential(PremiumPrinciple::Kind::Variance, t, 0.3, params);
        const auto iavp = closed_form_exponential(PremiumPrinciple::Kind::IntensityAdjustedVariance,
                                                  t, 0.0, params);
        CHECK(iavp.u == doctest::Approx(vp.u).epsilon(1e-12));
    }
}

TEST_CASE("closed forms refuse parameters outside the guard") {
    auto params = table1_params();
    params.eta = 1.8; // zeta/eta < e^{RT}
    CHECK_THROWS_AS(
        closed_form_exponential(PremiumPrinciple::Kind::ExpectedValue, 0.0, 0.1, params),
        GuardViolated);
}

TEST_CASE("closed forms agree with bisection on a dense parameter grid") {
    Rng rng(5150);
    const auto base = test_scenarios::exponential_claims();
    for (int trial = 0; trial < 60; ++trial) {
        auto sc = base;
        sc.theta_r = 0.02 + 1.5 * rng.uniform();
        const double t = 5.0 * rng.uniform();
        const double lambda = 0.02 + 2.0 * rng.uniform();
        ExponentialClosedFormParams params{2.0, 0.5, 0.05, 5.0, sc.theta_r};
        for (auto kind : {PremiumPrinciple::Kind::ExpectedValue, PremiumPrinciple::Kind::Variance,
                          PremiumPrinciple::Kind::IntensityAdjustedVariance}) {
            Fixture fx(kind, sc);
            const auto cf = closed_form_exponential(kind, t, lambda, params);
            const auto sol = optimal_u_at_lambda(fx.problem, t, lambda);
            CHECK(std::abs(cf.u - sol.u) <= 1e-8);
        }
    }
}

TEST_CASE("retention objective is strictly concave under the certificate") {
    for (auto kind : {PremiumPrinciple::Kind::ExpectedValue, PremiumPrinciple::Kind::Variance,
                      PremiumPrinciple::Kind::IntensityAdjustedVariance}) {
        Fixture fx(kind);
        for (double t : {0.0, 2.0, 4.9}) {
            for (double y : {-1.0, 1.0, 2.5}) {
                const auto cert = verify_concavity(fx.problem, t, fx.problem.lambda_at(t, y));
                (void)cert;
                for (int i = 1; i <= 11; ++i) {
                    const double u = i / 12.0;
                    CHECK(psi_u(fx.problem, t, y, u).d2_du2 < 0.0);
                }
            }
        }
    }
}

TEST_CASE("optimal retention is monotone in risk aversion and loading") {
    const double lambda = 0.1 * std::exp(0.5);
    for (auto kind : {PremiumPrinciple::Kind::ExpectedValue, PremiumPrinciple::Kind::Variance,
                      PremiumPrinciple::Kind::IntensityAdjustedVariance}) {
        double prev = -1.0;
        for (double eta : {0.1, 0.3, 0.5, 0.8, 1.2}) {
            ExponentialClosedFormParams params{2.0, eta, 0.05, 5.0, 0.1};
            const double u = closed_form_exponential(kind, 0.0, lambda, params).u;
            CHECK(u >= prev);
            prev = u;
        }
        prev = 2.0;
        for (double theta : {0.05, 0.1, 0.2, 0.35, 0.5}) {
            ExponentialClosedFormParams params{2.0, 0.5, 0.05, 5.0, theta};
            const double u = closed_form_exponential(kind, 0.0, lambda, params).u;
            CHECK(u <= prev);
            prev = u;
        }
    }
}

TEST_CASE("only the intensity-adjusted strategy reacts to the intensity") {
    Fixture evp(PremiumPrinciple::Kind::ExpectedValue);
    Fixture vp(PremiumPrinciple::Kind::Variance);
    Fixture iavp(PremiumPrinciple::Kind::IntensityAdjustedVariance);
    double prev_iavp = 2.0;
    const double u_evp_ref = optimal_u_at_lambda(evp.problem, 1.0, 0.05).u;
    const double u_vp_ref = optimal_u_at_lambda(vp.problem, 1.0, 0.05).u;
    for (double lambda : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        CHECK(optimal_u_at_lambda(evp.problem, 1.0, lambda).u ==
              doctest::Approx(u_evp_ref).epsilon(1e-9));
        CHECK(optimal_u_at_lambda(vp.problem, 1.0, lambda).u ==
              doctest::Approx(u_vp_ref).epsilon(1e-9));
        const double u_iavp = optimal_u_at_lambda(iavp.problem, 1.0, lambda).u;
        CHECK(u_iavp < prev_iavp);
        prev_iavp = u_iavp;
    }
}

TEST_CASE("moment table reproduces direct weighted moments") {
    const auto claims = ClaimModel::pareto(1.8182, 0.0545);
    const double c_max = 0.5 * std::exp(0.25);
    const MomentTable table(claims, c_max);
    Rng rng(8888);
    for (int i = 0; i < 50; ++i) {
        const double c = c_max * rng.uniform();
        CHECK(table.m0(c) == doctest::Approx(claims.weighted_moment(c, 0)).epsilon(1e-9));
        CHECK(table.m1(c) == doctest::Approx(claims.weighted_moment(c, 1)).epsilon(1e-9));
        CHECK(table.m2(c) == doctest::Approx(claims.weighted_moment(c, 2)).epsilon(1e-9));
    }
}

TEST_CASE("strategy surface interpolates the pointwise solver") {
    Fixture fx(PremiumPrinciple::Kind::IntensityAdjustedVariance,
               test_scenarios::pareto_claims());
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 100);
    const auto surface = build_strategy_surface(fx.problem, grid, 0.01, 2.0, 96, {});
    Rng rng(4242);
    for (int i = 0; i < 25; ++i) {
        const double t = 5.0 * rng.uniform();
        const double lambda = 0.02 + 1.5 * rng.uniform();
        const auto direct = optimal_u_at_lambda(fx.problem, t, lambda);
        CHECK(surface.u_at(t, lambda) == doctest::Approx(direct.u).epsilon(5e-4));
        const auto psi = psi_u_at_lambda(fx.problem, t, lambda, direct.u);
        CHECK(surface.psi_at(t, lambda) == doctest::Approx(psi.value).epsilon(5e-3));
    }
}

TEST_CASE("strategy surface csv labels boundary regions") {
    auto sc = test_scenarios::exponential_claims();
    sc.theta_r = 0.9; // expected-value principle with a region switch in t
    Fixture fx(PremiumPrinciple::Kind::ExpectedValue, sc);
    std::ostringstream os;
    const std::vector<double> ts{0.0, 2.5, 5.0};
    const std::vector<double> ys{0.0, 1.0};
    dump_strategy_surface_csv(os, fx.problem, ts, ys);
    const std::string text = os.str();
    CHECK(text.find("t,y,lambda,region,u_star") == 0);
    CHECK(text.find("A0") != std::string::npos);
}
