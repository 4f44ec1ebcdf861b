#include <doctest.h>

#include <cmath>

#include "reinopt/runner.hpp"
#include "reinopt/valuation.hpp"
#include "oracles.hpp"
#include "test_scenarios.hpp"

using namespace reinopt;

namespace {

StrategySurface surface_of(const ScenarioConfig& sc, const PremiumPrinciple& principle) {
    ReinsuranceProblem problem{&sc.claims, &principle, sc.factor.intensity, sc.prefs.eta,
                               sc.prefs.horizon, sc.market.rate};
    const double lam_lo = sc.factor.intensity(0.0, sc.probe_y_lo - 4.0);
    const double lam_hi = sc.factor.intensity(0.0, sc.probe_y_hi + 4.0);
    return build_strategy_surface(problem, sc.sim_grid(),
                                  std::min(lam_lo, lam_hi) * 0.9,
                                  std::max(lam_lo, lam_hi) * 1.1 + 1e-6, 128, {});
}

} // namespace

TEST_CASE("full cession at matched premia grows at the risk-free rate") {
    auto sc = test_scenarios::exponential_claims();
    sc.principle_kind = PremiumPrinciple::Kind::ExpectedValue;
    sc.theta_i = sc.theta_r; // gross premium equals the full-cession price
    sc.n_steps = 200;
    const auto strategy = StrategyField::constant(1.0, 0.0);
    const auto samples = simulate_terminal_wealth(strategy, sc, 200, 31, {});
    const double expected = sc.initial_wealth * std::exp(0.05 * 5.0);
    for (double x : samples) CHECK(x == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("uninsured wealth mean matches the compensator identity") {
    auto sc = test_scenarios::constant_intensity(0.1);
    sc.principle_kind = PremiumPrinciple::Kind::ExpectedValue;
    sc.n_steps = 250;
    const auto strategy = StrategyField::constant(0.0, 0.0);
    const std::size_t n_reps = 40000;
    const auto samples = simulate_terminal_wealth(strategy, sc, n_reps, 47, {});
    const auto stat = oracles::mean_se(samples);
    // X0 e^{RT} + (c - E[Z] lambda) int e^{R(T-r)} dr, with q(.,0) = 0
    const double annuity = (std::exp(0.05 * 5.0) - 1.0) / 0.05;
    const double c = (1.0 + sc.theta_i) * sc.claims.mean() * 0.1;
    const double expected =
        sc.initial_wealth * std::exp(0.25) + (c - sc.claims.mean() * 0.1) * annuity;
    CHECK(std::abs(stat.mean - expected) <= 3.0 * stat.se);
}

TEST_CASE("terminal wealth is linear in the initial capital path by path") {
    auto sc = test_scenarios::exponential_claims();
    sc.n_steps = 100;
    const auto strategy = StrategyField::constant(0.4, 0.7);
    auto sc_zero = sc;
    sc_zero.initial_wealth = 0.0;
    const auto base = simulate_terminal_wealth(strategy, sc_zero, 500, 11, {});
    auto sc_funded = sc;
    sc_funded.initial_wealth = 2.5;
    const auto funded = simulate_terminal_wealth(strategy, sc_funded, 500, 11, {});
    const double shift = 2.5 * std::exp(0.05 * 5.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(funded[i] - base[i] == doctest::Approx(shift).epsilon(1e-12));
    }
}

TEST_CASE("wealth summary reports utility below one and ordered quantiles") {
    auto sc = test_scenarios::exponential_claims();
    sc.n_steps = 100;
    const auto result = simulate_wealth(StrategyField::constant(0.5, 1.0), sc, 4000, 5, {});
    CHECK(result.mean_utility < 1.0);
    CHECK(result.quantiles[0] <= result.quantiles[1]);
    CHECK(result.quantiles[1] <= result.quantiles[2]);
    CHECK(result.n_reps == 4000);
    const std::string json = result.summary_json();
    CHECK(json.find("\"mean_utility\"") != std::string::npos);
    CHECK(json.find("\"quantiles\"") != std::string::npos);
}

TEST_CASE("factor value estimate is one at the horizon") {
    const auto sc = test_scenarios::exponential_claims();
    const auto principle = sc.principle();
    const auto surface = surface_of(sc, principle);
    McConfig mc;
    mc.n_reps = 100;
    mc.seed = 9;
    const auto f = estimate_f(5.0, 1.0, sc, surface, mc);
    CHECK(f.value == 1.0);
    CHECK(f.se == 0.0);
}

TEST_CASE("factor value collapses to a deterministic integral at constant intensity") {
    auto sc = test_scenarios::constant_intensity(0.1);
    sc.principle_kind = PremiumPrinciple::Kind::ExpectedValue;
    sc.n_steps = 400;
    const auto principle = sc.principle();
    const auto surface = surface_of(sc, principle);
    McConfig mc;
    mc.n_reps = 200;
    mc.seed = 17;
    mc.n_steps = 400;
    const auto f = estimate_f(0.0, 0.0, sc, surface, mc);
    CHECK(f.se <= 1e-12); // every path carries the same integrand

    ReinsuranceProblem problem{&sc.claims, &principle, sc.factor.intensity, sc.prefs.eta,
                               sc.prefs.horizon, sc.market.rate};
    const double oracle = std::exp(-oracles::integrate_simpson(
        [&](double s) {
            const double c = sc.insurance_premium(s, 0.0);
            const double psi = psi_u(problem, s, 0.0, optimal_u(problem, s, 0.0).u).value;
            return sc.prefs.eta * std::exp(0.05 * (5.0 - s)) * c + psi;
        },
        0.0, 5.0, 1e-10));
    CHECK(f.value == doctest::Approx(oracle).epsilon(2e-3)); // trapezoid vs exact quadrature
    CHECK(f.value > 0.0);
}

TEST_CASE("value function honors the terminal condition and capital limits") {
    const RiskPreferences prefs{0.5, 5.0};
    CHECK(value_function(5.0, 0.0, 1.0, 1.0, 1.0, 0.0, prefs, 0.05) == -1.0);
    double prev = -2.0;
    for (double x : {-1.0, 0.0, 1.0, 5.0, 25.0, 100.0}) {
        const double v = value_function(2.0, x, 1.0, 1.0, 0.9, -0.4, prefs, 0.05);
        CHECK(v < 0.0);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(prev > -1e-8); // v -> 0- as x -> infinity
    CHECK_THROWS_AS(value_function(2.0, 0.0, 1.0, 1.0, -0.1, 0.0, prefs, 0.05), ConfigInvalid);
}

TEST_CASE("variance decomposition matches the compound-poisson value at constant intensity") {
    auto sc = test_scenarios::constant_intensity(0.1);
    const auto u_one = [](double, double) { return 1.0; };
    const auto report = variance_decomposition(u_one, sc, 30000, 77, {});
    CHECK(std::abs(report.lhs - 0.25) <= 3.0 * report.se_combined + 0.25 * 0.02);
    CHECK(report.intensity_term == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(report.holds);
}

TEST_CASE("variance decomposition is trivial for a null cession") {
    auto sc = test_scenarios::constant_intensity(0.1);
    const auto u_zero = [](double, double) { return 0.0; };
    const auto report = variance_decomposition(u_zero, sc, 2000, 77, {});
    CHECK(report.lhs == 0.0);
    CHECK(report.rhs == 0.0);
    CHECK(report.holds);
}

TEST_CASE("variance decomposition holds under the stochastic intensity") {
    const auto sc = test_scenarios::exponential_claims();
    const auto u_one = [](double, double) { return 1.0; };
    const auto report = variance_decomposition(u_one, sc, 30000, 123, {});
    CHECK(report.holds);
    CHECK(report.intensity_term > 0.0);
}

TEST_CASE("documented perturbation and benchmark sets have the advertised sizes") {
    CHECK(default_perturbations().size() == 20);
    CHECK(default_constant_benchmarks().size() == 4);
    bool has_null = false, has_full = false;
    for (const auto& c : default_constant_benchmarks()) {
        if (c.u == 0.0 && c.w == 0.0) has_null = true;
        if (c.u == 1.0 && c.w == 0.0) has_full = true;
    }
    CHECK(has_null);
    CHECK(has_full);
}

TEST_CASE("value function product form is consistent with direct utility simulation") {
    auto sc = test_scenarios::exponential_claims();
    sc.n_steps = 250;
    const auto principle = sc.principle();
    const auto surface = surface_of(sc, principle);
    LatticeConfig lc;
    lc.n_t = 26;
    lc.n_p = 30;
    lc.reps_per_node = 2000;
    lc.n_steps = 250;
    lc.seed = derive_seed(sc.seed, 5);
    const auto lattice = build_g_lattice(sc.market, sc.prefs.horizon, lc);

    McConfig mc;
    mc.n_reps = 20000;
    mc.seed = derive_seed(sc.seed, 6);
    mc.n_steps = 250;
    const auto f = estimate_f(0.0, sc.factor.y0, sc, surface, mc);
    McConfig gmc;
    gmc.n_reps = 40000;
    gmc.seed = derive_seed(sc.seed, 7);
    gmc.n_steps = 250;
    const auto g = estimate_g(0.0, sc.market.p0, sc.market, sc.prefs.horizon, gmc);

    const double v = value_function(0.0, sc.initial_wealth, sc.factor.y0, sc.market.p0, f.value,
                                    g.value, sc.prefs, sc.market.rate);

    const auto optimal = optimal_strategy_field(sc, surface, lattice);
    const auto samples = simulate_terminal_wealth(optimal, sc, 20000, derive_seed(sc.seed, 8), {});
    std::vector<double> neg_utils(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        neg_utils[i] = -std::exp(-sc.prefs.eta * samples[i]);
    }
    const auto direct = oracles::mean_se(neg_utils);

    // combined uncertainty: MC value-function inputs plus the wealth side
    const double discount = std::exp(-sc.prefs.eta * sc.initial_wealth *
                                     std::exp(sc.market.rate * sc.prefs.horizon));
    const double se_v = discount * std::exp(g.value) *
                        std::sqrt(f.se * f.se + (f.value * g.se_value) * (f.value * g.se_value));
    INFO("product form " << v << " +- " << se_v << " vs simulated " << direct.mean << " +- "
                         << direct.se);
    CHECK(std::abs(v - direct.mean) <= 3.0 * (se_v + direct.se) + 5e-4);
}

TEST_CASE("dominance tournament prefers the optimal strategy at desk scale") {
    auto sc = test_scenarios::exponential_claims();
    sc.n_steps = 250;
    const auto principle = sc.principle();
    const auto surface = surface_of(sc, principle);
    LatticeConfig lc;
    lc.n_t = 26;
    lc.n_p = 30;
    lc.reps_per_node = 1500;
    lc.n_steps = 250;
    lc.seed = derive_seed(sc.seed, 9);
    const auto lattice = build_g_lattice(sc.market, sc.prefs.horizon, lc);
    const auto optimal = optimal_strategy_field(sc, surface, lattice);

    const auto perturbations = default_perturbations();
    const auto constants = default_constant_benchmarks();
    const auto result =
        dominance_tournament(sc, optimal, perturbations, constants, 8000, 2718, {});
    CHECK(result.entries.size() == 24);
    for (const auto& entry : result.entries) {
        INFO(entry.label << " mean_diff " << entry.mean_diff << " se " << entry.se_diff);
        CHECK(entry.never_worse);
    }
    CHECK(result.optimal_dominates);
}
