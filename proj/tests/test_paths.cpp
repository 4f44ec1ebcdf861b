#include <doctest.h>

#include <cmath>
#include <sstream>

#include "reinopt/parallel.hpp"
#include "reinopt/paths.hpp"
#include "oracles.hpp"
#include "test_scenarios.hpp"

using namespace reinopt;

TEST_CASE("degenerate factor dynamics stay constant") {
    FactorModel model;
    model.y0 = 1.0;
    model.drift = Coefficient::constant(0.0);
    model.diffusion = Coefficient::constant(0.0);
    model.intensity = IntensityMap::exp_half_y(0.1);
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 100);
    auto [y, lambda] = simulate_factor(model, grid, std::uint64_t{7});
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] == 1.0);
        CHECK(lambda[i] == doctest::Approx(0.1 * std::exp(0.5)).epsilon(1e-14));
    }
}

TEST_CASE("factor paths are reproducible from the seed alone") {
    const auto sc = test_scenarios::exponential_claims();
    const SimGrid grid = sc.sim_grid();
    auto [y1, l1] = simulate_factor(sc.factor, grid, std::uint64_t{123});
    auto [y2, l2] = simulate_factor(sc.factor, grid, std::uint64_t{123});
    CHECK(y1 == y2);
    CHECK(l1 == l2);
    auto [y3, l3] = simulate_factor(sc.factor, grid, std::uint64_t{124});
    CHECK(y1 != y3);
}

TEST_CASE("constant-coefficient factor mean matches the drift line") {
    const auto sc = test_scenarios::exponential_claims();
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 250);
    const std::size_t n_reps = 20000;
    std::vector<double> terminal;
    map_indexed<double>(n_reps, {}, [&](std::size_t rep) {
        Rng noise = Rng::stream(31337, Stream::FactorNoise, rep);
        auto [y, lambda] = simulate_factor(sc.factor, grid, noise);
        return y.back();
    }, terminal);
    const auto stat = oracles::mean_se(terminal);
    CHECK(std::abs(stat.mean - (1.0 + 0.3 * 5.0)) <= 3.0 * stat.se);
}

TEST_CASE("deterministic asset growth at zero volatility") {
    MarketModel market = MarketModel::constant(0.05, 0.0, 0.05, 1.0);
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 500);
    const auto path = simulate_asset(market, grid, std::uint64_t{9}, Measure::Physical);
    CHECK(path.back() == doctest::Approx(std::exp(0.05 * 5.0)).epsilon(1e-12));
    CHECK(path.front() == 1.0);
}

TEST_CASE("geometric brownian asset mean matches the exponential drift") {
    MarketModel market = MarketModel::constant(0.1, 0.2, 0.05, 1.0);
    const SimGrid grid = SimGrid::uniform(0.0, 2.0, 200);
    const std::size_t n_reps = 40000;
    std::vector<double> terminal;
    map_indexed<double>(n_reps, {}, [&](std::size_t rep) {
        Rng noise = Rng::stream(555, Stream::AssetNoise, rep);
        return simulate_asset(market, grid, noise, Measure::Physical).back();
    }, terminal);
    const auto stat = oracles::mean_se(terminal);
    CHECK(std::abs(stat.mean - std::exp(0.1 * 2.0)) <= 3.0 * stat.se);
}

TEST_CASE("discounted price is a martingale under the risk-neutral measure") {
    MarketModel market = MarketModel::constant(0.1, 0.25, 0.05, 1.0);
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 250);
    const std::size_t n_reps = 40000;
    std::vector<double> discounted;
    map_indexed<double>(n_reps, {}, [&](std::size_t rep) {
        Rng noise = Rng::stream(556, Stream::AssetNoise, rep);
        return std::exp(-0.05 * 5.0) *
               simulate_asset(market, grid, noise, Measure::RiskNeutral).back();
    }, discounted);
    const auto stat = oracles::mean_se(discounted);
    CHECK(std::abs(stat.mean - 1.0) <= 3.0 * stat.se);
}

TEST_CASE("homogeneous claim counts match the poisson mean") {
    auto sc = test_scenarios::constant_intensity(0.1);
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 100);
    const std::size_t n_reps = 100000;
    std::vector<double> counts;
    map_indexed<double>(n_reps, {}, [&](std::size_t rep) {
        Rng y_noise = Rng::stream(777, Stream::FactorNoise, rep);
        Rng thinning = Rng::stream(777, Stream::Thinning, rep);
        Rng marks = Rng::stream(777, Stream::Marks, rep);
        auto [y, lambda] = simulate_factor(sc.factor, grid, y_noise);
        return static_cast<double>(simulate_claims(lambda, sc.claims, grid, thinning, marks).size());
    }, counts);
    const auto stat = oracles::mean_se(counts);
    CHECK(std::abs(stat.mean - 0.5) <= 3.0 * stat.se);
}

TEST_CASE("cox claim counts match the integrated intensity") {
    const auto sc = test_scenarios::exponential_claims();
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 250);
    const std::size_t n_reps = 50000;
    std::vector<double> compensated;
    map_indexed<double>(n_reps, {}, [&](std::size_t rep) {
        Rng y_noise = Rng::stream(42424242, Stream::FactorNoise, rep);
        Rng thinning = Rng::stream(42424242, Stream::Thinning, rep);
        Rng marks = Rng::stream(42424242, Stream::Marks, rep);
        auto [y, lambda] = simulate_factor(sc.factor, grid, y_noise);
        const auto events = simulate_claims(lambda, sc.claims, grid, thinning, marks);
        double compensator = 0.0;
        for (std::size_t i = 1; i < lambda.size(); ++i) {
            compensator += 0.5 * (lambda[i - 1] + lambda[i]) * grid.dt();
        }
        return static_cast<double>(events.size()) - compensator;
    }, compensated);
    const auto stat = oracles::mean_se(compensated);
    CHECK(std::abs(stat.mean) <= 3.0 * stat.se);
}

TEST_CASE("claim events are ordered, in-window and positively marked") {
    const auto sc = test_scenarios::exponential_claims();
    const SimGrid grid = sc.sim_grid();
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
        const auto bundle = simulate_bundle(sc.factor, sc.market, sc.claims, grid, 13, rep,
                                            Measure::Physical);
        double prev = 0.0;
        for (const auto& ev : bundle.claims) {
            CHECK(ev.time > prev);
            CHECK(ev.time <= grid.t1);
            CHECK(ev.mark > 0.0);
            prev = ev.time;
        }
        for (double lam : bundle.intensity) CHECK(lam > 0.0);
        for (double p : bundle.price) CHECK(p > 0.0);
    }
}

TEST_CASE("a zero-length window produces no claims") {
    auto sc = test_scenarios::constant_intensity(0.1);
    const SimGrid grid{0.0, 0.0, 1};
    std::vector<double> lambda{0.1, 0.1};
    Rng thinning = Rng::stream(3, Stream::Thinning, 0);
    Rng marks = Rng::stream(3, Stream::Marks, 0);
    const auto events = simulate_claims(lambda, sc.claims, grid, thinning, marks);
    CHECK(events.empty());
}

TEST_CASE("halving the step shrinks the strong error by about sqrt(2)") {
    // multiplicative dynamics dY = 0.3 Y dt + 0.3 Y dW with the exact
    // lognormal solution rebuilt from the same increments
    FactorModel model;
    model.y0 = 1.0;
    model.drift = Coefficient::affine(0.0, 0.3);
    model.diffusion = Coefficient::affine(0.0, 0.3);
    model.intensity = IntensityMap::constant(0.1);
    const double horizon = 1.0;
    const std::size_t n_fine = 128;
    const SimGrid fine = SimGrid::uniform(0.0, horizon, n_fine);
    const SimGrid coarse = SimGrid::uniform(0.0, horizon, n_fine / 2);

    double err_fine = 0.0, err_coarse = 0.0;
    const std::size_t n_reps = 4000;
    for (std::size_t rep = 0; rep < n_reps; ++rep) {
        Rng noise = Rng::stream(112233, Stream::FactorNoise, rep);
        std::vector<double> z_fine(n_fine);
        for (auto& z : z_fine) z = noise.normal();
        std::vector<double> z_coarse(n_fine / 2);
        for (std::size_t i = 0; i < z_coarse.size(); ++i) {
            z_coarse[i] = (z_fine[2 * i] + z_fine[2 * i + 1]) / std::sqrt(2.0);
        }
        double w_total = 0.0;
        const double sq_fine = std::sqrt(fine.dt());
        for (double z : z_fine) w_total += sq_fine * z;
        const double exact = std::exp((0.3 - 0.5 * 0.09) * horizon + 0.3 * w_total);
        const double yf = euler_factor_path(model, fine, z_fine).back();
        const double yc = euler_factor_path(model, coarse, z_coarse).back();
        err_fine += (yf - exact) * (yf - exact);
        err_coarse += (yc - exact) * (yc - exact);
    }
    const double ratio = std::sqrt(err_coarse / err_fine);
    CHECK(ratio > 1.2);
    CHECK(ratio < 1.7);
}

TEST_CASE("bundle csv dumps carry the expected headers") {
    const auto sc = test_scenarios::exponential_claims();
    const SimGrid grid = SimGrid::uniform(0.0, 1.0, 10);
    std::vector<PathBundle> bundles{
        simulate_bundle(sc.factor, sc.market, sc.claims, grid, 5, 0, Measure::Physical)};
    std::ostringstream paths, events;
    dump_paths_csv(paths, bundles);
    dump_events_csv(events, bundles);
    CHECK(paths.str().rfind("replication,t,Y,lambda,P\n", 0) == 0);
    CHECK(events.str().rfind("replication,time,mark\n", 0) == 0);
}

TEST_CASE("openmp and serial path kernels agree bitwise") {
    const auto sc = test_scenarios::exponential_claims();
    const SimGrid grid = SimGrid::uniform(0.0, 5.0, 100);
    auto run = [&](const ExecPolicy& policy) {
        std::vector<double> out;
        map_indexed<double>(2000, policy, [&](std::size_t rep) {
            Rng y_noise = Rng::stream(1, Stream::FactorNoise, rep);
            Rng thinning = Rng::stream(1, Stream::Thinning, rep);
            Rng marks = Rng::stream(1, Stream::Marks, rep);
            auto [y, lambda] = simulate_factor(sc.factor, grid, y_noise);
            const auto events = simulate_claims(lambda, sc.claims, grid, thinning, marks);
            double acc = y.back();
            for (const auto& ev : events) acc += ev.mark;
            return acc;
        }, out);
        return out;
    };
    const auto serial = run({Exec::Serial, 0});
    for (int threads : {1, 4, 8}) {
        const auto parallel = run({Exec::OpenMP, threads});
        CHECK(serial == parallel);
    }
}
