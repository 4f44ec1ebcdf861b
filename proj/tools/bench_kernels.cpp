// Benchmarks the OpenMP Monte Carlo kernels against the serial reference
// implementation and confirms both produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "reinopt/investment.hpp"
#include "reinopt/paths.hpp"
#include "reinopt/valuation.hpp"

using namespace reinopt;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

ScenarioConfig bench_scenario() {
    ScenarioConfig sc;
    sc.factor.y0 = 1.0;
    sc.factor.drift = Coefficient::constant(0.3);
    sc.factor.diffusion = Coefficient::constant(0.3);
    sc.factor.intensity = IntensityMap::exp_half_y(0.1);
    sc.market = MarketModel::cev(0.1, 0.1, 0.5, 0.05, 1.0);
    sc.claims = ClaimModel::exponential(2.0);
    sc.prefs = {0.5, 5.0};
    sc.principle_kind = PremiumPrinciple::Kind::IntensityAdjustedVariance;
    sc.theta_r = 0.1;
    sc.theta_i = 0.05;
    sc.n_steps = 250;
    sc.seed = 20240229;
    return sc;
}

struct BenchResult {
    double serial_s;
    double openmp_s;
    bool identical;
};

void report(const char* name, const BenchResult& r) {
    std::printf("%-26s serial %8.3fs   openmp %8.3fs   speedup %5.2fx   identical %s\n", name,
                r.serial_s, r.openmp_s, r.serial_s / r.openmp_s, r.identical ? "yes" : "NO");
}

BenchResult bench_factor_claims(const ScenarioConfig& sc, std::size_t n_reps) {
    const SimGrid grid = sc.sim_grid();
    auto kernel = [&](const ExecPolicy& policy) {
        std::vector<double> totals;
        map_indexed<double>(n_reps, policy, [&](std::size_t rep) {
            Rng y_noise = Rng::stream(sc.seed, Stream::FactorNoise, rep);
            Rng thinning = Rng::stream(sc.seed, Stream::Thinning, rep);
            Rng marks = Rng::stream(sc.seed, Stream::Marks, rep);
            auto [y, lambda] = simulate_factor(sc.factor, grid, y_noise);
            const auto events = simulate_claims(lambda, sc.claims, grid, thinning, marks);
            double total = 0.0;
            for (const auto& ev : events) total += ev.mark;
            return total + y.back();
        }, totals);
        double acc = 0.0;
        for (double v : totals) acc += v;
        return acc;
    };
    BenchResult r{};
    auto t0 = clock_type::now();
    const double serial = kernel({Exec::Serial, 0});
    r.serial_s = seconds_since(t0);
    t0 = clock_type::now();
    const double openmp = kernel({Exec::OpenMP, 0});
    r.openmp_s = seconds_since(t0);
    r.identical = serial == openmp;
    return r;
}

BenchResult bench_g_estimate(const ScenarioConfig& sc, std::size_t n_reps) {
    auto kernel = [&](Exec exec) {
        McConfig mc;
        mc.n_reps = n_reps;
        mc.n_steps = sc.n_steps;
        mc.seed = sc.seed;
        mc.policy = {exec, 0};
        return estimate_g(0.0, sc.market.p0, sc.market, sc.prefs.horizon, mc);
    };
    BenchResult r{};
    auto t0 = clock_type::now();
    const GEstimate serial = kernel(Exec::Serial);
    r.serial_s = seconds_since(t0);
    t0 = clock_type::now();
    const GEstimate openmp = kernel(Exec::OpenMP);
    r.openmp_s = seconds_since(t0);
    r.identical = serial.value == openmp.value && serial.dvalue_dp == openmp.dvalue_dp;
    return r;
}

BenchResult bench_wealth(const ScenarioConfig& sc, std::size_t n_reps) {
    const StrategyField strategy = StrategyField::constant(0.5, 1.0);
    auto kernel = [&](Exec exec) {
        return simulate_wealth(strategy, sc, n_reps, sc.seed, {exec, 0});
    };
    BenchResult r{};
    auto t0 = clock_type::now();
    const WealthResult serial = kernel(Exec::Serial);
    r.serial_s = seconds_since(t0);
    t0 = clock_type::now();
    const WealthResult openmp = kernel(Exec::OpenMP);
    r.openmp_s = seconds_since(t0);
    r.identical = serial.mean_utility == openmp.mean_utility;
    return r;
}

} // namespace

int main(int argc, char** argv) {
    std::size_t reps = 20000;
    if (argc > 1) reps = static_cast<std::size_t>(std::atoll(argv[1]));
    const ScenarioConfig sc = bench_scenario();
    std::printf("replications: %zu, steps: %zu\n", reps, sc.n_steps);
    report("factor+claims paths", bench_factor_claims(sc, reps));
    report("g estimate (CEV, CRN)", bench_g_estimate(sc, std::max<std::size_t>(reps / 2, 1000)));
    report("wealth simulation", bench_wealth(sc, reps));
    return 0;
}
