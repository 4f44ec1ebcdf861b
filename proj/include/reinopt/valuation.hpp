#ifndef REINOPT_VALUATION_HPP
#define REINOPT_VALUATION_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "reinopt/investment.hpp"
#include "reinopt/reinsurance.hpp"
#include "reinopt/scenario.hpp"

namespace reinopt {

// Pair of feedback maps: retention u(t,y) in [0,1] and risky position w(t,p).
struct StrategyField {
    enum class Provenance { Optimal, Constant, Custom };

    std::function<double(double, double)> u;
    std::function<double(double, double)> w;
    Provenance provenance = Provenance::Custom;

    static StrategyField constant(double u_value, double w_value);
};

// Optimal feedback maps assembled from the retention surface and the g
// lattice (strategies are interpolated, so path evaluation never re-solves).
StrategyField optimal_strategy_field(const ScenarioConfig& scenario,
                                     const StrategySurface& surface, const GLattice& lattice);

struct WealthResult {
    double mean_utility = 0.0;
    double se_utility = 0.0;
    double mean_terminal_wealth = 0.0;
    std::array<double, 3> quantiles{0.0, 0.0, 0.0}; // 5th, 50th, 95th percentile
    std::size_t n_reps = 0;
    std::uint64_t seed = 0;

    std::string summary_json() const;
};

// Terminal wealth samples under a feedback strategy, one per replication.
std::vector<double> simulate_terminal_wealth(const StrategyField& strategy,
                                             const ScenarioConfig& scenario, std::size_t n_reps,
                                             std::uint64_t seed, const ExecPolicy& policy = {});

WealthResult simulate_wealth(const StrategyField& strategy, const ScenarioConfig& scenario,
                             std::size_t n_reps, std::uint64_t seed,
                             const ExecPolicy& policy = {});

WealthResult summarize_wealth(std::span<const double> terminal, double eta, std::size_t n_reps,
                              std::uint64_t seed);

// Feynman-Kac estimate of the factor component f(t,y) of the value function,
// integrating the gross premium and retention objective along factor paths.
struct FEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t n_reps = 0;
};

FEstimate estimate_f(double t, double y, const ScenarioConfig& scenario,
                     const StrategySurface& surface, const McConfig& mc);

// v(t,x,y,p) = -exp(-eta x e^{R(T-t)}) f(t,y) e^{g(t,p)}.
double value_function(double t, double x, double y, double p, double f_value, double g_value,
                      const RiskPreferences& prefs, double rate);

struct VarianceDecompositionReport {
    double lhs = 0.0;            // Var[int u dC]
    double jump_term = 0.0;      // E[Z^2] E[int u^2 lambda ds]
    double intensity_term = 0.0; // E[Z]^2 Var[int u lambda ds]
    double rhs = 0.0;
    double se_combined = 0.0;
    bool holds = false;
    std::size_t n_reps = 0;
};

VarianceDecompositionReport variance_decomposition(
    const std::function<double(double, double)>& u_map, const ScenarioConfig& scenario,
    std::size_t n_reps, std::uint64_t seed, const ExecPolicy& policy = {});

// Dominance tournament: the optimal strategy against documented feedback
// perturbations and constant benchmarks on common random numbers.
struct Perturbation {
    double du = 0.0;      // additive shift on u, clipped to [0,1]
    double w_scale = 1.0; // multiplicative scale on w
    std::string label;
};

struct ConstantBenchmark {
    double u = 0.0;
    double w = 0.0;
    std::string label;
};

std::vector<Perturbation> default_perturbations();        // 20 entries
std::vector<ConstantBenchmark> default_constant_benchmarks(); // 4 entries

struct TournamentEntry {
    std::string label;
    WealthResult result;
    double mean_diff = 0.0; // mean of U(optimal) - U(challenger), paired
    double se_diff = 0.0;
    bool never_worse = false; // mean_diff >= -2 se_diff
};

struct TournamentResult {
    WealthResult optimal;
    std::vector<TournamentEntry> entries;
    bool optimal_dominates = false;
};

TournamentResult dominance_tournament(const ScenarioConfig& scenario,
                                      const StrategyField& optimal,
                                      std::span<const Perturbation> perturbations,
                                      std::span<const ConstantBenchmark> constants,
                                      std::size_t n_reps, std::uint64_t seed,
                                      const ExecPolicy& policy = {});

} // namespace reinopt

#endif
