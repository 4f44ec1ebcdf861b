#ifndef REINOPT_PATHS_HPP
#define REINOPT_PATHS_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "reinopt/models.hpp"
#include "reinopt/rng.hpp"

namespace reinopt {

struct SimGrid {
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t n_steps = 500;

    static SimGrid uniform(double t0, double t1, std::size_t n_steps);

    double dt() const { return n_steps == 0 ? 0.0 : (t1 - t0) / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double node(std::size_t i) const { return t0 + dt() * static_cast<double>(i); }
};

enum class Measure { Physical, RiskNeutral };

struct ClaimEvent {
    double time;
    double mark;
};

struct PathBundle {
    SimGrid grid;
    std::vector<double> factor;     // Y at each node
    std::vector<double> intensity;  // lambda(t, Y) at each node
    std::vector<double> price;      // P at each node
    std::vector<ClaimEvent> claims; // arrival times strictly increasing in (t0, t1]
    std::uint64_t seed = 0;
    Measure measure = Measure::Physical;
};

// Euler-Maruyama with caller-supplied standard-normal increments, one per
// step. Exposed so tests can refine a common Brownian path.
std::vector<double> euler_factor_path(const FactorModel& model, const SimGrid& grid,
                                      std::span<const double> normals);

// Log-space Euler keeps the price strictly positive. Under the risk-neutral
// measure the drift function is replaced by the risk-free rate.
std::vector<double> euler_log_price_path(const MarketModel& model, const SimGrid& grid,
                                         std::span<const double> normals, Measure measure);

std::pair<std::vector<double>, std::vector<double>>
simulate_factor(const FactorModel& model, const SimGrid& grid, Rng& noise);

// Seed-based convenience, replication 0 of the documented stream split.
std::pair<std::vector<double>, std::vector<double>>
simulate_factor(const FactorModel& model, const SimGrid& grid, std::uint64_t seed);

std::vector<double> simulate_asset(const MarketModel& model, const SimGrid& grid, Rng& noise,
                                   Measure measure);
std::vector<double> simulate_asset(const MarketModel& model, const SimGrid& grid,
                                   std::uint64_t seed, Measure measure);

// Cox arrivals by thinning against a per-cell majorant (1.05 x the larger
// endpoint intensity, intensity linear within the cell). Marks are drawn
// from the claim law on an independent stream.
std::vector<ClaimEvent> simulate_claims(std::span<const double> lambda_path,
                                        const ClaimModel& claims, const SimGrid& grid,
                                        Rng& thinning, Rng& marks);
std::vector<ClaimEvent> simulate_claims(std::span<const double> lambda_path,
                                        const ClaimModel& claims, const SimGrid& grid,
                                        std::uint64_t seed);

PathBundle simulate_bundle(const FactorModel& factor, const MarketModel& market,
                           const ClaimModel& claims, const SimGrid& grid, std::uint64_t seed,
                           std::uint64_t replication, Measure measure);

void dump_paths_csv(std::ostream& out, std::span<const PathBundle> bundles);
void dump_events_csv(std::ostream& out, std::span<const PathBundle> bundles);

} // namespace reinopt

#endif
