#ifndef REINOPT_RUNNER_HPP
#define REINOPT_RUNNER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>

#include "reinopt/parallel.hpp"
#include "reinopt/scenario.hpp"

namespace reinopt {

// Command-level options shared by every CLI verb. Overrides are applied to
// a copy of the scenario before anything runs, so the manifest hash covers
// the effective configuration.
struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    ExecPolicy policy{};
    std::size_t dynamic_paths = 1;
    bool dump_paths = false;
};

void run_validate(ScenarioConfig scenario, const RunOptions& options);
void run_sweep(ScenarioConfig scenario, const RunOptions& options);
void run_dynamic(ScenarioConfig scenario, const RunOptions& options);
void run_g_lattice(ScenarioConfig scenario, const RunOptions& options);
void run_dominance(ScenarioConfig scenario, const RunOptions& options);
void run_variance_check(ScenarioConfig scenario, const RunOptions& options);

// Deterministic per-point seed for sweep points and similar sub-runs.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace reinopt

#endif
