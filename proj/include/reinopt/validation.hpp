#ifndef REINOPT_VALIDATION_HPP
#define REINOPT_VALIDATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "reinopt/parallel.hpp"
#include "reinopt/scenario.hpp"

namespace reinopt {

enum class CheckStatus { Pass, Warn, Fail, Info };

const char* check_status_name(CheckStatus s);

struct CheckResult {
    std::string name;
    CheckStatus status;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    void add(std::string name, CheckStatus status, std::string detail);
    void append(const ValidationReport& other);
    bool has_fatal() const; // any Fail
    std::string to_text() const;
    std::string to_json() const;
};

// Model hypotheses on a deterministic probe grid: exponential-weighted
// moment finiteness, premium contract items, the exponential closed-form
// guard, the net-profit condition and the premium/gross gap estimate.
ValidationReport validate_assumptions(const ScenarioConfig& scenario);

// Coefficient regularity probes: sampled Lipschitz/growth constants,
// diffusion and volatility floors, intensity boundedness.
ValidationReport validate_regularity(const ScenarioConfig& scenario);

// Statistical check that the claim counter minus its compensator averages
// to zero across replications.
ValidationReport validate_martingale(const ScenarioConfig& scenario, std::size_t n_reps,
                                     std::uint64_t seed, const ExecPolicy& policy = {});

} // namespace reinopt

#endif
