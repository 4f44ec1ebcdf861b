#ifndef REINOPT_SCENARIO_HPP
#define REINOPT_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "reinopt/models.hpp"
#include "reinopt/paths.hpp"
#include "reinopt/premium.hpp"

namespace reinopt {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

struct SweepSpec {
    enum class Parameter { Eta, ThetaR, Horizon, Sigma, Rate };
    enum class Quantity { UStar, WStar };

    Parameter parameter = Parameter::Eta;
    Quantity quantity = Quantity::UStar;
    double from = 0.0;
    double to = 1.0;
    std::size_t steps = 20;
};

// Full experiment description. Immutable after parsing; the seed is
// mandatory so no run ever depends on the wall clock.
struct ScenarioConfig {
    FactorModel factor;
    MarketModel market = MarketModel::cev(0.1, 0.1, 0.5, 0.05, 1.0);
    ClaimModel claims = ClaimModel::exponential(2.0);
    RiskPreferences prefs{0.5, 5.0};

    PremiumPrinciple::Kind principle_kind = PremiumPrinciple::Kind::ExpectedValue;
    double theta_r = 0.1;  // reinsurer safety loading
    double theta_i = 0.05; // insurer loading for the gross premium c(t,y)

    double initial_wealth = 1.0;
    std::size_t n_steps = 500;
    std::size_t n_reps = 100000;
    std::uint64_t seed = 0;

    double probe_y_lo = -3.0;
    double probe_y_hi = 5.0;

    std::optional<SweepSpec> sweep;

    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_json_file(const std::filesystem::path& path);

    // Canonical (sorted-key) JSON of every field; hashing this makes the
    // manifest hash change exactly when a config field changes.
    std::string canonical_json() const;
    std::string config_hash_hex() const;

    SimGrid sim_grid() const { return SimGrid::uniform(0.0, prefs.horizon, n_steps); }

    PremiumPrinciple principle() const { return principle_of(principle_kind); }
    PremiumPrinciple principle_of(PremiumPrinciple::Kind kind) const;

    // Gross insurance premium c(t,y) = (1 + theta_i) E[Z] lambda(t,y).
    double insurance_premium(double t, double y) const {
        return (1.0 + theta_i) * claims.mean() * factor.intensity(t, y);
    }

    void validate_basic() const; // structural invariants, throws ConfigInvalid
};

std::string sweep_parameter_name(SweepSpec::Parameter p);
std::string sweep_quantity_name(SweepSpec::Quantity q);

} // namespace reinopt

#endif
