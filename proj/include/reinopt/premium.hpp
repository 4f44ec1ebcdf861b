#ifndef REINOPT_PREMIUM_HPP
#define REINOPT_PREMIUM_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "reinopt/models.hpp"
#include "reinopt/parallel.hpp"

namespace reinopt {

struct ScenarioConfig;

struct PremiumEval {
    double q;
    double dq_du;
    double d2q_du2;
};

// Custom principles are supplied as a coefficient table over (lambda, u)
// with bicubic interpolation; the derivative tables are validated against
// finite differences of q when the table is loaded.
struct CustomPremiumTable {
    std::vector<double> lambda_nodes;
    std::vector<double> u_nodes;
    std::vector<double> q;       // row-major [lambda][u]
    std::vector<double> dq_du;
    std::vector<double> d2q_du2;
};

class PremiumPrinciple {
public:
    enum class Kind { ExpectedValue, Variance, IntensityAdjustedVariance, Custom };

    static PremiumPrinciple expected_value(double theta_r, const ClaimModel& claims);
    static PremiumPrinciple variance(double theta_r, const ClaimModel& claims);
    static PremiumPrinciple intensity_adjusted(double theta_r, const ClaimModel& claims,
                                               double horizon);
    static PremiumPrinciple custom(CustomPremiumTable table);

    Kind kind() const { return kind_; }
    double theta_r() const { return theta_r_; }
    double horizon() const { return horizon_; }

    // Premium rate and its u-derivatives at intensity lambda = lambda(t,y).
    PremiumEval evaluate(double t, double lambda, double u) const;

    double q(double t, double lambda, double u) const { return evaluate(t, lambda, u).q; }

private:
    PremiumPrinciple() = default;

    Kind kind_ = Kind::ExpectedValue;
    double theta_r_ = 0.1;
    double horizon_ = 0.0;
    double mean_claim_ = 0.0;
    double second_moment_ = 0.0;
    CustomPremiumTable table_;
};

struct DominanceCheckReport {
    double lhs = 0.0;        // E[int q dt]
    double rhs = 0.0;        // E[int u dC] + theta_r Var[int u dC]
    double mean_ceded = 0.0; // E[int u dC]
    double var_ceded = 0.0;  // Var[int u dC]
    double slack = 0.0;      // lhs - rhs
    double se_slack = 0.0;
    bool holds = false;
    std::size_t n_reps = 0;
};

// Monte Carlo check that the intensity-adjusted premium collects at least
// the dynamically restated variance-principle price for a feedback
// retention map u(t,y). LHS and RHS are evaluated on common paths.
DominanceCheckReport iavp_dominance_check(const std::function<double(double, double)>& u_map,
                                          const ScenarioConfig& scenario, std::size_t n_reps,
                                          std::uint64_t seed, const ExecPolicy& policy = {});

} // namespace reinopt

#endif
