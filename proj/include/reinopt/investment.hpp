#ifndef REINOPT_INVESTMENT_HPP
#define REINOPT_INVESTMENT_HPP

#include <cstdint>
#include <ostream>
#include <vector>

#include "reinopt/models.hpp"
#include "reinopt/parallel.hpp"
#include "reinopt/paths.hpp"

namespace reinopt {

struct McConfig {
    std::size_t n_reps = 10000;
    std::uint64_t seed = 0;
    std::size_t n_steps = 500;
    ExecPolicy policy{};
};

// Monte Carlo estimate of g(t,p) = -E_Q[ int_t^T (1/2)((mu-R)/sigma)^2 ds ]
// with its price gradient. The gradient uses common-random-number central
// differences with a relative bump.
struct GEstimate {
    double value = 0.0;
    double dvalue_dp = 0.0;
    double se_value = 0.0;
    double se_dvalue = 0.0;
    std::size_t n_reps = 0;
    std::uint64_t seed = 0;
    double bump = 1e-3;
};

GEstimate estimate_g(double t, double p, const MarketModel& market, double horizon,
                     const McConfig& mc, double relative_bump = 1e-3);

// g and dg/dp cached on a (t,p) lattice with bilinear interpolation. The
// built-in markets have time-invariant coefficients, so one simulation per
// price node serves every time node through the remaining-horizon identity.
struct GLattice {
    std::vector<double> t_nodes;
    std::vector<double> p_nodes;
    std::vector<double> g;      // row-major [t][p]
    std::vector<double> dg_dp;
    std::vector<double> se_g;
    std::vector<double> se_dg;

    double value(double t, double p) const;
    double gradient(double t, double p) const;
};

struct LatticeConfig {
    std::size_t n_t = 51;
    std::size_t n_p = 50;
    double p_lo = 0.0; // 0 = default p0/5
    double p_hi = 0.0; // 0 = default 5 p0
    std::size_t reps_per_node = 4000;
    std::size_t n_steps = 500;
    std::uint64_t seed = 0;
    double relative_bump = 1e-3;
    ExecPolicy policy{};
};

GLattice build_g_lattice(const MarketModel& market, double horizon, const LatticeConfig& config);

void dump_g_lattice_csv(std::ostream& out, const GLattice& lattice);

// Optimal risky investment: the classical mean-variance term plus the
// correction carried by dg/dp, reported separately for diagnostics.
struct InvestmentDecision {
    double total = 0.0;
    double merton = 0.0;
    double correction = 0.0;
};

InvestmentDecision optimal_w(double t, double p, const MarketModel& market,
                             const RiskPreferences& prefs, double dg_dp);
InvestmentDecision optimal_w(double t, double p, const MarketModel& market,
                             const RiskPreferences& prefs, const GEstimate& g_est);

// Investment part of the HJB drift, linear minus quadratic in w. Used by
// tests to confirm w* is its argmax.
struct PhiValue {
    double phi = 1.0;     // phi(t,y,p) > 0
    double dphi_dp = 0.0;
};

double psi_w(double t, double p, double w, const MarketModel& market, const RiskPreferences& prefs,
             const PhiValue& phi);

} // namespace reinopt

#endif
