#ifndef REINOPT_REINSURANCE_HPP
#define REINOPT_REINSURANCE_HPP

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "reinopt/models.hpp"
#include "reinopt/parallel.hpp"
#include "reinopt/paths.hpp"
#include "reinopt/premium.hpp"

namespace reinopt {

// Everything the retention optimizer needs at one (t,y) point. The claim
// model and premium principle are borrowed and must outlive the problem.
struct ReinsuranceProblem {
    const ClaimModel* claims = nullptr;
    const PremiumPrinciple* principle = nullptr;
    IntensityMap intensity;
    double eta = 0.5;
    double horizon = 5.0;
    double rate = 0.05;

    double lambda_at(double t, double y) const { return intensity(t, y); }
    // Exponent weight on claim size at retention u: eta (1-u) e^{R(T-t)}.
    double tilt(double t, double u) const { return eta * (1.0 - u) * std::exp(rate * (horizon - t)); }
};

enum class Region { NoReinsurance, Interior, FullReinsurance };

const char* region_label(Region r); // "A0", "interior", "A1"

struct PsiU {
    double value;
    double d_du;
    double d2_du2;
};

// Retention objective: Psi^u = -eta e^{R(T-t)} q(t,y,u)
//                              + lambda(t,y) (1 - E[e^{eta(1-u)Z e^{R(T-t)}}]).
PsiU psi_u_at_lambda(const ReinsuranceProblem& problem, double t, double lambda, double u);
PsiU psi_u(const ReinsuranceProblem& problem, double t, double y, double u);

struct ConcavityCertificate {
    enum class Route { ZeroSlopeAtOrigin, ConvexPremium, SecondMomentBound, DirectCheck };
    Route route = Route::ConvexPremium;
    double margin = 0.0; // smallest slack observed for the firing condition
};

// Establishes strict concavity of Psi^u in u, trying the cheap premium-shape
// shortcuts before sampling the direct second-derivative condition. Throws
// ConcavityViolated when no route certifies.
ConcavityCertificate verify_concavity(const ReinsuranceProblem& problem, double t, double lambda);

Region classify_region_at_lambda(const ReinsuranceProblem& problem, double t, double lambda);
Region classify_region(const ReinsuranceProblem& problem, double t, double y);

struct ReinsuranceSolution {
    double u = 0.0;
    Region region = Region::Interior;
    double foc_residual = 0.0; // scaled first-order-condition residual at u
    ConcavityCertificate concavity;
};

ReinsuranceSolution optimal_u_at_lambda(const ReinsuranceProblem& problem, double t, double lambda);
ReinsuranceSolution optimal_u(const ReinsuranceProblem& problem, double t, double y);

struct ExponentialClosedFormParams {
    double zeta = 2.0;
    double eta = 0.5;
    double rate = 0.05;
    double horizon = 5.0;
    double theta_r = 0.1;
};

struct ExponentialClosedForm {
    double u = 0.0;
    std::optional<double> switch_time; // first time the retention hits zero (expected-value principle)
};

// Exact optimal retention for exponential claims. The expected-value
// principle has the direct formula with its switching time; the variance and
// intensity-adjusted principles reduce to a cubic in the tilt, solved
// analytically. Requires zeta/eta > e^{RT}.
ExponentialClosedForm closed_form_exponential(PremiumPrinciple::Kind kind, double t,
                                              double lambda_value,
                                              const ExponentialClosedFormParams& params);

// Tabulated E[Z^k e^{cZ}] on c in [0, c_max] with cubic interpolation, so
// surface construction over many (t,lambda) cells does not re-integrate the
// claim law at every bisection step. Exponential laws bypass the table.
class MomentTable {
public:
    MomentTable(const ClaimModel& claims, double c_max, std::size_t n_nodes = 2048);

    double m0(double c) const { return eval(0, c); }
    double m1(double c) const { return eval(1, c); }
    double m2(double c) const { return eval(2, c); }

private:
    double eval(int k, double c) const;

    bool exact_ = false;
    double zeta_ = 0.0;
    double c_max_ = 0.0;
    double dc_ = 0.0;
    std::vector<double> nodes_[3];
};

// u*(t, lambda) and Psi^{u*}(t, lambda) sampled on the simulation time grid
// and a log-spaced intensity grid, with bilinear interpolation (linear in
// ln lambda). Used wherever strategies are evaluated along many paths.
struct StrategySurface {
    std::vector<double> t_nodes;
    std::vector<double> log_lambda_nodes;
    std::vector<double> u;   // row-major [t][lambda]
    std::vector<double> psi; // Psi^{u*}

    double u_at(double t, double lambda) const;
    double psi_at(double t, double lambda) const;
};

StrategySurface build_strategy_surface(const ReinsuranceProblem& problem, const SimGrid& grid,
                                       double lambda_lo, double lambda_hi, std::size_t n_lambda,
                                       const ExecPolicy& policy = {});

// CSV columns: t, y, lambda, region, u_star.
void dump_strategy_surface_csv(std::ostream& out, const ReinsuranceProblem& problem,
                               std::span<const double> t_nodes, std::span<const double> y_nodes);

} // namespace reinopt

#endif
