#ifndef REINOPT_MODELS_HPP
#define REINOPT_MODELS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "reinopt/errors.hpp"
#include "reinopt/rng.hpp"

namespace reinopt {

// Coefficient functions are named built-ins selected by tag, never user
// code, so validators can probe them safely and runs stay reproducible.
struct Coefficient {
    enum class Kind { Constant, AffineY };

    Kind kind = Kind::Constant;
    double a0 = 0.0;
    double a1 = 0.0;

    static Coefficient constant(double value) { return {Kind::Constant, value, 0.0}; }
    static Coefficient affine(double a0, double a1) { return {Kind::AffineY, a0, a1}; }

    double operator()(double /*t*/, double y) const {
        return kind == Kind::Constant ? a0 : a0 + a1 * y;
    }
};

// Claims intensity map; must stay strictly positive on the simulated range.
struct IntensityMap {
    enum class Kind { Constant, ExpHalfY };

    Kind kind = Kind::Constant;
    double lambda0 = 0.1;

    static IntensityMap constant(double lambda0) { return {Kind::Constant, lambda0}; }
    static IntensityMap exp_half_y(double lambda0) { return {Kind::ExpHalfY, lambda0}; }

    double operator()(double /*t*/, double y) const {
        return kind == Kind::Constant ? lambda0 : lambda0 * std::exp(0.5 * y);
    }
};

struct FactorModel {
    Coefficient drift;     // b(t,y)
    Coefficient diffusion; // gamma(t,y)
    double y0 = 0.0;
    IntensityMap intensity; // lambda(t,y) > 0
};

struct MarketModel {
    enum class Kind { ConstantCoefficient, Cev };

    Kind kind = Kind::ConstantCoefficient;
    double mu = 0.1;    // drift level
    double sigma = 0.2; // volatility level (multiplier for CEV)
    double beta = 0.0;  // CEV elasticity exponent
    double rate = 0.05; // risk-free rate R > 0
    double p0 = 1.0;    // initial price > 0

    static MarketModel constant(double mu, double sigma, double rate, double p0) {
        return {Kind::ConstantCoefficient, mu, sigma, 0.0, rate, p0};
    }
    static MarketModel cev(double mu, double sigma, double beta, double rate, double p0) {
        return {Kind::Cev, mu, sigma, beta, rate, p0};
    }

    double drift(double /*t*/, double /*p*/) const { return mu; }

    double vol(double /*t*/, double p) const {
        if (kind == Kind::ConstantCoefficient) return sigma;
        if (beta == 0.5) return sigma * std::sqrt(p);
        return sigma * std::pow(p, beta);
    }
};

struct RiskPreferences {
    double eta = 0.5;    // absolute risk aversion, > 0
    double horizon = 5.0; // T > 0
};

// Claim-size law with truncation bound D. Non-exponential laws must carry a
// finite D so the exponential-weighted moments of the optimizer exist; the
// default is the 99.99th percentile. Pareto uses the type-I parameterization
// with support [scale, inf).
class ClaimModel {
public:
    enum class Kind { Exponential, Pareto, Empirical };

    static ClaimModel exponential(double zeta);
    static ClaimModel exponential(double zeta, double truncation);
    static ClaimModel pareto(double shape, double scale);
    static ClaimModel pareto(double shape, double scale, double truncation);
    // An untruncated Pareto violates the exponential-moment requirement; it
    // is representable so validators can flag it, but moment calls throw.
    static ClaimModel pareto_untruncated(double shape, double scale);
    static ClaimModel empirical(std::vector<double> values, std::vector<double> probabilities);

    Kind kind() const { return kind_; }
    double truncation() const { return truncation_; }
    bool truncated() const { return std::isfinite(truncation_); }

    double zeta() const { return zeta_; }
    double pareto_shape() const { return shape_; }
    double pareto_scale() const { return scale_; }
    const std::vector<double>& empirical_values() const { return values_; }
    const std::vector<double>& empirical_probabilities() const { return probabilities_; }

    double mean() const { return mean_; }
    double second_moment() const { return second_moment_; }

    // E[Z^k e^{cZ}] over the (possibly truncated) law, k in {0,1,2}.
    // Exponential with D = inf uses the closed form (requires c < zeta);
    // truncated laws integrate adaptively at 1e-10 relative tolerance;
    // empirical tables sum exactly.
    double weighted_moment(double c, int k) const;

    double sample(Rng& rng) const;

    double density(double z) const;       // 0 for empirical tables
    double cdf(double z) const;

    std::string describe() const;

private:
    ClaimModel() = default;

    Kind kind_ = Kind::Exponential;
    double truncation_ = std::numeric_limits<double>::infinity();
    double zeta_ = 1.0;   // exponential rate
    double shape_ = 2.0;  // pareto shape alpha
    double scale_ = 1.0;  // pareto scale x_m
    std::vector<double> values_;
    std::vector<double> probabilities_;
    std::vector<double> cumulative_;
    double mean_ = 0.0;
    double second_moment_ = 0.0;

    void cache_moments();
};

double weighted_moment(const ClaimModel& claims, double c, int k);

} // namespace reinopt

#endif
