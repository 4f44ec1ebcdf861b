#include "reinopt/models.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "reinopt/quadrature.hpp"

namespace reinopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pareto_percentile(double shape, double scale, double q) {
    // F(z) = 1 - (scale/z)^shape on [scale, inf)
    return scale * std::pow(1.0 - q, -1.0 / shape);
}

} // namespace

ClaimModel ClaimModel::exponential(double zeta) {
    return exponential(zeta, kInf);
}

ClaimModel ClaimModel::exponential(double zeta, double truncation) {
    if (!(zeta > 0.0)) throw ConfigInvalid("exponential claims require zeta > 0");
    if (!(truncation > 0.0)) throw ConfigInvalid("truncation bound must be positive");
    ClaimModel m;
    m.kind_ = Kind::Exponential;
    m.zeta_ = zeta;
    m.truncation_ = truncation;
    m.cache_moments();
    return m;
}

ClaimModel ClaimModel::pareto(double shape, double scale) {
    // Default truncation restores finite exponential moments at desk scale.
    return pareto(shape, scale, pareto_percentile(shape, scale, 0.9999));
}

ClaimModel ClaimModel::pareto(double shape, double scale, double truncation) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigInvalid("pareto claims require shape > 0 and scale > 0");
    if (!(truncation > scale)) throw ConfigInvalid("pareto truncation must exceed the scale parameter");
    ClaimModel m;
    m.kind_ = Kind::Pareto;
    m.shape_ = shape;
    m.scale_ = scale;
    m.truncation_ = truncation;
    m.cache_moments();
    return m;
}

ClaimModel ClaimModel::pareto_untruncated(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigInvalid("pareto claims require shape > 0 and scale > 0");
    ClaimModel m;
    m.kind_ = Kind::Pareto;
    m.shape_ = shape;
    m.scale_ = scale;
    m.truncation_ = kInf;
    m.cache_moments();
    return m;
}

ClaimModel ClaimModel::empirical(std::vector<double> values, std::vector<double> probabilities) {
    if (values.empty() || values.size() != probabilities.size()) {
        throw ConfigInvalid("empirical claims need matching non-empty value/probability tables");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) throw ConfigInvalid("empirical claim values must be nonnegative");
        if (!(probabilities[i] > 0.0)) throw ConfigInvalid("empirical claim probabilities must be positive");
        total += probabilities[i];
    }
    ClaimModel m;
    m.kind_ = Kind::Empirical;
    m.values_ = std::move(values);
    m.probabilities_ = std::move(probabilities);
    for (auto& p : m.probabilities_) p /= total;
    m.cumulative_.resize(m.probabilities_.size());
    std::partial_sum(m.probabilities_.begin(), m.probabilities_.end(), m.cumulative_.begin());
    m.cumulative_.back() = 1.0;
    m.truncation_ = *std::max_element(m.values_.begin(), m.values_.end());
    m.cache_moments();
    return m;
}

void ClaimModel::cache_moments() {
    switch (kind_) {
    case Kind::Exponential:
        if (truncated()) {
            mean_ = weighted_moment(0.0, 1);
            second_moment_ = weighted_moment(0.0, 2);
        } else {
            mean_ = 1.0 / zeta_;
            second_moment_ = 2.0 / (zeta_ * zeta_);
        }
        break;
    case Kind::Pareto:
        if (truncated()) {
            mean_ = weighted_moment(0.0, 1);
            second_moment_ = weighted_moment(0.0, 2);
        } else {
            mean_ = shape_ > 1.0 ? shape_ * scale_ / (shape_ - 1.0) : kInf;
            second_moment_ = shape_ > 2.0 ? shape_ * scale_ * scale_ / (shape_ - 2.0) : kInf;
        }
        break;
    case Kind::Empirical: {
        mean_ = 0.0;
        second_moment_ = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            mean_ += probabilities_[i] * values_[i];
            second_moment_ += probabilities_[i] * values_[i] * values_[i];
        }
        break;
    }
    }
}

double ClaimModel::density(double z) const {
    switch (kind_) {
    case Kind::Exponential: {
        if (z < 0.0 || z > truncation_) return 0.0;
        const double mass = truncated() ? 1.0 - std::exp(-zeta_ * truncation_) : 1.0;
        return zeta_ * std::exp(-zeta_ * z) / mass;
    }
    case Kind::Pareto: {
        if (z < scale_ || z > truncation_) return 0.0;
        const double mass = truncated() ? 1.0 - std::pow(scale_ / truncation_, shape_) : 1.0;
        return shape_ * std::pow(scale_, shape_) / std::pow(z, shape_ + 1.0) / mass;
    }
    case Kind::Empirical:
        return 0.0;
    }
    return 0.0;
}

double ClaimModel::cdf(double z) const {
    switch (kind_) {
    case Kind::Exponential: {
        if (z <= 0.0) return 0.0;
        if (z >= truncation_) return 1.0;
        const double mass = truncated() ? 1.0 - std::exp(-zeta_ * truncation_) : 1.0;
        return (1.0 - std::exp(-zeta_ * z)) / mass;
    }
    case Kind::Pareto: {
        if (z <= scale_) return 0.0;
        if (z >= truncation_) return 1.0;
        const double mass = truncated() ? 1.0 - std::pow(scale_ / truncation_, shape_) : 1.0;
        return (1.0 - std::pow(scale_ / z, shape_)) / mass;
    }
    case Kind::Empirical: {
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i] <= z) acc += probabilities_[i];
        }
        return std::min(acc, 1.0);
    }
    }
    return 0.0;
}

double ClaimModel::weighted_moment(double c, int k) const {
    if (k < 0 || k > 2) throw ConfigInvalid("weighted_moment supports k in {0,1,2}");
    switch (kind_) {
    case Kind::Exponential: {
        if (!truncated()) {
            if (c >= zeta_) {
                throw DivergentMoment("E[Z^k e^{cZ}] diverges for c >= zeta on untruncated exponential claims");
            }
            const double d = zeta_ - c;
            if (k == 0) return zeta_ / d;
            if (k == 1) return zeta_ / (d * d);
            return 2.0 * zeta_ / (d * d * d);
        }
        const double D = truncation_;
        const double mass = 1.0 - std::exp(-zeta_ * D);
        auto f = [&](double z) { return std::pow(z, k) * std::exp(c * z) * zeta_ * std::exp(-zeta_ * z); };
        return integrate(f, 0.0, D, 1e-10) / mass;
    }
    case Kind::Pareto: {
        if (!truncated()) {
            if (c > 0.0) {
                throw DivergentMoment("E[Z^k e^{cZ}] diverges for c > 0 on untruncated pareto claims");
            }
            if (c == 0.0) {
                if (k == 0) return 1.0;
                if (k == 1 && shape_ > 1.0) return mean_;
                if (k == 2 && shape_ > 2.0) return second_moment_;
                throw DivergentMoment("pareto moment of requested order does not exist");
            }
        }
        const double D = truncated() ? truncation_ : scale_ * 1e8;
        const double mass = truncated() ? 1.0 - std::pow(scale_ / D, shape_) : 1.0;
        auto f = [&](double z) {
            return std::pow(z, k) * std::exp(c * z) * shape_ * std::pow(scale_ / z, shape_) / z;
        };
        return integrate(f, scale_, D, 1e-10) / mass;
    }
    case Kind::Empirical: {
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            acc += probabilities_[i] * std::pow(values_[i], k) * std::exp(c * values_[i]);
        }
        return acc;
    }
    }
    return 0.0;
}

double ClaimModel::sample(Rng& rng) const {
    const double u = rng.uniform();
    switch (kind_) {
    case Kind::Exponential: {
        if (!truncated()) return -std::log1p(-u) / zeta_;
        const double mass = 1.0 - std::exp(-zeta_ * truncation_);
        return -std::log1p(-u * mass) / zeta_;
    }
    case Kind::Pareto: {
        const double mass = truncated() ? 1.0 - std::pow(scale_ / truncation_, shape_) : 1.0;
        return scale_ * std::pow(1.0 - u * mass, -1.0 / shape_);
    }
    case Kind::Empirical: {
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        const std::size_t idx = std::min<std::size_t>(it - cumulative_.begin(), values_.size() - 1);
        return values_[idx];
    }
    }
    return 0.0;
}

std::string ClaimModel::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::Exponential:
        os << "Exponential(zeta=" << zeta_ << ")";
        break;
    case Kind::Pareto:
        os << "Pareto(shape=" << shape_ << ", scale=" << scale_ << ")";
        break;
    case Kind::Empirical:
        os << "Empirical(" << values_.size() << " atoms)";
        break;
    }
    if (truncated()) os << " truncated at D=" << truncation_;
    return os.str();
}

double weighted_moment(const ClaimModel& claims, double c, int k) {
    return claims.weighted_moment(c, k);
}

} // namespace reinopt
