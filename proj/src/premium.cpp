#include "reinopt/premium.hpp"

#include <algorithm>
#include <cmath>

#include "reinopt/scenario.hpp"

namespace reinopt {

namespace {

// Catmull-Rom on a non-uniform ascending grid, clamped at the ends.
double catmull_rom(const std::vector<double>& xs, const double* ys, double x) {
    const std::size_t n = xs.size();
    if (n == 1) return ys[0];
    const double xc = std::clamp(x, xs.front(), xs.back());
    std::size_t i = std::upper_bound(xs.begin(), xs.end(), xc) - xs.begin();
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
    const double x1 = xs[i], x2 = xs[i + 1];
    const double h = x2 - x1;
    const double w = (xc - x1) / h;
    const double y1 = ys[i], y2 = ys[i + 1];
    const double y0 = i == 0 ? 2.0 * y1 - y2 : ys[i - 1];
    const double y3 = i + 2 >= n ? 2.0 * y2 - y1 : ys[i + 2];
    const double m1 = 0.5 * (y2 - y0);
    const double m2 = 0.5 * (y3 - y1);
    const double w2 = w * w, w3 = w2 * w;
    return (2.0 * w3 - 3.0 * w2 + 1.0) * y1 + (w3 - 2.0 * w2 + w) * m1 +
           (-2.0 * w3 + 3.0 * w2) * y2 + (w3 - w2) * m2;
}

double bicubic(const CustomPremiumTable& table, const std::vector<double>& field, double lambda,
               double u) {
    const std::size_t nl = table.lambda_nodes.size();
    const std::size_t nu = table.u_nodes.size();
    std::vector<double> column(nl);
    for (std::size_t i = 0; i < nl; ++i) {
        column[i] = catmull_rom(table.u_nodes, field.data() + i * nu, u);
    }
    return catmull_rom(table.lambda_nodes, column.data(), lambda);
}

void validate_table(const CustomPremiumTable& table) {
    const std::size_t nl = table.lambda_nodes.size();
    const std::size_t nu = table.u_nodes.size();
    if (nl < 2 || nu < 3) throw ConfigInvalid("custom premium table needs at least 2x3 nodes");
    if (table.q.size() != nl * nu || table.dq_du.size() != nl * nu ||
        table.d2q_du2.size() != nl * nu) {
        throw ConfigInvalid("custom premium table fields must all be lambda x u sized");
    }
    if (std::abs(table.u_nodes.front()) > 1e-12 || std::abs(table.u_nodes.back() - 1.0) > 1e-12) {
        throw ConfigInvalid("custom premium u-grid must span [0,1]");
    }
    double scale = 0.0;
    for (double v : table.dq_du) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < nl; ++i) {
        if (std::abs(table.q[i * nu]) > 1e-12) {
            throw ConfigInvalid("custom premium must satisfy q(lambda, 0) = 0");
        }
        // Derivative tables must be consistent with finite differences of q.
        for (std::size_t j = 1; j + 1 < nu; ++j) {
            const double h1 = table.u_nodes[j] - table.u_nodes[j - 1];
            const double h2 = table.u_nodes[j + 1] - table.u_nodes[j];
            const double fd = (table.q[i * nu + j + 1] - table.q[i * nu + j - 1]) / (h1 + h2);
            if (std::abs(fd - table.dq_du[i * nu + j]) > 5e-3 * std::max(1.0, scale)) {
                throw ConfigInvalid("custom premium dq_du disagrees with finite differences of q");
            }
        }
    }
}

} // namespace

PremiumPrinciple PremiumPrinciple::expected_value(double theta_r, const ClaimModel& claims) {
    if (!(theta_r >= 0.0)) throw ConfigInvalid("safety loading must be nonnegative");
    PremiumPrinciple p;
    p.kind_ = Kind::ExpectedValue;
    p.theta_r_ = theta_r;
    p.mean_claim_ = claims.mean();
    p.second_moment_ = claims.second_moment();
    return p;
}

PremiumPrinciple PremiumPrinciple::variance(double theta_r, const ClaimModel& claims) {
    PremiumPrinciple p = expected_value(theta_r, claims);
    p.kind_ = Kind::Variance;
    return p;
}

PremiumPrinciple PremiumPrinciple::intensity_adjusted(double theta_r, const ClaimModel& claims,
                                                      double horizon) {
    if (!(horizon > 0.0)) throw ConfigInvalid("intensity-adjusted premium needs a positive horizon");
    PremiumPrinciple p = expected_value(theta_r, claims);
    p.kind_ = Kind::IntensityAdjustedVariance;
    p.horizon_ = horizon;
    return p;
}

PremiumPrinciple PremiumPrinciple::custom(CustomPremiumTable table) {
    validate_table(table);
    PremiumPrinciple p;
    p.kind_ = Kind::Custom;
    p.table_ = std::move(table);
    return p;
}

PremiumEval PremiumPrinciple::evaluate(double /*t*/, double lambda, double u) const {
    PremiumEval out{0.0, 0.0, 0.0};
    switch (kind_) {
    case Kind::ExpectedValue: {
        const double slope = (1.0 + theta_r_) * mean_claim_ * lambda;
        out.q = slope * u;
        out.dq_du = slope;
        out.d2q_du2 = 0.0;
        break;
    }
    case Kind::Variance: {
        const double lin = mean_claim_ * lambda;
        const double quad = theta_r_ * second_moment_ * lambda;
        out.q = lin * u + quad * u * u;
        out.dq_du = lin + 2.0 * quad * u;
        out.d2q_du2 = 2.0 * quad;
        break;
    }
    case Kind::IntensityAdjustedVariance: {
        const double lin = mean_claim_ * lambda;
        const double quad = theta_r_ * second_moment_ * (lambda + horizon_ * lambda * lambda);
        out.q = lin * u + quad * u * u;
        out.dq_du = lin + 2.0 * quad * u;
        out.d2q_du2 = 2.0 * quad;
        break;
    }
    case Kind::Custom: {
        out.q = bicubic(table_, table_.q, lambda, u);
        out.dq_du = bicubic(table_, table_.dq_du, lambda, u);
        out.d2q_du2 = bicubic(table_, table_.d2q_du2, lambda, u);
        break;
    }
    }
    return out;
}

DominanceCheckReport iavp_dominance_check(const std::function<double(double, double)>& u_map,
                                          const ScenarioConfig& scenario, std::size_t n_reps,
                                          std::uint64_t seed, const ExecPolicy& policy) {
    const SimGrid grid = scenario.sim_grid();
    const PremiumPrinciple principle =
        scenario.principle_of(PremiumPrinciple::Kind::IntensityAdjustedVariance);

    struct RepValue {
        double premium_integral; // int q(s, Y_s, u_s) ds
        double ceded;            // int u dC
    };

    std::vector<RepValue> values;
    map_indexed<RepValue>(n_reps, policy, [&](std::size_t rep) {
        Rng y_noise = Rng::stream(seed, Stream::FactorNoise, rep);
        Rng thinning = Rng::stream(seed, Stream::Thinning, rep);
        Rng marks = Rng::stream(seed, Stream::Marks, rep);
        auto [y, lambda] = simulate_factor(scenario.factor, grid, y_noise);
        const auto events = simulate_claims(lambda, scenario.claims, grid, thinning, marks);

        const double dt = grid.dt();
        double integral = 0.0;
        double prev = principle.q(grid.node(0), lambda[0], u_map(grid.node(0), y[0]));
        for (std::size_t i = 1; i < grid.n_nodes(); ++i) {
            const double t = grid.node(i);
            const double cur = principle.q(t, lambda[i], u_map(t, y[i]));
            integral += 0.5 * (prev + cur) * dt;
            prev = cur;
        }

        double ceded = 0.0;
        for (const auto& ev : events) {
            const std::size_t cell = std::min(
                static_cast<std::size_t>((ev.time - grid.t0) / dt), grid.n_steps - 1);
            ceded += u_map(grid.node(cell), y[cell]) * ev.mark;
        }
        return RepValue{integral, ceded};
    }, values);

    DominanceCheckReport report;
    report.n_reps = n_reps;
    const double n = static_cast<double>(n_reps);
    double sum_q = 0.0, sum_c = 0.0;
    for (const auto& v : values) {
        sum_q += v.premium_integral;
        sum_c += v.ceded;
    }
    const double mean_q = sum_q / n;
    const double mean_c = sum_c / n;
    double var_c = 0.0, m4_c = 0.0, var_diff = 0.0;
    for (const auto& v : values) {
        const double dc = v.ceded - mean_c;
        var_c += dc * dc;
        m4_c += dc * dc * dc * dc;
        const double dd = (v.premium_integral - v.ceded) - (mean_q - mean_c);
        var_diff += dd * dd;
    }
    var_c /= n;
    m4_c /= n;
    var_diff /= n;

    report.lhs = mean_q;
    report.mean_ceded = mean_c;
    report.var_ceded = var_c;
    report.rhs = mean_c + scenario.theta_r * var_c;
    report.slack = report.lhs - report.rhs;
    const double se_mean_diff = std::sqrt(var_diff / n);
    const double se_var = std::sqrt(std::max(0.0, m4_c - var_c * var_c) / n);
    report.se_slack = std::sqrt(se_mean_diff * se_mean_diff +
                                scenario.theta_r * scenario.theta_r * se_var * se_var);
    report.holds = report.slack >= -3.0 * report.se_slack;
    if (report.rhs > 1e-12 && report.se_slack > 0.1 * report.rhs) {
        throw InsufficientReplications("dominance check standard error exceeds 10% of the premium side");
    }
    return report;
}

} // namespace reinopt
