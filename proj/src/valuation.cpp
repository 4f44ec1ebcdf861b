#include "reinopt/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reinopt/csv.hpp"

namespace reinopt {

namespace {

double quantile(std::vector<double> sorted_copy, double q) {
    if (sorted_copy.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted_copy.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted_copy.size() - 1);
    const double w = pos - static_cast<double>(lo);
    std::nth_element(sorted_copy.begin(), sorted_copy.begin() + lo, sorted_copy.end());
    const double vlo = sorted_copy[lo];
    std::nth_element(sorted_copy.begin(), sorted_copy.begin() + hi, sorted_copy.end());
    const double vhi = sorted_copy[hi];
    return (1.0 - w) * vlo + w * vhi;
}

// Shared wealth kernel. Challenger strategies are either perturbations of
// the base maps (du, w_scale) or constants, so the base maps are evaluated
// once per node and reused by every challenger on the same path.
struct ChallengerSpec {
    bool is_constant = false;
    double du = 0.0;
    double w_scale = 1.0;
    double const_u = 0.0;
    double const_w = 0.0;
};

void simulate_wealth_matrix(const StrategyField& base, const ScenarioConfig& scenario,
                            std::span<const ChallengerSpec> specs, std::size_t n_reps,
                            std::uint64_t seed, const ExecPolicy& policy,
                            std::vector<double>& terminal /* [rep][spec] */) {
    const SimGrid grid = scenario.sim_grid();
    const std::size_t n_nodes = grid.n_nodes();
    const std::size_t n_specs = specs.size();
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    const double rate = scenario.market.rate;
    const double horizon = scenario.prefs.horizon;

    std::vector<double> disc(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) disc[i] = std::exp(rate * (horizon - grid.node(i)));
    const double x0_term = scenario.initial_wealth * std::exp(rate * horizon);

    const PremiumPrinciple principle = scenario.principle();
    terminal.assign(n_reps * n_specs, 0.0);

    for_indexed(n_reps, policy, [&](std::size_t rep) {
        Rng y_noise = Rng::stream(seed, Stream::FactorNoise, rep);
        Rng p_noise = Rng::stream(seed, Stream::AssetNoise, rep);
        Rng thinning = Rng::stream(seed, Stream::Thinning, rep);
        Rng marks = Rng::stream(seed, Stream::Marks, rep);

        auto [y, lambda] = simulate_factor(scenario.factor, grid, y_noise);
        std::vector<double> z(grid.n_steps);
        for (auto& v : z) v = p_noise.normal();
        const auto price = euler_log_price_path(scenario.market, grid, z, Measure::Physical);
        const auto events = simulate_claims(lambda, scenario.claims, grid, thinning, marks);

        std::vector<double> u_base(n_nodes), w_base(n_nodes), c_gross(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double t = grid.node(i);
            u_base[i] = base.u(t, y[i]);
            w_base[i] = base.w(t, price[i]);
            c_gross[i] = scenario.insurance_premium(t, y[i]);
        }

        for (std::size_t s = 0; s < n_specs; ++s) {
            const ChallengerSpec& spec = specs[s];
            double premium_drift = 0.0;
            double excess_drift = 0.0;
            double stochastic = 0.0;
            double prev_h = 0.0;
            for (std::size_t i = 0; i < n_nodes; ++i) {
                const double t = grid.node(i);
                const double u = spec.is_constant
                                     ? spec.const_u
                                     : std::clamp(u_base[i] + spec.du, 0.0, 1.0);
                const double h = disc[i] * (c_gross[i] - principle.q(t, lambda[i], u));
                if (i > 0) premium_drift += 0.5 * (prev_h + h) * dt;
                prev_h = h;
                if (i < grid.n_steps) {
                    const double w = spec.is_constant ? spec.const_w : w_base[i] * spec.w_scale;
                    const double mu = scenario.market.drift(t, price[i]);
                    const double vol = scenario.market.vol(t, price[i]);
                    excess_drift += disc[i] * w * (mu - rate) * dt;
                    stochastic += disc[i] * w * vol * sqdt * z[i];
                }
            }
            double jumps = 0.0;
            for (const auto& ev : events) {
                const std::size_t cell = std::min(
                    static_cast<std::size_t>((ev.time - grid.t0) / dt), grid.n_steps - 1);
                const double u = spec.is_constant
                                     ? spec.const_u
                                     : std::clamp(u_base[cell] + spec.du, 0.0, 1.0);
                jumps += std::exp(rate * (horizon - ev.time)) * (1.0 - u) * ev.mark;
            }
            const double x_t = x0_term + premium_drift + excess_drift + stochastic - jumps;
            if (!std::isfinite(x_t)) throw NonFiniteState("terminal wealth left the finite range");
            terminal[rep * n_specs + s] = x_t;
        }
    });
}

} // namespace

StrategyField StrategyField::constant(double u_value, double w_value) {
    StrategyField s;
    s.u = [u_value](double, double) { return u_value; };
    s.w = [w_value](double, double) { return w_value; };
    s.provenance = Provenance::Constant;
    return s;
}

StrategyField optimal_strategy_field(const ScenarioConfig& scenario,
                                     const StrategySurface& surface, const GLattice& lattice) {
    StrategyField s;
    const IntensityMap intensity = scenario.factor.intensity;
    const MarketModel market = scenario.market;
    const RiskPreferences prefs = scenario.prefs;
    s.u = [surface, intensity](double t, double y) { return surface.u_at(t, intensity(t, y)); };
    s.w = [lattice, market, prefs](double t, double p) {
        return optimal_w(t, p, market, prefs, lattice.gradient(t, p)).total;
    };
    s.provenance = StrategyField::Provenance::Optimal;
    return s;
}

std::string WealthResult::summary_json() const {
    std::ostringstream os;
    os << "{\"mean_utility\":" << csv::number(mean_utility) << ",\"se\":" << csv::number(se_utility)
       << ",\"mean_terminal_wealth\":" << csv::number(mean_terminal_wealth)
       << ",\"quantiles\":[" << csv::number(quantiles[0]) << ',' << csv::number(quantiles[1]) << ','
       << csv::number(quantiles[2]) << "],\"n_reps\":" << n_reps << ",\"seed\":" << seed << "}";
    return os.str();
}

WealthResult summarize_wealth(std::span<const double> terminal, double eta, std::size_t n_reps,
                              std::uint64_t seed) {
    WealthResult out;
    out.n_reps = n_reps;
    out.seed = seed;
    const double n = static_cast<double>(terminal.size());
    double sum_u = 0.0, sum_x = 0.0;
    for (double x : terminal) {
        sum_u += 1.0 - std::exp(-eta * x);
        sum_x += x;
    }
    out.mean_utility = sum_u / n;
    out.mean_terminal_wealth = sum_x / n;
    double var_u = 0.0;
    for (double x : terminal) {
        const double d = (1.0 - std::exp(-eta * x)) - out.mean_utility;
        var_u += d * d;
    }
    out.se_utility = std::sqrt(var_u / n / n);
    std::vector<double> copy(terminal.begin(), terminal.end());
    out.quantiles = {quantile(copy, 0.05), quantile(copy, 0.5), quantile(copy, 0.95)};
    return out;
}

std::vector<double> simulate_terminal_wealth(const StrategyField& strategy,
                                             const ScenarioConfig& scenario, std::size_t n_reps,
                                             std::uint64_t seed, const ExecPolicy& policy) {
    std::vector<ChallengerSpec> specs(1);
    specs[0].is_constant = false;
    specs[0].du = 0.0;
    specs[0].w_scale = 1.0;
    std::vector<double> terminal;
    simulate_wealth_matrix(strategy, scenario, specs, n_reps, seed, policy, terminal);
    return terminal;
}

WealthResult simulate_wealth(const StrategyField& strategy, const ScenarioConfig& scenario,
                             std::size_t n_reps, std::uint64_t seed, const ExecPolicy& policy) {
    const auto terminal = simulate_terminal_wealth(strategy, scenario, n_reps, seed, policy);
    return summarize_wealth(terminal, scenario.prefs.eta, n_reps, seed);
}

FEstimate estimate_f(double t, double y, const ScenarioConfig& scenario,
                     const StrategySurface& surface, const McConfig& mc) {
    FEstimate out;
    out.n_reps = mc.n_reps;
    if (t >= scenario.prefs.horizon) {
        out.value = 1.0; // empty integral
        return out;
    }
    const SimGrid grid = SimGrid::uniform(t, scenario.prefs.horizon, mc.n_steps);
    FactorModel factor = scenario.factor;
    factor.y0 = y;
    const double eta = scenario.prefs.eta;
    const double rate = scenario.market.rate;
    const double horizon = scenario.prefs.horizon;
    const double dt = grid.dt();

    std::vector<double> samples;
    map_indexed<double>(mc.n_reps, mc.policy, [&](std::size_t rep) {
        Rng noise = Rng::stream(mc.seed, Stream::FactorNoise, rep);
        auto [path, lambda] = simulate_factor(factor, grid, noise);
        double integral = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
            const double s = grid.node(i);
            const double c = scenario.insurance_premium(s, path[i]);
            const double integrand =
                eta * std::exp(rate * (horizon - s)) * c + surface.psi_at(s, lambda[i]);
            if (i > 0) integral += 0.5 * (prev + integrand) * dt;
            prev = integrand;
        }
        const double f = std::exp(-integral);
        if (!(f > 0.0)) throw NonFiniteState("factor value sample must be positive");
        return f;
    }, samples);

    double sum = 0.0;
    for (double f : samples) sum += f;
    out.value = sum / static_cast<double>(mc.n_reps);
    double var = 0.0;
    for (double f : samples) var += (f - out.value) * (f - out.value);
    out.se = std::sqrt(var) / static_cast<double>(mc.n_reps);
    return out;
}

double value_function(double t, double x, double y, double p, double f_value, double g_value,
                      const RiskPreferences& prefs, double rate) {
    (void)y;
    (void)p;
    if (!(f_value > 0.0)) throw ConfigInvalid("value function needs f > 0");
    return -std::exp(-prefs.eta * x * std::exp(rate * (prefs.horizon - t))) * f_value *
           std::exp(g_value);
}

VarianceDecompositionReport variance_decomposition(
    const std::function<double(double, double)>& u_map, const ScenarioConfig& scenario,
    std::size_t n_reps, std::uint64_t seed, const ExecPolicy& policy) {
    const SimGrid grid = scenario.sim_grid();
    const double dt = grid.dt();

    struct RepValue {
        double ceded;              // int u dC
        double square_intensity;   // int u^2 lambda ds
        double linear_intensity;   // int u lambda ds
    };
    std::vector<RepValue> values;
    map_indexed<RepValue>(n_reps, policy, [&](std::size_t rep) {
        Rng y_noise = Rng::stream(seed, Stream::FactorNoise, rep);
        Rng thinning = Rng::stream(seed, Stream::Thinning, rep);
        Rng marks = Rng::stream(seed, Stream::Marks, rep);
        auto [y, lambda] = simulate_factor(scenario.factor, grid, y_noise);
        const auto events = simulate_claims(lambda, scenario.claims, grid, thinning, marks);
        double ceded = 0.0;
        for (const auto& ev : events) {
            const std::size_t cell = std::min(
                static_cast<std::size_t>((ev.time - grid.t0) / dt), grid.n_steps - 1);
            ceded += u_map(grid.node(cell), y[cell]) * ev.mark;
        }
        double sq = 0.0, lin = 0.0;
        double prev_sq = 0.0, prev_lin = 0.0;
        for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
            const double t = grid.node(i);
            const double u = u_map(t, y[i]);
            const double cur_sq = u * u * lambda[i];
            const double cur_lin = u * lambda[i];
            if (i > 0) {
                sq += 0.5 * (prev_sq + cur_sq) * dt;
                lin += 0.5 * (prev_lin + cur_lin) * dt;
            }
            prev_sq = cur_sq;
            prev_lin = cur_lin;
        }
        return RepValue{ceded, sq, lin};
    }, values);

    VarianceDecompositionReport report;
    report.n_reps = n_reps;
    const double n = static_cast<double>(n_reps);
    double mean_c = 0.0, mean_sq = 0.0, mean_lin = 0.0;
    for (const auto& v : values) {
        mean_c += v.ceded;
        mean_sq += v.square_intensity;
        mean_lin += v.linear_intensity;
    }
    mean_c /= n;
    mean_sq /= n;
    mean_lin /= n;
    double var_c = 0.0, m4_c = 0.0, var_sq = 0.0, var_lin = 0.0, m4_lin = 0.0;
    for (const auto& v : values) {
        const double dc = v.ceded - mean_c;
        var_c += dc * dc;
        m4_c += dc * dc * dc * dc;
        var_sq += (v.square_intensity - mean_sq) * (v.square_intensity - mean_sq);
        const double dl = v.linear_intensity - mean_lin;
        var_lin += dl * dl;
        m4_lin += dl * dl * dl * dl;
    }
    var_c /= n;
    m4_c /= n;
    var_sq /= n;
    var_lin /= n;
    m4_lin /= n;

    const double ez = scenario.claims.mean();
    const double ez2 = scenario.claims.second_moment();
    report.lhs = var_c;
    report.jump_term = ez2 * mean_sq;
    report.intensity_term = ez * ez * var_lin;
    report.rhs = report.jump_term + report.intensity_term;

    const double se_var_c = std::sqrt(std::max(0.0, m4_c - var_c * var_c) / n);
    const double se_mean_sq = std::sqrt(var_sq / n);
    const double se_var_lin = std::sqrt(std::max(0.0, m4_lin - var_lin * var_lin) / n);
    report.se_combined = std::sqrt(se_var_c * se_var_c + ez2 * ez2 * se_mean_sq * se_mean_sq +
                                   ez * ez * ez * ez * se_var_lin * se_var_lin);
    report.holds = std::abs(report.lhs - report.rhs) <= 3.0 * report.se_combined;
    if (report.lhs > 1e-12 && report.se_combined > 0.25 * report.lhs) {
        throw InsufficientReplications("variance decomposition needs more replications");
    }
    return report;
}

std::vector<Perturbation> default_perturbations() {
    std::vector<Perturbation> out;
    auto label = [](double du, double scale) {
        std::ostringstream os;
        os << "u" << (du >= 0 ? "+" : "") << du << "_w*" << scale;
        return os.str();
    };
    for (double du : {-0.1, -0.05, 0.05, 0.1}) {
        for (double ws : {0.8, 1.2}) out.push_back({du, ws, label(du, ws)});
    }
    for (double du : {-0.1, -0.05, 0.05, 0.1}) out.push_back({du, 1.0, label(du, 1.0)});
    for (double ws : {0.8, 0.9, 1.1, 1.2}) out.push_back({0.0, ws, label(0.0, ws)});
    for (double du : {-0.1, 0.1}) {
        for (double ws : {0.9, 1.1}) out.push_back({du, ws, label(du, ws)});
    }
    return out; // 8 + 4 + 4 + 4 = 20
}

std::vector<ConstantBenchmark> default_constant_benchmarks() {
    return {
        {0.0, 0.0, "const_u0_w0"},
        {1.0, 0.0, "const_u1_w0"},
        {0.5, 0.0, "const_u0.5_w0"},
        {0.0, 1.0, "const_u0_w1"},
    };
}

TournamentResult dominance_tournament(const ScenarioConfig& scenario,
                                      const StrategyField& optimal,
                                      std::span<const Perturbation> perturbations,
                                      std::span<const ConstantBenchmark> constants,
                                      std::size_t n_reps, std::uint64_t seed,
                                      const ExecPolicy& policy) {
    std::vector<ChallengerSpec> specs;
    std::vector<std::string> labels;
    specs.push_back({false, 0.0, 1.0, 0.0, 0.0});
    labels.emplace_back("optimal");
    for (const auto& p : perturbations) {
        specs.push_back({false, p.du, p.w_scale, 0.0, 0.0});
        labels.push_back(p.label);
    }
    for (const auto& c : constants) {
        specs.push_back({true, 0.0, 1.0, c.u, c.w});
        labels.push_back(c.label);
    }

    std::vector<double> terminal;
    simulate_wealth_matrix(optimal, scenario, specs, n_reps, seed, policy, terminal);

    const std::size_t n_specs = specs.size();
    const double eta = scenario.prefs.eta;
    const double n = static_cast<double>(n_reps);

    std::vector<double> column(n_reps);
    auto summarize_column = [&](std::size_t s) {
        for (std::size_t rep = 0; rep < n_reps; ++rep) column[rep] = terminal[rep * n_specs + s];
        return summarize_wealth(column, eta, n_reps, seed);
    };

    TournamentResult result;
    result.optimal = summarize_column(0);
    result.optimal_dominates = true;
    for (std::size_t s = 1; s < n_specs; ++s) {
        TournamentEntry entry;
        entry.label = labels[s];
        entry.result = summarize_column(s);
        double mean_diff = 0.0;
        for (std::size_t rep = 0; rep < n_reps; ++rep) {
            const double u_opt = 1.0 - std::exp(-eta * terminal[rep * n_specs]);
            const double u_alt = 1.0 - std::exp(-eta * terminal[rep * n_specs + s]);
            mean_diff += u_opt - u_alt;
        }
        mean_diff /= n;
        double var_diff = 0.0;
        for (std::size_t rep = 0; rep < n_reps; ++rep) {
            const double u_opt = 1.0 - std::exp(-eta * terminal[rep * n_specs]);
            const double u_alt = 1.0 - std::exp(-eta * terminal[rep * n_specs + s]);
            const double d = (u_opt - u_alt) - mean_diff;
            var_diff += d * d;
        }
        entry.mean_diff = mean_diff;
        entry.se_diff = std::sqrt(var_diff / n / n);
        entry.never_worse = mean_diff >= -2.0 * entry.se_diff;
        result.optimal_dominates = result.optimal_dominates && entry.never_worse;
        result.entries.push_back(std::move(entry));
    }
    return result;
}

} // namespace reinopt
