#include "reinopt/investment.hpp"

#include <algorithm>
#include <cmath>

#include "reinopt/csv.hpp"

namespace reinopt {

namespace {

constexpr double kVolFloor = 1e-8;

// One Q-measure path from price p over [0, tau]; returns the trapezoidal
// partial sums of (1/2)((mu-R)/sigma)^2 at the requested node offsets.
// Shared normals across the three starting prices implement the CRN bумp.
struct PartialIntegrals {
    double base;
    double up;
    double down;
};

double half_square_ratio(const MarketModel& market, double t, double p) {
    const double vol = market.vol(t, p);
    if (vol < kVolFloor) {
        throw DegenerateVolatility("sampled volatility below 1e-8");
    }
    const double x = (market.drift(t, p) - market.rate) / vol;
    return 0.5 * x * x;
}

} // namespace

GEstimate estimate_g(double t, double p, const MarketModel& market, double horizon,
                     const McConfig& mc, double relative_bump) {
    if (!(p > 0.0)) throw ConfigInvalid("g estimate needs a positive price");
    if (mc.n_reps < 1000) {
        throw InsufficientReplications("estimate_g requires at least 1e3 replications");
    }
    GEstimate out;
    out.n_reps = mc.n_reps;
    out.seed = mc.seed;
    out.bump = relative_bump;
    const double tau = horizon - t;
    if (tau <= 0.0) return out; // g(T, p) = 0 exactly

    const SimGrid grid = SimGrid::uniform(0.0, tau, mc.n_steps);
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    const double h = relative_bump * p;
    const double p_up = p + h;
    const double p_dn = p - h;

    std::vector<PartialIntegrals> samples;
    map_indexed<PartialIntegrals>(mc.n_reps, mc.policy, [&](std::size_t rep) {
        Rng noise = Rng::stream(mc.seed, Stream::AssetNoise, rep);
        double lp0 = std::log(p), lp1 = std::log(p_up), lp2 = std::log(p_dn);
        double k0 = half_square_ratio(market, 0.0, p);
        double k1 = half_square_ratio(market, 0.0, p_up);
        double k2 = half_square_ratio(market, 0.0, p_dn);
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
        for (std::size_t i = 0; i < grid.n_steps; ++i) {
            const double s = grid.node(i);
            const double z = noise.normal();
            const double v0 = market.vol(s, std::exp(lp0));
            const double v1 = market.vol(s, std::exp(lp1));
            const double v2 = market.vol(s, std::exp(lp2));
            lp0 += (market.rate - 0.5 * v0 * v0) * dt + v0 * sqdt * z;
            lp1 += (market.rate - 0.5 * v1 * v1) * dt + v1 * sqdt * z;
            lp2 += (market.rate - 0.5 * v2 * v2) * dt + v2 * sqdt * z;
            const double s1 = grid.node(i + 1);
            const double k0n = half_square_ratio(market, s1, std::exp(lp0));
            const double k1n = half_square_ratio(market, s1, std::exp(lp1));
            const double k2n = half_square_ratio(market, s1, std::exp(lp2));
            acc0 += 0.5 * (k0 + k0n) * dt;
            acc1 += 0.5 * (k1 + k1n) * dt;
            acc2 += 0.5 * (k2 + k2n) * dt;
            k0 = k0n;
            k1 = k1n;
            k2 = k2n;
        }
        if (!std::isfinite(acc0 + acc1 + acc2)) {
            throw NonFiniteState("g integrand left the finite range");
        }
        return PartialIntegrals{acc0, acc1, acc2};
    }, samples);

    const double n = static_cast<double>(mc.n_reps);
    double sum_g = 0.0, sum_d = 0.0;
    for (const auto& s : samples) {
        sum_g += -s.base;
        sum_d += -(s.up - s.down) / (2.0 * h);
    }
    out.value = sum_g / n;
    out.dvalue_dp = sum_d / n;
    double var_g = 0.0, var_d = 0.0;
    for (const auto& s : samples) {
        const double dg = -s.base - out.value;
        const double dd = -(s.up - s.down) / (2.0 * h) - out.dvalue_dp;
        var_g += dg * dg;
        var_d += dd * dd;
    }
    out.se_value = std::sqrt(var_g / n / n);
    out.se_dvalue = std::sqrt(var_d / n / n);
    return out;
}

double GLattice::value(double t, double p) const {
    const double tc = std::clamp(t, t_nodes.front(), t_nodes.back());
    const double pc = std::clamp(p, p_nodes.front(), p_nodes.back());
    const double dt = (t_nodes.back() - t_nodes.front()) / static_cast<double>(t_nodes.size() - 1);
    const double dp = (p_nodes.back() - p_nodes.front()) / static_cast<double>(p_nodes.size() - 1);
    const std::size_t np = p_nodes.size();
    double xt = (tc - t_nodes.front()) / dt;
    double xp = (pc - p_nodes.front()) / dp;
    std::size_t it = std::min(static_cast<std::size_t>(xt), t_nodes.size() - 2);
    std::size_t ip = std::min(static_cast<std::size_t>(xp), np - 2);
    const double wt = xt - static_cast<double>(it);
    const double wp = xp - static_cast<double>(ip);
    return (1.0 - wt) * ((1.0 - wp) * g[it * np + ip] + wp * g[it * np + ip + 1]) +
           wt * ((1.0 - wp) * g[(it + 1) * np + ip] + wp * g[(it + 1) * np + ip + 1]);
}

double GLattice::gradient(double t, double p) const {
    const double tc = std::clamp(t, t_nodes.front(), t_nodes.back());
    const double pc = std::clamp(p, p_nodes.front(), p_nodes.back());
    const double dt = (t_nodes.back() - t_nodes.front()) / static_cast<double>(t_nodes.size() - 1);
    const double dp = (p_nodes.back() - p_nodes.front()) / static_cast<double>(p_nodes.size() - 1);
    const std::size_t np = p_nodes.size();
    double xt = (tc - t_nodes.front()) / dt;
    double xp = (pc - p_nodes.front()) / dp;
    std::size_t it = std::min(static_cast<std::size_t>(xt), t_nodes.size() - 2);
    std::size_t ip = std::min(static_cast<std::size_t>(xp), np - 2);
    const double wt = xt - static_cast<double>(it);
    const double wp = xp - static_cast<double>(ip);
    return (1.0 - wt) * ((1.0 - wp) * dg_dp[it * np + ip] + wp * dg_dp[it * np + ip + 1]) +
           wt * ((1.0 - wp) * dg_dp[(it + 1) * np + ip] + wp * dg_dp[(it + 1) * np + ip + 1]);
}

GLattice build_g_lattice(const MarketModel& market, double horizon, const LatticeConfig& config) {
    GLattice lattice;
    const double p_lo = config.p_lo > 0.0 ? config.p_lo : market.p0 / 5.0;
    const double p_hi = config.p_hi > 0.0 ? config.p_hi : market.p0 * 5.0;
    lattice.t_nodes.resize(config.n_t);
    for (std::size_t i = 0; i < config.n_t; ++i) {
        lattice.t_nodes[i] = horizon * static_cast<double>(i) / static_cast<double>(config.n_t - 1);
    }
    lattice.p_nodes.resize(config.n_p);
    for (std::size_t j = 0; j < config.n_p; ++j) {
        lattice.p_nodes[j] =
            p_lo + (p_hi - p_lo) * static_cast<double>(j) / static_cast<double>(config.n_p - 1);
    }

    const std::size_t nt = config.n_t;
    const std::size_t np = config.n_p;
    lattice.g.assign(nt * np, 0.0);
    lattice.dg_dp.assign(nt * np, 0.0);
    lattice.se_g.assign(nt * np, 0.0);
    lattice.se_dg.assign(nt * np, 0.0);

    const SimGrid grid = SimGrid::uniform(0.0, horizon, config.n_steps);
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);

    // One full-horizon simulation per price node: the partial integral at
    // remaining horizon tau gives g at every lattice time at once.
    struct Column {
        std::vector<double> g, dg, se_g, se_dg;
    };
    std::vector<Column> columns;
    map_indexed<Column>(np, config.policy, [&](std::size_t jp) {
        const double p = lattice.p_nodes[jp];
        const double h = config.relative_bump * p;
        // map lattice times to remaining-horizon node indices
        std::vector<std::size_t> cut(nt);
        for (std::size_t it = 0; it < nt; ++it) {
            const double tau = horizon - lattice.t_nodes[it];
            cut[it] = static_cast<std::size_t>(std::llround(tau / dt));
        }
        std::vector<double> sum_g(nt, 0.0), sum_g2(nt, 0.0), sum_d(nt, 0.0), sum_d2(nt, 0.0);
        std::vector<double> partial0(grid.n_nodes()), partial1(grid.n_nodes()),
            partial2(grid.n_nodes());
        for (std::size_t rep = 0; rep < config.reps_per_node; ++rep) {
            Rng noise = Rng::stream(config.seed, Stream::Gradient,
                                    jp * config.reps_per_node + rep);
            double lp0 = std::log(p), lp1 = std::log(p + h), lp2 = std::log(p - h);
            double k0 = half_square_ratio(market, 0.0, p);
            double k1 = half_square_ratio(market, 0.0, p + h);
            double k2 = half_square_ratio(market, 0.0, p - h);
            partial0[0] = partial1[0] = partial2[0] = 0.0;
            for (std::size_t i = 0; i < grid.n_steps; ++i) {
                const double s = grid.node(i);
                const double z = noise.normal();
                const double v0 = market.vol(s, std::exp(lp0));
                const double v1 = market.vol(s, std::exp(lp1));
                const double v2 = market.vol(s, std::exp(lp2));
                lp0 += (market.rate - 0.5 * v0 * v0) * dt + v0 * sqdt * z;
                lp1 += (market.rate - 0.5 * v1 * v1) * dt + v1 * sqdt * z;
                lp2 += (market.rate - 0.5 * v2 * v2) * dt + v2 * sqdt * z;
                const double s1 = grid.node(i + 1);
                const double k0n = half_square_ratio(market, s1, std::exp(lp0));
                const double k1n = half_square_ratio(market, s1, std::exp(lp1));
                const double k2n = half_square_ratio(market, s1, std::exp(lp2));
                partial0[i + 1] = partial0[i] + 0.5 * (k0 + k0n) * dt;
                partial1[i + 1] = partial1[i] + 0.5 * (k1 + k1n) * dt;
                partial2[i + 1] = partial2[i] + 0.5 * (k2 + k2n) * dt;
                k0 = k0n;
                k1 = k1n;
                k2 = k2n;
            }
            for (std::size_t it = 0; it < nt; ++it) {
                const double gv = -partial0[cut[it]];
                const double dv = -(partial1[cut[it]] - partial2[cut[it]]) / (2.0 * h);
                sum_g[it] += gv;
                sum_g2[it] += gv * gv;
                sum_d[it] += dv;
                sum_d2[it] += dv * dv;
            }
        }
        Column col;
        col.g.resize(nt);
        col.dg.resize(nt);
        col.se_g.resize(nt);
        col.se_dg.resize(nt);
        const double n = static_cast<double>(config.reps_per_node);
        for (std::size_t it = 0; it < nt; ++it) {
            col.g[it] = sum_g[it] / n;
            col.dg[it] = sum_d[it] / n;
            col.se_g[it] = std::sqrt(std::max(0.0, sum_g2[it] / n - col.g[it] * col.g[it]) / n);
            col.se_dg[it] = std::sqrt(std::max(0.0, sum_d2[it] / n - col.dg[it] * col.dg[it]) / n);
        }
        return col;
    }, columns);

    for (std::size_t jp = 0; jp < np; ++jp) {
        for (std::size_t it = 0; it < nt; ++it) {
            lattice.g[it * np + jp] = columns[jp].g[it];
            lattice.dg_dp[it * np + jp] = columns[jp].dg[it];
            lattice.se_g[it * np + jp] = columns[jp].se_g[it];
            lattice.se_dg[it * np + jp] = columns[jp].se_dg[it];
        }
    }
    return lattice;
}

void dump_g_lattice_csv(std::ostream& out, const GLattice& lattice) {
    out << "t,p,g,dg_dp,se_g,se_dgdp\n";
    const std::size_t np = lattice.p_nodes.size();
    for (std::size_t it = 0; it < lattice.t_nodes.size(); ++it) {
        for (std::size_t jp = 0; jp < np; ++jp) {
            out << csv::number(lattice.t_nodes[it]) << ',' << csv::number(lattice.p_nodes[jp])
                << ',' << csv::number(lattice.g[it * np + jp]) << ','
                << csv::number(lattice.dg_dp[it * np + jp]) << ','
                << csv::number(lattice.se_g[it * np + jp]) << ','
                << csv::number(lattice.se_dg[it * np + jp]) << '\n';
        }
    }
}

InvestmentDecision optimal_w(double t, double p, const MarketModel& market,
                             const RiskPreferences& prefs, double dg_dp) {
    const double vol = market.vol(t, p);
    if (vol < kVolFloor) throw DegenerateVolatility("volatility below floor in optimal_w");
    const double growth = std::exp(market.rate * (prefs.horizon - t));
    InvestmentDecision out;
    out.merton = (market.drift(t, p) - market.rate) / (prefs.eta * vol * vol * growth);
    out.correction = p * dg_dp / (prefs.eta * growth);
    out.total = out.merton + out.correction;
    return out;
}

InvestmentDecision optimal_w(double t, double p, const MarketModel& market,
                             const RiskPreferences& prefs, const GEstimate& g_est) {
    return optimal_w(t, p, market, prefs, g_est.dvalue_dp);
}

double psi_w(double t, double p, double w, const MarketModel& market, const RiskPreferences& prefs,
             const PhiValue& phi) {
    const double vol = market.vol(t, p);
    const double growth = std::exp(market.rate * (prefs.horizon - t));
    const double linear =
        prefs.eta * growth *
        ((market.drift(t, p) - market.rate) * phi.phi + p * vol * vol * phi.dphi_dp);
    const double quadratic = 0.5 * vol * vol * prefs.eta * prefs.eta * growth * growth * phi.phi;
    return linear * w - quadratic * w * w;
}

} // namespace reinopt
