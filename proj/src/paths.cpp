#include "reinopt/paths.hpp"

#include <algorithm>
#include <cmath>

#include "reinopt/csv.hpp"

namespace reinopt {

SimGrid SimGrid::uniform(double t0, double t1, std::size_t n_steps) {
    if (!(t1 >= t0)) throw ConfigInvalid("simulation grid needs t1 >= t0");
    if (n_steps == 0) throw ConfigInvalid("simulation grid needs at least one step");
    return SimGrid{t0, t1, n_steps};
}

std::vector<double> euler_factor_path(const FactorModel& model, const SimGrid& grid,
                                      std::span<const double> normals) {
    std::vector<double> path(grid.n_nodes());
    path[0] = model.y0;
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        const double y = path[i];
        const double next = y + model.drift(t, y) * dt + model.diffusion(t, y) * sqdt * normals[i];
        if (!std::isfinite(next)) throw NonFiniteState("factor path left the finite range");
        path[i + 1] = next;
    }
    return path;
}

std::vector<double> euler_log_price_path(const MarketModel& model, const SimGrid& grid,
                                         std::span<const double> normals, Measure measure) {
    std::vector<double> path(grid.n_nodes());
    if (!(model.p0 > 0.0)) throw ConfigInvalid("asset price must start positive");
    path[0] = model.p0;
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    double logp = std::log(model.p0);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        const double p = path[i];
        const double vol = model.vol(t, p);
        const double drift = measure == Measure::RiskNeutral ? model.rate : model.drift(t, p);
        logp += (drift - 0.5 * vol * vol) * dt + vol * sqdt * normals[i];
        const double next = std::exp(logp);
        if (!std::isfinite(next)) throw NonFiniteState("asset path left the finite range");
        path[i + 1] = next;
    }
    return path;
}

std::pair<std::vector<double>, std::vector<double>>
simulate_factor(const FactorModel& model, const SimGrid& grid, Rng& noise) {
    std::vector<double> normals(grid.n_steps);
    for (auto& z : normals) z = noise.normal();
    auto path = euler_factor_path(model, grid, normals);
    std::vector<double> lambda(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        lambda[i] = model.intensity(grid.node(i), path[i]);
        if (!(lambda[i] > 0.0)) throw NonFiniteState("intensity path must stay strictly positive");
    }
    return {std::move(path), std::move(lambda)};
}

std::pair<std::vector<double>, std::vector<double>>
simulate_factor(const FactorModel& model, const SimGrid& grid, std::uint64_t seed) {
    Rng noise = Rng::stream(seed, Stream::FactorNoise, 0);
    return simulate_factor(model, grid, noise);
}

std::vector<double> simulate_asset(const MarketModel& model, const SimGrid& grid, Rng& noise,
                                   Measure measure) {
    std::vector<double> normals(grid.n_steps);
    for (auto& z : normals) z = noise.normal();
    return euler_log_price_path(model, grid, normals, measure);
}

std::vector<double> simulate_asset(const MarketModel& model, const SimGrid& grid,
                                   std::uint64_t seed, Measure measure) {
    Rng noise = Rng::stream(seed, Stream::AssetNoise, 0);
    return simulate_asset(model, grid, noise, measure);
}

std::vector<ClaimEvent> simulate_claims(std::span<const double> lambda_path,
                                        const ClaimModel& claims, const SimGrid& grid,
                                        Rng& thinning, Rng& marks) {
    std::vector<ClaimEvent> events;
    if (grid.t1 <= grid.t0) return events;
    const double dt = grid.dt();
    for (std::size_t cell = 0; cell < grid.n_steps; ++cell) {
        const double lam_lo = lambda_path[cell];
        const double lam_hi = lambda_path[cell + 1];
        const double majorant = 1.05 * std::max(lam_lo, lam_hi);
        if (!(majorant > 0.0)) throw NonFiniteState("claim thinning needs a positive intensity");
        const double t_begin = grid.node(cell);
        const double t_end = grid.node(cell + 1);
        double t = t_begin;
        while (true) {
            t += thinning.exponential(majorant);
            if (t > t_end) break;
            const double w = (t - t_begin) / dt;
            const double lam_t = lam_lo + w * (lam_hi - lam_lo);
            if (lam_t > majorant) {
                throw MajorantBreach("proposed intensity exceeded the cell majorant; refine the grid");
            }
            if (thinning.uniform() * majorant <= lam_t) {
                events.push_back({t, claims.sample(marks)});
            }
        }
    }
    return events;
}

std::vector<ClaimEvent> simulate_claims(std::span<const double> lambda_path,
                                        const ClaimModel& claims, const SimGrid& grid,
                                        std::uint64_t seed) {
    Rng thinning = Rng::stream(seed, Stream::Thinning, 0);
    Rng marks = Rng::stream(seed, Stream::Marks, 0);
    return simulate_claims(lambda_path, claims, grid, thinning, marks);
}

PathBundle simulate_bundle(const FactorModel& factor, const MarketModel& market,
                           const ClaimModel& claims, const SimGrid& grid, std::uint64_t seed,
                           std::uint64_t replication, Measure measure) {
    PathBundle bundle;
    bundle.grid = grid;
    bundle.seed = seed;
    bundle.measure = measure;
    Rng y_noise = Rng::stream(seed, Stream::FactorNoise, replication);
    Rng p_noise = Rng::stream(seed, Stream::AssetNoise, replication);
    Rng thinning = Rng::stream(seed, Stream::Thinning, replication);
    Rng marks = Rng::stream(seed, Stream::Marks, replication);
    auto [y, lambda] = simulate_factor(factor, grid, y_noise);
    bundle.factor = std::move(y);
    bundle.intensity = std::move(lambda);
    bundle.price = simulate_asset(market, grid, p_noise, measure);
    bundle.claims = simulate_claims(bundle.intensity, claims, grid, thinning, marks);
    return bundle;
}

void dump_paths_csv(std::ostream& out, std::span<const PathBundle> bundles) {
    out << "replication,t,Y,lambda,P\n";
    for (std::size_t r = 0; r < bundles.size(); ++r) {
        const auto& b = bundles[r];
        for (std::size_t i = 0; i < b.grid.n_nodes(); ++i) {
            out << r << ',' << csv::number(b.grid.node(i)) << ',' << csv::number(b.factor[i])
                << ',' << csv::number(b.intensity[i]) << ',' << csv::number(b.price[i]) << '\n';
        }
    }
}

void dump_events_csv(std::ostream& out, std::span<const PathBundle> bundles) {
    out << "replication,time,mark\n";
    for (std::size_t r = 0; r < bundles.size(); ++r) {
        for (const auto& ev : bundles[r].claims) {
            out << r << ',' << csv::number(ev.time) << ',' << csv::number(ev.mark) << '\n';
        }
    }
}

} // namespace reinopt
