#include "reinopt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reinopt/csv.hpp"
#include "reinopt/investment.hpp"
#include "reinopt/reinsurance.hpp"
#include "reinopt/validation.hpp"
#include "reinopt/valuation.hpp"

namespace reinopt {

namespace {

namespace fs = std::filesystem;

ScenarioConfig apply_overrides(ScenarioConfig sc, const RunOptions& options) {
    if (options.seed) sc.seed = *options.seed;
    if (options.reps) sc.n_reps = *options.reps;
    return sc;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigInvalid("cannot write " + path.string());
    out << content;
}

void write_manifest(const ScenarioConfig& sc, const RunOptions& options, const char* command) {
    std::ostringstream os;
    os << "{\"command\":\"" << command << "\",\"config_hash\":\"" << sc.config_hash_hex()
       << "\",\"seed\":" << sc.seed << ",\"versions\":{\"reinopt\":\"" << kVersion
       << "\",\"schema\":" << kSchemaVersion << "}}\n";
    write_file(options.out_dir / "manifest.json", os.str());
}

void abort_on_fatal(const ScenarioConfig& sc) {
    const ValidationReport report = validate_assumptions(sc);
    if (report.has_fatal()) {
        throw ConfigInvalid("scenario failed validation:\n" + report.to_text());
    }
}

// Surface intensity range: probe bounds widened so path excursions stay
// inside; degenerate (constant) ranges widen multiplicatively.
std::pair<double, double> intensity_range(const ScenarioConfig& sc) {
    const double margin = 4.0;
    double lo = sc.factor.intensity(0.0, sc.probe_y_lo - margin);
    double hi = sc.factor.intensity(0.0, sc.probe_y_hi + margin);
    if (lo > hi) std::swap(lo, hi);
    if (hi <= lo * 1.0001) {
        lo *= 0.9;
        hi *= 1.1;
    }
    return {lo, hi};
}

StrategySurface surface_for(const ScenarioConfig& sc, const PremiumPrinciple& principle,
                            const ExecPolicy& policy) {
    ReinsuranceProblem problem{&sc.claims, &principle, sc.factor.intensity, sc.prefs.eta,
                               sc.prefs.horizon, sc.market.rate};
    const auto [lo, hi] = intensity_range(sc);
    return build_strategy_surface(problem, sc.sim_grid(), lo, hi, 128, policy);
}

LatticeConfig lattice_config_for(const ScenarioConfig& sc, const RunOptions& options) {
    LatticeConfig config;
    config.seed = sc.seed;
    config.n_steps = sc.n_steps;
    config.reps_per_node = options.reps ? std::max<std::size_t>(*options.reps / 25, 1000) : 4000;
    config.policy = options.policy;
    return config;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return detail::splitmix64(s);
}

void run_validate(ScenarioConfig sc, const RunOptions& options) {
    sc = apply_overrides(sc, options);
    fs::create_directories(options.out_dir);
    ValidationReport report = validate_assumptions(sc);
    report.append(validate_regularity(sc));
    const std::size_t mart_reps = options.reps ? *options.reps : std::min<std::size_t>(sc.n_reps, 20000);
    report.append(validate_martingale(sc, mart_reps, sc.seed, options.policy));
    write_file(options.out_dir / "validate_report.txt", report.to_text());
    write_file(options.out_dir / "validate_report.json", report.to_json());
    write_manifest(sc, options, "validate");
}

void run_sweep(ScenarioConfig base, const RunOptions& options) {
    base = apply_overrides(base, options);
    if (!base.sweep) throw ConfigInvalid("sweep command needs a sweep block in the config");
    abort_on_fatal(base);
    fs::create_directories(options.out_dir);
    const SweepSpec spec = *base.sweep;

    std::ostringstream csv;
    if (spec.quantity == SweepSpec::Quantity::UStar) {
        csv << "param_value,u_star_evp,u_star_iavp\n";
    } else {
        csv << "param_value,w_star\n";
    }

    for (std::size_t i = 0; i < spec.steps; ++i) {
        const double value =
            spec.from + (spec.to - spec.from) * static_cast<double>(i) /
                            static_cast<double>(spec.steps - 1);
        ScenarioConfig sc = base;
        switch (spec.parameter) {
        case SweepSpec::Parameter::Eta: sc.prefs.eta = value; break;
        case SweepSpec::Parameter::ThetaR: sc.theta_r = value; break;
        case SweepSpec::Parameter::Horizon: sc.prefs.horizon = value; break;
        case SweepSpec::Parameter::Sigma: sc.market.sigma = value; break;
        case SweepSpec::Parameter::Rate: sc.market.rate = value; break;
        }

        if (spec.quantity == SweepSpec::Quantity::UStar) {
            const double lambda0 = sc.factor.intensity(0.0, sc.factor.y0);
            const PremiumPrinciple evp = sc.principle_of(PremiumPrinciple::Kind::ExpectedValue);
            const PremiumPrinciple iavp =
                sc.principle_of(PremiumPrinciple::Kind::IntensityAdjustedVariance);
            ReinsuranceProblem evp_problem{&sc.claims, &evp, sc.factor.intensity, sc.prefs.eta,
                                           sc.prefs.horizon, sc.market.rate};
            ReinsuranceProblem iavp_problem{&sc.claims, &iavp, sc.factor.intensity, sc.prefs.eta,
                                            sc.prefs.horizon, sc.market.rate};
            const double u_evp = optimal_u_at_lambda(evp_problem, 0.0, lambda0).u;
            const double u_iavp = optimal_u_at_lambda(iavp_problem, 0.0, lambda0).u;
            csv << csv::number(value) << ',' << csv::number(u_evp) << ',' << csv::number(u_iavp)
                << '\n';
        } else {
            McConfig mc;
            mc.n_reps = sc.n_reps;
            mc.n_steps = sc.n_steps;
            mc.seed = derive_seed(sc.seed, i);
            mc.policy = options.policy;
            const GEstimate g = estimate_g(0.0, sc.market.p0, sc.market, sc.prefs.horizon, mc);
            const InvestmentDecision w =
                optimal_w(0.0, sc.market.p0, sc.market, sc.prefs, g.dvalue_dp);
            csv << csv::number(value) << ',' << csv::number(w.total) << '\n';
        }
    }

    const std::string name = "sweep_" + sweep_parameter_name(spec.parameter) + "_" +
                             sweep_quantity_name(spec.quantity) + ".csv";
    write_file(options.out_dir / name, csv.str());
    write_manifest(base, options, "sweep");
}

void run_dynamic(ScenarioConfig sc, const RunOptions& options) {
    sc = apply_overrides(sc, options);
    abort_on_fatal(sc);
    fs::create_directories(options.out_dir);
    const SimGrid grid = sc.sim_grid();

    const PremiumPrinciple evp = sc.principle_of(PremiumPrinciple::Kind::ExpectedValue);
    const PremiumPrinciple iavp = sc.principle_of(PremiumPrinciple::Kind::IntensityAdjustedVariance);
    const StrategySurface evp_surface = surface_for(sc, evp, options.policy);
    const StrategySurface iavp_surface = surface_for(sc, iavp, options.policy);

    const std::size_t n_paths = std::max<std::size_t>(options.dynamic_paths, 1);
    std::vector<std::vector<double>> lambdas(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng y_noise = Rng::stream(sc.seed, Stream::FactorNoise, p);
        auto [y, lambda] = simulate_factor(sc.factor, grid, y_noise);
        lambdas[p] = std::move(lambda);
    }

    std::ostringstream csv;
    csv << "path,t,lambda,u_star_iavp,u_star_evp\n";
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
            const double t = grid.node(i);
            const double lam = lambdas[p][i];
            csv << p << ',' << csv::number(t) << ',' << csv::number(lam) << ','
                << csv::number(iavp_surface.u_at(t, lam)) << ','
                << csv::number(evp_surface.u_at(t, lam)) << '\n';
        }
    }
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        const double t = grid.node(i);
        double mean_lam = 0.0, mean_u = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            mean_lam += lambdas[p][i];
            mean_u += iavp_surface.u_at(t, lambdas[p][i]);
        }
        mean_lam /= static_cast<double>(n_paths);
        mean_u /= static_cast<double>(n_paths);
        csv << "mean," << csv::number(t) << ',' << csv::number(mean_lam) << ','
            << csv::number(mean_u) << ',' << csv::number(evp_surface.u_at(t, mean_lam)) << '\n';
    }
    write_file(options.out_dir / "dynamic.csv", csv.str());

    {
        const PremiumPrinciple principle = sc.principle();
        ReinsuranceProblem problem{&sc.claims, &principle, sc.factor.intensity, sc.prefs.eta,
                                   sc.prefs.horizon, sc.market.rate};
        std::vector<double> t_nodes(21), y_nodes(21);
        for (int i = 0; i < 21; ++i) {
            t_nodes[i] = sc.prefs.horizon * i / 20.0;
            y_nodes[i] = sc.probe_y_lo + (sc.probe_y_hi - sc.probe_y_lo) * i / 20.0;
        }
        std::ostringstream surface_csv;
        dump_strategy_surface_csv(surface_csv, problem, t_nodes, y_nodes);
        write_file(options.out_dir / "surface.csv", surface_csv.str());
    }

    if (options.dump_paths) {
        std::vector<PathBundle> bundles;
        bundles.reserve(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p) {
            bundles.push_back(simulate_bundle(sc.factor, sc.market, sc.claims, grid, sc.seed, p,
                                              Measure::Physical));
        }
        std::ostringstream paths_csv, events_csv;
        dump_paths_csv(paths_csv, bundles);
        dump_events_csv(events_csv, bundles);
        write_file(options.out_dir / "paths.csv", paths_csv.str());
        write_file(options.out_dir / "events.csv", events_csv.str());
    }

    write_manifest(sc, options, "dynamic");
}

void run_g_lattice(ScenarioConfig sc, const RunOptions& options) {
    sc = apply_overrides(sc, options);
    fs::create_directories(options.out_dir);
    const GLattice lattice = build_g_lattice(sc.market, sc.prefs.horizon,
                                             lattice_config_for(sc, options));
    std::ostringstream csv;
    dump_g_lattice_csv(csv, lattice);
    write_file(options.out_dir / "g_lattice.csv", csv.str());

    // Empirical boundedness/growth diagnostics for g and its gradient.
    double max_abs_g = 0.0, max_abs_dg = 0.0, max_growth = 0.0;
    const std::size_t np = lattice.p_nodes.size();
    for (std::size_t it = 0; it < lattice.t_nodes.size(); ++it) {
        for (std::size_t jp = 0; jp < np; ++jp) {
            const double g = lattice.g[it * np + jp];
            const double dg = lattice.dg_dp[it * np + jp];
            max_abs_g = std::max(max_abs_g, std::abs(g));
            max_abs_dg = std::max(max_abs_dg, std::abs(dg));
            max_growth = std::max(max_growth, std::abs(dg) / (1.0 + lattice.p_nodes[jp]));
        }
    }
    std::ostringstream diag;
    diag << "{\"max_abs_g\":" << csv::number(max_abs_g)
         << ",\"max_abs_dg_dp\":" << csv::number(max_abs_dg)
         << ",\"max_dg_dp_over_1_plus_p\":" << csv::number(max_growth)
         << ",\"p_lo\":" << csv::number(lattice.p_nodes.front())
         << ",\"p_hi\":" << csv::number(lattice.p_nodes.back()) << "}\n";
    write_file(options.out_dir / "g_lattice_summary.json", diag.str());
    write_manifest(sc, options, "g-lattice");
}

void run_dominance(ScenarioConfig sc, const RunOptions& options) {
    sc = apply_overrides(sc, options);
    abort_on_fatal(sc);
    fs::create_directories(options.out_dir);

    const PremiumPrinciple principle = sc.principle();
    const StrategySurface surface = surface_for(sc, principle, options.policy);
    const GLattice lattice = build_g_lattice(sc.market, sc.prefs.horizon,
                                             lattice_config_for(sc, options));
    const StrategyField optimal = optimal_strategy_field(sc, surface, lattice);

    const auto perturbations = default_perturbations();
    const auto constants = default_constant_benchmarks();
    const TournamentResult result = dominance_tournament(sc, optimal, perturbations, constants,
                                                         sc.n_reps, sc.seed, options.policy);

    std::ostringstream csv;
    csv << "label,mean_utility,se_utility,mean_terminal_wealth,mean_diff,se_diff,never_worse\n";
    csv << "optimal," << csv::number(result.optimal.mean_utility) << ','
        << csv::number(result.optimal.se_utility) << ','
        << csv::number(result.optimal.mean_terminal_wealth) << ",0,0,1\n";
    for (const auto& entry : result.entries) {
        csv << entry.label << ',' << csv::number(entry.result.mean_utility) << ','
            << csv::number(entry.result.se_utility) << ','
            << csv::number(entry.result.mean_terminal_wealth) << ','
            << csv::number(entry.mean_diff) << ',' << csv::number(entry.se_diff) << ','
            << (entry.never_worse ? '1' : '0') << '\n';
    }
    write_file(options.out_dir / "dominance.csv", csv.str());

    std::ostringstream json;
    json << "{\"optimal\":" << result.optimal.summary_json() << ",\"entries\":[";
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const auto& e = result.entries[i];
        if (i) json << ',';
        json << "{\"label\":\"" << e.label << "\",\"result\":" << e.result.summary_json()
             << ",\"mean_diff\":" << csv::number(e.mean_diff)
             << ",\"se_diff\":" << csv::number(e.se_diff)
             << ",\"never_worse\":" << (e.never_worse ? "true" : "false") << "}";
    }
    json << "],\"optimal_dominates\":" << (result.optimal_dominates ? "true" : "false") << "}\n";
    write_file(options.out_dir / "dominance.json", json.str());
    write_manifest(sc, options, "dominance");
}

void run_variance_check(ScenarioConfig sc, const RunOptions& options) {
    sc = apply_overrides(sc, options);
    abort_on_fatal(sc);
    fs::create_directories(options.out_dir);

    const auto full_cession = [](double, double) { return 1.0; };
    const VarianceDecompositionReport decomposition =
        variance_decomposition(full_cession, sc, sc.n_reps, sc.seed, options.policy);

    const PremiumPrinciple iavp = sc.principle_of(PremiumPrinciple::Kind::IntensityAdjustedVariance);
    const StrategySurface surface = surface_for(sc, iavp, options.policy);
    const IntensityMap intensity = sc.factor.intensity;
    const auto u_star = [&surface, intensity](double t, double y) {
        return surface.u_at(t, intensity(t, y));
    };
    const DominanceCheckReport premium_check =
        iavp_dominance_check(u_star, sc, sc.n_reps, derive_seed(sc.seed, 1), options.policy);

    std::ostringstream json;
    json << "{\"variance_decomposition\":{\"lhs\":" << csv::number(decomposition.lhs)
         << ",\"jump_term\":" << csv::number(decomposition.jump_term)
         << ",\"intensity_term\":" << csv::number(decomposition.intensity_term)
         << ",\"rhs\":" << csv::number(decomposition.rhs)
         << ",\"se_combined\":" << csv::number(decomposition.se_combined)
         << ",\"holds\":" << (decomposition.holds ? "true" : "false")
         << ",\"n_reps\":" << decomposition.n_reps << "}"
         << ",\"premium_dominance\":{\"lhs\":" << csv::number(premium_check.lhs)
         << ",\"rhs\":" << csv::number(premium_check.rhs)
         << ",\"slack\":" << csv::number(premium_check.slack)
         << ",\"se_slack\":" << csv::number(premium_check.se_slack)
         << ",\"holds\":" << (premium_check.holds ? "true" : "false")
         << ",\"n_reps\":" << premium_check.n_reps << "}}\n";
    write_file(options.out_dir / "variance_check.json", json.str());
    write_manifest(sc, options, "variance-check");
}

} // namespace reinopt
