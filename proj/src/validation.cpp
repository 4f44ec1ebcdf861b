#include "reinopt/validation.hpp"

#include <cmath>
#include <sstream>

#include "reinopt/csv.hpp"
#include "reinopt/paths.hpp"
#include "reinopt/reinsurance.hpp"

namespace reinopt {

namespace {

constexpr int kProbeNodes = 21; // 21x21 grid over [0,T] x [y_lo, y_hi]

struct ProbeGrid {
    std::vector<double> t;
    std::vector<double> y;
};

ProbeGrid make_probe(const ScenarioConfig& sc) {
    ProbeGrid grid;
    grid.t.resize(kProbeNodes);
    grid.y.resize(kProbeNodes);
    for (int i = 0; i < kProbeNodes; ++i) {
        grid.t[i] = sc.prefs.horizon * i / double(kProbeNodes - 1);
        grid.y[i] = sc.probe_y_lo + (sc.probe_y_hi - sc.probe_y_lo) * i / double(kProbeNodes - 1);
    }
    return grid;
}

std::string fmt(double v) { return csv::number(v); }

} // namespace

const char* check_status_name(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Warn: return "warn";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Info: return "info";
    }
    return "?";
}

void ValidationReport::add(std::string name, CheckStatus status, std::string detail) {
    checks.push_back({std::move(name), status, std::move(detail)});
}

void ValidationReport::append(const ValidationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

bool ValidationReport::has_fatal() const {
    for (const auto& c : checks) {
        if (c.status == CheckStatus::Fail) return true;
    }
    return false;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << '[' << check_status_name(c.status) << "] " << c.name << ": " << c.detail << '\n';
    }
    return os.str();
}

std::string ValidationReport::to_json() const {
    std::ostringstream os;
    os << "{\"checks\":[";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        if (i) os << ',';
        os << "{\"name\":\"" << checks[i].name << "\",\"status\":\""
           << check_status_name(checks[i].status) << "\",\"detail\":\"" << checks[i].detail
           << "\"}";
    }
    os << "],\"fatal\":" << (has_fatal() ? "true" : "false") << "}";
    return os.str();
}

ValidationReport validate_assumptions(const ScenarioConfig& sc) {
    ValidationReport report;
    const ProbeGrid grid = make_probe(sc);
    const double tilt = sc.prefs.eta * std::exp(sc.market.rate * sc.prefs.horizon);

    // Exponential-weighted moments at the worst-case tilt.
    try {
        const double m0 = sc.claims.weighted_moment(tilt, 0);
        const double m1 = sc.claims.weighted_moment(tilt, 1);
        const double m2 = sc.claims.weighted_moment(tilt, 2);
        report.add("claims.exponential_moments", CheckStatus::Pass,
                   "E[e^{cZ}]=" + fmt(m0) + ", E[Z e^{cZ}]=" + fmt(m1) + ", E[Z^2 e^{cZ}]=" +
                       fmt(m2) + " at c=" + fmt(tilt));
    } catch (const DivergentMoment& e) {
        report.add("claims.exponential_moments", CheckStatus::Fail, e.what());
    }
    report.add("claims.law", CheckStatus::Info, sc.claims.describe());

    if (sc.claims.kind() == ClaimModel::Kind::Exponential && !sc.claims.truncated()) {
        const double lhs = sc.claims.zeta() / sc.prefs.eta;
        const double rhs = std::exp(sc.market.rate * sc.prefs.horizon);
        report.add("claims.closed_form_guard", lhs > rhs ? CheckStatus::Pass : CheckStatus::Fail,
                   "zeta/eta=" + fmt(lhs) + " vs e^{RT}=" + fmt(rhs) +
                       " (margin " + fmt(lhs - rhs) + ")");
    } else {
        report.add("claims.closed_form_guard", CheckStatus::Info,
                   "not applicable: exponential closed forms not requested");
    }

    // Premium contract checks on the probe grid.
    try {
        const PremiumPrinciple principle = sc.principle();
        bool zero_ok = true, monotone_ok = true, expensive_ok = true, net_ok = true;
        double worst_margin = std::numeric_limits<double>::infinity();
        double gap = 0.0;
        for (double t : grid.t) {
            for (double y : grid.y) {
                const double lambda = sc.factor.intensity(t, y);
                const double c = sc.insurance_premium(t, y);
                const PremiumEval at0 = principle.evaluate(t, lambda, 0.0);
                const PremiumEval at1 = principle.evaluate(t, lambda, 1.0);
                zero_ok = zero_ok && at0.q == 0.0;
                expensive_ok = expensive_ok && at1.q > c;
                worst_margin = std::min(worst_margin, at1.q - c);
                net_ok = net_ok && c > sc.claims.mean() * lambda;
                for (int k = 0; k <= 10; ++k) {
                    const double u = k / 10.0;
                    const PremiumEval pe = principle.evaluate(t, lambda, u);
                    monotone_ok = monotone_ok && pe.dq_du >= 0.0;
                    gap = std::max(gap, std::abs(pe.q - c));
                }
            }
        }
        report.add("premium.null_protection_free", zero_ok ? CheckStatus::Pass : CheckStatus::Fail,
                   zero_ok ? "q(t,y,0)=0 on the probe grid" : "q(t,y,0) != 0 somewhere");
        report.add("premium.monotone", monotone_ok ? CheckStatus::Pass : CheckStatus::Fail,
                   monotone_ok ? "dq/du >= 0 on the probe grid" : "dq/du < 0 somewhere");
        report.add("premium.full_protection_expensive",
                   expensive_ok ? CheckStatus::Pass : CheckStatus::Fail,
                   "min q(t,y,1)-c(t,y) = " + fmt(worst_margin));
        report.add("premium.net_profit", net_ok ? CheckStatus::Pass : CheckStatus::Fail,
                   net_ok ? "c(t,y) > E[Z] lambda(t,y) on the probe grid"
                          : "gross premium does not cover expected losses somewhere");
        report.add("premium.gap_bound", CheckStatus::Info,
                   "max |q - c| on the probe grid = " + fmt(gap));

        // Concavity certificate for the retention objective.
        ReinsuranceProblem problem{&sc.claims, &principle, sc.factor.intensity, sc.prefs.eta,
                                   sc.prefs.horizon, sc.market.rate};
        double min_margin = std::numeric_limits<double>::infinity();
        ConcavityCertificate::Route route = ConcavityCertificate::Route::ConvexPremium;
        for (double t : grid.t) {
            for (double y : grid.y) {
                const auto cert = verify_concavity(problem, t, problem.lambda_at(t, y));
                min_margin = std::min(min_margin, cert.margin);
                route = cert.route;
            }
        }
        const char* route_name =
            route == ConcavityCertificate::Route::ZeroSlopeAtOrigin   ? "zero slope at origin"
            : route == ConcavityCertificate::Route::ConvexPremium     ? "convex premium"
            : route == ConcavityCertificate::Route::SecondMomentBound ? "second-moment bound"
                                                                      : "direct check";
        report.add("reinsurance.concavity", CheckStatus::Pass,
                   std::string("certified via ") + route_name + ", min margin " + fmt(min_margin));
    } catch (const Error& e) {
        report.add("premium.checks", CheckStatus::Fail,
                   std::string("premium checks aborted: ") + e.what());
    }
    return report;
}

ValidationReport validate_regularity(const ScenarioConfig& sc) {
    ValidationReport report;
    const ProbeGrid grid = make_probe(sc);
    const double h = 1e-4 * std::max(1.0, std::abs(sc.probe_y_hi - sc.probe_y_lo));

    double lip_b = 0.0, lip_g = 0.0, growth = 0.0, min_gamma2 = 1e300;
    for (double t : grid.t) {
        for (double y : grid.y) {
            const double b0 = sc.factor.drift(t, y);
            const double g0 = sc.factor.diffusion(t, y);
            lip_b = std::max(lip_b, std::abs(sc.factor.drift(t, y + h) - b0) / h);
            lip_g = std::max(lip_g, std::abs(sc.factor.diffusion(t, y + h) - g0) / h);
            growth = std::max(growth, (std::abs(b0) + std::abs(g0)) / (1.0 + std::abs(y)));
            min_gamma2 = std::min(min_gamma2, g0 * g0);
        }
    }
    report.add("factor.lipschitz_probe", CheckStatus::Info,
               "sampled Lipschitz constants: |b'|<=" + fmt(lip_b) + ", |gamma'|<=" + fmt(lip_g));
    report.add("factor.growth_probe", CheckStatus::Info,
               "sampled (|b|+|gamma|)/(1+|y|) <= " + fmt(growth));
    report.add("factor.diffusion_floor", min_gamma2 > 0.0 ? CheckStatus::Pass : CheckStatus::Warn,
               "min gamma^2 on the probe grid = " + fmt(min_gamma2));

    const double lam_hi = sc.factor.intensity(0.0, sc.probe_y_hi);
    const double lam_mid = sc.factor.intensity(0.0, 0.5 * (sc.probe_y_lo + sc.probe_y_hi));
    if (sc.factor.intensity.kind == IntensityMap::Kind::ExpHalfY) {
        report.add("intensity.bounded", CheckStatus::Warn,
                   "lambda(t,y) grows like e^{y/2} and is unbounded in y (lambda at probe top = " +
                       fmt(lam_hi) + ")");
    } else {
        report.add("intensity.bounded", CheckStatus::Pass, "lambda constant = " + fmt(lam_mid));
    }

    double min_vol = 1e300, max_mu = 0.0, max_ratio = 0.0;
    for (int i = 0; i < kProbeNodes; ++i) {
        const double p =
            sc.market.p0 / 10.0 + (10.0 * sc.market.p0 - sc.market.p0 / 10.0) * i /
                                      double(kProbeNodes - 1);
        for (double t : grid.t) {
            const double v = sc.market.vol(t, p);
            min_vol = std::min(min_vol, v);
            max_mu = std::max(max_mu, std::abs(sc.market.drift(t, p)));
            max_ratio = std::max(max_ratio, (sc.market.drift(t, p) - sc.market.rate) / v);
        }
    }
    const bool cev = sc.market.kind == MarketModel::Kind::Cev;
    report.add("market.vol_floor", cev ? CheckStatus::Warn : CheckStatus::Pass,
               cev ? "sigma(t,p) = sigma p^beta has no uniform lower bound as p -> 0 (min on probe = " +
                         fmt(min_vol) + ")"
                   : "min sigma on probe = " + fmt(min_vol));
    report.add("market.mu_bounded", CheckStatus::Pass, "max |mu| on probe = " + fmt(max_mu));
    report.add("market.price_of_risk", CheckStatus::Info,
               "max (mu-R)/sigma on probe = " + fmt(max_ratio));
    return report;
}

ValidationReport validate_martingale(const ScenarioConfig& sc, std::size_t n_reps,
                                     std::uint64_t seed, const ExecPolicy& policy) {
    ValidationReport report;
    const SimGrid grid = sc.sim_grid();
    struct RepValue {
        double compensated;
    };
    std::vector<RepValue> values;
    map_indexed<RepValue>(n_reps, policy, [&](std::size_t rep) {
        Rng y_noise = Rng::stream(seed, Stream::FactorNoise, rep);
        Rng thinning = Rng::stream(seed, Stream::Thinning, rep);
        Rng marks = Rng::stream(seed, Stream::Marks, rep);
        auto [y, lambda] = simulate_factor(sc.factor, grid, y_noise);
        const auto events = simulate_claims(lambda, sc.claims, grid, thinning, marks);
        double compensator = 0.0;
        for (std::size_t i = 1; i < grid.n_nodes(); ++i) {
            compensator += 0.5 * (lambda[i - 1] + lambda[i]) * grid.dt();
        }
        return RepValue{static_cast<double>(events.size()) - compensator};
    }, values);
    double mean = 0.0;
    for (const auto& v : values) mean += v.compensated;
    mean /= static_cast<double>(n_reps);
    double var = 0.0;
    for (const auto& v : values) var += (v.compensated - mean) * (v.compensated - mean);
    var /= static_cast<double>(n_reps);
    const double se = std::sqrt(var / static_cast<double>(n_reps));
    const double z = se > 0.0 ? mean / se : 0.0;
    report.add("claims.compensated_count", std::abs(z) <= 3.0 ? CheckStatus::Pass : CheckStatus::Fail,
               "mean(N_T - int lambda dt) = " + fmt(mean) + ", z = " + fmt(z) + " at " +
                   std::to_string(n_reps) + " replications");
    return report;
}

} // namespace reinopt
