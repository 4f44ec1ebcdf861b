#include "reinopt/reinsurance.hpp"

#include <algorithm>
#include <cmath>

#include "reinopt/csv.hpp"
#include "reinopt/quadrature.hpp"

namespace reinopt {

namespace {

constexpr double kBisectionTol = 1e-10;
constexpr int kConcavityProbePoints = 11;

struct Moments {
    double m0, m1, m2;
};

// Direct weighted moments of the claim law at tilt c.
struct DirectMoments {
    const ClaimModel* claims;
    double m1(double c) const { return claims->weighted_moment(c, 1); }
    double m2(double c) const { return claims->weighted_moment(c, 2); }
};

struct TabulatedMoments {
    const MomentTable* table;
    double m1(double c) const { return table->m1(c); }
    double m2(double c) const { return table->m2(c); }
};

// First-order-condition residual phi(u) = lambda M1(c(u)) - dq/du(u).
// Strictly decreasing in u whenever Psi^u is strictly concave.
template <class M>
double foc_residual(const ReinsuranceProblem& problem, const M& moments, double t, double lambda,
                    double u) {
    const double c = problem.tilt(t, u);
    const PremiumEval pe = problem.principle->evaluate(t, lambda, u);
    return lambda * moments.m1(c) - pe.dq_du;
}

template <class M>
ReinsuranceSolution solve_at_lambda(const ReinsuranceProblem& problem, const M& moments, double t,
                                    double lambda) {
    ReinsuranceSolution sol;
    sol.concavity = verify_concavity(problem, t, lambda);
    sol.region = classify_region_at_lambda(problem, t, lambda);

    auto scaled_residual = [&](double u) {
        const double c = problem.tilt(t, u);
        const double gain = lambda * moments.m1(c);
        const double cost = problem.principle->evaluate(t, lambda, u).dq_du;
        const double scale = std::max({std::abs(gain), std::abs(cost), 1e-300});
        return (gain - cost) / scale;
    };

    if (sol.region == Region::NoReinsurance) {
        sol.u = 0.0;
        sol.foc_residual = scaled_residual(0.0);
        return sol;
    }
    if (sol.region == Region::FullReinsurance) {
        sol.u = 1.0;
        sol.foc_residual = scaled_residual(1.0);
        return sol;
    }

    double lo = 0.0, hi = 1.0;
    const double f_lo = foc_residual(problem, moments, t, lambda, lo);
    const double f_hi = foc_residual(problem, moments, t, lambda, hi);
    if (f_lo <= 0.0 && f_hi >= 0.0) {
        throw RootBracketFailure("first-order condition not bracketed on [0,1] despite interior region");
    }
    // Hairline region-boundary ties: the root sits at the endpoint.
    if (f_lo <= 0.0) {
        sol.u = 0.0;
        sol.foc_residual = scaled_residual(0.0);
        return sol;
    }
    if (f_hi >= 0.0) {
        sol.u = 1.0;
        sol.foc_residual = scaled_residual(1.0);
        return sol;
    }
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = foc_residual(problem, moments, t, lambda, mid);
        if (f_mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    sol.u = 0.5 * (lo + hi);
    sol.foc_residual = scaled_residual(sol.u);
    return sol;
}

// Exact root of the exponential-claim first-order condition
//   E[Z] + L u = zeta / (zeta - c)^2,   c = a (1 - u),
// for the quadratic premium principles. Substituting u = 1 - c/a turns it
// into the cubic c^3 + b2 c^2 + b1 c + b0 = 0 with exactly one root in
// (0, a); solved by the trigonometric/Cardano method and polished on the
// cubic itself.
double exp_quadratic_premium_root(double zeta, double a, double L) {
    if (L <= 0.0) return 1.0; // free reinsurance: retain nothing, cede all
    const double beta = L;
    const double m = a * (1.0 + beta * zeta) / (beta * zeta);
    const double b2 = -(m + 2.0 * zeta);
    const double b1 = zeta * (2.0 * m + zeta);
    const double b0 = -a * zeta * zeta;

    const double p = b1 - b2 * b2 / 3.0;
    const double q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    const double disc = 0.25 * q * q + p * p * p / 27.0;

    double root = -1.0;
    if (disc <= 0.0) {
        const double r = std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p);
        arg = std::clamp(arg, -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double c = 2.0 * r * std::cos(phi - 2.0943951023931953 * k) - b2 / 3.0;
            if (c > 0.0 && c < a && (root < 0.0 || c < root)) root = c;
        }
    } else {
        const double s = std::sqrt(disc);
        const double cu = std::cbrt(-0.5 * q + s);
        const double cv = std::cbrt(-0.5 * q - s);
        const double c = cu + cv - b2 / 3.0;
        if (c > 0.0 && c < a) root = c;
    }
    if (root < 0.0) {
        throw RootBracketFailure("cubic closed form found no tilt root in (0, a)");
    }
    for (int it = 0; it < 3; ++it) {
        const double f = ((root + b2) * root + b1) * root + b0;
        const double fp = (3.0 * root + 2.0 * b2) * root + b1;
        root -= f / fp;
    }
    return 1.0 - root / a;
}

} // namespace

const char* region_label(Region r) {
    switch (r) {
    case Region::NoReinsurance: return "A0";
    case Region::Interior: return "interior";
    case Region::FullReinsurance: return "A1";
    }
    return "?";
}

PsiU psi_u_at_lambda(const ReinsuranceProblem& problem, double t, double lambda, double u) {
    const double w = problem.eta * std::exp(problem.rate * (problem.horizon - t));
    const double c = problem.tilt(t, u);
    const PremiumEval pe = problem.principle->evaluate(t, lambda, u);
    const double m0 = problem.claims->weighted_moment(c, 0);
    const double m1 = problem.claims->weighted_moment(c, 1);
    const double m2 = problem.claims->weighted_moment(c, 2);
    PsiU out;
    out.value = -w * pe.q + lambda * (1.0 - m0);
    out.d_du = -w * (pe.dq_du - lambda * m1);
    out.d2_du2 = -w * (pe.d2q_du2 + w * lambda * m2);
    return out;
}

PsiU psi_u(const ReinsuranceProblem& problem, double t, double y, double u) {
    return psi_u_at_lambda(problem, t, problem.lambda_at(t, y), u);
}

ConcavityCertificate verify_concavity(const ReinsuranceProblem& problem, double t, double lambda) {
    ConcavityCertificate cert;

    const PremiumEval at_zero = problem.principle->evaluate(t, lambda, 0.0);
    if (at_zero.dq_du == 0.0) {
        cert.route = ConcavityCertificate::Route::ZeroSlopeAtOrigin;
        cert.margin = 0.0;
        return cert;
    }

    double min_d2q = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kConcavityProbePoints - 1; ++i) {
        const double u = static_cast<double>(i) / (kConcavityProbePoints - 1);
        min_d2q = std::min(min_d2q, problem.principle->evaluate(t, lambda, u).d2q_du2);
    }
    if (min_d2q >= 0.0) {
        cert.route = ConcavityCertificate::Route::ConvexPremium;
        cert.margin = min_d2q;
        return cert;
    }

    const double bound = problem.eta * lambda * problem.claims->second_moment();
    if (-min_d2q < bound) {
        cert.route = ConcavityCertificate::Route::SecondMomentBound;
        cert.margin = bound + min_d2q;
        return cert;
    }

    const double w = problem.eta * std::exp(problem.rate * (problem.horizon - t));
    double min_direct = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kConcavityProbePoints - 1; ++i) {
        const double u = static_cast<double>(i) / (kConcavityProbePoints - 1);
        const double d2q = problem.principle->evaluate(t, lambda, u).d2q_du2;
        const double rhs = w * lambda * problem.claims->weighted_moment(problem.tilt(t, u), 2);
        min_direct = std::min(min_direct, rhs + d2q);
    }
    if (min_direct > 0.0) {
        cert.route = ConcavityCertificate::Route::DirectCheck;
        cert.margin = min_direct;
        return cert;
    }
    throw ConcavityViolated("retention objective is not strictly concave at the probed point");
}

Region classify_region_at_lambda(const ReinsuranceProblem& problem, double t, double lambda) {
    verify_concavity(problem, t, lambda);
    // Boundary equalities resolve to the closed sets A0 and A1.
    const double m1_at_zero = problem.claims->weighted_moment(problem.tilt(t, 0.0), 1);
    const double dq0 = problem.principle->evaluate(t, lambda, 0.0).dq_du;
    if (lambda * m1_at_zero <= dq0) return Region::NoReinsurance;
    const double dq1 = problem.principle->evaluate(t, lambda, 1.0).dq_du;
    if (dq1 <= problem.claims->mean() * lambda) return Region::FullReinsurance;
    return Region::Interior;
}

Region classify_region(const ReinsuranceProblem& problem, double t, double y) {
    return classify_region_at_lambda(problem, t, problem.lambda_at(t, y));
}

ReinsuranceSolution optimal_u_at_lambda(const ReinsuranceProblem& problem, double t, double lambda) {
    return solve_at_lambda(problem, DirectMoments{problem.claims}, t, lambda);
}

ReinsuranceSolution optimal_u(const ReinsuranceProblem& problem, double t, double y) {
    return optimal_u_at_lambda(problem, t, problem.lambda_at(t, y));
}

ExponentialClosedForm closed_form_exponential(PremiumPrinciple::Kind kind, double t,
                                              double lambda_value,
                                              const ExponentialClosedFormParams& params) {
    const double growth = std::exp(params.rate * params.horizon);
    if (!(params.zeta / params.eta > growth)) {
        throw GuardViolated("exponential closed forms require zeta/eta > e^{RT}");
    }
    const double discount = std::exp(-params.rate * (params.horizon - t));
    const double a = params.eta / discount; // eta e^{R(T-t)}

    ExponentialClosedForm out;
    switch (kind) {
    case PremiumPrinciple::Kind::ExpectedValue: {
        const double gap = (params.zeta / params.eta) * (1.0 - 1.0 / std::sqrt(1.0 + params.theta_r));
        const double t0 = params.horizon - std::log(gap) / params.rate;
        out.switch_time = t0;
        // The retention formula crosses zero exactly at the switch time, so
        // the zero regime applies from t0 on; for t0 beyond the horizon it
        // never activates.
        out.u = t >= t0 ? 0.0 : 1.0 - gap * discount;
        break;
    }
    case PremiumPrinciple::Kind::Variance: {
        const double L = 4.0 * params.theta_r / (params.zeta * params.zeta);
        out.u = exp_quadratic_premium_root(params.zeta, a, L);
        break;
    }
    case PremiumPrinciple::Kind::IntensityAdjustedVariance: {
        const double K = 1.0 + params.horizon * lambda_value;
        const double L = 4.0 * params.theta_r * K / (params.zeta * params.zeta);
        out.u = exp_quadratic_premium_root(params.zeta, a, L);
        break;
    }
    case PremiumPrinciple::Kind::Custom:
        throw GuardViolated("no exponential closed form for custom premium tables");
    }
    return out;
}

MomentTable::MomentTable(const ClaimModel& claims, double c_max, std::size_t n_nodes) {
    c_max_ = c_max;
    if (claims.kind() == ClaimModel::Kind::Exponential && !claims.truncated()) {
        exact_ = true;
        zeta_ = claims.zeta();
        if (c_max >= zeta_) {
            throw DivergentMoment("moment table range reaches the exponential pole");
        }
        return;
    }
    if (n_nodes < 8) n_nodes = 8;
    dc_ = c_max / static_cast<double>(n_nodes - 1);
    for (int k = 0; k < 3; ++k) {
        nodes_[k].resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            nodes_[k][i] = claims.weighted_moment(dc_ * static_cast<double>(i), k);
        }
    }
}

double MomentTable::eval(int k, double c) const {
    if (exact_) {
        const double d = zeta_ - c;
        if (k == 0) return zeta_ / d;
        if (k == 1) return zeta_ / (d * d);
        return 2.0 * zeta_ / (d * d * d);
    }
    const auto& v = nodes_[k];
    const std::size_t n = v.size();
    double x = std::clamp(c, 0.0, c_max_) / dc_;
    std::size_t i = std::min(static_cast<std::size_t>(x), n - 2);
    const double w = x - static_cast<double>(i);
    // Catmull-Rom with clamped end segments.
    const double y0 = v[i == 0 ? 0 : i - 1];
    const double y1 = v[i];
    const double y2 = v[i + 1];
    const double y3 = v[std::min(i + 2, n - 1)];
    const double a0 = -0.5 * y0 + 1.5 * y1 - 1.5 * y2 + 0.5 * y3;
    const double a1 = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
    const double a2 = 0.5 * (y2 - y0);
    return ((a0 * w + a1) * w + a2) * w + y1;
}

double StrategySurface::u_at(double t, double lambda) const {
    const double lt = std::clamp(t, t_nodes.front(), t_nodes.back());
    const double ll = std::clamp(std::log(lambda), log_lambda_nodes.front(), log_lambda_nodes.back());
    const double dt = (t_nodes.back() - t_nodes.front()) / static_cast<double>(t_nodes.size() - 1);
    const double dl = (log_lambda_nodes.back() - log_lambda_nodes.front()) /
                      static_cast<double>(log_lambda_nodes.size() - 1);
    const std::size_t nl = log_lambda_nodes.size();
    double xt = (lt - t_nodes.front()) / dt;
    double xl = (ll - log_lambda_nodes.front()) / dl;
    std::size_t it = std::min(static_cast<std::size_t>(xt), t_nodes.size() - 2);
    std::size_t il = std::min(static_cast<std::size_t>(xl), nl - 2);
    const double wt = xt - static_cast<double>(it);
    const double wl = xl - static_cast<double>(il);
    const double u00 = u[it * nl + il];
    const double u01 = u[it * nl + il + 1];
    const double u10 = u[(it + 1) * nl + il];
    const double u11 = u[(it + 1) * nl + il + 1];
    return (1.0 - wt) * ((1.0 - wl) * u00 + wl * u01) + wt * ((1.0 - wl) * u10 + wl * u11);
}

double StrategySurface::psi_at(double t, double lambda) const {
    const double lt = std::clamp(t, t_nodes.front(), t_nodes.back());
    const double ll = std::clamp(std::log(lambda), log_lambda_nodes.front(), log_lambda_nodes.back());
    const double dt = (t_nodes.back() - t_nodes.front()) / static_cast<double>(t_nodes.size() - 1);
    const double dl = (log_lambda_nodes.back() - log_lambda_nodes.front()) /
                      static_cast<double>(log_lambda_nodes.size() - 1);
    const std::size_t nl = log_lambda_nodes.size();
    double xt = (lt - t_nodes.front()) / dt;
    double xl = (ll - log_lambda_nodes.front()) / dl;
    std::size_t it = std::min(static_cast<std::size_t>(xt), t_nodes.size() - 2);
    std::size_t il = std::min(static_cast<std::size_t>(xl), nl - 2);
    const double wt = xt - static_cast<double>(it);
    const double wl = xl - static_cast<double>(il);
    const double p00 = psi[it * nl + il];
    const double p01 = psi[it * nl + il + 1];
    const double p10 = psi[(it + 1) * nl + il];
    const double p11 = psi[(it + 1) * nl + il + 1];
    return (1.0 - wt) * ((1.0 - wl) * p00 + wl * p01) + wt * ((1.0 - wl) * p10 + wl * p11);
}

StrategySurface build_strategy_surface(const ReinsuranceProblem& problem, const SimGrid& grid,
                                       double lambda_lo, double lambda_hi, std::size_t n_lambda,
                                       const ExecPolicy& policy) {
    StrategySurface surface;
    const std::size_t nt = grid.n_nodes();
    surface.t_nodes.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) surface.t_nodes[i] = grid.node(i);
    surface.log_lambda_nodes.resize(n_lambda);
    const double l_lo = std::log(lambda_lo);
    const double l_hi = std::log(lambda_hi);
    for (std::size_t j = 0; j < n_lambda; ++j) {
        surface.log_lambda_nodes[j] =
            l_lo + (l_hi - l_lo) * static_cast<double>(j) / static_cast<double>(n_lambda - 1);
    }

    const double c_max = problem.eta * std::exp(problem.rate * problem.horizon);
    const MomentTable table(*problem.claims, c_max);
    const TabulatedMoments moments{&table};

    struct Cell {
        double u;
        double psi;
    };
    std::vector<Cell> cells;
    map_indexed<Cell>(nt * n_lambda, policy, [&](std::size_t idx) {
        const std::size_t it = idx / n_lambda;
        const std::size_t jl = idx % n_lambda;
        const double t = surface.t_nodes[it];
        const double lambda = std::exp(surface.log_lambda_nodes[jl]);
        const ReinsuranceSolution sol = solve_at_lambda(problem, moments, t, lambda);
        const double w = problem.eta * std::exp(problem.rate * (problem.horizon - t));
        const double m0 = table.m0(problem.tilt(t, sol.u));
        const double psi =
            -w * problem.principle->evaluate(t, lambda, sol.u).q + lambda * (1.0 - m0);
        return Cell{sol.u, psi};
    }, cells);

    surface.u.resize(cells.size());
    surface.psi.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        surface.u[i] = cells[i].u;
        surface.psi[i] = cells[i].psi;
    }
    return surface;
}

void dump_strategy_surface_csv(std::ostream& out, const ReinsuranceProblem& problem,
                               std::span<const double> t_nodes, std::span<const double> y_nodes) {
    out << "t,y,lambda,region,u_star\n";
    for (double t : t_nodes) {
        for (double y : y_nodes) {
            const double lambda = problem.lambda_at(t, y);
            const ReinsuranceSolution sol = optimal_u_at_lambda(problem, t, lambda);
            out << csv::number(t) << ',' << csv::number(y) << ',' << csv::number(lambda) << ','
                << region_label(sol.region) << ',' << csv::number(sol.u) << '\n';
        }
    }
}

} // namespace reinopt
