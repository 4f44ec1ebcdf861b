#include "reinopt/scenario.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace reinopt {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& context,
                  const std::set<std::string>& allowed, const std::set<std::string>& required) {
    if (!obj.is_object()) throw ConfigInvalid(context + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigInvalid(context + ": unknown key '" + key + "'");
        }
    }
    for (const auto& key : required) {
        if (!obj.contains(key)) {
            throw ConfigInvalid(context + ": missing key '" + key + "'");
        }
    }
}

double number(const json& obj, const std::string& context, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigInvalid(context + "." + key + ": expected a number");
    return v.get<double>();
}

Coefficient parse_coefficient(const json& obj, const std::string& context) {
    require_keys(obj, context, {"kind", "value", "a0", "a1"}, {"kind"});
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "constant") {
        require_keys(obj, context, {"kind", "value"}, {"kind", "value"});
        return Coefficient::constant(number(obj, context, "value"));
    }
    if (kind == "affine") {
        require_keys(obj, context, {"kind", "a0", "a1"}, {"kind", "a0", "a1"});
        return Coefficient::affine(number(obj, context, "a0"), number(obj, context, "a1"));
    }
    throw ConfigInvalid(context + ".kind: expected 'constant' or 'affine'");
}

IntensityMap parse_intensity(const json& obj, const std::string& context) {
    require_keys(obj, context, {"kind", "lambda0"}, {"kind", "lambda0"});
    const std::string kind = obj.at("kind").get<std::string>();
    const double lambda0 = number(obj, context, "lambda0");
    if (!(lambda0 > 0.0)) throw ConfigInvalid(context + ".lambda0 must be positive");
    if (kind == "constant") return IntensityMap::constant(lambda0);
    if (kind == "exp_half_y") return IntensityMap::exp_half_y(lambda0);
    throw ConfigInvalid(context + ".kind: expected 'constant' or 'exp_half_y'");
}

ClaimModel parse_claims(const json& obj) {
    const std::string context = "claims";
    require_keys(obj, context,
                 {"kind", "zeta", "shape", "scale", "truncation", "values", "probabilities"},
                 {"kind"});
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "exponential") {
        require_keys(obj, context, {"kind", "zeta", "truncation"}, {"kind", "zeta"});
        const double zeta = number(obj, context, "zeta");
        if (obj.contains("truncation") && obj.at("truncation").is_number()) {
            return ClaimModel::exponential(zeta, obj.at("truncation").get<double>());
        }
        return ClaimModel::exponential(zeta);
    }
    if (kind == "pareto") {
        require_keys(obj, context, {"kind", "shape", "scale", "truncation"},
                     {"kind", "shape", "scale"});
        const double shape = number(obj, context, "shape");
        const double scale = number(obj, context, "scale");
        if (obj.contains("truncation")) {
            const auto& tr = obj.at("truncation");
            if (tr.is_string() && tr.get<std::string>() == "none") {
                return ClaimModel::pareto_untruncated(shape, scale);
            }
            if (tr.is_number()) return ClaimModel::pareto(shape, scale, tr.get<double>());
            throw ConfigInvalid("claims.truncation: expected a number or 'none'");
        }
        return ClaimModel::pareto(shape, scale);
    }
    if (kind == "empirical") {
        require_keys(obj, context, {"kind", "values", "probabilities"},
                     {"kind", "values", "probabilities"});
        return ClaimModel::empirical(obj.at("values").get<std::vector<double>>(),
                                     obj.at("probabilities").get<std::vector<double>>());
    }
    throw ConfigInvalid("claims.kind: expected 'exponential', 'pareto' or 'empirical'");
}

MarketModel parse_market(const json& obj, double rate) {
    const std::string context = "market";
    require_keys(obj, context, {"kind", "mu", "sigma", "beta", "p0"},
                 {"kind", "mu", "sigma", "p0"});
    const std::string kind = obj.at("kind").get<std::string>();
    const double mu = number(obj, context, "mu");
    const double sigma = number(obj, context, "sigma");
    const double p0 = number(obj, context, "p0");
    if (kind == "constant") {
        require_keys(obj, context, {"kind", "mu", "sigma", "p0"}, {"kind"});
        return MarketModel::constant(mu, sigma, rate, p0);
    }
    if (kind == "cev") {
        require_keys(obj, context, {"kind", "mu", "sigma", "beta", "p0"}, {"kind", "beta"});
        return MarketModel::cev(mu, sigma, number(obj, context, "beta"), rate, p0);
    }
    throw ConfigInvalid("market.kind: expected 'constant' or 'cev'");
}

PremiumPrinciple::Kind parse_principle(const std::string& name) {
    if (name == "evp" || name == "expected_value") return PremiumPrinciple::Kind::ExpectedValue;
    if (name == "vp" || name == "variance") return PremiumPrinciple::Kind::Variance;
    if (name == "iavp" || name == "intensity_adjusted_variance") {
        return PremiumPrinciple::Kind::IntensityAdjustedVariance;
    }
    throw ConfigInvalid("premium.principle: expected 'evp', 'vp' or 'iavp'");
}

SweepSpec parse_sweep(const json& obj) {
    const std::string context = "sweep";
    require_keys(obj, context, {"parameter", "quantity", "from", "to", "steps"},
                 {"parameter", "quantity", "from", "to", "steps"});
    SweepSpec spec;
    const std::string pname = obj.at("parameter").get<std::string>();
    if (pname == "eta") spec.parameter = SweepSpec::Parameter::Eta;
    else if (pname == "theta_r") spec.parameter = SweepSpec::Parameter::ThetaR;
    else if (pname == "horizon") spec.parameter = SweepSpec::Parameter::Horizon;
    else if (pname == "sigma") spec.parameter = SweepSpec::Parameter::Sigma;
    else if (pname == "rate") spec.parameter = SweepSpec::Parameter::Rate;
    else throw ConfigInvalid("sweep.parameter: expected eta, theta_r, horizon, sigma or rate");
    const std::string qname = obj.at("quantity").get<std::string>();
    if (qname == "u_star") spec.quantity = SweepSpec::Quantity::UStar;
    else if (qname == "w_star") spec.quantity = SweepSpec::Quantity::WStar;
    else throw ConfigInvalid("sweep.quantity: expected 'u_star' or 'w_star'");
    spec.from = number(obj, context, "from");
    spec.to = number(obj, context, "to");
    spec.steps = obj.at("steps").get<std::size_t>();
    if (spec.steps < 2) throw ConfigInvalid("sweep.steps must be at least 2");
    if (!(spec.to != spec.from)) throw ConfigInvalid("sweep range must be non-degenerate");
    return spec;
}

} // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(doc, "config",
                 {"schema_version", "seed", "horizon", "risk_aversion", "rate", "initial_wealth",
                  "factor", "market", "claims", "premium", "mc", "probe", "sweep"},
                 {"schema_version", "seed", "horizon", "risk_aversion", "rate", "factor", "market",
                  "claims", "premium", "mc"});
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
        throw ConfigInvalid("unsupported schema_version");
    }

    ScenarioConfig sc;
    sc.seed = doc.at("seed").get<std::uint64_t>();
    sc.prefs.horizon = number(doc, "config", "horizon");
    sc.prefs.eta = number(doc, "config", "risk_aversion");
    const double rate = number(doc, "config", "rate");
    sc.initial_wealth = doc.contains("initial_wealth") ? number(doc, "config", "initial_wealth") : 1.0;

    const auto& factor = doc.at("factor");
    require_keys(factor, "factor", {"y0", "drift", "diffusion", "intensity"},
                 {"y0", "drift", "diffusion", "intensity"});
    sc.factor.y0 = number(factor, "factor", "y0");
    sc.factor.drift = parse_coefficient(factor.at("drift"), "factor.drift");
    sc.factor.diffusion = parse_coefficient(factor.at("diffusion"), "factor.diffusion");
    sc.factor.intensity = parse_intensity(factor.at("intensity"), "factor.intensity");

    sc.market = parse_market(doc.at("market"), rate);
    sc.claims = parse_claims(doc.at("claims"));

    const auto& premium = doc.at("premium");
    require_keys(premium, "premium", {"principle", "theta_r", "theta_i"},
                 {"principle", "theta_r"});
    sc.principle_kind = parse_principle(premium.at("principle").get<std::string>());
    sc.theta_r = number(premium, "premium", "theta_r");
    sc.theta_i = premium.contains("theta_i") ? number(premium, "premium", "theta_i")
                                             : 0.5 * sc.theta_r;

    const auto& mc = doc.at("mc");
    require_keys(mc, "mc", {"n_reps", "n_steps"}, {"n_reps", "n_steps"});
    sc.n_reps = mc.at("n_reps").get<std::size_t>();
    sc.n_steps = mc.at("n_steps").get<std::size_t>();

    if (doc.contains("probe")) {
        const auto& probe = doc.at("probe");
        require_keys(probe, "probe", {"y_lo", "y_hi"}, {"y_lo", "y_hi"});
        sc.probe_y_lo = number(probe, "probe", "y_lo");
        sc.probe_y_hi = number(probe, "probe", "y_hi");
    } else {
        sc.probe_y_lo = sc.factor.y0 - 4.0;
        sc.probe_y_hi = sc.factor.y0 + 4.0;
    }

    if (doc.contains("sweep")) sc.sweep = parse_sweep(doc.at("sweep"));

    sc.validate_basic();
    return sc;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void ScenarioConfig::validate_basic() const {
    if (!(prefs.eta > 0.0)) throw ConfigInvalid("risk_aversion must be positive");
    if (!(prefs.horizon > 0.0)) throw ConfigInvalid("horizon must be positive");
    if (!(market.rate > 0.0)) throw ConfigInvalid("rate must be positive");
    if (!(market.p0 > 0.0)) throw ConfigInvalid("market.p0 must be positive");
    if (!(theta_r > 0.0)) throw ConfigInvalid("premium.theta_r must be positive");
    if (!(theta_i >= 0.0)) throw ConfigInvalid("premium.theta_i must be nonnegative");
    if (n_steps == 0) throw ConfigInvalid("mc.n_steps must be positive");
    if (n_reps == 0) throw ConfigInvalid("mc.n_reps must be positive");
    if (!(probe_y_hi > probe_y_lo)) throw ConfigInvalid("probe bounds must satisfy y_hi > y_lo");
}

PremiumPrinciple ScenarioConfig::principle_of(PremiumPrinciple::Kind kind) const {
    switch (kind) {
    case PremiumPrinciple::Kind::ExpectedValue:
        return PremiumPrinciple::expected_value(theta_r, claims);
    case PremiumPrinciple::Kind::Variance:
        return PremiumPrinciple::variance(theta_r, claims);
    case PremiumPrinciple::Kind::IntensityAdjustedVariance:
        return PremiumPrinciple::intensity_adjusted(theta_r, claims, prefs.horizon);
    case PremiumPrinciple::Kind::Custom:
        throw ConfigInvalid("custom premium principles are not configured through scenarios");
    }
    throw ConfigInvalid("unknown premium principle");
}

std::string ScenarioConfig::canonical_json() const {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["seed"] = seed;
    doc["horizon"] = prefs.horizon;
    doc["risk_aversion"] = prefs.eta;
    doc["rate"] = market.rate;
    doc["initial_wealth"] = initial_wealth;

    json factor_doc;
    factor_doc["y0"] = factor.y0;
    auto coeff = [](const Coefficient& c) {
        json j;
        if (c.kind == Coefficient::Kind::Constant) {
            j["kind"] = "constant";
            j["value"] = c.a0;
        } else {
            j["kind"] = "affine";
            j["a0"] = c.a0;
            j["a1"] = c.a1;
        }
        return j;
    };
    factor_doc["drift"] = coeff(factor.drift);
    factor_doc["diffusion"] = coeff(factor.diffusion);
    factor_doc["intensity"] = {
        {"kind", factor.intensity.kind == IntensityMap::Kind::Constant ? "constant" : "exp_half_y"},
        {"lambda0", factor.intensity.lambda0}};
    doc["factor"] = factor_doc;

    json market_doc;
    market_doc["kind"] = market.kind == MarketModel::Kind::ConstantCoefficient ? "constant" : "cev";
    market_doc["mu"] = market.mu;
    market_doc["sigma"] = market.sigma;
    if (market.kind == MarketModel::Kind::Cev) market_doc["beta"] = market.beta;
    market_doc["p0"] = market.p0;
    doc["market"] = market_doc;

    json claims_doc;
    switch (claims.kind()) {
    case ClaimModel::Kind::Exponential:
        claims_doc["kind"] = "exponential";
        claims_doc["zeta"] = claims.zeta();
        break;
    case ClaimModel::Kind::Pareto:
        claims_doc["kind"] = "pareto";
        claims_doc["shape"] = claims.pareto_shape();
        claims_doc["scale"] = claims.pareto_scale();
        break;
    case ClaimModel::Kind::Empirical:
        claims_doc["kind"] = "empirical";
        claims_doc["values"] = claims.empirical_values();
        claims_doc["probabilities"] = claims.empirical_probabilities();
        break;
    }
    if (claims.truncated()) {
        claims_doc["truncation"] = claims.truncation();
    } else {
        claims_doc["truncation"] = "none";
    }
    doc["claims"] = claims_doc;

    const char* pname = "evp";
    if (principle_kind == PremiumPrinciple::Kind::Variance) pname = "vp";
    if (principle_kind == PremiumPrinciple::Kind::IntensityAdjustedVariance) pname = "iavp";
    doc["premium"] = {{"principle", pname}, {"theta_r", theta_r}, {"theta_i", theta_i}};
    doc["mc"] = {{"n_reps", n_reps}, {"n_steps", n_steps}};
    doc["probe"] = {{"y_lo", probe_y_lo}, {"y_hi", probe_y_hi}};
    if (sweep) {
        doc["sweep"] = {{"parameter", sweep_parameter_name(sweep->parameter)},
                        {"quantity", sweep_quantity_name(sweep->quantity)},
                        {"from", sweep->from},
                        {"to", sweep->to},
                        {"steps", sweep->steps}};
    }
    return doc.dump();
}

std::string ScenarioConfig::config_hash_hex() const {
    const std::string text = canonical_json();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[hash & 0xF];
        hash >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

std::string sweep_parameter_name(SweepSpec::Parameter p) {
    switch (p) {
    case SweepSpec::Parameter::Eta: return "eta";
    case SweepSpec::Parameter::ThetaR: return "theta_r";
    case SweepSpec::Parameter::Horizon: return "horizon";
    case SweepSpec::Parameter::Sigma: return "sigma";
    case SweepSpec::Parameter::Rate: return "rate";
    }
    return "?";
}

std::string sweep_quantity_name(SweepSpec::Quantity q) {
    return q == SweepSpec::Quantity::UStar ? "u_star" : "w_star";
}

} // namespace reinopt
