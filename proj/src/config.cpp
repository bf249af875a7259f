#include "covband/config.hpp"

#include "covband/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

namespace covband {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

void only_fields(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        invalid(path, "expected an object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) {
            invalid(path + "." + item.key(), "unknown field");
        }
    }
}

const json& field(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        invalid(path + "." + key, "missing required field");
    }
    return *it;
}

double number(const json& obj, const std::string& path, const char* key) {
    const json& v = field(obj, path, key);
    if (!v.is_number()) {
        invalid(path + "." + key, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        invalid(path + "." + key, "expected a finite number");
    }
    return d;
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    return obj.contains(key) ? number(obj, path, key) : fallback;
}

std::uint64_t positive_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 1)) {
        invalid(path, "expected a positive integer");
    }
    const auto u = v.get<std::uint64_t>();
    if (u < 1) {
        invalid(path, "expected a positive integer");
    }
    return u;
}

CovariateDistribution parse_covariate(const json& obj, const std::string& path) {
    if (!obj.is_object()) {
        invalid(path, "expected an object");
    }
    const json& fam = field(obj, path, "family");
    if (!fam.is_string()) {
        invalid(path + ".family", "expected a string");
    }
    const std::string family = fam.get<std::string>();
    CovariateDistribution dist;
    if (family == "uniform") {
        only_fields(obj, path, {"family", "lo", "hi"});
        dist = Uniform{number(obj, path, "lo"), number(obj, path, "hi")};
    } else if (family == "two_point") {
        only_fields(obj, path, {"family", "x_minus", "x_plus", "prob_plus"});
        dist = TwoPoint{number(obj, path, "x_minus"), number(obj, path, "x_plus"),
                        number(obj, path, "prob_plus")};
    } else if (family == "power_margin") {
        only_fields(obj, path, {"family", "alpha", "center", "half_width"});
        dist = PowerMargin{number(obj, path, "alpha"), number(obj, path, "center"),
                           number(obj, path, "half_width")};
    } else if (family == "adversarial_margin") {
        only_fields(obj, path,
                    {"family", "alpha", "c_star", "x0", "delta", "atom_left", "atom_right"});
        AdversarialMargin d;
        d.alpha = number(obj, path, "alpha");
        d.c_star = number(obj, path, "c_star");
        d.x0 = number(obj, path, "x0");
        d.delta = number(obj, path, "delta");
        d.atom_left = number_or(obj, path, "atom_left", -(d.x0 + 1.0));
        d.atom_right = number_or(obj, path, "atom_right", d.delta + d.x0 + 1.0);
        dist = d;
    } else {
        invalid(path + ".family", "unknown covariate family '" + family + "'");
    }
    try {
        validate(dist);
    } catch (const InvalidArgument& e) {
        invalid(path, e.what());
    }
    return dist;
}

PolicySpec parse_policy(const json& v, const std::string& path, const BanditInstance& instance,
                        std::uint64_t horizon) {
    std::string type;
    const json empty = json::object();
    const json* obj = &empty;
    if (v.is_string()) {
        type = v.get<std::string>();
    } else if (v.is_object()) {
        const json& t = field(v, path, "type");
        if (!t.is_string()) {
            invalid(path + ".type", "expected a string");
        }
        type = t.get<std::string>();
        obj = &v;
    } else {
        invalid(path, "expected a policy name or object");
    }

    if (type == "oracle") {
        only_fields(*obj, path, {"type"});
        return OraclePolicy{instance.theta};
    }
    if (type == "myopic") {
        only_fields(*obj, path, {"type"});
        return MyopicPolicy{};
    }
    if (type == "nearly_myopic") {
        only_fields(*obj, path, {"type", "c"});
        if (obj->contains("c") && (*obj)["c"].is_string()) {
            if ((*obj)["c"].get<std::string>() != "theory") {
                invalid(path + ".c", "expected a number or \"theory\"");
            }
            return theory_nearly_myopic(instance.sigma);
        }
        const double c = number_or(*obj, path, "c", 1.0);
        if (!(c >= 0.0)) {
            invalid(path + ".c", "must be nonnegative");
        }
        return NearlyMyopicPolicy{c, instance.sigma};
    }
    if (type == "forced") {
        only_fields(*obj, path, {"type", "q"});
        const double q = number(*obj, path, "q");
        if (!(q > 0.0)) {
            invalid(path + ".q", "must be positive");
        }
        return ForcedSamplingPolicy{build_schedule(q, horizon)};
    }
    invalid(path, "unknown policy '" + type + "'");
}

json covariate_json(const CovariateDistribution& dist) {
    return std::visit(
        overloaded{
            [](const Uniform& d) { return json{{"family", "uniform"}, {"lo", d.lo}, {"hi", d.hi}}; },
            [](const TwoPoint& d) {
                return json{{"family", "two_point"},
                            {"x_minus", d.x_minus},
                            {"x_plus", d.x_plus},
                            {"prob_plus", d.prob_plus}};
            },
            [](const PowerMargin& d) {
                return json{{"family", "power_margin"},
                            {"alpha", d.alpha},
                            {"center", d.center},
                            {"half_width", d.half_width}};
            },
            [](const AdversarialMargin& d) {
                return json{{"family", "adversarial_margin"},
                            {"alpha", d.alpha},
                            {"c_star", d.c_star},
                            {"x0", d.x0},
                            {"delta", d.delta},
                            {"atom_left", d.atom_left},
                            {"atom_right", d.atom_right}};
            },
        },
        dist);
}

json policy_json(const PolicySpec& spec) {
    return std::visit(overloaded{
                          [](const OraclePolicy&) { return json{{"type", "oracle"}}; },
                          [](const MyopicPolicy&) { return json{{"type", "myopic"}}; },
                          [](const NearlyMyopicPolicy& p) {
                              return json{{"type", "nearly_myopic"}, {"c", p.c}};
                          },
                          [](const ForcedSamplingPolicy& p) {
                              return json{{"type", "forced"}, {"q", p.schedule.q()}};
                          },
                      },
                      spec);
}

} // namespace

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("config: malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }

    only_fields(doc, "config",
                {"instance", "policies", "horizons", "replications", "seed", "record_trajectories"});

    ExperimentConfig cfg;
    const json& inst = field(doc, "config", "instance");
    only_fields(inst, "config.instance", {"theta", "sigma", "covariate"});
    cfg.instance.theta = number(inst, "config.instance", "theta");
    cfg.instance.sigma = number(inst, "config.instance", "sigma");
    if (!(cfg.instance.sigma > 0.0)) {
        invalid("config.instance.sigma", "must be positive");
    }
    cfg.instance.covariate =
        parse_covariate(field(inst, "config.instance", "covariate"), "config.instance.covariate");

    const json& hs = field(doc, "config", "horizons");
    if (!hs.is_array() || hs.empty()) {
        invalid("config.horizons", "horizons must be a nonempty array");
    }
    for (std::size_t i = 0; i < hs.size(); ++i) {
        cfg.horizons.push_back(positive_integer(hs[i], "config.horizons[" + std::to_string(i) + "]"));
    }
    for (std::size_t i = 1; i < cfg.horizons.size(); ++i) {
        if (cfg.horizons[i] <= cfg.horizons[i - 1]) {
            throw ValidationError("horizons must be strictly increasing");
        }
    }

    cfg.replications = positive_integer(field(doc, "config", "replications"), "config.replications");

    const json& seed = field(doc, "config", "seed");
    if (!seed.is_number_unsigned()) {
        invalid("config.seed", "expected a nonnegative 64-bit integer");
    }
    cfg.master_seed = seed.get<std::uint64_t>();

    if (doc.contains("record_trajectories")) {
        if (!doc["record_trajectories"].is_boolean()) {
            invalid("config.record_trajectories", "expected a boolean");
        }
        cfg.record_trajectories = doc["record_trajectories"].get<bool>();
    }

    const json& ps = field(doc, "config", "policies");
    if (!ps.is_array() || ps.empty()) {
        invalid("config.policies", "policies must be a nonempty array");
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
        cfg.policies.push_back(parse_policy(ps[i], "config.policies[" + std::to_string(i) + "]",
                                            cfg.instance, cfg.horizons.back()));
    }

    validate(cfg);
    return cfg;
}

std::string canonical_config(const ExperimentConfig& config) {
    json policies = json::array();
    for (const auto& spec : config.policies) {
        policies.push_back(policy_json(spec));
    }
    json doc{{"instance",
              {{"theta", config.instance.theta},
               {"sigma", config.instance.sigma},
               {"covariate", covariate_json(config.instance.covariate)}}},
             {"policies", policies},
             {"horizons", config.horizons},
             {"replications", config.replications},
             {"seed", config.master_seed},
             {"record_trajectories", config.record_trajectories}};
    return doc.dump();
}

std::string config_digest(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config(config)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_json(const RunManifest& manifest) {
    json doc{{"config_digest", manifest.config_digest},
             {"tool_version", manifest.tool_version},
             {"master_seed", manifest.master_seed},
             {"outputs", manifest.outputs},
             {"wall_time", manifest.wall_time}};
    return doc.dump(2) + "\n";
}

ExperimentConfig reference_setup(std::string_view which, std::uint64_t replications, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.instance.theta = 0.0;
    cfg.instance.sigma = 1.0;
    if (which == "i") {
        cfg.instance.covariate = Uniform{-1.0, 1.0};
    } else if (which == "ii") {
        cfg.instance.covariate = TwoPoint{-1.0, 1.0, 0.5};
    } else {
        throw InvalidArgument("reference_setup: unknown setup");
    }
    cfg.horizons = {250, 500, 750, 1000, 2000, 2500, 3000, 4000, 5000};
    cfg.replications = replications;
    cfg.master_seed = seed;
    cfg.policies = {MyopicPolicy{}, NearlyMyopicPolicy{1.0, cfg.instance.sigma},
                    ForcedSamplingPolicy{build_schedule(1.0 / 12.0, cfg.horizons.back())}};
    return cfg;
}

} // namespace covband
