#include "activecq/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "activecq/errors.hpp"

namespace activecq {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& scope) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw SchemaError(scope.empty() ? key : scope + "." + key);
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback, const char* expected) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(key + ": expected " + expected);
    }
}

}  // namespace

nlohmann::json kernel_spec_to_json(const KernelSpec& spec) {
    return json{{"family", to_string(spec.family)},
                {"lengthscale", spec.lengthscale},
                {"variance", spec.variance},
                {"rq_alpha", spec.rq_alpha}};
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("kernel: expected object");
    reject_unknown(j, {"family", "lengthscale", "variance", "rq_alpha"}, "kernel");
    KernelSpec spec;
    spec.family = kernel_family_from_string(get_or<std::string>(j, "family", "rbf", "string"));
    spec.lengthscale = get_or<double>(j, "lengthscale", 1.0, "number");
    spec.variance = get_or<double>(j, "variance", 1.0, "number");
    spec.rq_alpha = get_or<double>(j, "rq_alpha", 1.0, "number");
    return spec;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("config root must be an object");

    // rng_version appears in echoed configs; accepted and ignored on input.
    reject_unknown(doc,
                   {"spec_version", "cq_kind", "generator", "treatment_mode", "strategies",
                    "warm_start", "batch_size", "budget", "pool_size", "interest", "mc", "gp",
                    "cme", "seeds", "n_seeds", "noise_sd", "target_samples", "covariates_csv",
                    "record_wall_time", "softmax_temperature", "rng_version"},
                   "");

    RunConfig config;
    config.spec_version = get_or<int>(doc, "spec_version", 1, "integer");
    if (config.spec_version != 1)
        throw VersionError("spec_version " + std::to_string(config.spec_version) +
                           " unsupported (expected 1)");

    TrialConfig& t = config.trial;
    t.cq_kind = cq_kind_from_string(get_or<std::string>(doc, "cq_kind", "cate", "string"));
    t.generator =
        generator_from_string(get_or<std::string>(doc, "generator", "visualization", "string"));
    t.treatment_mode = treatment_mode_from_string(
        get_or<std::string>(doc, "treatment_mode", "continuous", "string"));
    t.warm_start = get_or<int>(doc, "warm_start", 20, "integer");
    t.batch_size = get_or<int>(doc, "batch_size", 5, "integer");
    t.budget = get_or<int>(doc, "budget", 100, "integer");
    t.pool_size = get_or<int>(doc, "pool_size", 480, "integer");
    t.noise_sd = get_or<double>(doc, "noise_sd", 0.4, "number");
    t.target_samples = get_or<int>(doc, "target_samples", 500, "integer");
    t.covariates_csv = get_or<std::string>(doc, "covariates_csv", "", "string");
    t.record_wall_time = get_or<bool>(doc, "record_wall_time", false, "boolean");
    t.softmax_temperature = get_or<double>(doc, "softmax_temperature", 0.0, "number");

    if (doc.contains("interest")) {
        const json& sub = doc.at("interest");
        if (!sub.is_object()) throw SchemaError("interest: expected object");
        reject_unknown(sub, {"treatments", "conditioning", "count"}, "interest");
        const std::string treatments =
            get_or<std::string>(sub, "treatments", "all", "string");
        if (treatments == "all") t.all_treatments = true;
        else if (treatments == "fixed") t.all_treatments = false;
        else throw SchemaError("interest.treatments: expected all or fixed");
        const std::string conditioning =
            get_or<std::string>(sub, "conditioning", "fixed", "string");
        if (conditioning == "fixed") t.fixed_conditioning = true;
        else if (conditioning == "random") t.fixed_conditioning = false;
        else throw SchemaError("interest.conditioning: expected fixed or random");
        t.n_interest = get_or<int>(sub, "count", 10, "integer");
    }

    if (doc.contains("mc")) {
        const json& sub = doc.at("mc");
        if (!sub.is_object()) throw SchemaError("mc: expected object");
        reject_unknown(sub, {"samples", "oracle_draws"}, "mc");
        t.mc_samples = get_or<int>(sub, "samples", 200, "integer");
        t.oracle_draws = get_or<int>(sub, "oracle_draws", 100000, "integer");
    }

    if (doc.contains("gp")) {
        const json& sub = doc.at("gp");
        if (!sub.is_object()) throw SchemaError("gp: expected object");
        reject_unknown(sub,
                       {"kernel_family", "kernel", "opt_iterations", "refit_iterations", "step",
                        "freeze_hyperparameters"},
                       "gp");
        t.kernel_family = get_or<std::string>(sub, "kernel_family", "rbf", "string");
        if (sub.contains("kernel")) t.gp_kernel = kernel_spec_from_json(sub.at("kernel"));
        t.gp_opt_iterations = get_or<int>(sub, "opt_iterations", 500, "integer");
        t.gp_refit_iterations = get_or<int>(sub, "refit_iterations", 100, "integer");
        t.gp_step = get_or<double>(sub, "step", 0.05, "number");
        t.freeze_hyperparameters = get_or<bool>(sub, "freeze_hyperparameters", false, "boolean");
    }

    if (doc.contains("cme")) {
        const json& sub = doc.at("cme");
        if (!sub.is_object()) throw SchemaError("cme: expected object");
        reject_unknown(sub, {"lambda", "scale_lambda_by_n"}, "cme");
        t.cme_lambda = get_or<double>(sub, "lambda", 0.01, "number");
        t.scale_lambda_by_n = get_or<bool>(sub, "scale_lambda_by_n", true, "boolean");
    }

    if (doc.contains("strategies")) {
        try {
            config.strategies = doc.at("strategies").get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw SchemaError("strategies: expected array of strings");
        }
        if (config.strategies.empty()) throw SchemaError("strategies: empty");
    }

    if (doc.contains("seeds") && doc.contains("n_seeds"))
        throw SchemaError("seeds: give either seeds or n_seeds, not both");
    if (doc.contains("seeds")) {
        try {
            config.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        } catch (const json::exception&) {
            throw SchemaError("seeds: expected array of integers");
        }
        if (config.seeds.empty()) throw SchemaError("seeds: empty");
    } else {
        const int n_seeds = get_or<int>(doc, "n_seeds", 20, "integer");
        if (n_seeds < 1) throw SchemaError("n_seeds");
        for (int i = 1; i <= n_seeds; ++i) config.seeds.push_back(static_cast<std::uint64_t>(i));
    }

    // Full validation of every strategy plus the trial invariants.
    for (const auto& name : config.strategies) {
        TrialConfig probe = t;
        probe.strategy = name;
        probe.validate();
    }
    return config;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string effective_config_text(const RunConfig& config) {
    const TrialConfig& t = config.trial;
    json doc{
        {"spec_version", config.spec_version},
        {"cq_kind", to_string(t.cq_kind)},
        {"generator", to_string(t.generator)},
        {"treatment_mode", to_string(t.treatment_mode)},
        {"strategies", config.strategies},
        {"warm_start", t.warm_start},
        {"batch_size", t.batch_size},
        {"budget", t.budget},
        {"pool_size", t.pool_size},
        {"interest",
         {{"treatments", t.all_treatments ? "all" : "fixed"},
          {"conditioning", t.fixed_conditioning ? "fixed" : "random"},
          {"count", t.n_interest}}},
        {"mc", {{"samples", t.mc_samples}, {"oracle_draws", t.oracle_draws}}},
        {"gp",
         {{"kernel_family", t.kernel_family},
          {"opt_iterations", t.gp_opt_iterations},
          {"refit_iterations", t.gp_refit_iterations},
          {"step", t.gp_step},
          {"freeze_hyperparameters", t.freeze_hyperparameters}}},
        {"cme", {{"lambda", t.cme_lambda}, {"scale_lambda_by_n", t.scale_lambda_by_n}}},
        {"seeds", config.seeds},
        {"noise_sd", t.noise_sd},
        {"target_samples", t.target_samples},
        {"covariates_csv", t.covariates_csv},
        {"record_wall_time", t.record_wall_time},
        {"softmax_temperature", t.softmax_temperature},
        {"rng_version", std::string(RandomStream::kVersion)},
    };
    // Only present when configured: the data-driven kernel initialization has
    // no static value to echo.
    if (t.gp_kernel) doc["gp"]["kernel"] = kernel_spec_to_json(*t.gp_kernel);
    return doc.dump(2) + "\n";
}

}  // namespace activecq
