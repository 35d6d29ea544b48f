#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "activecq/harness.hpp"

namespace activecq {

/// KernelSpec <-> config JSON (fields family, lengthscale, variance,
/// rq_alpha; omitted fields keep their defaults).
nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

// Canonical experiment description. Everything not given in the file is
// materialized from defaults and echoed back out, so a run directory always
// carries its exact effective configuration.
struct RunConfig {
    int spec_version = 1;
    TrialConfig trial;  // strategy field supplied per run from `strategies`
    std::vector<std::string> strategies = {"tvr_cme"};
    std::vector<std::uint64_t> seeds;  // default 1..20
};

/// Parse and validate; unknown keys raise SchemaError naming the key,
/// spec_version != 1 raises VersionError.
RunConfig parse_config(const std::string& path);

RunConfig parse_config_text(const std::string& text);

/// Effective config with every default filled in, serialized as JSON text.
std::string effective_config_text(const RunConfig& config);

}  // namespace activecq
