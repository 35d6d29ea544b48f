#pragma once

#include <string>

#include "activecq/datagen.hpp"
#include "activecq/dataset.hpp"

namespace activecq {

/// Full-precision text for a double (round-trips exactly).
std::string format_double(double v);

/// Atomic write: temp file in the destination directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

/// Columns a, z_1..z_dz, s_1..s_ds, y (present blocks only), plus a JSON
/// metadata sidecar at <path>.meta.json.
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Inverse of write_dataset_csv; reads the sidecar when present.
Dataset read_dataset_csv(const std::string& path);

/// Header prefixes assign roles: c_ continuous, b_ binary. Parse failures
/// name the offending row and column.
CovariateTable load_covariates_csv(const std::string& path);

}  // namespace activecq
