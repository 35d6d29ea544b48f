#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace activecq {

enum class TreatmentMode { Binary, Discrete, Continuous };

std::string to_string(TreatmentMode mode);
TreatmentMode treatment_mode_from_string(const std::string& name);

struct DatasetMeta {
    std::string generator;
    std::uint64_t seed = 0;
    TreatmentMode treatment_mode = TreatmentMode::Continuous;
    double noise_sd = 0.0;
    std::string rng_version;
    std::string outcome_variant;  // set where the outcome form is a project choice
};

// Columnar record of treatment a, conditioning covariates z, adjustment
// covariates s, and optional outcomes y. Absent blocks have zero size.
struct Dataset {
    Eigen::VectorXd a;  // size 0 when absent
    Eigen::MatrixXd z;  // n x d_z, 0 cols when absent
    Eigen::MatrixXd s;  // n x d_s
    Eigen::VectorXd y;  // size 0 when unlabeled
    DatasetMeta meta;

    Eigen::Index rows() const;
    bool has_treatment() const { return a.size() > 0; }
    bool has_conditioning() const { return z.cols() > 0; }
    bool has_adjustment() const { return s.cols() > 0; }
    bool has_outcomes() const { return y.size() > 0; }

    /// Rows at the given indices, order preserved.
    Dataset select(const std::vector<Eigen::Index>& indices) const;
    /// Single row (as a 1-row dataset).
    Dataset row(Eigen::Index i) const;
    /// Append rows of another dataset with the same block layout.
    void append(const Dataset& other);

    /// Consistency check: all present blocks share the row count.
    void validate() const;
};

/// Move the conditioning block into the adjustment block (z columns first)
/// for the causal quantities that treat z as part of s. `keep_s_cols` < 0
/// keeps every adjustment column.
Dataset fold_conditioning_into_adjustment(const Dataset& data, Eigen::Index keep_s_cols = -1);

}  // namespace activecq
