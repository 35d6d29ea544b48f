#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "activecq/dataset.hpp"
#include "activecq/estimators.hpp"
#include "activecq/rng.hpp"

namespace activecq {

enum class Generator { Visualization, Simulation, ShiftTarget, SemiSynthetic };

std::string to_string(Generator g);
Generator generator_from_string(const std::string& name);

struct GenSpec {
    Generator generator = Generator::Visualization;
    Eigen::Index n = 500;
    TreatmentMode treatment_mode = TreatmentMode::Continuous;
    std::uint64_t seed = 0;
    double noise_sd = 0.4;  // outcome noise standard deviation
};

/// z ~ U(-2,2); s1 skew-normal in z, s2 pure noise; treatment through the
/// probit-style squash; outcome a*z*s1 + 2z + s1 + noise.
Dataset gen_visualization(const GenSpec& spec);

/// z ~ U(-2,2) with four adjustment covariates; binary / continuous /
/// discrete treatments; outcome a*z + a*s1 + s2 + sin(s3) + noise
/// (variant "spec_v1", recorded in metadata).
Dataset gen_simulation(const GenSpec& spec);

/// Target-population adjustment samples (z, s1, s2, s3 columns) for the
/// distribution-shift quantity. No treatments or outcomes.
Dataset gen_shift_target(const GenSpec& spec);

/// Treatment grid used for interest sets and discrete rounding.
Eigen::VectorXd treatment_grid(TreatmentMode mode);

/// beta_j = 1/j^2, the treatment-assignment weights of both synthetic
/// mechanisms.
Eigen::VectorXd inverse_square_weights(Eigen::Index count);

/// Round to the 0.1-step grid.
double snap_to_grid(double a);

// Ingested covariates: columns keep file order; roles come from the header
// prefix (c_ continuous, b_ binary).
struct CovariateTable {
    std::vector<std::string> names;
    std::vector<bool> is_continuous;
    Eigen::MatrixXd values;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    Eigen::MatrixXd continuous_columns() const;
};

/// Outcomes (and treatments when not supplied) attached to real covariates.
/// Binary mode takes treatments from a b_treatment column when present;
/// otherwise every mode generates them from the probit-style rule. Weights
/// on the continuous columns decay as 1/j.
Dataset semisynthetic_outcomes(const CovariateTable& covariates, TreatmentMode mode,
                               std::uint64_t seed, double noise_sd = 0.4);

/// Noiseless outcome surfaces of the synthetic mechanisms, exposed for the
/// ground-truth oracle and its closed-form checks.
double visualization_outcome(double a, double z, double s1);
double simulation_outcome(double a, double z, double s1, double s2, double s3);

/// Brute-force ground truth: for each interest point, draws from the true
/// conditional / marginal mechanism and averages the noiseless outcome at
/// the queried treatment. ATT conditions by exact match (binary/discrete)
/// or a +-0.05 window (continuous); ATEDS draws from the shift target.
Eigen::VectorXd true_cq_oracle(const GenSpec& spec, const InterestSet& interest,
                               Eigen::Index mc_n, RandomStream& rng);

/// Semi-synthetic ground truth: the known outcome formula averaged over the
/// empirical covariates (the covariate distribution itself is unknown).
Eigen::VectorXd semisynthetic_cq_oracle(const CovariateTable& covariates, TreatmentMode mode,
                                        const InterestSet& interest);

/// Binary-mode positivity probe: true when both arms hold at least 5% of the
/// rows. Advisory only; callers log failures rather than stop.
bool check_positivity(const Dataset& data);

}  // namespace activecq
