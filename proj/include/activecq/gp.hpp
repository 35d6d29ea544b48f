#pragma once

#include <Eigen/Core>

#include "activecq/dataset.hpp"
#include "activecq/kernels.hpp"
#include "activecq/numerics.hpp"

namespace activecq {

// The noise variance doubles as the ridge regularizer of every estimator
// built on this model; there is no separate lambda_f.
struct GpModel {
    ProductKernelSpec kernel;
    double noise_variance = 0.1;
};

// Fitted outcome model. The factor is of K + sigma^2 I (plus the recorded
// jitter) and alpha solves (K + sigma^2 I) alpha = y. Immutable after fit.
struct GpPosterior {
    GpModel model;
    Dataset train;
    PsdFactor factor;
    Eigen::VectorXd alpha;

    Eigen::Index train_size() const { return train.rows(); }
};

struct GpPrediction {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // empty unless requested
    Eigen::VectorXd variance;    // latent (noise-free) marginal variances
};

GpPosterior fit(const GpModel& model, const Dataset& train);

GpPrediction predict(const GpPosterior& posterior, const Dataset& query,
                     bool with_covariance = false);

double marginal_log_likelihood(const GpModel& model, const Dataset& train);

/// Gradient ascent on log lengthscales, log output scale and log noise,
/// fixed step, best-seen model returned. Iterations 0 is the identity.
GpModel optimize_hyperparameters(const GpModel& model, const Dataset& train, int iterations = 500,
                                 double step = 0.05);

/// Analytic MLL gradient in the optimizer's parameter order (log adjustment
/// lengthscale, log output scale, log noise, then log treatment /
/// conditioning lengthscales when those blocks are non-Delta). Exposed for
/// verification against finite differences.
Eigen::VectorXd marginal_log_likelihood_gradient(const GpModel& model, const Dataset& train);

/// Names matching marginal_log_likelihood_gradient's coordinates.
std::vector<std::string> hyperparameter_names(const GpModel& model);

/// Model with the parameter vector applied (same order as the gradient).
GpModel with_hyperparameters(const GpModel& model, const Eigen::VectorXd& log_params);

/// Current parameter vector of a model.
Eigen::VectorXd hyperparameters(const GpModel& model);

}  // namespace activecq
