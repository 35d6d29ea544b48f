#pragma once

#include <memory>

#include <Eigen/Core>

#include "activecq/kernels.hpp"
#include "activecq/numerics.hpp"

namespace activecq {

enum class EmbeddingKind { Conditional, MarginalUniform, ShiftedUniform };

// Weight vector over anchor adjustment points, standing in for a mean
// embedding sum_i w_i phi(s_i). Anchors are shared, not copied, because many
// weight vectors typically point at the same anchor matrix.
struct EmbeddingWeights {
    std::shared_ptr<const Eigen::MatrixXd> anchors;
    Eigen::VectorXd weights;
    EmbeddingKind kind = EmbeddingKind::Conditional;
};

// Ridge operator for conditional embeddings: caches the factor of
// K_cc + lambda' I over the conditioning anchors, where lambda' is
// n * lambda when scale_lambda_by_n is set (the default) and lambda itself
// otherwise.
struct CmeOperatorFit {
    std::shared_ptr<const Eigen::MatrixXd> anchor_conditioning;
    std::shared_ptr<const Eigen::MatrixXd> anchor_adjustment;
    KernelSpec conditioning_kernel;
    double lambda = 0.01;
    double effective_lambda = 0.01;
    bool scaled_by_n = true;
    PsdFactor factor;
};

CmeOperatorFit fit_cme(const Eigen::MatrixXd& conditioning, const Eigen::MatrixXd& adjustment,
                       const KernelSpec& conditioning_kernel, double lambda,
                       bool scale_lambda_by_n = true);

/// w(z) = (K_cc + lambda' I)^-1 k_cz over the fit's anchors.
EmbeddingWeights cme_weights(const CmeOperatorFit& fit, const Eigen::VectorXd& query);

/// Exact 1/n weights over the given anchors.
EmbeddingWeights uniform_weights(std::shared_ptr<const Eigen::MatrixXd> anchors,
                                 EmbeddingKind kind = EmbeddingKind::MarginalUniform);

/// Anchor-free variant used where only the weight values matter.
Eigen::VectorXd uniform_weights(Eigen::Index n);

/// <mu_w, mu_w2> = w' K_{S S2} w2 under the given adjustment kernel.
double embedding_inner(const EmbeddingWeights& w, const EmbeddingWeights& w2,
                       const KernelSpec& adjustment_kernel);

/// Row vector w' K_{S P} against arbitrary points P, one entry per row of
/// `points`. This is the embedding side of every effective cross-kernel.
Eigen::VectorXd embedding_cross(const EmbeddingWeights& w, const KernelSpec& adjustment_kernel,
                                const Eigen::MatrixXd& points);

}  // namespace activecq
