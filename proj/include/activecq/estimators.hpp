#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "activecq/embeddings.hpp"
#include "activecq/gp.hpp"
#include "activecq/rng.hpp"

namespace activecq {

enum class CqKind { Cate, Ate, Att, Ateds };

std::string to_string(CqKind kind);
CqKind cq_kind_from_string(const std::string& name);

// Points the causal quantity is evaluated at. CATE carries (a, z) pairs,
// ATT carries (a, a-tilde) pairs, ATE / ATEDS carry treatments alone.
struct InterestSet {
    CqKind kind = CqKind::Cate;
    Eigen::VectorXd a;
    Eigen::MatrixXd z;        // CATE only
    Eigen::VectorXd a_tilde;  // ATT only

    Eigen::Index size() const { return a.size(); }
    void validate() const;
};

enum class CqSource { CmeClosedForm, McSampling };

// Posterior of the causal quantity over an interest set, together with the
// cached effective cross-kernel against the training rows and the per-point
// embedding weights needed for pool cross-covariances later on.
struct CqPosterior {
    Eigen::VectorXd nu;
    Eigen::MatrixXd q;
    CqSource source = CqSource::CmeClosedForm;

    InterestSet interest;
    std::vector<EmbeddingWeights> weights;  // one per interest point
    Eigen::MatrixXd cross_train;            // n_I x n_T prior effective cross kernel
};

// Embedding inputs for the closed form: a ridge operator for the conditional
// kinds (CATE conditions on z, ATT on the prior treatment) or plain anchors
// for the marginal kinds (ATE over the pooled adjustment rows, ATEDS over
// target-population samples).
struct EmbeddingContext {
    std::optional<CmeOperatorFit> cme;
    std::shared_ptr<const Eigen::MatrixXd> anchors;
    EmbeddingKind marginal_kind = EmbeddingKind::MarginalUniform;
};

/// Context constructed from the full dataset (train plus pool): CATE fits the
/// CME on (z, s), ATT on (a, s); ATE takes uniform anchors from the data and
/// ATEDS from `target` (adjustment-only samples).
EmbeddingContext build_embedding_context(CqKind kind, const Dataset& all_rows,
                                         const KernelSpec& conditioning_kernel, double lambda,
                                         bool scale_lambda_by_n,
                                         const Dataset* target = nullptr);

/// One weight vector per interest point under the given context.
std::vector<EmbeddingWeights> interest_weights(const EmbeddingContext& context,
                                               const InterestSet& interest);

/// Closed-form posterior: effective kernels compose the treatment block,
/// the conditioning block (CATE only) and the embedded adjustment block.
CqPosterior cq_posterior_cme(const GpPosterior& gp, const InterestSet& interest,
                             const EmbeddingContext& context);

/// Core assembly from explicit per-point weights; cq_posterior_cme delegates
/// here and tests use it for degenerate embeddings.
CqPosterior cq_posterior_from_weights(const GpPosterior& gp, const InterestSet& interest,
                                      std::vector<EmbeddingWeights> weights, CqSource source);

// Kernel-weighted conditional resampler: draws an anchor index with
// probability proportional to the conditioning kernel at the query, then
// smooths the anchor's adjustment row with N(0, smoothing^2 I).
struct ConditionalSampler {
    std::shared_ptr<const Eigen::MatrixXd> conditioning;  // null for marginal samplers
    std::shared_ptr<const Eigen::MatrixXd> adjustment;
    double bandwidth = 1.0;
    double smoothing = 0.0;

    Eigen::VectorXd sample(const Eigen::VectorXd& query, RandomStream& rng) const;
    Eigen::MatrixXd sample_many(const Eigen::VectorXd& query, Eigen::Index count,
                                RandomStream& rng) const;
};

ConditionalSampler fit_conditional_sampler(const Eigen::MatrixXd& conditioning,
                                           const Eigen::MatrixXd& adjustment, double bandwidth);

/// Uniform resampler over the rows of `adjustment` (marginal kinds).
ConditionalSampler marginal_sampler(const Eigen::MatrixXd& adjustment);

/// Sampling-based posterior: n_s adjustment draws per interest point, means
/// averaged and the covariance double-averaged over paired sample sets.
CqPosterior cq_posterior_mc(const GpPosterior& gp, const InterestSet& interest,
                            const ConditionalSampler& sampler, Eigen::Index n_s,
                            RandomStream& rng);

/// Cov(tau_hat, f(pool_row)) for every interest point: the effective prior
/// cross term minus the usual conditioning correction.
Eigen::VectorXd cross_covariance_with_pool(const GpPosterior& gp, const CqPosterior& cq,
                                           const Dataset& pool_row);

/// Batched variant over a whole pool: n_I x n_pool.
Eigen::MatrixXd cross_covariance_with_pool_batch(const GpPosterior& gp, const CqPosterior& cq,
                                                 const Dataset& pool);

}  // namespace activecq
