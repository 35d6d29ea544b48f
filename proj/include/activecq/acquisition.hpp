#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "activecq/estimators.hpp"

namespace activecq {

enum class UtilityKind { InformationGain, TotalVarianceReduction };
enum class SelectionRule { TopB, Greedy, Softmax };

struct UtilitySpec {
    UtilityKind kind = UtilityKind::TotalVarianceReduction;
    SelectionRule selection = SelectionRule::TopB;
    int batch_size = 1;
    double softmax_temperature = 0.0;  // <= 0 picks (max - median) of the round's scores
};

// Interest-set covariance conditioned on the fantasy observations applied so
// far. Downdates are pure rank-1 Gaussian conditioning, so the state always
// matches a full refit on the augmented training set.
struct FantasyState {
    Eigen::MatrixXd q;
    int conditioned = 0;
};

/// Q <- Q - c c' / (v + sigma^2).
FantasyState fantasy_downdate(const FantasyState& state, const Eigen::VectorXd& cross,
                              double candidate_latent_variance, double noise_variance);

/// IG: -logdet(Q + 1e-8 I); TVR: -trace(Q). Larger is better.
double utility(const UtilitySpec& spec, const FantasyState& state);

// Everything pool-candidate scoring needs, derived once per round:
// cross-covariances between the estimator and each candidate's latent value,
// candidate latent variances, and (for greedy conditioning) the full latent
// pool posterior covariance.
struct PoolContext {
    Eigen::MatrixXd cross;     // n_I x n_pool
    Eigen::VectorXd pool_var;  // latent predictive variances
    Eigen::MatrixXd pool_cov;  // n_pool x n_pool, empty unless requested
    double noise_variance = 0.0;
};

PoolContext build_pool_context(const GpPosterior& gp, const CqPosterior& cq, const Dataset& pool,
                               bool with_pool_cov);

/// Batch of pool indices under the spec's utility and selection rule.
/// Deterministic given the stream; ties break to the lowest index.
std::vector<Eigen::Index> select_batch(const UtilitySpec& spec, const GpPosterior& gp,
                                       const CqPosterior& cq, const Dataset& pool,
                                       RandomStream& rng);

/// Same selection against a prebuilt context (pool_variance reuses this with
/// the pool standing in as its own interest set).
std::vector<Eigen::Index> select_batch(const UtilitySpec& spec, const FantasyState& base,
                                       PoolContext context, RandomStream& rng);

enum class BaselineKind { Random, PoolVariance, MuBald, Coreset };

struct BaselineResult {
    Eigen::VectorXd scores;             // per-candidate; empty for direct strategies
    std::vector<Eigen::Index> indices;  // filled by Random and Coreset
};

/// Scores (PoolVariance, MuBald) or direct index lists (Random, Coreset).
BaselineResult baseline_scores(BaselineKind kind, const GpPosterior& gp, const Dataset& pool,
                               int batch_size, RandomStream& rng);

/// Top-b / softmax selection over raw scores, lowest-index tie break.
std::vector<Eigen::Index> pick_from_scores(const Eigen::VectorXd& scores, int batch_size,
                                           SelectionRule rule, double temperature,
                                           RandomStream& rng);

}  // namespace activecq
