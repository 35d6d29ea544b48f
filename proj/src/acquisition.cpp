#include "activecq/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "activecq/errors.hpp"

namespace activecq {

namespace {

constexpr double kIgJitter = 1e-8;
constexpr double kVarianceFloor = 1e-12;

// Identical candidates can differ by an ulp after blocked matrix products.
// Snapping scores to 44 mantissa bits makes such near-ties exact so the
// lowest-index rule decides them deterministically.
double snap_score(double g) {
    if (!std::isfinite(g)) return g;
    int exponent = 0;
    const double mantissa = std::frexp(g, &exponent);
    return std::ldexp(std::round(std::ldexp(mantissa, 44)), exponent - 44);
}

// Sorts candidate keys descending with lowest-index tie break and returns the
// first `count` indices.
std::vector<Eigen::Index> top_indices(const Eigen::VectorXd& keys, int count) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(keys.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (keys[a] != keys[b]) return keys[a] > keys[b];
        return a < b;
    });
    order.resize(static_cast<std::size_t>(count));
    return order;
}

}  // namespace

FantasyState fantasy_downdate(const FantasyState& state, const Eigen::VectorXd& cross,
                              double candidate_latent_variance, double noise_variance) {
    const double denom = candidate_latent_variance + noise_variance;
    if (!(denom > kVarianceFloor))
        throw NegativeVarianceError("fantasy_downdate: conditioning variance " +
                                    std::to_string(denom));
    if (cross.size() != state.q.rows())
        throw DimensionMismatchError("fantasy_downdate: cross vector size");
    FantasyState next;
    next.q = state.q - (cross * cross.transpose()) / denom;
    next.q = ((next.q + next.q.transpose()) / 2.0).eval();
    next.conditioned = state.conditioned + 1;
    return next;
}

double utility(const UtilitySpec& spec, const FantasyState& state) {
    if (spec.kind == UtilityKind::TotalVarianceReduction) return -state.q.trace();
    try {
        return -psd_logdet(jittered_cholesky(state.q, kIgJitter));
    } catch (const Error& e) {
        throw FactorizationFailureError(std::string("ig utility: ") + e.what());
    }
}

PoolContext build_pool_context(const GpPosterior& gp, const CqPosterior& cq, const Dataset& pool,
                               bool with_pool_cov) {
    PoolContext ctx;
    // A refit sees the fit jitter on every diagonal entry, so conditioning
    // uses the same effective noise to keep fantasy states refit-exact.
    ctx.noise_variance = gp.model.noise_variance + gp.factor.jitter_used;
    ctx.cross = cross_covariance_with_pool_batch(gp, cq, pool);
    const Eigen::MatrixXd pool_train = product_gram(gp.model.kernel, pool, gp.train);
    const Eigen::MatrixXd solved = psd_solve(gp.factor, pool_train.transpose());
    if (with_pool_cov) {
        ctx.pool_cov = product_gram(gp.model.kernel, pool) - pool_train * solved;
        ctx.pool_cov = ((ctx.pool_cov + ctx.pool_cov.transpose()) / 2.0).eval();
        ctx.pool_var = ctx.pool_cov.diagonal();
    } else {
        const auto& k = gp.model.kernel;
        const double prior_diag = k.treatment.variance *
                                  (k.conditioning ? k.conditioning->variance : 1.0) *
                                  k.adjustment.variance;
        ctx.pool_var =
            prior_diag - (pool_train.array() * solved.transpose().array()).rowwise().sum();
    }
    ctx.pool_var = ctx.pool_var.cwiseMax(0.0);
    return ctx;
}

namespace {

// Marginal utility gain of observing one candidate against the current state.
// TVR gains are the trace decrease; IG gains come from the determinant lemma
// on the identically jittered covariance, so they equal utility differences
// exactly.
struct GainScorer {
    UtilityKind kind;
    double noise_variance;
    Eigen::LLT<Eigen::MatrixXd> jittered;  // factor of Q + 1e-8 I (IG only)

    void refresh(const Eigen::MatrixXd& q) {
        if (kind != UtilityKind::InformationGain) return;
        Eigen::MatrixXd qj = q;
        qj.diagonal().array() += kIgJitter;
        jittered.compute(qj);
        if (jittered.info() != Eigen::Success)
            throw FactorizationFailureError("ig scoring: covariance not factorizable");
    }

    double gain(const Eigen::VectorXd& cross, double latent_var) const {
        const double denom = std::max(latent_var, 0.0) + noise_variance;
        if (!(denom > kVarianceFloor)) return 0.0;
        if (kind == UtilityKind::TotalVarianceReduction)
            return snap_score(cross.squaredNorm() / denom);
        const double quad = cross.dot(jittered.solve(cross));
        return snap_score(-std::log(std::max(1.0 - quad / denom, 1e-300)));
    }
};

}  // namespace

std::vector<Eigen::Index> pick_from_scores(const Eigen::VectorXd& scores, int batch_size,
                                           SelectionRule rule, double temperature,
                                           RandomStream& rng) {
    const Eigen::Index n = scores.size();
    if (batch_size < 1 || batch_size > n)
        throw PoolExhaustedError("selection: batch size " + std::to_string(batch_size) +
                                 " vs pool " + std::to_string(n));
    if (rule == SelectionRule::Softmax) {
        double t = temperature;
        if (!(t > 0.0)) {
            std::vector<double> sorted(scores.data(), scores.data() + n);
            std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
            t = std::max(scores.maxCoeff() - sorted[static_cast<std::size_t>(n / 2)], 1e-6);
        }
        // Gumbel top-k draws k indices without replacement with probability
        // proportional to exp(score / t).
        Eigen::VectorXd keys(n);
        for (Eigen::Index i = 0; i < n; ++i)
            keys[i] = scores[i] / t - std::log(-std::log(std::max(rng.uniform(), 1e-300)));
        return top_indices(keys, batch_size);
    }
    Eigen::VectorXd snapped(n);
    for (Eigen::Index i = 0; i < n; ++i) snapped[i] = snap_score(scores[i]);
    return top_indices(snapped, batch_size);
}

std::vector<Eigen::Index> select_batch(const UtilitySpec& spec, const FantasyState& base,
                                       PoolContext context, RandomStream& rng) {
    const Eigen::Index n_pool = context.cross.cols();
    if (n_pool == 0) throw PoolExhaustedError("select_batch: empty pool");
    if (spec.batch_size < 1 || spec.batch_size > n_pool)
        throw PoolExhaustedError("select_batch: batch size exceeds pool");

    GainScorer scorer{spec.kind, context.noise_variance, {}};
    scorer.refresh(base.q);

    if (spec.selection != SelectionRule::Greedy) {
        Eigen::VectorXd scores(n_pool);
        for (Eigen::Index u = 0; u < n_pool; ++u)
            scores[u] = scorer.gain(context.cross.col(u), context.pool_var[u]);
        return pick_from_scores(scores, spec.batch_size, spec.selection,
                                spec.softmax_temperature, rng);
    }

    if (context.pool_cov.rows() != n_pool)
        throw MissingContextError("greedy selection needs the pool covariance");

    std::vector<Eigen::Index> chosen;
    std::vector<bool> used(static_cast<std::size_t>(n_pool), false);
    FantasyState state = base;
    for (int step = 0; step < spec.batch_size; ++step) {
        scorer.refresh(state.q);
        double best = -std::numeric_limits<double>::infinity();
        Eigen::Index pick = -1;
        for (Eigen::Index u = 0; u < n_pool; ++u) {
            if (used[static_cast<std::size_t>(u)]) continue;
            const double g = scorer.gain(context.cross.col(u), context.pool_var[u]);
            if (g > best) {
                best = g;
                pick = u;
            }
        }
        if (pick < 0) throw PoolExhaustedError("greedy selection ran out of candidates");
        used[static_cast<std::size_t>(pick)] = true;
        chosen.push_back(pick);

        // Condition the estimator covariance, the remaining cross vectors and
        // the pool covariance on the picked candidate's fantasy outcome.
        const double denom =
            std::max(context.pool_var[pick], 0.0) + context.noise_variance;
        const Eigen::VectorXd c = context.cross.col(pick);
        const Eigen::VectorXd p = context.pool_cov.col(pick);
        state = fantasy_downdate(state, c, std::max(context.pool_var[pick], 0.0),
                                 context.noise_variance);
        context.cross -= (c / denom) * p.transpose();
        context.pool_cov -= (p / denom) * p.transpose();
        context.pool_var = context.pool_cov.diagonal().cwiseMax(0.0);
    }
    return chosen;
}

std::vector<Eigen::Index> select_batch(const UtilitySpec& spec, const GpPosterior& gp,
                                       const CqPosterior& cq, const Dataset& pool,
                                       RandomStream& rng) {
    PoolContext ctx =
        build_pool_context(gp, cq, pool, spec.selection == SelectionRule::Greedy);
    FantasyState base{cq.q, 0};
    return select_batch(spec, base, std::move(ctx), rng);
}

BaselineResult baseline_scores(BaselineKind kind, const GpPosterior& gp, const Dataset& pool,
                               int batch_size, RandomStream& rng) {
    const Eigen::Index n_pool = pool.rows();
    if (n_pool == 0) throw PoolExhaustedError("baseline_scores: empty pool");
    BaselineResult out;
    switch (kind) {
        case BaselineKind::Random:
            out.indices = sample_without_replacement(rng, n_pool, batch_size);
            return out;
        case BaselineKind::MuBald: {
            const GpPrediction pred = predict(gp, pool, false);
            out.scores = (1.0 + pred.variance.cwiseMax(0.0).array() / gp.model.noise_variance)
                             .log() *
                         0.5;
            return out;
        }
        case BaselineKind::PoolVariance: {
            // Singleton TVR gain with the pool standing in as the target set.
            const Eigen::MatrixXd pool_train = product_gram(gp.model.kernel, pool, gp.train);
            Eigen::MatrixXd cov = product_gram(gp.model.kernel, pool) -
                                  pool_train * psd_solve(gp.factor, pool_train.transpose());
            cov = ((cov + cov.transpose()) / 2.0).eval();
            const Eigen::VectorXd var = cov.diagonal().cwiseMax(0.0);
            out.scores.resize(n_pool);
            for (Eigen::Index u = 0; u < n_pool; ++u)
                out.scores[u] =
                    cov.col(u).squaredNorm() / (var[u] + gp.model.noise_variance);
            return out;
        }
        case BaselineKind::Coreset: {
            // Greedy max-min traversal under d(x, x') = -posterior correlation,
            // seeded by the highest-variance candidate.
            const Eigen::MatrixXd pool_train = product_gram(gp.model.kernel, pool, gp.train);
            Eigen::MatrixXd cov = product_gram(gp.model.kernel, pool) -
                                  pool_train * psd_solve(gp.factor, pool_train.transpose());
            cov = ((cov + cov.transpose()) / 2.0).eval();
            const Eigen::VectorXd var = cov.diagonal().cwiseMax(1e-12);
            Eigen::Index seed_idx = 0;
            var.maxCoeff(&seed_idx);
            std::vector<bool> used(static_cast<std::size_t>(n_pool), false);
            used[static_cast<std::size_t>(seed_idx)] = true;
            out.indices = {seed_idx};
            Eigen::VectorXd min_dist(n_pool);
            auto dist = [&](Eigen::Index u, Eigen::Index b) {
                return -cov(u, b) / std::sqrt(var[u] * var[b]);
            };
            for (Eigen::Index u = 0; u < n_pool; ++u) min_dist[u] = dist(u, seed_idx);
            while (static_cast<int>(out.indices.size()) < batch_size) {
                double best = -std::numeric_limits<double>::infinity();
                Eigen::Index pick = -1;
                for (Eigen::Index u = 0; u < n_pool; ++u) {
                    if (used[static_cast<std::size_t>(u)]) continue;
                    if (min_dist[u] > best) {
                        best = min_dist[u];
                        pick = u;
                    }
                }
                if (pick < 0) throw PoolExhaustedError("coreset ran out of candidates");
                used[static_cast<std::size_t>(pick)] = true;
                out.indices.push_back(pick);
                for (Eigen::Index u = 0; u < n_pool; ++u)
                    min_dist[u] = std::min(min_dist[u], dist(u, pick));
            }
            return out;
        }
    }
    return out;
}

}  // namespace activecq
