#include "activecq/estimators.hpp"

#include <cmath>

#include "activecq/errors.hpp"

namespace activecq {

std::string to_string(CqKind kind) {
    switch (kind) {
        case CqKind::Cate: return "cate";
        case CqKind::Ate: return "ate";
        case CqKind::Att: return "att";
        case CqKind::Ateds: return "ateds";
    }
    return "cate";
}

CqKind cq_kind_from_string(const std::string& name) {
    if (name == "cate") return CqKind::Cate;
    if (name == "ate") return CqKind::Ate;
    if (name == "att") return CqKind::Att;
    if (name == "ateds") return CqKind::Ateds;
    throw SchemaError("unknown cq_kind: " + name);
}

void InterestSet::validate() const {
    if (a.size() < 1) throw InconsistentKindError("interest set: empty");
    if (kind == CqKind::Cate) {
        if (z.rows() != a.size()) throw InconsistentKindError("interest set: cate needs z per point");
    } else if (z.rows() != 0) {
        throw InconsistentKindError("interest set: z only belongs to cate");
    }
    if (kind == CqKind::Att) {
        if (a_tilde.size() != a.size())
            throw InconsistentKindError("interest set: att needs a_tilde per point");
    } else if (a_tilde.size() != 0) {
        throw InconsistentKindError("interest set: a_tilde only belongs to att");
    }
}

EmbeddingContext build_embedding_context(CqKind kind, const Dataset& all_rows,
                                         const KernelSpec& conditioning_kernel, double lambda,
                                         bool scale_lambda_by_n, const Dataset* target) {
    EmbeddingContext ctx;
    switch (kind) {
        case CqKind::Cate: {
            if (!all_rows.has_conditioning())
                throw MissingContextError("cate context: data has no conditioning block");
            ctx.cme = fit_cme(all_rows.z, all_rows.s, conditioning_kernel, lambda,
                              scale_lambda_by_n);
            ctx.anchors = ctx.cme->anchor_adjustment;
            break;
        }
        case CqKind::Att: {
            if (!all_rows.has_treatment())
                throw MissingContextError("att context: data has no treatment block");
            ctx.cme = fit_cme(Eigen::MatrixXd(all_rows.a), all_rows.s, conditioning_kernel,
                              lambda, scale_lambda_by_n);
            ctx.anchors = ctx.cme->anchor_adjustment;
            break;
        }
        case CqKind::Ate: {
            ctx.anchors = std::make_shared<Eigen::MatrixXd>(all_rows.s);
            ctx.marginal_kind = EmbeddingKind::MarginalUniform;
            break;
        }
        case CqKind::Ateds: {
            if (!target || target->s.rows() == 0)
                throw MissingContextError("ateds context: target samples required");
            ctx.anchors = std::make_shared<Eigen::MatrixXd>(target->s);
            ctx.marginal_kind = EmbeddingKind::ShiftedUniform;
            break;
        }
    }
    return ctx;
}

std::vector<EmbeddingWeights> interest_weights(const EmbeddingContext& context,
                                               const InterestSet& interest) {
    interest.validate();
    std::vector<EmbeddingWeights> weights;
    weights.reserve(static_cast<std::size_t>(interest.size()));
    switch (interest.kind) {
        case CqKind::Cate:
            if (!context.cme) throw MissingContextError("cate needs a fitted cme");
            for (Eigen::Index i = 0; i < interest.size(); ++i)
                weights.push_back(cme_weights(*context.cme, interest.z.row(i).transpose()));
            break;
        case CqKind::Att:
            if (!context.cme) throw MissingContextError("att needs a fitted cme");
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                Eigen::VectorXd q(1);
                q << interest.a_tilde[i];
                weights.push_back(cme_weights(*context.cme, q));
            }
            break;
        case CqKind::Ate:
        case CqKind::Ateds: {
            if (!context.anchors) throw MissingContextError("marginal kinds need anchors");
            const EmbeddingWeights shared = uniform_weights(context.anchors, context.marginal_kind);
            for (Eigen::Index i = 0; i < interest.size(); ++i) weights.push_back(shared);
            break;
        }
    }
    return weights;
}

namespace {

bool same_anchors(const std::vector<EmbeddingWeights>& weights) {
    for (const auto& w : weights)
        if (w.anchors != weights.front().anchors) return false;
    return true;
}

// Treatment and conditioning prior blocks over the interest points.
Eigen::MatrixXd interest_prior_block(const GpPosterior& gp, const InterestSet& interest) {
    const auto& kernel = gp.model.kernel;
    Eigen::MatrixXd prior = cross_gram(kernel.treatment, interest.a, interest.a);
    if (interest.kind == CqKind::Cate) {
        if (!kernel.conditioning)
            throw MissingContextError("cate interest with a kernel lacking the z block");
        prior.array() *= cross_gram(*kernel.conditioning, interest.z, interest.z).array();
    }
    return prior;
}

// Treatment and conditioning cross blocks against arbitrary rows.
Eigen::MatrixXd interest_cross_block(const GpPosterior& gp, const InterestSet& interest,
                                     const Dataset& rows) {
    const auto& kernel = gp.model.kernel;
    Eigen::MatrixXd cross = cross_gram(kernel.treatment, interest.a, rows.a);
    if (interest.kind == CqKind::Cate) {
        if (!rows.has_conditioning()) throw MissingBlockError("rows lack the conditioning block");
        cross.array() *=
            cross_gram(*kernel.conditioning, interest.z, rows.z).array();
    }
    return cross;
}

}  // namespace

CqPosterior cq_posterior_from_weights(const GpPosterior& gp, const InterestSet& interest,
                                      std::vector<EmbeddingWeights> weights, CqSource source) {
    interest.validate();
    const Eigen::Index n_i = interest.size();
    if (static_cast<Eigen::Index>(weights.size()) != n_i)
        throw MissingContextError("one weight vector per interest point required");
    const KernelSpec& k_s = gp.model.kernel.adjustment;

    CqPosterior cq;
    cq.interest = interest;
    cq.source = source;

    // Effective cross kernel against the training rows.
    cq.cross_train = interest_cross_block(gp, interest, gp.train);
    for (Eigen::Index i = 0; i < n_i; ++i)
        cq.cross_train.row(i).array() *=
            embedding_cross(weights[i], k_s, gp.train.s).transpose().array();

    cq.nu = cq.cross_train * gp.alpha;

    // Prior covariance of the embedded points.
    Eigen::MatrixXd prior = interest_prior_block(gp, interest);
    if (same_anchors(weights)) {
        const Eigen::MatrixXd k_anchors = cross_gram(k_s, *weights.front().anchors,
                                                     *weights.front().anchors);
        Eigen::MatrixXd v(weights.front().weights.size(), n_i);
        for (Eigen::Index i = 0; i < n_i; ++i) v.col(i) = weights[i].weights;
        prior.array() *= (v.transpose() * k_anchors * v).array();
    } else {
        for (Eigen::Index i = 0; i < n_i; ++i)
            for (Eigen::Index j = i; j < n_i; ++j) {
                const double inner = embedding_inner(weights[i], weights[j], k_s);
                prior(i, j) *= inner;
                if (j > i) prior(j, i) *= inner;
            }
    }

    cq.q = prior - cq.cross_train * psd_solve(gp.factor, cq.cross_train.transpose());
    cq.q = ((cq.q + cq.q.transpose()) / 2.0).eval();
    cq.weights = std::move(weights);
    return cq;
}

CqPosterior cq_posterior_cme(const GpPosterior& gp, const InterestSet& interest,
                             const EmbeddingContext& context) {
    return cq_posterior_from_weights(gp, interest, interest_weights(context, interest),
                                     CqSource::CmeClosedForm);
}

Eigen::VectorXd ConditionalSampler::sample(const Eigen::VectorXd& query, RandomStream& rng) const {
    if (!adjustment || adjustment->rows() == 0)
        throw EmptyAnchorsError("conditional sampler has no anchors");
    const Eigen::Index n = adjustment->rows();
    Eigen::Index pick = 0;
    if (!conditioning) {
        pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
        Eigen::VectorXd w(n);
        const double inv = -0.5 / (bandwidth * bandwidth);
        for (Eigen::Index i = 0; i < n; ++i)
            w[i] = std::exp(inv * (conditioning->row(i).transpose() - query).squaredNorm());
        const double total = w.sum();
        if (!(total > 1e-300)) {
            // Query far outside the anchor support: fall back to a uniform draw.
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        } else {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += w[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        }
    }
    Eigen::VectorXd out = adjustment->row(pick).transpose();
    if (smoothing > 0.0)
        for (Eigen::Index d = 0; d < out.size(); ++d) out[d] += smoothing * rng.normal();
    return out;
}

Eigen::MatrixXd ConditionalSampler::sample_many(const Eigen::VectorXd& query, Eigen::Index count,
                                                RandomStream& rng) const {
    Eigen::MatrixXd out(count, adjustment->cols());
    for (Eigen::Index i = 0; i < count; ++i) out.row(i) = sample(query, rng).transpose();
    return out;
}

ConditionalSampler fit_conditional_sampler(const Eigen::MatrixXd& conditioning,
                                           const Eigen::MatrixXd& adjustment, double bandwidth) {
    if (adjustment.rows() == 0) throw EmptyAnchorsError("fit_conditional_sampler: no anchors");
    if (conditioning.rows() != adjustment.rows())
        throw DimensionMismatchError("fit_conditional_sampler: anchor row counts differ");
    if (!(bandwidth > 0.0)) throw InvalidScaleError("fit_conditional_sampler: bandwidth");
    ConditionalSampler s;
    s.conditioning = std::make_shared<Eigen::MatrixXd>(conditioning);
    s.adjustment = std::make_shared<Eigen::MatrixXd>(adjustment);
    s.bandwidth = bandwidth;
    s.smoothing = adjustment.rows() >= 2 ? 0.1 * median_heuristic(adjustment) : 0.0;
    return s;
}

ConditionalSampler marginal_sampler(const Eigen::MatrixXd& adjustment) {
    if (adjustment.rows() == 0) throw EmptyAnchorsError("marginal_sampler: no anchors");
    ConditionalSampler s;
    s.adjustment = std::make_shared<Eigen::MatrixXd>(adjustment);
    s.smoothing = adjustment.rows() >= 2 ? 0.1 * median_heuristic(adjustment) : 0.0;
    return s;
}

CqPosterior cq_posterior_mc(const GpPosterior& gp, const InterestSet& interest,
                            const ConditionalSampler& sampler, Eigen::Index n_s,
                            RandomStream& rng) {
    interest.validate();
    if (n_s < 1) throw SamplerUnavailableError("cq_posterior_mc: n_s must be >= 1");
    if (!sampler.adjustment) throw SamplerUnavailableError("cq_posterior_mc: sampler unset");
    const Eigen::Index n_i = interest.size();

    // Per-point conditioning value handed to the sampler.
    auto query_of = [&](Eigen::Index i) -> Eigen::VectorXd {
        switch (interest.kind) {
            case CqKind::Cate: return interest.z.row(i).transpose();
            case CqKind::Att: {
                Eigen::VectorXd q(1);
                q << interest.a_tilde[i];
                return q;
            }
            default: return Eigen::VectorXd();
        }
    };

    std::vector<EmbeddingWeights> weights;
    weights.reserve(static_cast<std::size_t>(n_i));
    for (Eigen::Index i = 0; i < n_i; ++i) {
        const Eigen::VectorXd q = query_of(i);
        if (sampler.conditioning && q.size() != sampler.conditioning->cols())
            throw SamplerUnavailableError("cq_posterior_mc: sampler conditional mismatch");
        EmbeddingWeights w;
        w.anchors = std::make_shared<Eigen::MatrixXd>(sampler.sample_many(q, n_s, rng));
        w.weights = uniform_weights(n_s);
        w.kind = EmbeddingKind::MarginalUniform;
        weights.push_back(std::move(w));
    }
    // The double sample average is exactly the uniform-weight quadratic form,
    // so the shared assembly computes nu and Q without a giant joint predict.
    CqPosterior cq = cq_posterior_from_weights(gp, interest, std::move(weights),
                                               CqSource::McSampling);
    return cq;
}

Eigen::MatrixXd cross_covariance_with_pool_batch(const GpPosterior& gp, const CqPosterior& cq,
                                                 const Dataset& pool) {
    pool.validate();
    if (!pool.has_treatment() || !pool.has_adjustment())
        throw MissingBlockError("pool rows lack a kernel block");
    const KernelSpec& k_s = gp.model.kernel.adjustment;
    const Eigen::Index n_i = cq.interest.size();

    Eigen::MatrixXd prior = interest_cross_block(gp, cq.interest, pool);
    for (Eigen::Index i = 0; i < n_i; ++i)
        prior.row(i).array() *=
            embedding_cross(cq.weights[i], k_s, pool.s).transpose().array();

    const Eigen::MatrixXd pool_train = product_gram(gp.model.kernel, pool, gp.train);
    return prior - cq.cross_train * psd_solve(gp.factor, pool_train.transpose());
}

Eigen::VectorXd cross_covariance_with_pool(const GpPosterior& gp, const CqPosterior& cq,
                                           const Dataset& pool_row) {
    return cross_covariance_with_pool_batch(gp, cq, pool_row).col(0);
}

}  // namespace activecq
