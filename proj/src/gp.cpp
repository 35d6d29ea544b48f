#include "activecq/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "activecq/errors.hpp"

namespace activecq {

namespace {

constexpr double kFitJitterBase = 1e-8;
constexpr double kLogLenMin = -7.0, kLogLenMax = 7.0;
constexpr double kLogScaleMin = -14.0, kLogScaleMax = 14.0;
constexpr double kLogNoiseMin = -14.0, kLogNoiseMax = 5.0;
constexpr double kMaxLogStep = 0.5;  // per-coordinate cap on one update

void check_train(const GpModel& model, const Dataset& train) {
    train.validate();
    if (train.rows() == 0) throw EmptyTrainingError("gp fit: empty training set");
    if (!train.has_outcomes()) throw EmptyTrainingError("gp fit: outcomes missing");
    if (!(model.noise_variance > 0.0)) throw InvalidScaleError("gp: noise variance must be positive");
}

// Precomputed distance structure so hyperparameter sweeps do not touch rows.
struct TrainCache {
    Eigen::Index n = 0;
    std::optional<Eigen::MatrixXd> sq_a, sq_z, sq_s;  // absent for Delta blocks
    std::optional<Eigen::MatrixXd> delta_a;           // fixed 0/1 gram for Delta treatment
    bool has_z = false;
};

Eigen::MatrixXd symmetric_sqdist(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd d = squared_distances(x, x);
    d = ((d + d.transpose()) / 2.0).eval();
    d.diagonal().setZero();
    return d;
}

TrainCache build_cache(const GpModel& model, const Dataset& train) {
    TrainCache c;
    c.n = train.rows();
    if (model.kernel.treatment.family == KernelFamily::Delta) {
        KernelSpec unit = model.kernel.treatment;
        unit.variance = 1.0;
        c.delta_a = cross_gram(unit, train.a, train.a);
    } else {
        c.sq_a = symmetric_sqdist(Eigen::MatrixXd(train.a));
    }
    if (model.kernel.conditioning) {
        c.has_z = true;
        c.sq_z = symmetric_sqdist(train.z);
    }
    c.sq_s = symmetric_sqdist(train.s);
    return c;
}

struct ParamLayout {
    bool opt_a = false;  // treatment lengthscale present
    bool opt_z = false;  // conditioning lengthscale present
    int size() const { return 3 + (opt_a ? 1 : 0) + (opt_z ? 1 : 0); }
};

ParamLayout layout_of(const GpModel& model) {
    ParamLayout l;
    l.opt_a = model.kernel.treatment.family != KernelFamily::Delta;
    l.opt_z = model.kernel.conditioning &&
              model.kernel.conditioning->family != KernelFamily::Delta;
    return l;
}

struct BlockGrams {
    Eigen::MatrixXd g_a, g_z, g_s;  // g_z is empty when no conditioning block
    Eigen::MatrixXd k;              // product, without noise
};

BlockGrams build_grams(const GpModel& model, const TrainCache& c) {
    BlockGrams b;
    KernelSpec unit_a = model.kernel.treatment;
    unit_a.variance = 1.0;
    b.g_a = c.delta_a ? *c.delta_a : gram_from_sqdist(unit_a, *c.sq_a);
    if (c.has_z) {
        KernelSpec unit_z = *model.kernel.conditioning;
        unit_z.variance = 1.0;
        b.g_z = gram_from_sqdist(unit_z, *c.sq_z);
    }
    b.g_s = gram_from_sqdist(model.kernel.adjustment, *c.sq_s);
    b.k = b.g_a.cwiseProduct(b.g_s);
    if (c.has_z) b.k = b.k.cwiseProduct(b.g_z);
    return b;
}

struct MllEval {
    double value = 0.0;
    Eigen::VectorXd grad;
    bool ok = false;
};

// MLL and analytic gradient via the trace identities
//   dL/dtheta = 1/2 alpha' dK alpha - 1/2 tr(Kn^-1 dK).
MllEval eval_mll(const GpModel& model, const Dataset& train, const TrainCache& c,
                 bool with_grad) {
    MllEval out;
    const Eigen::Index n = c.n;
    const BlockGrams b = build_grams(model, c);
    Eigen::MatrixXd kn = b.k;
    kn.diagonal().array() += model.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(kn);
    if (llt.info() != Eigen::Success) return out;

    const Eigen::VectorXd alpha = llt.solve(train.y);
    const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    out.value = -0.5 * train.y.dot(alpha) - 0.5 * logdet -
                0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(out.value)) return out;
    out.ok = true;
    if (!with_grad) return out;

    const ParamLayout l = layout_of(model);
    const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    out.grad.resize(l.size());

    auto grad_for = [&](const Eigen::MatrixXd& dk) {
        return 0.5 * (alpha.dot(dk * alpha) - kinv.cwiseProduct(dk).sum());
    };

    // log adjustment lengthscale
    Eigen::MatrixXd dk = gram_grad_log_lengthscale(model.kernel.adjustment, *c.sq_s)
                             .cwiseProduct(b.g_a);
    if (c.has_z) dk = dk.cwiseProduct(b.g_z);
    out.grad[0] = grad_for(dk);

    // log output scale: dK = K, so both terms reduce to cheap contractions
    const double ata = alpha.squaredNorm();
    out.grad[1] = 0.5 * ((train.y.dot(alpha) - model.noise_variance * ata) -
                         (static_cast<double>(n) - model.noise_variance * kinv.trace()));

    // log noise: dKn = sigma^2 I
    out.grad[2] = 0.5 * model.noise_variance * (ata - kinv.trace());

    int at = 3;
    if (l.opt_a) {
        KernelSpec unit_a = model.kernel.treatment;
        unit_a.variance = 1.0;
        Eigen::MatrixXd da = gram_grad_log_lengthscale(unit_a, *c.sq_a).cwiseProduct(b.g_s);
        if (c.has_z) da = da.cwiseProduct(b.g_z);
        out.grad[at++] = grad_for(da);
    }
    if (l.opt_z) {
        KernelSpec unit_z = *model.kernel.conditioning;
        unit_z.variance = 1.0;
        const Eigen::MatrixXd dz = gram_grad_log_lengthscale(unit_z, *c.sq_z)
                                       .cwiseProduct(b.g_a)
                                       .cwiseProduct(b.g_s);
        out.grad[at++] = grad_for(dz);
    }
    if (!out.grad.allFinite()) out.ok = false;
    return out;
}

Eigen::VectorXd clamp_params(const GpModel& model, Eigen::VectorXd p) {
    const ParamLayout l = layout_of(model);
    p[0] = std::clamp(p[0], kLogLenMin, kLogLenMax);
    p[1] = std::clamp(p[1], kLogScaleMin, kLogScaleMax);
    p[2] = std::clamp(p[2], kLogNoiseMin, kLogNoiseMax);
    int at = 3;
    if (l.opt_a) p[at] = std::clamp(p[at], kLogLenMin, kLogLenMax), ++at;
    if (l.opt_z) p[at] = std::clamp(p[at], kLogLenMin, kLogLenMax);
    return p;
}

}  // namespace

Eigen::VectorXd hyperparameters(const GpModel& model) {
    const ParamLayout l = layout_of(model);
    Eigen::VectorXd p(l.size());
    p[0] = std::log(model.kernel.adjustment.lengthscale);
    p[1] = std::log(model.kernel.adjustment.variance);
    p[2] = std::log(model.noise_variance);
    int at = 3;
    if (l.opt_a) p[at++] = std::log(model.kernel.treatment.lengthscale);
    if (l.opt_z) p[at] = std::log(model.kernel.conditioning->lengthscale);
    return p;
}

GpModel with_hyperparameters(const GpModel& model, const Eigen::VectorXd& log_params) {
    const ParamLayout l = layout_of(model);
    if (log_params.size() != l.size())
        throw DimensionMismatchError("with_hyperparameters: parameter count");
    GpModel out = model;
    out.kernel.adjustment.lengthscale = std::exp(log_params[0]);
    out.kernel.adjustment.variance = std::exp(log_params[1]);
    out.noise_variance = std::exp(log_params[2]);
    int at = 3;
    if (l.opt_a) out.kernel.treatment.lengthscale = std::exp(log_params[at++]);
    if (l.opt_z) out.kernel.conditioning->lengthscale = std::exp(log_params[at]);
    return out;
}

std::vector<std::string> hyperparameter_names(const GpModel& model) {
    const ParamLayout l = layout_of(model);
    std::vector<std::string> names = {"log_adjustment_lengthscale", "log_output_scale",
                                      "log_noise_variance"};
    if (l.opt_a) names.push_back("log_treatment_lengthscale");
    if (l.opt_z) names.push_back("log_conditioning_lengthscale");
    return names;
}

GpPosterior fit(const GpModel& model, const Dataset& train) {
    check_train(model, train);
    Eigen::MatrixXd kn = product_gram(model.kernel, train);
    kn.diagonal().array() += model.noise_variance;
    GpPosterior post;
    post.model = model;
    post.train = train;
    // The noise diagonal usually makes the system factorizable as-is; the
    // jitter ladder only engages on genuine rank deficiency.
    try {
        post.factor = jittered_cholesky(kn, 0.0);
    } catch (const NotFactorizableError&) {
        try {
            post.factor = jittered_cholesky(kn, kFitJitterBase);
        } catch (const Error& e) {
            throw FactorizationFailureError(std::string("gp fit: ") + e.what());
        }
    }
    post.alpha = psd_solve(post.factor, train.y);
    return post;
}

GpPrediction predict(const GpPosterior& posterior, const Dataset& query, bool with_covariance) {
    query.validate();
    const Eigen::MatrixXd cross = product_gram(posterior.model.kernel, query, posterior.train);
    GpPrediction pred;
    pred.mean = cross * posterior.alpha;
    const Eigen::MatrixXd solved = psd_solve(posterior.factor, cross.transpose());
    if (with_covariance) {
        const Eigen::MatrixXd prior = product_gram(posterior.model.kernel, query);
        pred.covariance = prior - cross * solved;
        pred.covariance = ((pred.covariance + pred.covariance.transpose()) / 2.0).eval();
        pred.variance = pred.covariance.diagonal();
    } else {
        const auto& k = posterior.model.kernel;
        const double prior_diag =
            k.treatment.variance * (k.conditioning ? k.conditioning->variance : 1.0) *
            k.adjustment.variance;
        pred.variance =
            prior_diag - (cross.array() * solved.transpose().array()).rowwise().sum();
    }
    return pred;
}

double marginal_log_likelihood(const GpModel& model, const Dataset& train) {
    check_train(model, train);
    Eigen::MatrixXd kn = product_gram(model.kernel, train);
    kn.diagonal().array() += model.noise_variance;
    PsdFactor factor;
    try {
        factor = jittered_cholesky(kn, 0.0);
    } catch (const Error& e) {
        throw FactorizationFailureError(std::string("marginal_log_likelihood: ") + e.what());
    }
    const Eigen::VectorXd alpha = psd_solve(factor, train.y);
    return -0.5 * train.y.dot(alpha) - 0.5 * psd_logdet(factor) -
           0.5 * static_cast<double>(train.rows()) * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd marginal_log_likelihood_gradient(const GpModel& model, const Dataset& train) {
    check_train(model, train);
    const TrainCache cache = build_cache(model, train);
    const MllEval eval = eval_mll(model, train, cache, true);
    if (!eval.ok) throw FactorizationFailureError("marginal_log_likelihood_gradient");
    return eval.grad;
}

GpModel optimize_hyperparameters(const GpModel& model, const Dataset& train, int iterations,
                                 double step) {
    check_train(model, train);
    if (iterations <= 0) return model;

    const TrainCache cache = build_cache(model, train);
    Eigen::VectorXd params = hyperparameters(model);
    const MllEval initial = eval_mll(model, train, cache, false);
    if (!initial.ok) return model;

    double best_value = initial.value;
    Eigen::VectorXd best_params = params;

    for (int it = 0; it < iterations; ++it) {
        const GpModel current = with_hyperparameters(model, params);
        const MllEval eval = eval_mll(current, train, cache, true);
        if (!eval.ok) break;  // non-finite gradient or failed factor: keep best seen
        if (eval.value > best_value) {
            best_value = eval.value;
            best_params = params;
        }
        Eigen::VectorXd delta = step * eval.grad;
        const double biggest = delta.cwiseAbs().maxCoeff();
        if (biggest > kMaxLogStep) delta *= kMaxLogStep / biggest;
        params = clamp_params(model, params + delta);
    }

    // The loop scores params before stepping, so the final point still needs a look.
    const MllEval last = eval_mll(with_hyperparameters(model, params), train, cache, false);
    if (last.ok && last.value > best_value) {
        best_value = last.value;
        best_params = params;
    }
    return with_hyperparameters(model, best_params);
}

}  // namespace activecq
