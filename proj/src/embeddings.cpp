#include "activecq/embeddings.hpp"

#include "activecq/errors.hpp"

namespace activecq {

CmeOperatorFit fit_cme(const Eigen::MatrixXd& conditioning, const Eigen::MatrixXd& adjustment,
                       const KernelSpec& conditioning_kernel, double lambda,
                       bool scale_lambda_by_n) {
    if (conditioning.rows() == 0) throw EmptyAnchorsError("fit_cme: no anchor pairs");
    if (conditioning.rows() != adjustment.rows())
        throw DimensionMismatchError("fit_cme: anchor row counts differ");
    if (!(lambda > 0.0)) throw InvalidScaleError("fit_cme: lambda must be positive");

    CmeOperatorFit fit;
    fit.anchor_conditioning = std::make_shared<Eigen::MatrixXd>(conditioning);
    fit.anchor_adjustment = std::make_shared<Eigen::MatrixXd>(adjustment);
    fit.conditioning_kernel = conditioning_kernel;
    fit.lambda = lambda;
    fit.scaled_by_n = scale_lambda_by_n;
    fit.effective_lambda =
        scale_lambda_by_n ? static_cast<double>(conditioning.rows()) * lambda : lambda;

    Eigen::MatrixXd kcc = gram(conditioning_kernel, conditioning);
    kcc.diagonal().array() += fit.effective_lambda;
    try {
        fit.factor = jittered_cholesky(kcc, 1e-8);
    } catch (const Error& e) {
        throw FactorizationFailureError(std::string("fit_cme: ") + e.what());
    }
    return fit;
}

EmbeddingWeights cme_weights(const CmeOperatorFit& fit, const Eigen::VectorXd& query) {
    if (query.size() != fit.anchor_conditioning->cols())
        throw DimensionMismatchError("cme_weights: query dimension " +
                                     std::to_string(query.size()) + " != anchors " +
                                     std::to_string(fit.anchor_conditioning->cols()));
    const Eigen::MatrixXd kq =
        cross_gram(fit.conditioning_kernel, *fit.anchor_conditioning, query.transpose());
    EmbeddingWeights w;
    w.anchors = fit.anchor_adjustment;
    w.weights = psd_solve(fit.factor, kq);
    w.kind = EmbeddingKind::Conditional;
    return w;
}

EmbeddingWeights uniform_weights(std::shared_ptr<const Eigen::MatrixXd> anchors,
                                 EmbeddingKind kind) {
    if (!anchors || anchors->rows() == 0) throw ZeroCountError("uniform_weights: no anchors");
    EmbeddingWeights w;
    w.anchors = std::move(anchors);
    w.weights = uniform_weights(w.anchors->rows());
    w.kind = kind;
    return w;
}

Eigen::VectorXd uniform_weights(Eigen::Index n) {
    if (n < 1) throw ZeroCountError("uniform_weights: n must be >= 1");
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

double embedding_inner(const EmbeddingWeights& w, const EmbeddingWeights& w2,
                       const KernelSpec& adjustment_kernel) {
    if (!w.anchors || !w2.anchors) throw EmptyAnchorsError("embedding_inner: anchors missing");
    if (w.anchors->cols() != w2.anchors->cols())
        throw KernelMismatchError("embedding_inner: anchor dimensions differ");
    const Eigen::MatrixXd k = cross_gram(adjustment_kernel, *w.anchors, *w2.anchors);
    return w.weights.dot(k * w2.weights);
}

Eigen::VectorXd embedding_cross(const EmbeddingWeights& w, const KernelSpec& adjustment_kernel,
                                const Eigen::MatrixXd& points) {
    if (!w.anchors) throw EmptyAnchorsError("embedding_cross: anchors missing");
    if (w.anchors->cols() != points.cols())
        throw DimensionMismatchError("embedding_cross: point dimension");
    return cross_gram(adjustment_kernel, points, *w.anchors) * w.weights;
}

}  // namespace activecq
