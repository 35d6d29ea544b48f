#include "activecq/kernels.hpp"

#include <cmath>

#include "activecq/errors.hpp"

namespace activecq {

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Rbf: return "rbf";
        case KernelFamily::Matern52: return "matern52";
        case KernelFamily::RationalQuadratic: return "rq";
        case KernelFamily::Delta: return "delta";
    }
    return "rbf";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "rbf") return KernelFamily::Rbf;
    if (name == "matern52") return KernelFamily::Matern52;
    if (name == "rq") return KernelFamily::RationalQuadratic;
    if (name == "delta") return KernelFamily::Delta;
    throw SchemaError("unknown kernel family: " + name);
}

void KernelSpec::validate() const {
    if (!(variance > 0.0)) throw InvalidScaleError("kernel variance must be positive");
    if (family != KernelFamily::Delta && !(lengthscale > 0.0))
        throw InvalidScaleError("kernel lengthscale must be positive");
    if (family == KernelFamily::RationalQuadratic && !(rq_alpha > 0.0))
        throw InvalidScaleError("rq_alpha must be positive");
}

namespace {

double eval_from_sqdist(const KernelSpec& spec, double d2) {
    switch (spec.family) {
        case KernelFamily::Rbf:
            return spec.variance * std::exp(-0.5 * d2 / (spec.lengthscale * spec.lengthscale));
        case KernelFamily::Matern52: {
            const double t = std::sqrt(5.0 * d2) / spec.lengthscale;
            return spec.variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
        }
        case KernelFamily::RationalQuadratic: {
            const double w = d2 / (2.0 * spec.rq_alpha * spec.lengthscale * spec.lengthscale);
            return spec.variance * std::pow(1.0 + w, -spec.rq_alpha);
        }
        case KernelFamily::Delta:
            return 0.0;  // handled by exact comparison
    }
    return 0.0;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& x2) {
    if (x.size() != x2.size()) throw DimensionMismatchError("kernel_eval: input dimensions differ");
    if (!x.allFinite() || !x2.allFinite()) throw NonFiniteError("kernel_eval: non-finite input");
    if (spec.family == KernelFamily::Delta)
        return (x.array() == x2.array()).all() ? spec.variance : 0.0;
    return eval_from_sqdist(spec, (x - x2).squaredNorm());
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x2) {
    if (x.cols() != x2.cols()) throw DimensionMismatchError("squared_distances: widths differ");
    const Eigen::VectorXd nx = x.rowwise().squaredNorm();
    const Eigen::VectorXd nx2 = x2.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * x * x2.transpose();
    d2.colwise() += nx;
    d2.rowwise() += nx2.transpose();
    return d2.cwiseMax(0.0);
}

Eigen::MatrixXd gram_from_sqdist(const KernelSpec& spec, const Eigen::MatrixXd& sqdist) {
    switch (spec.family) {
        case KernelFamily::Rbf:
            return spec.variance *
                   (-0.5 / (spec.lengthscale * spec.lengthscale) * sqdist.array()).exp();
        case KernelFamily::Matern52: {
            const Eigen::ArrayXXd t = (5.0 * sqdist.array()).sqrt() / spec.lengthscale;
            return spec.variance * ((1.0 + t + t.square() / 3.0) * (-t).exp());
        }
        case KernelFamily::RationalQuadratic: {
            const Eigen::ArrayXXd w =
                sqdist.array() / (2.0 * spec.rq_alpha * spec.lengthscale * spec.lengthscale);
            return spec.variance * (1.0 + w).pow(-spec.rq_alpha);
        }
        case KernelFamily::Delta:
            throw KernelMismatchError("delta kernel needs exact values, not distances");
    }
    return {};
}

Eigen::MatrixXd gram_grad_log_lengthscale(const KernelSpec& spec, const Eigen::MatrixXd& sqdist) {
    switch (spec.family) {
        case KernelFamily::Rbf: {
            const double inv_l2 = 1.0 / (spec.lengthscale * spec.lengthscale);
            return (spec.variance * sqdist.array() * inv_l2 *
                    (-0.5 * inv_l2 * sqdist.array()).exp());
        }
        case KernelFamily::Matern52: {
            const Eigen::ArrayXXd t = (5.0 * sqdist.array()).sqrt() / spec.lengthscale;
            return spec.variance * (t.square() * (1.0 + t) / 3.0 * (-t).exp());
        }
        case KernelFamily::RationalQuadratic: {
            const Eigen::ArrayXXd w =
                sqdist.array() / (2.0 * spec.rq_alpha * spec.lengthscale * spec.lengthscale);
            return spec.variance *
                   (2.0 * spec.rq_alpha * w * (1.0 + w).pow(-spec.rq_alpha - 1.0));
        }
        case KernelFamily::Delta:
            return Eigen::MatrixXd::Zero(sqdist.rows(), sqdist.cols());
    }
    return {};
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXd& x2) {
    if (x.cols() != x2.cols()) throw DimensionMismatchError("cross_gram: widths differ");
    if (spec.family == KernelFamily::Delta) {
        Eigen::MatrixXd g(x.rows(), x2.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x2.rows(); ++j)
                g(i, j) = (x.row(i).array() == x2.row(j).array()).all() ? spec.variance : 0.0;
        return g;
    }
    return gram_from_sqdist(spec, squared_distances(x, x2));
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x2) {
    return cross_gram(spec, Eigen::MatrixXd(x), Eigen::MatrixXd(x2));
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd g = cross_gram(spec, x, x);
    // Exact symmetry and exact variance on the diagonal.
    g = ((g + g.transpose()) / 2.0).eval();
    g.diagonal().setConstant(spec.variance);
    return g;
}

Eigen::MatrixXd product_gram(const ProductKernelSpec& spec, const Dataset& rows,
                             const Dataset& rows2) {
    if (!rows.has_treatment() || !rows2.has_treatment())
        throw MissingBlockError("product_gram: treatment block missing");
    if (!rows.has_adjustment() || !rows2.has_adjustment())
        throw MissingBlockError("product_gram: adjustment block missing");
    Eigen::MatrixXd g = cross_gram(spec.treatment, rows.a, rows2.a);
    if (spec.conditioning) {
        if (!rows.has_conditioning() || !rows2.has_conditioning())
            throw MissingBlockError("product_gram: conditioning block missing");
        g.array() *= cross_gram(*spec.conditioning, rows.z, rows2.z).array();
    }
    g.array() *= cross_gram(spec.adjustment, rows.s, rows2.s).array();
    return g;
}

Eigen::MatrixXd product_gram(const ProductKernelSpec& spec, const Dataset& rows) {
    if (!rows.has_treatment()) throw MissingBlockError("product_gram: treatment block missing");
    if (!rows.has_adjustment()) throw MissingBlockError("product_gram: adjustment block missing");
    Eigen::MatrixXd g = gram(spec.treatment, Eigen::MatrixXd(rows.a));
    if (spec.conditioning) {
        if (!rows.has_conditioning())
            throw MissingBlockError("product_gram: conditioning block missing");
        g.array() *= gram(*spec.conditioning, rows.z).array();
    }
    g.array() *= gram(spec.adjustment, rows.s).array();
    return g;
}

}  // namespace activecq
