#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "activecq/dataset.hpp"

namespace activecq {

enum class KernelFamily { Rbf, Matern52, RationalQuadratic, Delta };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec {
    KernelFamily family = KernelFamily::Rbf;
    double lengthscale = 1.0;  // ignored by Delta
    double variance = 1.0;
    double rq_alpha = 1.0;  // RationalQuadratic shape

    void validate() const;
};

// Joint kernel over matched rows: elementwise product of per-block kernels.
// The conditioning block is absent for the marginal causal quantities, and
// by convention only the adjustment block carries a non-unit variance (the
// global output scale of the product).
struct ProductKernelSpec {
    KernelSpec treatment;
    std::optional<KernelSpec> conditioning;
    KernelSpec adjustment;

    double output_scale() const { return adjustment.variance; }
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& x2);

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x);

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXd& x2);

/// Hadamard product of per-block cross grams; blocks absent from the spec
/// contribute all-ones. Throws MissingBlockError when the rows lack a block
/// the spec declares.
Eigen::MatrixXd product_gram(const ProductKernelSpec& spec, const Dataset& rows,
                             const Dataset& rows2);

/// Symmetric variant with exactly symmetric blocks and exact variances on
/// the diagonal.
Eigen::MatrixXd product_gram(const ProductKernelSpec& spec, const Dataset& rows);

/// Cross gram taking treatment vectors directly (1-D block shorthand).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x2);

/// Pairwise squared Euclidean distances, reused by the hyperparameter
/// optimizer so grams can be re-evaluated without touching the rows.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& x2);

/// Gram from precomputed squared distances (Delta requires exact-match info
/// and is not supported here).
Eigen::MatrixXd gram_from_sqdist(const KernelSpec& spec, const Eigen::MatrixXd& sqdist);

/// d gram / d log(lengthscale) from precomputed squared distances.
Eigen::MatrixXd gram_grad_log_lengthscale(const KernelSpec& spec, const Eigen::MatrixXd& sqdist);

}  // namespace activecq
