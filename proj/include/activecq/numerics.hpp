#pragma once

#include <Eigen/Core>

#include "activecq/rng.hpp"

namespace activecq {

/// Cholesky factor of a symmetric matrix plus the diagonal jitter that made
/// the factorization succeed. Immutable once built.
struct PsdFactor {
    Eigen::Index dimension = 0;
    Eigen::MatrixXd lower_triangular;
    double jitter_used = 0.0;
};

/// Factor `matrix + jitter*I`, escalating jitter through
/// {base, 10*base, ..., 1e6*base} until the factor reconstructs the input
/// to 1e-10 relative Frobenius error. Throws NotSymmetricError /
/// NotFactorizableError.
PsdFactor jittered_cholesky(const Eigen::MatrixXd& matrix, double base_jitter);

/// Solve (A + jitter*I) X = rhs via two triangular solves.
Eigen::MatrixXd psd_solve(const PsdFactor& factor, const Eigen::MatrixXd& rhs);

/// log det(A + jitter*I) = 2 * sum log L_ii.
double psd_logdet(const PsdFactor& factor);

/// Differential entropy of N(mu, Sigma) given a factor of Sigma:
/// 0.5 * (m log(2*pi*e) + log det Sigma).
double gaussian_entropy(const PsdFactor& covariance_factor);

/// Phi(x), evaluated through erfc.
double standard_normal_cdf(double x);

/// One draw from Skew(xi, omega, alpha):
/// delta = alpha/sqrt(1+alpha^2), X = xi + omega*(delta*|U0| + sqrt(1-delta^2)*U1).
double skew_normal_sample(RandomStream& rng, double xi, double omega, double alpha);

/// Exact median of the n(n-1)/2 pairwise Euclidean distances (lower of the
/// two middle values for even counts). All-identical points fall back to 1.0
/// and set *degenerate when provided.
double median_heuristic(const Eigen::MatrixXd& points, bool* degenerate = nullptr);

}  // namespace activecq
