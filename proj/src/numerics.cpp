#include "activecq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>

#include "activecq/errors.hpp"

namespace activecq {

namespace {

bool factor_ok(const Eigen::MatrixXd& matrix, double jitter, const Eigen::LLT<Eigen::MatrixXd>& llt,
               double norm_a) {
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd lower = llt.matrixL();
    if ((lower.diagonal().array() <= 0.0).any()) return false;
    Eigen::MatrixXd target = matrix;
    target.diagonal().array() += jitter;
    const double err = (lower * lower.transpose() - target).norm();
    return err <= 1e-10 * std::max(norm_a, 1e-300);
}

}  // namespace

PsdFactor jittered_cholesky(const Eigen::MatrixXd& matrix, double base_jitter) {
    if (matrix.rows() != matrix.cols())
        throw DimensionMismatchError("jittered_cholesky: matrix not square");
    if (base_jitter < 0.0) throw InvalidScaleError("jittered_cholesky: negative base jitter");
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12))
        throw NotSymmetricError("jittered_cholesky: asymmetry " + std::to_string(asym));

    const double norm_a = matrix.norm();
    double jitter = base_jitter;
    for (int rung = 0; rung <= 6; ++rung) {
        Eigen::MatrixXd shifted = matrix;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (factor_ok(matrix, jitter, llt, norm_a)) {
            PsdFactor f;
            f.dimension = matrix.rows();
            f.lower_triangular = llt.matrixL();
            f.jitter_used = jitter;
            return f;
        }
        if (base_jitter == 0.0) break;  // the ladder never leaves zero
        jitter = base_jitter * std::pow(10.0, rung + 1);
    }
    throw NotFactorizableError("jittered_cholesky: failed after jitter escalation");
}

Eigen::MatrixXd psd_solve(const PsdFactor& factor, const Eigen::MatrixXd& rhs) {
    if (rhs.rows() != factor.dimension)
        throw DimensionMismatchError("psd_solve: rhs rows " + std::to_string(rhs.rows()) +
                                     " != dimension " + std::to_string(factor.dimension));
    Eigen::MatrixXd x = factor.lower_triangular.triangularView<Eigen::Lower>().solve(rhs);
    factor.lower_triangular.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

double psd_logdet(const PsdFactor& factor) {
    return 2.0 * factor.lower_triangular.diagonal().array().log().sum();
}

double gaussian_entropy(const PsdFactor& covariance_factor) {
    const double m = static_cast<double>(covariance_factor.dimension);
    return 0.5 * (m * std::log(2.0 * std::numbers::pi * std::numbers::e) +
                  psd_logdet(covariance_factor));
}

double standard_normal_cdf(double x) {
    if (!std::isfinite(x)) throw NonFiniteError("standard_normal_cdf: non-finite input");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double skew_normal_sample(RandomStream& rng, double xi, double omega, double alpha) {
    if (!(omega > 0.0)) throw InvalidScaleError("skew_normal_sample: omega must be positive");
    const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
    const double u0 = rng.normal();
    const double u1 = rng.normal();
    return xi + omega * (delta * std::abs(u0) + std::sqrt(1.0 - delta * delta) * u1);
}

double median_heuristic(const Eigen::MatrixXd& points, bool* degenerate) {
    const Eigen::Index n = points.rows();
    if (n < 2) throw InvalidScaleError("median_heuristic: need at least two points");
    if (degenerate) *degenerate = false;

    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            dists.push_back((points.row(i) - points.row(j)).norm());

    if (*std::max_element(dists.begin(), dists.end()) == 0.0) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    // Lower of the two middle values for even counts.
    const std::size_t mid = (dists.size() - 1) / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    double med = dists[mid];
    if (med == 0.0) {
        // More than half the pairs coincide; use the smallest positive
        // distance so the result stays a usable bandwidth.
        med = std::numeric_limits<double>::infinity();
        for (double d : dists)
            if (d > 0.0) med = std::min(med, d);
    }
    return med;
}

}  // namespace activecq
