#include <doctest.h>

#include <cmath>
#include <numbers>

#include "activecq/errors.hpp"
#include "activecq/numerics.hpp"
#include "activecq/rng.hpp"

using namespace activecq;

namespace {

Eigen::MatrixXd random_spd(RandomStream& rng, Eigen::Index n) {
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = rng.normal();
    Eigen::MatrixXd a = b * b.transpose();
    a.diagonal().array() += 0.5;
    return ((a + a.transpose()) / 2.0).eval();
}

// Cofactor-expansion determinant, the brute-force oracle for psd_logdet.
double brute_det(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n == 1) return m(0, 0);
    double det = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            Eigen::Index at = 0;
            for (Eigen::Index c = 0; c < n; ++c)
                if (c != j) minor(r - 1, at++) = m(r, c);
        }
        det += (j % 2 == 0 ? 1.0 : -1.0) * m(0, j) * brute_det(minor);
    }
    return det;
}

// Taylor series for Phi(x) via erf, precise to well under 1e-12 for |x| <= 3.
double series_normal_cdf(double x) {
    const double t = x / std::numbers::sqrt2;
    double term = t, sum = t;
    for (int k = 1; k < 80; ++k) {
        term *= -t * t / static_cast<double>(k);
        sum += term / static_cast<double>(2 * k + 1);
    }
    const double erf_t = 2.0 / std::sqrt(std::numbers::pi) * sum;
    return 0.5 * (1.0 + erf_t);
}

}  // namespace

TEST_CASE("jittered_cholesky identity") {
    const PsdFactor f = jittered_cholesky(Eigen::MatrixXd::Identity(3, 3), 0.0);
    CHECK(f.jitter_used == 0.0);
    CHECK((f.lower_triangular - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jittered_cholesky hand 2x2") {
    Eigen::MatrixXd a(2, 2);
    a << 4, 2, 2, 3;
    const PsdFactor f = jittered_cholesky(a, 0.0);
    CHECK(f.lower_triangular(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.lower_triangular(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.lower_triangular(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(f.lower_triangular(0, 1) == 0.0);
}

TEST_CASE("jittered_cholesky rank-deficient escalates") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 1, 1, 1;
    const PsdFactor f = jittered_cholesky(a, 1e-8);
    CHECK(f.jitter_used >= 1e-8);
    const Eigen::MatrixXd rec = f.lower_triangular * f.lower_triangular.transpose();
    Eigen::MatrixXd target = a;
    target.diagonal().array() += f.jitter_used;
    CHECK((rec - target).norm() <= 1e-10 * a.norm());
}

TEST_CASE("jittered_cholesky rejects asymmetry") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 0, 1;
    CHECK_THROWS_AS(jittered_cholesky(a, 0.0), NotSymmetricError);
}

TEST_CASE("jittered_cholesky round-trip property") {
    RandomStream rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd a = random_spd(rng, 10);
        const PsdFactor f = jittered_cholesky(a, 1e-8);
        Eigen::MatrixXd target = a;
        target.diagonal().array() += f.jitter_used;
        const double rel =
            (f.lower_triangular * f.lower_triangular.transpose() - target).norm() / a.norm();
        CHECK(rel <= 1e-10);
    }
}

TEST_CASE("psd_solve identity and hand inverse") {
    const PsdFactor id = jittered_cholesky(Eigen::MatrixXd::Identity(3, 3), 0.0);
    Eigen::VectorXd b(3);
    b << 1, -2, 5;
    CHECK((psd_solve(id, b) - b).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd a(2, 2);
    a << 4, 2, 2, 3;
    Eigen::VectorXd rhs(2);
    rhs << 1, 0;
    const Eigen::VectorXd x = psd_solve(jittered_cholesky(a, 0.0), rhs);
    CHECK(x[0] == doctest::Approx(0.375).epsilon(1e-13));
    CHECK(x[1] == doctest::Approx(-0.25).epsilon(1e-13));
}

TEST_CASE("psd_solve round-trip") {
    RandomStream rng(5);
    const Eigen::MatrixXd a = random_spd(rng, 10);
    const PsdFactor f = jittered_cholesky(a, 0.0);
    const Eigen::VectorXd b = rng.normal_vector(10);
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += f.jitter_used;
    CHECK((shifted * psd_solve(f, b) - b).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK_THROWS_AS(psd_solve(f, Eigen::MatrixXd::Zero(4, 1)), DimensionMismatchError);
}

TEST_CASE("psd_logdet basics and brute-force oracle") {
    CHECK(psd_logdet(jittered_cholesky(Eigen::MatrixXd::Identity(4, 4), 0.0)) == 0.0);
    Eigen::MatrixXd d = Eigen::Vector2d(2.0, 3.0).asDiagonal();
    CHECK(psd_logdet(jittered_cholesky(d, 0.0)) == doctest::Approx(std::log(6.0)).epsilon(1e-13));

    RandomStream rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd a = random_spd(rng, 5);
        const double expected = std::log(brute_det(a));
        const double got = psd_logdet(jittered_cholesky(a, 0.0));
        CHECK(std::abs(got - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
    }
}

TEST_CASE("gaussian_entropy") {
    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    const double scalar = gaussian_entropy(jittered_cholesky(one, 0.0));
    CHECK(scalar == doctest::Approx(0.5 * (1.0 + std::log(2.0 * std::numbers::pi))).epsilon(1e-13));

    Eigen::MatrixXd esq(1, 1);
    esq << std::exp(2.0);
    CHECK(gaussian_entropy(jittered_cholesky(esq, 0.0)) ==
          doctest::Approx(scalar + 1.0).epsilon(1e-13));

    Eigen::MatrixXd diag = Eigen::Vector2d(0.7, 0.7).asDiagonal();
    Eigen::MatrixXd sub(1, 1);
    sub << 0.7;
    CHECK(gaussian_entropy(jittered_cholesky(diag, 0.0)) ==
          doctest::Approx(2.0 * gaussian_entropy(jittered_cholesky(sub, 0.0))).epsilon(1e-13));

    // Monotone in each diagonal entry.
    Eigen::MatrixXd grown = diag;
    grown(1, 1) = 1.1;
    CHECK(gaussian_entropy(jittered_cholesky(grown, 0.0)) >
          gaussian_entropy(jittered_cholesky(diag, 0.0)));
}

TEST_CASE("standard_normal_cdf") {
    CHECK(standard_normal_cdf(0.0) == 0.5);
    CHECK(standard_normal_cdf(-10.0) < 1e-22);
    CHECK_THROWS_AS(standard_normal_cdf(std::nan("")), NonFiniteError);

    for (double x : {-3.0, -1.5, -0.3, 0.7, 1.0, 2.5})
        CHECK(std::abs(standard_normal_cdf(x) - series_normal_cdf(x)) <= 1e-12);

    RandomStream rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const double x = rng.uniform(-6.0, 6.0);
        CHECK(std::abs(standard_normal_cdf(x) + standard_normal_cdf(-x) - 1.0) <= 1e-12);
    }
}

TEST_CASE("skew_normal_sample moments and determinism") {
    CHECK_THROWS_AS([] {
        RandomStream rng(1);
        skew_normal_sample(rng, 0.0, 0.0, 1.0);
    }(), InvalidScaleError);

    {
        RandomStream a(42), b(42);
        CHECK(skew_normal_sample(a, 0.3, 1.2, -2.0) == skew_normal_sample(b, 0.3, 1.2, -2.0));
    }

    const Eigen::Index n = 100000;
    {
        // alpha = 0 reduces to N(xi, omega^2); also sample skewness near 0.
        RandomStream rng(9);
        double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) sum += skew_normal_sample(rng, 1.5, 2.0, 0.0);
        const double mean = sum / static_cast<double>(n);
        CHECK(std::abs(mean - 1.5) <= 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
        RandomStream rng2(10);
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (auto& x : xs) x = skew_normal_sample(rng2, 0.0, 1.0, 0.0);
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(n);
        for (double x : xs) {
            sum2 += (x - m) * (x - m);
            sum3 += (x - m) * (x - m) * (x - m);
        }
        const double sd = std::sqrt(sum2 / static_cast<double>(n));
        const double skew = (sum3 / static_cast<double>(n)) / (sd * sd * sd);
        CHECK(std::abs(skew) <= 3.0 * std::sqrt(6.0 / static_cast<double>(n)));
    }
    {
        // Analytic mean xi + omega * delta * sqrt(2/pi).
        const double xi = -0.4, omega = 0.8, alpha = 3.0;
        const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
        const double expected = xi + omega * delta * std::sqrt(2.0 / std::numbers::pi);
        RandomStream rng(17);
        double sum = 0.0, sum2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = skew_normal_sample(rng, xi, omega, alpha);
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = sum2 / static_cast<double>(n) - mean * mean;
        CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(var / static_cast<double>(n)));
    }
}

TEST_CASE("median_heuristic") {
    Eigen::MatrixXd two(2, 1);
    two << 0, 1;
    CHECK(median_heuristic(two) == 1.0);

    Eigen::MatrixXd three(3, 1);
    three << 0, 1, 3;
    CHECK(median_heuristic(three) == 2.0);

    Eigen::MatrixXd plane(2, 2);
    plane << 0, 0, 3, 4;
    CHECK(median_heuristic(plane) == 5.0);

    bool degenerate = false;
    Eigen::MatrixXd same = Eigen::MatrixXd::Constant(4, 2, 0.3);
    CHECK(median_heuristic(same, &degenerate) == 1.0);
    CHECK(degenerate);
}
