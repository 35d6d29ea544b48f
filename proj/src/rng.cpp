#include "activecq/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "activecq/errors.hpp"

namespace activecq {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RandomStream::next_u64() {
    ++counter_;
    return splitmix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RandomStream::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::normal(double mean, double sd) {
    return mean + sd * normal();
}

std::uint64_t RandomStream::below(std::uint64_t n) {
    if (n == 0) throw ZeroCountError("RandomStream::below requires n >= 1");
    return next_u64() % n;
}

Eigen::VectorXd RandomStream::normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
}

Eigen::VectorXd RandomStream::uniform_vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
}

RandomStream RandomStream::fork(std::uint64_t tag) const {
    return RandomStream(splitmix64(seed_ ^ splitmix64(tag)));
}

std::vector<Eigen::Index> sample_without_replacement(RandomStream& rng, Eigen::Index n,
                                                     Eigen::Index k) {
    if (k > n) throw PoolExhaustedError("cannot sample " + std::to_string(k) + " from " +
                                        std::to_string(n));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace activecq
