#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace activecq {

// Counter-based random stream "splitmix-bm-v1".
//
// Output i of a stream with seed s is splitmix64 applied to the state
// s + (i+1) * 0x9E3779B97F4A7C15. Uniform doubles take the top 53 bits,
// normals use the basic Box-Muller transform (two uniforms per draw, the
// sine branch is discarded). Substreams are derived by hashing a tag into
// the seed, so independent parts of an experiment never share counters.
// The transforms are fixed; changing any of them requires a new version
// string in dataset metadata.
class RandomStream {
  public:
    static constexpr std::string_view kVersion = "splitmix-bm-v1";

    explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller; consumes two uniforms.
    double normal();
    double normal(double mean, double sd);

    /// Integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n);

    Eigen::VectorXd normal_vector(Eigen::Index n);
    Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);

    /// Independent stream derived from this one's seed and a tag.
    RandomStream fork(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Fisher-Yates draw of k distinct indices from [0, n).
std::vector<Eigen::Index> sample_without_replacement(RandomStream& rng, Eigen::Index n,
                                                     Eigen::Index k);

}  // namespace activecq
