#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cbf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream id, substream id); the n-th 128-bit
/// block of a stream is a pure function of those and n, so parallel workers
/// that own distinct stream ids reproduce the same draws regardless of how
/// the work is scheduled.
class Rng {
public:
    using result_type = std::uint64_t;

    Rng() : Rng(0, 0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double on the open interval (0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via the inverse CDF.
    double normal();
    /// Gamma(shape, scale 1), Marsaglia-Tsang with the u^(1/a) boost for shape < 1.
    double gamma(double shape);
    /// Chi-square with real degrees of freedom.
    double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

    std::uint64_t seed() const { return (std::uint64_t(key_[1]) << 32) | key_[0]; }

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

/// Raw Philox4x32-10 bijection, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Well-known stream tags so modules never collide on (seed, stream).
namespace streams {
inline constexpr std::uint64_t kPosteriorSigma = 1;
inline constexpr std::uint64_t kPriorSigma = 2;
inline constexpr std::uint64_t kOrthantPosterior = 3;
inline constexpr std::uint64_t kOrthantPrior = 4;
inline constexpr std::uint64_t kFallbackPosterior = 5;
inline constexpr std::uint64_t kFallbackPrior = 6;
inline constexpr std::uint64_t kOverlap = 7;
inline constexpr std::uint64_t kAnalytic = 8;
inline constexpr std::uint64_t kImputation = 9;
inline constexpr std::uint64_t kSimulation = 10;

/// Combine a tag with a per-model or per-replicate index.
constexpr std::uint64_t make(std::uint64_t tag, std::uint64_t index) {
    return (tag << 48) ^ index;
}
} // namespace streams

} // namespace cbf
