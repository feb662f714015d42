#pragma once

// Counter-based random streams.
//
// Every stream is a Philox4x32-10 generator keyed by a 64-bit seed, with the
// upper half of the 128-bit counter holding a 64-bit stream id. Distinct
// (seed, stream) pairs never share counter space, so trial i of an experiment
// seeded with base seed s uses seed s + i and is independent of every other
// trial. All distributions below are implemented here rather than taken from
// <random> because the standard distributions are implementation-defined and
// would break cross-platform reproducibility of recorded traces.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace rimk {

namespace stream {
// Well-known stream ids within one seed.
inline constexpr std::uint64_t kDraws = 0;
inline constexpr std::uint64_t kFamily = 1;
inline constexpr std::uint64_t kProblem = 2;
}  // namespace stream

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Block single_round(const Block& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Seeded random stream. Satisfies std::uniform_random_bit_generator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream_id = stream::kDraws) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream_id) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (lane_ == 2) refill();
        const auto lo = buffer_[2 * lane_];
        const auto hi = buffer_[2 * lane_ + 1];
        ++lane_;
        return (std::uint64_t{hi} << 32) | lo;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform01_open_low() noexcept { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by Lemire's multiply-and-reject.
    std::uint64_t below(std::uint64_t bound) noexcept {
        __uint128_t prod = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(prod);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                prod = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(prod);
            }
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform01_open_low()));
        const double angle = 2.0 * std::numbers::pi * uniform01();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// +1 or -1 with equal probability.
    double sign() noexcept { return ((*this)() >> 63) != 0 ? -1.0 : 1.0; }

    void fill_normal(std::span<double> out) noexcept {
        for (auto& v : out) v = normal();
    }

    /// Uniformly random permutation of {0, ..., n-1} (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    /// q distinct indices drawn uniformly from {0, ..., n-1}, returned sorted (Floyd).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t q) {
        std::vector<std::size_t> chosen;
        chosen.reserve(q);
        for (std::size_t j = n - q; j < n; ++j) {
            const auto t = static_cast<std::size_t>(below(j + 1));
            const auto it = std::lower_bound(chosen.begin(), chosen.end(), t);
            if (it != chosen.end() && *it == t) {
                chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), j), j);
            } else {
                chosen.insert(it, t);
            }
        }
        return chosen;
    }

    [[nodiscard]] std::uint64_t position() const noexcept { return counter_ * 2 + lane_ - 2; }

private:
    void refill() noexcept {
        const Philox4x32::Block ctr{static_cast<std::uint32_t>(counter_),
                                    static_cast<std::uint32_t>(counter_ >> 32),
                                    static_cast<std::uint32_t>(stream_),
                                    static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = Philox4x32::generate(ctr, key_);
        ++counter_;
        lane_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Philox4x32::Block buffer_{};
    unsigned lane_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rimk
