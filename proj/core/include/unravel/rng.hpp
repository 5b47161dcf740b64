#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace unravel {

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: the n-th block of a
// stream is a pure function of (key, stream, n), so trajectories can be
// generated on any thread in any order with bit-identical results.
class Philox4x32 {
  public:
    using block_t = std::array<std::uint32_t, 4>;

    static block_t round10(block_t ctr, std::uint32_t k0, std::uint32_t k1) {
        for (int r = 0; r < 10; ++r) {
            ctr = single_round(ctr, k0, k1);
            k0 += 0x9E3779B9u; // golden-ratio Weyl increments
            k1 += 0xBB67AE85u;
        }
        return ctr;
    }

  private:
    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    static block_t single_round(const block_t& c, std::uint32_t k0, std::uint32_t k1) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(0xD2511F53u, c[0], hi0, lo0);
        mulhilo(0xCD9E8D57u, c[2], hi1, lo1);
        return {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    }
};

/// One deterministic random stream, addressed by (seed, stream index).
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : k0_(static_cast<std::uint32_t>(seed)),
          k1_(static_cast<std::uint32_t>(seed >> 32)),
          s0_(static_cast<std::uint32_t>(stream)),
          s1_(static_cast<std::uint32_t>(stream >> 32)) {}

    std::uint64_t next_u64() {
        if (word_ < 2) refill(); // word_ counts unconsumed 32-bit lanes
        word_ -= 2;
        const std::uint64_t hi = block_[word_ + 1];
        const std::uint64_t lo = block_[word_];
        return (hi << 32) | lo;
    }

    /// Uniform on the open interval (0,1); never returns an endpoint.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal via Box-Muller (second value cached).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// N(0, variance)
    double gaussian(double variance) { return gaussian() * std::sqrt(variance); }

    double exponential() { return -std::log(uniform()); }

  private:
    void refill() {
        block_ = Philox4x32::round10(
            {static_cast<std::uint32_t>(n_), static_cast<std::uint32_t>(n_ >> 32), s0_, s1_},
            k0_, k1_);
        ++n_;
        word_ = 4;
    }

    std::uint32_t k0_, k1_, s0_, s1_;
    std::uint64_t n_ = 0;
    Philox4x32::block_t block_{};
    int word_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

} // namespace unravel
