#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ri {

// Counter-based pseudo-random streams.
//
// Every consumer derives its own stream from a root key and a list of integer
// tags (task index, replica index, ...).  Streams are cheap value types, and
// the mapping (key, counter) -> output is a pure function of the root seed, so
// results never depend on scheduling or on the host's standard library.  All
// distributions below are hand-rolled for exactly that reason: the std::
// distribution objects are implementation-defined and would break bit-exact
// reproducibility across toolchains.

namespace detail {
// SplitMix64 finalizer; full-avalanche 64-bit mix.
constexpr uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}
constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
}  // namespace detail

// Hierarchical stream key.  child(t) is collision-resistant enough for the
// task-tag trees used here (a few million children per parent).
struct RngKey {
    uint64_t k = 0;

    static RngKey root(uint64_t seed) { return {detail::mix64(seed + detail::kGamma)}; }

    RngKey child(uint64_t tag) const {
        return {detail::mix64(k ^ (detail::kGamma * (tag + 0x632BE59BD9B4E019ull)))};
    }
    RngKey child(uint64_t a, uint64_t b) const { return child(a).child(b); }
    RngKey child(uint64_t a, uint64_t b, uint64_t c) const { return child(a).child(b).child(c); }
};

class Rng {
  public:
    explicit Rng(RngKey key) : state_(key.k) {}

    uint64_t next_u64() {
        state_ += detail::kGamma;
        return detail::mix64(state_);
    }

    // Uniform on (0,1]; 53-bit resolution.  Never returns 0, which keeps
    // level labels strictly positive and log() calls safe.
    double next_unit() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Uniform on [0,1).
    double next_half_open() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exact uniform integer in [0, n).  Lemire multiply-shift with rejection,
    // so the distribution is exactly uniform for every n.
    uint32_t next_below(uint32_t n) {
        uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            uint64_t t = (0ull - n) % n;
            while (lo < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // Poisson by sequential inversion for small means; larger means are split
    // into <=30 chunks, which is exact by additivity of the Poisson family.
    uint64_t poisson(double lambda) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: lambda must be >= 0");
        uint64_t total = 0;
        while (lambda > 30.0) {
            total += poisson_small_(30.0);
            lambda -= 30.0;
        }
        return total + poisson_small_(lambda);
    }

    // Index into a CDF table whose last entry is exactly 1.0.
    uint32_t sample_cdf(const std::vector<double>& cdf) {
        double u = next_unit();
        uint32_t lo = 0, hi = static_cast<uint32_t>(cdf.size() - 1);
        while (lo < hi) {
            uint32_t mid = lo + (hi - lo) / 2;
            if (cdf[mid] < u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

  private:
    uint64_t poisson_small_(double lambda) {
        if (lambda <= 0.0) return 0;
        const double p0 = std::exp(-lambda);
        double u = next_unit();
        double p = p0, cum = p0;
        uint64_t k = 0;
        while (u > cum && k < 4096) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    uint64_t state_;
};

}  // namespace ri
