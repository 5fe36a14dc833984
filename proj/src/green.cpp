#include "ri/green.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "ri/lattice.hpp"
#include "ri/parallel.hpp"

namespace ri {

namespace {

// Midpoint sum of the Fourier integrand over [0,pi]^d (even symmetry) with n
// nodes per axis.  The innermost two axes are evaluated as a precomputed
// pairwise table to keep the d-deep loop cheap.
double midpoint_sum(int d, int n) {
    const double h = M_PI / n;
    std::vector<double> c(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) c[static_cast<size_t>(i)] = std::cos((i + 0.5) * h);

    std::vector<double> pair(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pair[static_cast<size_t>(i) * n + j] = c[static_cast<size_t>(i)] + c[static_cast<size_t>(j)];

    // iterate over the outer d-2 axes with a mixed-radix counter
    std::vector<int> idx(static_cast<size_t>(d - 2), 0);
    const double inv_d = 1.0 / d;
    double total = 0.0;
    for (;;) {
        double outer = 0.0;
        for (int a = 0; a < d - 2; ++a) outer += c[static_cast<size_t>(idx[static_cast<size_t>(a)])];
        double acc = 0.0;
        for (size_t p = 0; p < pair.size(); ++p) acc += 1.0 / (1.0 - (outer + pair[p]) * inv_d);
        total += acc;
        int a = 0;
        while (a < d - 2) {
            if (++idx[static_cast<size_t>(a)] < n) break;
            idx[static_cast<size_t>(a)] = 0;
            ++a;
        }
        if (a == d - 2) break;
    }
    double cells = 1.0;
    for (int i = 0; i < d; ++i) cells *= n;
    return total / cells;
}

double green_origin_uncached(int d) {
    if (d < 3) throw std::invalid_argument("green_origin: requires d >= 3 (walk recurrent below)");
    // Neville table for an error expansion in powers of h (the leading
    // midpoint error from the |t|^-2 corner is O(h^(d-2)), and lower-order
    // columns are harmless when absent).
    const double tol = 1e-7;
    std::vector<std::vector<double>> t;
    int n = 8;
    double prev = 0.0;
    for (int row = 0; row < 8; ++row) {
        // keep the total work bounded for large d
        double cost = std::pow(static_cast<double>(n), d);
        if (cost > 4.5e9) break;
        std::vector<double> r{midpoint_sum(d, n)};
        for (size_t j = 1; j <= static_cast<size_t>(row); ++j) {
            double denom = std::pow(2.0, static_cast<double>(j)) - 1.0;
            r.push_back(r[j - 1] + (r[j - 1] - t[static_cast<size_t>(row) - 1][j - 1]) / denom);
        }
        t.push_back(r);
        double best = r.back();
        if (row > 0 && std::abs(best - prev) < tol) return best;
        prev = best;
        n *= 2;
    }
    return prev;
}

}  // namespace

double green_origin(int d) {
    if (d < 3) throw std::invalid_argument("green_origin: requires d >= 3 (walk recurrent below)");
    static std::mutex mu;
    static std::map<int, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    double v = green_origin_uncached(d);
    cache.emplace(d, v);
    return v;
}

double green_asymptotic_constant(int d) {
    if (d < 3) throw std::invalid_argument("green_asymptotic_constant: requires d >= 3");
    return d * std::tgamma(d * 0.5 - 1.0) / (2.0 * std::pow(M_PI, d * 0.5));
}

double green_asymptotic(int d, double r) {
    return green_asymptotic_constant(d) * std::pow(r, 2.0 - d);
}

NeverReturnEstimate never_return_probability(int d, int escape_radius, uint64_t walks,
                                             RngKey key, int threads) {
    if (d < 3) throw std::invalid_argument("never_return_probability: requires d >= 3");
    if (escape_radius < 2) throw std::invalid_argument("never_return_probability: escape radius too small");
    if (walks == 0) throw std::invalid_argument("never_return_probability: need at least one walk");

    const Box guard{d, escape_radius};
    const double cd = green_asymptotic_constant(d);
    // per-walk: survived flag and, for survivors, g_as at the exit site
    std::vector<float> weight(walks, -1.0f);  // -1 marks a returned walk
    parallel_for(walks, threads, [&](uint64_t i, int) {
        Rng rng(key.child(0x6e72 /* "nr" */, i));
        StepSource src(rng, d);
        Point p{};
        int zero_coords = d;  // returned to the origin iff every coordinate is zero
        uint64_t steps = 0;
        const int32_t r = guard.radius;
        for (;;) {
            if (steps++ >= kDefaultStepCap)
                throw std::runtime_error("never_return_probability: step cap exceeded");
            uint32_t dir = src.next();
            int32_t& x = p.c[dir >> 1];
            zero_coords -= (x == 0);
            x += static_cast<int32_t>(dir & 1u) * 2 - 1;
            zero_coords += (x == 0);
            if (zero_coords == d) return;  // returned to the origin
            if (x > r || x < -r) break;    // reached the truncation shell
        }
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += static_cast<double>(p.c[a]) * p.c[a];
        weight[i] = static_cast<float>(cd * std::pow(r2, 0.5 * (2.0 - d)));
    });

    double m1 = 0.0, m2 = 0.0;
    for (uint64_t i = 0; i < walks; ++i) {
        if (weight[i] >= 0.0f) {
            m1 += 1.0;
            m2 += static_cast<double>(weight[i]);
        }
    }
    m1 /= static_cast<double>(walks);
    m2 /= static_cast<double>(walks);
    const double p_hat = m1 / (1.0 + m2);

    // variance of the per-walk contribution 1{survive} * (1 - g_as(exit) p)
    double var = 0.0;
    for (uint64_t i = 0; i < walks; ++i) {
        double w = weight[i] >= 0.0f ? 1.0 - static_cast<double>(weight[i]) * p_hat : 0.0;
        var += (w - p_hat) * (w - p_hat);
    }
    var /= static_cast<double>(walks) * static_cast<double>(walks - 1);

    NeverReturnEstimate est;
    est.p_hat = p_hat;
    est.std_err = std::sqrt(var);
    est.walks = walks;
    est.escape_radius = escape_radius;
    est.tail_correction = m2;
    return est;
}

}  // namespace ri
