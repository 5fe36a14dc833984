#pragma once

#include <cstdint>
#include <vector>

#include "ri/lattice.hpp"
#include "ri/rng.hpp"

namespace ri {

struct PotentialEstimate {
    double value = 0;
    double std_err = 0;
    uint64_t samples = 0;   // walks per boundary site
    int escape_radius = 0;
};

// Empirical equilibrium measure of a box B, estimated by truncated escape
// runs: from each boundary site x, n walks run until they either re-enter B
// (failure) or exit B(0, R) (counted as escaped).  e_B(x) is the escaped
// fraction, cap(B) their sum, and the normalized weights form the entry
// distribution of the trajectory sampler.
//
// Truncation is reported, not corrected: an escaped walk re-enters B after
// the shell with probability <= cap(B) * c_d / R^(d-2) (recorded below as
// reentry_bias_bound), so the estimate is the exact equilibrium measure of
// the walk killed at the shell, which overshoots the transient one by that
// factor at most.  Used together with a trajectory guard at the same radius,
// the killed measure is the coherent choice, not just an approximation.
struct EquilibriumMeasure {
    Box box;
    int escape_radius = 0;
    uint64_t samples_per_site = 0;

    std::vector<Point> sites;      // boundary sites, lexicographic order
    std::vector<double> weight;    // normalized: sums to 1 (cdf.back() == 1.0 exactly)
    std::vector<double> cdf;
    std::vector<double> escape_count;  // raw per-site escape counts

    PotentialEstimate capacity;
    double reentry_bias_bound = 0;
};

// Throws if escape_radius <= 2 * box.radius, if the sample budget is zero, or
// if every walk returned (capacity estimate would be zero and the entry
// distribution undefined).
EquilibriumMeasure equilibrium_sample(const Box& box, int escape_radius,
                                      uint64_t samples_per_site, RngKey key, int threads);

}  // namespace ri
