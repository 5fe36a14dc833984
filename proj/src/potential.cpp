#include "ri/potential.hpp"

#include <cmath>
#include <stdexcept>

#include "ri/green.hpp"
#include "ri/parallel.hpp"

namespace ri {

EquilibriumMeasure equilibrium_sample(const Box& box, int escape_radius,
                                      uint64_t samples_per_site, RngKey key, int threads) {
    if (box.dim < 3) throw std::invalid_argument("equilibrium_sample: requires d >= 3");
    if (escape_radius <= 2 * box.radius)
        throw std::invalid_argument("equilibrium_sample: escape radius must exceed 2 * box radius");
    if (samples_per_site == 0)
        throw std::invalid_argument("equilibrium_sample: sample budget must be positive");

    EquilibriumMeasure eq;
    eq.box = box;
    eq.escape_radius = escape_radius;
    eq.samples_per_site = samples_per_site;
    eq.sites = box.boundary_sites();

    const int d = box.dim;
    const int32_t br = box.radius;
    const size_t n_sites = eq.sites.size();
    eq.escape_count.assign(n_sites, 0.0);

    // Walks for site s use stream (key, "eq", s); re-entry is detected from
    // the changed coordinate alone, tracking how many coordinates sit inside
    // [-br, br], so each step stays O(1).
    parallel_for(n_sites, threads, [&](uint64_t s, int) {
        Rng rng(key.child(0x6571 /* "eq" */, s));
        StepSource src(rng, d);
        const Point start = eq.sites[s];
        uint64_t escaped = 0;
        for (uint64_t rep = 0; rep < samples_per_site; ++rep) {
            Point p = start;
            int inside_coords = 0;
            for (int a = 0; a < d; ++a)
                if (p.c[a] >= -br && p.c[a] <= br) ++inside_coords;
            uint64_t steps = 0;
            for (;;) {
                if (steps++ >= kDefaultStepCap)
                    throw std::runtime_error("equilibrium_sample: step cap exceeded");
                uint32_t r = src.next();
                int axis = static_cast<int>(r >> 1);
                int32_t& x = p.c[axis];
                const int was_in = (x >= -br) & (x <= br);
                x += static_cast<int32_t>(r & 1u) * 2 - 1;
                const int is_in = (x >= -br) & (x <= br);
                // branchless: the +-br crossings mispredict if conditional
                inside_coords += is_in - was_in;
                if (inside_coords == d) break;  // re-entered B: failure
                if (x > escape_radius || x < -escape_radius) {
                    ++escaped;  // reached the shell: escape
                    break;
                }
            }
        }
        eq.escape_count[s] = static_cast<double>(escaped);
    });

    double cap = 0.0, var = 0.0;
    const double n = static_cast<double>(samples_per_site);
    for (size_t s = 0; s < n_sites; ++s) {
        double p = eq.escape_count[s] / n;
        cap += p;
        var += p * (1.0 - p) / n;  // independent binomials per site
    }
    if (cap <= 0.0)
        throw std::runtime_error("equilibrium_sample: no walk escaped; capacity estimate is zero");

    eq.capacity = PotentialEstimate{cap, std::sqrt(var), samples_per_site, escape_radius};
    eq.reentry_bias_bound =
        cap * green_asymptotic(box.dim, static_cast<double>(escape_radius));

    eq.weight.resize(n_sites);
    eq.cdf.resize(n_sites);
    double acc = 0.0;
    for (size_t s = 0; s < n_sites; ++s) {
        eq.weight[s] = eq.escape_count[s] / n / cap;
        acc += eq.weight[s];
        eq.cdf[s] = acc;
    }
    eq.cdf.back() = 1.0;  // pin the top of the CDF against rounding drift
    return eq;
}

}  // namespace ri
