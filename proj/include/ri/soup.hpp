#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ri/lattice.hpp"
#include "ri/potential.hpp"
#include "ri/rng.hpp"

namespace ri {

// Poissonian soup of labelled random-walk trajectories through a window box.
//
// A soup at level u_max holds K ~ Poisson(u_max * cap(window)) trajectories
// with i.i.d. labels uniform on (0, u_max]; entry sites are drawn from the
// normalized equilibrium measure of the window and each trajectory records
// the window sites its walk visits before first exiting the guard box.
// Restricting to labels <= u yields the occupied set at level u, and because
// the same label thinning is used at every level, occupancy is monotone in u
// per sample, not merely in law.

class Bitset {
  public:
    Bitset() = default;
    explicit Bitset(uint64_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    void set(uint64_t i) { words_[i >> 6] |= 1ull << (i & 63); }
    bool test(uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ull; }
    void clear() { std::fill(words_.begin(), words_.end(), 0ull); }
    uint64_t size() const { return bits_; }
    uint64_t count() const;

  private:
    uint64_t bits_ = 0;
    std::vector<uint64_t> words_;
};

struct Trajectory {
    double label = 0;
    uint32_t entry_site = 0;          // window site index of the entry point
    std::vector<uint32_t> trace;      // window site indices, first-visit order
};

struct SoupMeta {
    uint64_t root_key = 0;   // RngKey the soup streams derive from
    uint64_t soup_index = 0;
};

struct TrajectorySoup {
    Box window;
    Box guard;
    double u_max = 0;
    PotentialEstimate cap_estimate;
    double reentry_bias_bound = 0;
    SoupMeta meta;
    std::vector<Trajectory> trajectories;  // sorted by label, ascending
};

struct OccupancyGrid {
    Box window;
    double level = 0;
    Bitset occupied;

    bool vacant(uint64_t site) const { return !occupied.test(site); }
};

struct ClusterReport {
    int32_t probe_radius = 0;
    bool origin_in_vacant = false;
    bool origin_connected_to_boundary = false;   // 0 <-> shell |x|_inf == L inside the vacant set
    std::vector<int32_t> component;              // per B_L site: component id, -1 if occupied
    std::vector<uint64_t> component_sizes;
};

// Reusable sampler; holds per-worker scratch so the hot loop never allocates.
class SoupSampler {
  public:
    // guard_factor m >= 4; the guard box has radius m * window.radius and the
    // entry measure must have been estimated with escape radius equal to the
    // guard radius so that soup law and entry law agree on the killed walk.
    SoupSampler(const EquilibriumMeasure& eq, double u_max, int guard_factor, RngKey key);

    TrajectorySoup sample(uint64_t soup_index);

    // Low-overhead variant: appends (label, entry, trace) triples through a
    // sink without building a TrajectorySoup.
    template <class Sink>
    void sample_into(uint64_t soup_index, Sink&& sink);

    const Box& window() const { return window_; }
    const Box& guard() const { return guard_; }
    double u_max() const { return u_max_; }
    const EquilibriumMeasure& eq() const { return eq_; }

  private:
    // Walk one trajectory from entry to the guard shell, appending first
    // visits of window sites to scratch_trace_.  The d = 3 variant keeps the
    // whole state in registers; both consume randomness identically.
    void trace_walk3_(const Point& entry, Rng& rng, uint64_t stamp_id);
    void trace_walk_generic_(const Point& entry, Rng& rng, uint64_t stamp_id);

    const EquilibriumMeasure& eq_;
    Box window_;
    Box guard_;
    double u_max_;
    RngKey key_;
    std::vector<uint64_t> stamp_;
    uint64_t stamp_counter_ = 0;
    std::vector<int64_t> stride_;
    std::vector<uint32_t> scratch_trace_;
};

// One-shot convenience matching the module-level contract; estimates the
// entry measure itself (samples_per_site walks per boundary site).
TrajectorySoup sample_soup(const Box& window, double u_max, int guard_factor,
                           uint64_t samples_per_site, uint64_t soup_index, RngKey key,
                           int threads = 1);

// Occupied sites at level u (0 <= u <= u_max).
OccupancyGrid occupancy_at_level(const TrajectorySoup& soup, double u);

// BFS component labelling of the vacant set inside B_L, L <= window radius.
ClusterReport cluster_report(const OccupancyGrid& grid, int32_t probe_radius);

// Largest radius r <= probe_radius such that the origin is connected to the
// shell |x|_inf == r inside the vacant set; -1 if the origin is occupied.
// Single BFS, shared by every probe radius at once.
int32_t vacant_reach(const OccupancyGrid& grid, int32_t probe_radius,
                     std::vector<uint32_t>& bfs_queue, Bitset& visited);

// Versioned little-endian binary dump (traces run-length encoded over sorted
// site indices).  load_soup round-trips dump_soup byte-identically.
void dump_soup(const TrajectorySoup& soup, std::ostream& out);
TrajectorySoup load_soup(std::istream& in);
void dump_soup_file(const TrajectorySoup& soup, const std::string& path);
TrajectorySoup load_soup_file(const std::string& path);

// --- template bodies ---

template <class Sink>
void SoupSampler::sample_into(uint64_t soup_index, Sink&& sink) {
    Rng soup_rng(key_.child(0x736f7570 /* "soup" */, soup_index));
    const double cap = eq_.capacity.value;
    const uint64_t k = soup_rng.poisson(u_max_ * cap);
    const int d = window_.dim;

    for (uint64_t j = 0; j < k; ++j) {
        const double label = u_max_ * soup_rng.next_unit();
        const uint32_t entry_idx = soup_rng.sample_cdf(eq_.cdf);
        const Point entry = eq_.sites[entry_idx];

        Rng walk_rng(key_.child(0x74726a /* "trj" */, soup_index, j));
        scratch_trace_.clear();
        const uint64_t stamp_id = ++stamp_counter_;
        if (d == 3)
            trace_walk3_(entry, walk_rng, stamp_id);
        else
            trace_walk_generic_(entry, walk_rng, stamp_id);
        sink(label, static_cast<uint32_t>(window_.index_of(entry)), scratch_trace_);
    }
}

}  // namespace ri
