#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "ri/rng.hpp"

namespace ri {

// Z^d primitives for d >= 3.  Boxes are sup-norm balls centred at the origin:
// B_L = {x : |x|_inf <= L}, with (2L+1)^d sites; the internal boundary is the
// shell |x|_inf == L (every such site has a neighbour outside B_L).

constexpr int kMaxDim = 8;

struct Point {
    std::array<int32_t, kMaxDim> c{};  // coordinates beyond the dimension stay 0

    bool operator==(const Point&) const = default;
};

inline int32_t sup_norm(const Point& p, int d) {
    int32_t m = 0;
    for (int i = 0; i < d; ++i) {
        int32_t a = p.c[i] < 0 ? -p.c[i] : p.c[i];
        if (a > m) m = a;
    }
    return m;
}

struct Box {
    int dim = 3;
    int32_t radius = 0;

    bool contains(const Point& p) const { return sup_norm(p, dim) <= radius; }
    bool on_boundary(const Point& p) const { return sup_norm(p, dim) == radius; }

    int32_t side() const { return 2 * radius + 1; }

    uint64_t site_count() const {
        uint64_t n = 1;
        for (int i = 0; i < dim; ++i) n *= static_cast<uint64_t>(side());
        return n;
    }

    // Lexicographic (mixed-radix) site index; the canonical enumeration order
    // for serialization and for deterministic weighted sampling.
    uint64_t index_of(const Point& p) const {
        uint64_t idx = 0;
        for (int i = 0; i < dim; ++i)
            idx = idx * static_cast<uint64_t>(side()) + static_cast<uint64_t>(p.c[i] + radius);
        return idx;
    }

    Point point_at(uint64_t idx) const {
        Point p;
        for (int i = dim - 1; i >= 0; --i) {
            p.c[i] = static_cast<int32_t>(idx % static_cast<uint64_t>(side())) - radius;
            idx /= static_cast<uint64_t>(side());
        }
        return p;
    }

    uint64_t origin_index() const { return index_of(Point{}); }

    // Boundary sites in lexicographic order.
    std::vector<Point> boundary_sites() const {
        std::vector<Point> out;
        const uint64_t n = site_count();
        for (uint64_t i = 0; i < n; ++i) {
            Point p = point_at(i);
            if (on_boundary(p)) out.push_back(p);
        }
        return out;
    }
};

struct WalkState {
    Point pos;
    uint64_t steps = 0;
};

constexpr uint64_t kDefaultStepCap = 1'000'000'000ull;

// Direction source for nearest-neighbour steps, exactly uniform over the 2d
// directions via bit-rejection.  For d = 3, 4 it slices one u64 draw into
// 3/4-bit candidates (rejecting the out-of-range ones), which amortizes the
// mix cost over ~20 steps; other d fall back to bounded draws.  Rejection
// keeps the law exactly uniform, and the fixed consumption order keeps every
// stream bit-reproducible.
class StepSource {
  public:
    StepSource(Rng& rng, int d)
        : rng_(rng), two_d_(static_cast<uint32_t>(2 * d)),
          bits_(d == 3 ? 3 : (d == 4 ? 3 : 0)) {
        // 2d = 8 fits 3 bits exactly for d = 4 (no rejection at all)
    }

    // direction in [0, 2d); axis = dir >> 1, sign = dir & 1
    uint32_t next() {
        if (bits_ == 0) return rng_.next_below(two_d_);
        for (;;) {
            if (avail_ == 0) {
                buf_ = rng_.next_u64();
                avail_ = 64 / bits_;
            }
            uint32_t r = static_cast<uint32_t>(buf_ & ((1u << bits_) - 1));
            buf_ >>= bits_;
            --avail_;
            if (r < two_d_) return r;
        }
    }

  private:
    Rng& rng_;
    uint32_t two_d_;
    uint32_t bits_;
    uint64_t buf_ = 0;
    uint32_t avail_ = 0;
};

// One nearest-neighbour step, exactly uniform over the 2d directions.
inline void srw_step(Point& p, int d, Rng& rng) {
    uint32_t r = rng.next_below(static_cast<uint32_t>(2 * d));
    int axis = static_cast<int>(r >> 1);
    p.c[axis] += (r & 1u) ? 1 : -1;
}

// Walk from `start` until the first exit of `guard`, invoking visit(p) at the
// starting point and after every step while the walk is still inside.  The
// returned state holds the first point outside the guard.  Throws if the step
// cap is hit; a cap of 1e9 is ~40x the mean exit time of the largest guard
// boxes used here, so a trip means a configuration (or RNG) bug.
template <class Visit>
WalkState walk_until_exit(const Point& start, const Box& guard, Rng& rng,
                          uint64_t step_cap, Visit&& visit) {
    if (!guard.contains(start)) return WalkState{start, 0};
    WalkState w{start, 0};
    visit(w.pos);
    const int d = guard.dim;
    const int32_t R = guard.radius;
    for (;;) {
        if (w.steps >= step_cap)
            throw std::runtime_error("walk_until_exit: step cap exceeded");
        uint32_t r = rng.next_below(static_cast<uint32_t>(2 * d));
        int axis = static_cast<int>(r >> 1);
        int32_t& x = w.pos.c[axis];
        x += (r & 1u) ? 1 : -1;
        ++w.steps;
        // only the changed coordinate can leave [-R, R]
        if (x > R || x < -R) return w;
        visit(w.pos);
    }
}

struct WalkPath {
    std::vector<Point> visited;  // in visit order, excluding the exit site
    Point exit_site;
    uint64_t steps = 0;
};

inline WalkPath walk_path_until_exit(const Point& start, const Box& guard, Rng& rng,
                                     uint64_t step_cap = kDefaultStepCap) {
    WalkPath path;
    WalkState w = walk_until_exit(start, guard, rng, step_cap,
                                  [&](const Point& p) { path.visited.push_back(p); });
    path.exit_site = w.pos;
    path.steps = w.steps;
    return path;
}

}  // namespace ri
