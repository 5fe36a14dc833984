#include "ri/soup.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace ri {

uint64_t Bitset::count() const {
    uint64_t n = 0;
    for (uint64_t w : words_) n += static_cast<uint64_t>(std::popcount(w));
    return n;
}

SoupSampler::SoupSampler(const EquilibriumMeasure& eq, double u_max, int guard_factor, RngKey key)
    : eq_(eq), window_(eq.box), u_max_(u_max), key_(key) {
    if (guard_factor < 4)
        throw std::invalid_argument("sample_soup: guard factor must be >= 4");
    if (u_max < 0) throw std::invalid_argument("sample_soup: u_max must be >= 0");
    guard_ = Box{window_.dim, window_.radius * guard_factor};
    if (eq.escape_radius != guard_.radius)
        throw std::invalid_argument(
            "sample_soup: entry measure escape radius must equal the guard radius");
    stamp_.assign(window_.site_count(), 0);
    stride_.resize(static_cast<size_t>(window_.dim));
    int64_t s = 1;
    for (int a = window_.dim - 1; a >= 0; --a) {
        stride_[static_cast<size_t>(a)] = s;
        s *= window_.side();
    }
}


// Register/stack-local d = 3 walk.  Consumes randomness exactly like the
// generic path (3-bit rejection, 21 candidates per u64), so both produce
// identical traces.  An indexed local array beats a switch on the axis here:
// the direction is random, so any per-step branch on it mispredicts.
void SoupSampler::trace_walk3_(const Point& entry, Rng& rng, uint64_t stamp_id) {
    const int32_t wr = window_.radius;
    const int32_t gr = guard_.radius;
    const int64_t w = window_.side();
    uint64_t* const stamp = stamp_.data();
    int32_t c[3] = {entry.c[0], entry.c[1], entry.c[2]};
    int inside = 0;
    for (int a = 0; a < 3; ++a)
        if (c[a] >= -wr && c[a] <= wr) ++inside;
    // record logic is spelled out at both use sites: wrapping it in a [&]
    // lambda pins the coordinate array to the stack and costs ~4 ns/step
    if (inside == 3) {
        uint64_t s = static_cast<uint64_t>(((c[0] + wr) * w + (c[1] + wr)) * w + (c[2] + wr));
        if (stamp[s] != stamp_id) {
            stamp[s] = stamp_id;
            scratch_trace_.push_back(static_cast<uint32_t>(s));
        }
    }
    uint64_t buf = 0;
    uint32_t avail = 0;
    uint64_t steps = 0;
    for (;;) {
        if (steps++ >= kDefaultStepCap)
            throw std::runtime_error("sample_soup: step cap exceeded");
        uint32_t r;
        for (;;) {
            if (avail == 0) {
                buf = rng.next_u64();
                avail = 21;
            }
            r = static_cast<uint32_t>(buf & 7u);
            buf >>= 3;
            --avail;
            if (r < 6u) break;
        }
        const uint32_t axis = r >> 1;
        const int32_t step = static_cast<int32_t>(r & 1u) * 2 - 1;
        const int32_t was = c[axis];
        const int32_t v = was + step;
        c[axis] = v;
        if (v > gr || v < -gr) return;  // left the guard: trajectory ends
        // branchless window tracking: the walk hovers around +-wr long enough
        // that a conditional update mispredicts its way to ~2x overall cost
        const int was_in = (was >= -wr) & (was <= wr);
        const int is_in = (v >= -wr) & (v <= wr);
        inside += is_in - was_in;
        if (inside == 3) {
            uint64_t s = static_cast<uint64_t>(((c[0] + wr) * w + (c[1] + wr)) * w + (c[2] + wr));
            if (stamp[s] != stamp_id) {
                stamp[s] = stamp_id;
                scratch_trace_.push_back(static_cast<uint32_t>(s));
            }
        }
    }
}

void SoupSampler::trace_walk_generic_(const Point& entry, Rng& rng,
                                             uint64_t stamp_id) {
    const int d = window_.dim;
    const int32_t wr = window_.radius;
    const int32_t gr = guard_.radius;
    StepSource steps_src(rng, d);

    Point p = entry;
    int inside = 0;
    int64_t site = 0;
    for (int a = 0; a < d; ++a) {
        if (p.c[a] >= -wr && p.c[a] <= wr) ++inside;
        site += (p.c[a] + wr) * stride_[static_cast<size_t>(a)];
    }
    auto record = [&]() {
        uint64_t s = static_cast<uint64_t>(site);
        if (stamp_[s] != stamp_id) {
            stamp_[s] = stamp_id;
            scratch_trace_.push_back(static_cast<uint32_t>(s));
        }
    };
    if (inside == d) record();
    uint64_t steps = 0;
    for (;;) {
        if (steps++ >= kDefaultStepCap)
            throw std::runtime_error("sample_soup: step cap exceeded");
        uint32_t r = steps_src.next();
        int axis = static_cast<int>(r >> 1);
        int32_t& x = p.c[axis];
        int32_t step = static_cast<int32_t>(r & 1u) * 2 - 1;
        const int was_in = (x >= -wr) & (x <= wr);
        x += step;
        site += step * stride_[static_cast<size_t>(axis)];
        if (x > gr || x < -gr) return;  // left the guard: trajectory ends
        const int is_in = (x >= -wr) & (x <= wr);
        inside += is_in - was_in;
        if (inside == d) record();
    }
}

TrajectorySoup SoupSampler::sample(uint64_t soup_index) {
    TrajectorySoup soup;
    soup.window = window_;
    soup.guard = guard_;
    soup.u_max = u_max_;
    soup.cap_estimate = eq_.capacity;
    soup.reentry_bias_bound = eq_.reentry_bias_bound;
    soup.meta = SoupMeta{key_.k, soup_index};
    sample_into(soup_index, [&](double label, uint32_t entry, const std::vector<uint32_t>& trace) {
        soup.trajectories.push_back(Trajectory{label, entry, trace});
    });
    std::sort(soup.trajectories.begin(), soup.trajectories.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  if (a.label != b.label) return a.label < b.label;
                  return a.entry_site < b.entry_site;
              });
    return soup;
}

TrajectorySoup sample_soup(const Box& window, double u_max, int guard_factor,
                           uint64_t samples_per_site, uint64_t soup_index, RngKey key,
                           int threads) {
    if (guard_factor < 4)
        throw std::invalid_argument("sample_soup: guard factor must be >= 4");
    EquilibriumMeasure eq = equilibrium_sample(window, guard_factor * window.radius,
                                               samples_per_site, key.child(0x6571), threads);
    SoupSampler sampler(eq, u_max, guard_factor, key);
    return sampler.sample(soup_index);
}

OccupancyGrid occupancy_at_level(const TrajectorySoup& soup, double u) {
    if (u < 0 || u > soup.u_max)
        throw std::invalid_argument("occupancy_at_level: level must lie in [0, u_max]");
    OccupancyGrid grid;
    grid.window = soup.window;
    grid.level = u;
    grid.occupied = Bitset(soup.window.site_count());
    for (const Trajectory& t : soup.trajectories) {
        if (t.label > u) break;  // trajectories are label-sorted
        for (uint32_t s : t.trace) grid.occupied.set(s);
    }
    return grid;
}

namespace {

// neighbour strides within the window's linear indexing
std::vector<int64_t> window_strides(const Box& w) {
    std::vector<int64_t> st(static_cast<size_t>(w.dim));
    int64_t s = 1;
    for (int a = w.dim - 1; a >= 0; --a) {
        st[static_cast<size_t>(a)] = s;
        s *= w.side();
    }
    return st;
}

}  // namespace

ClusterReport cluster_report(const OccupancyGrid& grid, int32_t probe_radius) {
    const Box& w = grid.window;
    if (probe_radius < 0 || probe_radius > w.radius)
        throw std::invalid_argument("cluster_report: probe radius must lie in [0, window radius]");
    const Box probe{w.dim, probe_radius};

    ClusterReport rep;
    rep.probe_radius = probe_radius;
    rep.component.assign(probe.site_count(), -1);

    const auto pstride = window_strides(probe);
    std::vector<uint32_t> queue;
    int32_t next_id = 0;
    const uint64_t n = probe.site_count();
    for (uint64_t seed = 0; seed < n; ++seed) {
        if (rep.component[seed] != -1) continue;
        Point p = probe.point_at(seed);
        if (grid.occupied.test(w.index_of(p))) continue;
        // flood-fill one vacant component inside B_probe
        uint64_t size = 0;
        rep.component[seed] = next_id;
        queue.clear();
        queue.push_back(static_cast<uint32_t>(seed));
        while (!queue.empty()) {
            uint32_t cur = queue.back();
            queue.pop_back();
            ++size;
            Point q = probe.point_at(cur);
            for (int a = 0; a < w.dim; ++a) {
                for (int dir = -1; dir <= 1; dir += 2) {
                    int32_t c = q.c[a] + dir;
                    if (c < -probe_radius || c > probe_radius) continue;
                    uint64_t nb = static_cast<uint64_t>(static_cast<int64_t>(cur) +
                                                        dir * pstride[static_cast<size_t>(a)]);
                    if (rep.component[nb] != -1) continue;
                    Point qn = q;
                    qn.c[a] = c;
                    if (grid.occupied.test(w.index_of(qn))) continue;
                    rep.component[nb] = next_id;
                    queue.push_back(static_cast<uint32_t>(nb));
                }
            }
        }
        rep.component_sizes.push_back(size);
        ++next_id;
    }

    const uint64_t origin = probe.origin_index();
    rep.origin_in_vacant = rep.component[origin] != -1;
    if (rep.origin_in_vacant) {
        const int32_t oid = rep.component[origin];
        for (uint64_t i = 0; i < n && !rep.origin_connected_to_boundary; ++i)
            if (rep.component[i] == oid && probe.on_boundary(probe.point_at(i)))
                rep.origin_connected_to_boundary = true;
    }
    return rep;
}

int32_t vacant_reach(const OccupancyGrid& grid, int32_t probe_radius,
                     std::vector<uint32_t>& bfs_queue, Bitset& visited) {
    const Box& w = grid.window;
    if (probe_radius < 0 || probe_radius > w.radius)
        throw std::invalid_argument("vacant_reach: probe radius must lie in [0, window radius]");
    const uint64_t origin = w.origin_index();
    if (grid.occupied.test(origin)) return -1;
    if (visited.size() != w.site_count()) visited = Bitset(w.site_count());
    visited.clear();

    const auto stride = window_strides(w);
    bfs_queue.clear();
    bfs_queue.push_back(static_cast<uint32_t>(origin));
    visited.set(origin);
    int32_t reach = 0;
    size_t head = 0;
    while (head < bfs_queue.size()) {
        uint32_t cur = bfs_queue[head++];
        Point q = w.point_at(cur);
        int32_t r = sup_norm(q, w.dim);
        if (r > reach) {
            reach = r;
            if (reach >= probe_radius) return probe_radius;  // every smaller shell was crossed
        }
        for (int a = 0; a < w.dim; ++a) {
            for (int dir = -1; dir <= 1; dir += 2) {
                int32_t c = q.c[a] + dir;
                if (c < -w.radius || c > w.radius) continue;
                uint64_t nb = static_cast<uint64_t>(static_cast<int64_t>(cur) +
                                                    dir * stride[static_cast<size_t>(a)]);
                if (visited.test(nb) || grid.occupied.test(nb)) continue;
                visited.set(nb);
                bfs_queue.push_back(static_cast<uint32_t>(nb));
            }
        }
    }
    return reach < probe_radius ? reach : probe_radius;
}

// --- binary dump ---

namespace {

constexpr char kMagic[8] = {'R', 'I', 'S', 'O', 'U', 'P', '0', '1'};

template <class T>
void put(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (!in) throw std::runtime_error("load_soup: truncated stream");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void dump_soup(const TrajectorySoup& soup, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    put<uint32_t>(out, static_cast<uint32_t>(soup.window.dim));
    put<int32_t>(out, soup.window.radius);
    put<int32_t>(out, soup.guard.radius);
    put<double>(out, soup.u_max);
    put<double>(out, soup.cap_estimate.value);
    put<double>(out, soup.cap_estimate.std_err);
    put<uint64_t>(out, soup.cap_estimate.samples);
    put<int32_t>(out, soup.cap_estimate.escape_radius);
    put<double>(out, soup.reentry_bias_bound);
    put<uint64_t>(out, soup.meta.root_key);
    put<uint64_t>(out, soup.meta.soup_index);
    put<uint64_t>(out, soup.trajectories.size());
    std::vector<uint32_t> sorted;
    for (const Trajectory& t : soup.trajectories) {
        put<double>(out, t.label);
        put<uint32_t>(out, t.entry_site);
        sorted = t.trace;
        std::sort(sorted.begin(), sorted.end());
        // run-length encode consecutive site indices
        std::vector<std::pair<uint32_t, uint32_t>> runs;
        for (size_t i = 0; i < sorted.size();) {
            size_t j = i + 1;
            while (j < sorted.size() && sorted[j] == sorted[j - 1] + 1) ++j;
            runs.emplace_back(sorted[i], static_cast<uint32_t>(j - i));
            i = j;
        }
        put<uint64_t>(out, sorted.size());
        put<uint64_t>(out, runs.size());
        for (auto [start, len] : runs) {
            put<uint32_t>(out, start);
            put<uint32_t>(out, len);
        }
    }
}

TrajectorySoup load_soup(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_soup: bad magic/version");
    TrajectorySoup soup;
    soup.window.dim = static_cast<int>(get<uint32_t>(in));
    soup.window.radius = get<int32_t>(in);
    soup.guard = Box{soup.window.dim, get<int32_t>(in)};
    soup.u_max = get<double>(in);
    soup.cap_estimate.value = get<double>(in);
    soup.cap_estimate.std_err = get<double>(in);
    soup.cap_estimate.samples = get<uint64_t>(in);
    soup.cap_estimate.escape_radius = get<int32_t>(in);
    soup.reentry_bias_bound = get<double>(in);
    soup.meta.root_key = get<uint64_t>(in);
    soup.meta.soup_index = get<uint64_t>(in);
    uint64_t k = get<uint64_t>(in);
    soup.trajectories.resize(k);
    for (uint64_t j = 0; j < k; ++j) {
        Trajectory& t = soup.trajectories[j];
        t.label = get<double>(in);
        t.entry_site = get<uint32_t>(in);
        uint64_t total = get<uint64_t>(in);
        uint64_t n_runs = get<uint64_t>(in);
        t.trace.reserve(total);
        for (uint64_t r = 0; r < n_runs; ++r) {
            uint32_t start = get<uint32_t>(in);
            uint32_t len = get<uint32_t>(in);
            for (uint32_t i = 0; i < len; ++i) t.trace.push_back(start + i);
        }
        if (t.trace.size() != total) throw std::runtime_error("load_soup: trace length mismatch");
    }
    return soup;
}

void dump_soup_file(const TrajectorySoup& soup, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_soup: cannot open " + path);
    dump_soup(soup, out);
}

TrajectorySoup load_soup_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_soup: cannot open " + path);
    return load_soup(in);
}

}  // namespace ri
