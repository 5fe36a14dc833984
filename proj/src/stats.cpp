#include "ri/stats.hpp"

#include "ri/green.hpp"
#include "ri/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ri {

namespace {

void validate_config(const BatchConfig& c) {
    if (c.dim < 3) throw std::invalid_argument("run_batch: dim must be >= 3");
    if (c.window_radius <= 0) throw std::invalid_argument("run_batch: window radius must be positive");
    if (c.probe_radius < 0 || c.probe_radius > c.window_radius)
        throw std::invalid_argument("run_batch: probe radius must lie in [0, window radius]");
    if (c.levels.empty()) throw std::invalid_argument("run_batch: need at least one level");
    if (c.levels.front() < 0) throw std::invalid_argument("run_batch: levels must be nonnegative");
    if (!std::is_sorted(c.levels.begin(), c.levels.end()))
        throw std::invalid_argument("run_batch: levels must ascend");
    if (c.levels.back() > c.u_max)
        throw std::invalid_argument("run_batch: levels exceed u_max; soup does not resolve them");
    if (c.n_soups == 0) throw std::invalid_argument("run_batch: need at least one soup");
    if (c.threads < 1) throw std::invalid_argument("run_batch: threads must be >= 1");
}

struct WorkerCtx {
    SoupSampler sampler;
    OccupancyGrid grid;
    std::vector<uint32_t> queue;
    Bitset visited;
    std::vector<double> labels;
    std::vector<uint32_t> offsets;  // offsets[k]..offsets[k+1] bounds trace k in arena
    std::vector<uint32_t> arena;
    std::vector<uint32_t> order;    // trajectory indices, ascending by label

    WorkerCtx(const EquilibriumMeasure& eq, const BatchConfig& c, RngKey sampler_key)
        : sampler(eq, c.u_max, c.guard_factor, sampler_key),
          grid{Box{c.dim, c.window_radius}, 0.0, Bitset(Box{c.dim, c.window_radius}.site_count())} {}
};

}  // namespace

BatchSummary run_batch(const BatchConfig& config) {
    validate_config(config);
    const Box window{config.dim, config.window_radius};
    const RngKey root = RngKey::root(config.seed);

    BatchSummary out;
    out.config = config;
    out.eq = equilibrium_sample(window, config.guard_factor * config.window_radius,
                                config.samples_per_site, root.child(1), config.threads);

    const size_t nl = config.levels.size();
    const uint64_t n = config.n_soups;
    out.reach.assign(n * nl, 0);
    out.first_cover.assign(n, std::numeric_limits<double>::infinity());
    out.traj_count.assign(n, 0);

    const uint64_t origin = window.origin_index();
    const RngKey sampler_key = root.child(2);

    std::vector<WorkerCtx> ctxs;
    ctxs.reserve(static_cast<size_t>(config.threads));
    for (int t = 0; t < config.threads; ++t) ctxs.emplace_back(out.eq, config, sampler_key);

    parallel_for(n, config.threads, [&](uint64_t s, int worker) {
        WorkerCtx& c = ctxs[static_cast<size_t>(worker)];
        c.labels.clear();
        c.offsets.assign(1, 0);
        c.arena.clear();
        c.sampler.sample_into(s, [&](double label, uint32_t, const std::vector<uint32_t>& trace) {
            c.labels.push_back(label);
            c.arena.insert(c.arena.end(), trace.begin(), trace.end());
            c.offsets.push_back(static_cast<uint32_t>(c.arena.size()));
        });
        const size_t k = c.labels.size();
        out.traj_count[s] = static_cast<uint32_t>(k);
        c.order.resize(k);
        std::iota(c.order.begin(), c.order.end(), 0u);
        std::sort(c.order.begin(), c.order.end(), [&](uint32_t a, uint32_t b) {
            return c.labels[a] != c.labels[b] ? c.labels[a] < c.labels[b] : a < b;
        });

        c.grid.occupied.clear();
        double cover = std::numeric_limits<double>::infinity();
        size_t next = 0;
        size_t j = 0;
        for (; j < nl; ++j) {
            const double u = config.levels[j];
            while (next < k && c.labels[c.order[next]] <= u) {
                const uint32_t t = c.order[next];
                for (uint32_t i = c.offsets[t]; i < c.offsets[t + 1]; ++i) {
                    const uint32_t site = c.arena[i];
                    if (site == origin && !std::isfinite(cover)) cover = c.labels[t];
                    c.grid.occupied.set(site);
                }
                ++next;
            }
            const int32_t r = vacant_reach(c.grid, config.probe_radius, c.queue, c.visited);
            out.reach[s * nl + j] = static_cast<int16_t>(r);
            if (r < 0) break;  // origin occupied; it stays occupied at higher levels
        }
        for (++j; j < nl; ++j) out.reach[s * nl + j] = -1;
        // resolve the first-cover label beyond the last grid level
        for (; next < k && !std::isfinite(cover); ++next) {
            const uint32_t t = c.order[next];
            for (uint32_t i = c.offsets[t]; i < c.offsets[t + 1]; ++i)
                if (c.arena[i] == origin) {
                    cover = c.labels[t];
                    break;
                }
        }
        out.first_cover[s] = cover;
    });
    return out;
}

ThetaCurve theta_from_summary(const BatchSummary& s, int32_t L) {
    if (L < 1 || L > s.config.probe_radius)
        throw std::invalid_argument("theta_from_summary: L must lie in [1, probe radius]");
    const size_t nl = s.n_levels();
    const uint64_t n = s.config.n_soups;
    ThetaCurve curve;
    curve.levels = s.config.levels;
    curve.theta.resize(nl);
    curve.std_err.resize(nl);
    curve.probe_radius = L;
    curve.window_radius = s.config.window_radius;
    curve.n_soups = n;
    curve.seed = s.config.seed;
    for (size_t j = 0; j < nl; ++j) {
        uint64_t cnt = 0;
        for (uint64_t i = 0; i < n; ++i)
            if (s.reach[i * nl + j] < L) ++cnt;
        const double p = static_cast<double>(cnt) / static_cast<double>(n);
        curve.theta[j] = p;
        curve.std_err[j] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
    return curve;
}

ThetaCurve estimate_theta_curve(const std::vector<double>& levels, int32_t L, int32_t N,
                                uint64_t n_soups, uint64_t seed, int threads) {
    BatchConfig config;
    config.window_radius = N;
    config.probe_radius = L;
    config.levels = levels;
    config.u_max = levels.empty() ? 0.0 : levels.back();
    config.n_soups = n_soups;
    config.seed = seed;
    config.threads = threads;
    return theta_from_summary(run_batch(config), L);
}

namespace {

constexpr char kThetaHeader[] = "u,theta_hat,stderr,L,N,n_soups,seed";

void append_double(std::string& line, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, res.ptr);
}

void append_u64(std::string& line, uint64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, res.ptr);
}

double parse_double(const std::string& field, const char* what) {
    double v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw std::runtime_error(std::string("csv: bad ") + what + " field '" + field + "'");
    return v;
}

uint64_t parse_u64(const std::string& field, const char* what) {
    uint64_t v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw std::runtime_error(std::string("csv: bad ") + what + " field '" + field + "'");
    return v;
}

std::vector<std::string> split_fields(const std::string& line, size_t expect) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    if (out.size() != expect)
        throw std::runtime_error("csv: expected " + std::to_string(expect) + " fields, got " +
                                 std::to_string(out.size()));
    return out;
}

}  // namespace

void write_theta_csv(const ThetaCurve& curve, std::ostream& out) {
    out << kThetaHeader << '\n';
    std::string line;
    for (size_t j = 0; j < curve.levels.size(); ++j) {
        line.clear();
        append_double(line, curve.levels[j]);
        line.push_back(',');
        append_double(line, curve.theta[j]);
        line.push_back(',');
        append_double(line, curve.std_err[j]);
        line.push_back(',');
        append_u64(line, static_cast<uint64_t>(curve.probe_radius));
        line.push_back(',');
        append_u64(line, static_cast<uint64_t>(curve.window_radius));
        line.push_back(',');
        append_u64(line, curve.n_soups);
        line.push_back(',');
        append_u64(line, curve.seed);
        out << line << '\n';
    }
}

ThetaCurve read_theta_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kThetaHeader)
        throw std::runtime_error("theta csv: missing or unexpected header");
    ThetaCurve curve;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_fields(line, 7);
        curve.levels.push_back(parse_double(f[0], "u"));
        curve.theta.push_back(parse_double(f[1], "theta_hat"));
        curve.std_err.push_back(parse_double(f[2], "stderr"));
        const int32_t L = static_cast<int32_t>(parse_u64(f[3], "L"));
        const int32_t N = static_cast<int32_t>(parse_u64(f[4], "N"));
        const uint64_t n = parse_u64(f[5], "n_soups");
        const uint64_t seed = parse_u64(f[6], "seed");
        if (first) {
            curve.probe_radius = L;
            curve.window_radius = N;
            curve.n_soups = n;
            curve.seed = seed;
            first = false;
        } else if (L != curve.probe_radius || N != curve.window_radius ||
                   n != curve.n_soups || seed != curve.seed) {
            throw std::runtime_error("theta csv: metadata varies across rows");
        }
    }
    if (first) throw std::runtime_error("theta csv: no data rows");
    return curve;
}

void write_theta_csv_file(const ThetaCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_theta_csv(curve, out);
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

ThetaCurve read_theta_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_theta_csv(in);
}

IdentityReport covering_identity_check(const BatchSummary& s, size_t level_index,
                                       double eps, int32_t L) {
    if (level_index >= s.n_levels())
        throw std::invalid_argument("covering_identity_check: level index out of range");
    if (eps <= 0) throw std::invalid_argument("covering_identity_check: eps must be positive");
    const double u = s.config.levels[level_index];
    if (u + eps > s.config.u_max)
        throw std::invalid_argument("covering_identity_check: u + eps exceeds u_max");
    if (L < 1 || L > s.config.probe_radius)
        throw std::invalid_argument("covering_identity_check: L must lie in [1, probe radius]");

    const double g = green_origin(s.config.dim);
    const double factor = 1.0 - std::exp(-eps / g);
    const size_t nl = s.n_levels();
    const uint64_t n = s.config.n_soups;

    uint64_t n_connected = 0, n_joint = 0;
    for (uint64_t i = 0; i < n; ++i) {
        const bool connected = s.reach[i * nl + level_index] >= L;
        if (!connected) continue;
        ++n_connected;
        const double fc = s.first_cover[i];
        if (fc > u && fc <= u + eps) ++n_joint;
    }

    IdentityReport rep;
    rep.u = u;
    rep.eps = eps;
    rep.probe_radius = L;
    const double dn = static_cast<double>(n);
    rep.joint = static_cast<double>(n_joint) / dn;
    const double p_conn = static_cast<double>(n_connected) / dn;
    rep.expected = factor * p_conn;
    // per-soup contribution t_i = J_i - factor C_i; closed-form moments
    const double sum_t = static_cast<double>(n_joint) - factor * static_cast<double>(n_connected);
    const double sum_t2 = static_cast<double>(n_joint) * (1.0 - factor) * (1.0 - factor) +
                          static_cast<double>(n_connected - n_joint) * factor * factor;
    const double var = (sum_t2 - sum_t * sum_t / dn) / (dn - 1.0);
    rep.std_err = std::sqrt(std::max(var, 0.0) / dn);

    // the soup lives on the walk killed at the guard shell, whose covering
    // rate exceeds 1/g by at most g_as(R)/(g (g - g_as(R)))
    const double g_as = green_asymptotic(s.config.dim,
                                         static_cast<double>(s.config.guard_factor) *
                                             static_cast<double>(s.config.window_radius));
    rep.fv_slack = p_conn * eps * g_as / (g * (g - g_as));
    const double diff = rep.joint - rep.expected;
    rep.z = rep.std_err > 0 ? diff / rep.std_err : 0.0;
    rep.pass = std::abs(diff) <= 3.0 * rep.std_err + rep.fv_slack;
    return rep;
}

bool nlf_fit(const std::vector<int32_t>& radii, const std::vector<double>& p_hat,
             const std::vector<uint64_t>& positive, double& c0, double& gamma,
             double& residual, int32_t& l0) {
    std::vector<double> ls, ys;
    int32_t lmin = 0;
    for (size_t i = 0; i < radii.size(); ++i) {
        if (positive[i] < 10) continue;
        ls.push_back(static_cast<double>(radii[i]));
        ys.push_back(-std::log(p_hat[i]));
        if (lmin == 0 || radii[i] < lmin) lmin = radii[i];
    }
    if (ls.size() < 4) return false;

    double best_rss = std::numeric_limits<double>::infinity();
    double best_c0 = 0, best_gamma = 0;
    for (int k = 1; k <= 1000; ++k) {
        const double gm = static_cast<double>(k) / 1000.0;
        double num = 0, den = 0;
        for (size_t i = 0; i < ls.size(); ++i) {
            const double lg = std::pow(ls[i], gm);
            num += lg * ys[i];
            den += lg * lg;
        }
        const double c = num / den;
        double rss = 0;
        for (size_t i = 0; i < ls.size(); ++i) {
            const double r = ys[i] - c * std::pow(ls[i], gm);
            rss += r * r;
        }
        if (rss < best_rss) {
            best_rss = rss;
            best_c0 = c;
            best_gamma = gm;
        }
    }
    if (!(best_c0 > 0)) return false;
    c0 = best_c0;
    gamma = best_gamma;
    residual = std::sqrt(best_rss / static_cast<double>(ls.size()));
    l0 = lmin;
    return true;
}

NlfScan nlf_scan_from_summary(const BatchSummary& s, size_t level_index,
                              const std::vector<int32_t>& radii) {
    if (level_index >= s.n_levels())
        throw std::invalid_argument("nlf_scan: level index out of range");
    if (radii.empty()) throw std::invalid_argument("nlf_scan: need at least one radius");
    if (!std::is_sorted(radii.begin(), radii.end()) || radii.front() < 1)
        throw std::invalid_argument("nlf_scan: radii must ascend and be positive");
    if (2 * radii.back() > s.config.probe_radius)
        throw std::invalid_argument("nlf_scan: need 2*max(radii) <= probe radius");

    const size_t nl = s.n_levels();
    const uint64_t n = s.config.n_soups;
    NlfScan scan;
    scan.u = s.config.levels[level_index];
    scan.radii = radii;
    scan.window_radius = s.config.window_radius;
    scan.n_soups = n;
    scan.seed = s.config.seed;
    for (int32_t L : radii) {
        uint64_t cnt = 0;
        for (uint64_t i = 0; i < n; ++i) {
            const int16_t r = s.reach[i * nl + level_index];
            if (r >= L && r < 2 * L) ++cnt;
        }
        const double p = static_cast<double>(cnt) / static_cast<double>(n);
        scan.p_hat.push_back(p);
        scan.std_err.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
        scan.positive.push_back(cnt);
    }
    scan.fit_ok = nlf_fit(scan.radii, scan.p_hat, scan.positive, scan.c0, scan.gamma,
                          scan.residual, scan.l0);
    return scan;
}

void write_nlf_csv(const NlfScan& scan, std::ostream& out) {
    out << kThetaHeader << '\n';
    std::string line;
    for (size_t j = 0; j < scan.radii.size(); ++j) {
        line.clear();
        append_double(line, scan.u);
        line.push_back(',');
        append_double(line, scan.p_hat[j]);
        line.push_back(',');
        append_double(line, scan.std_err[j]);
        line.push_back(',');
        append_u64(line, static_cast<uint64_t>(scan.radii[j]));
        line.push_back(',');
        append_u64(line, static_cast<uint64_t>(scan.window_radius));
        line.push_back(',');
        append_u64(line, scan.n_soups);
        line.push_back(',');
        append_u64(line, scan.seed);
        out << line << '\n';
    }
}

ProbeRadii compute_probe_radii(double c0, double gamma, int32_t l0, double u,
                               double u_prime, double u_dprime, int32_t N) {
    if (!(c0 > 0)) throw std::invalid_argument("compute_probe_radii: c0 must be positive");
    if (!(gamma > 0 && gamma <= 1))
        throw std::invalid_argument("compute_probe_radii: gamma must lie in (0,1]");
    if (!(u < u_prime && u_prime <= u_dprime))
        throw std::invalid_argument("compute_probe_radii: need u < u' <= u''");
    ProbeRadii out;
    out.c3 = 2.0 / c0;
    out.gamma = gamma;
    auto radius_for = [&](double du) {
        const double arg = out.c3 * std::log(1.0 / du);
        double val = arg > 0 ? std::pow(arg, 1.0 / gamma) : 0.0;
        int32_t r = static_cast<int32_t>(std::llround(val));
        if (r < l0) r = l0;
        if (r > N)
            throw std::runtime_error(
                "compute_probe_radii: window radius too small for the level gap (L' = " +
                std::to_string(r) + " > N = " + std::to_string(N) + ")");
        return r;
    };
    out.l_prime = radius_for(u_prime - u);
    out.l_dprime = radius_for(u_dprime - u);
    return out;
}

QuotientReport difference_quotients(const BatchSummary& s, size_t iu, size_t iu1,
                                    size_t iu2, int32_t l_prime, int32_t l_dprime) {
    const size_t nl = s.n_levels();
    if (iu >= nl || iu1 >= nl || iu2 >= nl)
        throw std::invalid_argument("difference_quotients: level index out of range");
    const double u = s.config.levels[iu];
    const double u1 = s.config.levels[iu1];
    const double u2 = s.config.levels[iu2];
    if (!(u < u1 && u1 <= u2))
        throw std::invalid_argument("difference_quotients: need u < u' <= u''");
    for (int32_t L : {l_prime, l_dprime})
        if (L < 1 || L > s.config.probe_radius)
            throw std::invalid_argument("difference_quotients: probe radius out of range");

    const uint64_t n = s.config.n_soups;
    auto flip_fraction = [&](size_t ihi, int32_t L, uint64_t& cnt) {
        cnt = 0;
        for (uint64_t i = 0; i < n; ++i) {
            const bool lo = s.reach[i * nl + iu] < L;
            const bool hi = s.reach[i * nl + ihi] < L;
            cnt += static_cast<uint64_t>(hi && !lo);  // coupling: hi >= lo per sample
        }
        return static_cast<double>(cnt) / static_cast<double>(n);
    };

    QuotientReport rep;
    rep.u = u;
    rep.u_prime = u1;
    rep.u_dprime = u2;
    rep.l_prime = l_prime;
    rep.l_dprime = l_dprime;
    uint64_t cnt = 0;
    const double f1 = flip_fraction(iu1, l_prime, cnt);
    rep.delta_prime = f1 / (u1 - u);
    rep.se_prime = std::sqrt(f1 * (1.0 - f1) / static_cast<double>(n)) / (u1 - u);
    const double f2 = flip_fraction(iu2, l_dprime, cnt);
    rep.delta_dprime = f2 / (u2 - u);
    rep.se_dprime = std::sqrt(f2 * (1.0 - f2) / static_cast<double>(n)) / (u2 - u);
    return rep;
}

double verify_comparison_bound(QuotientReport& report, const PotentialEstimate& cap_l_prime) {
    const double cap = cap_l_prime.value;
    const double k = std::exp((report.u_dprime - report.u_prime) * cap);
    const double bound = 3.0 * (report.u_dprime - report.u) * (1.0 + cap * cap) * k;
    const double lhs = std::abs(report.delta_prime - k * report.delta_dprime);
    report.cap_l_prime = cap;
    report.slack = bound - lhs;
    const double sigma = std::sqrt(report.se_prime * report.se_prime +
                                   k * k * report.se_dprime * report.se_dprime);
    // quotient-substitution gaps: each finite-volume quotient sits within
    // (u'-u), resp. (u''-u), of the one the bound is stated for
    report.tolerance = 3.0 * sigma + (report.u_prime - report.u) +
                       k * (report.u_dprime - report.u);
    report.pass = report.slack >= -report.tolerance;
    return report.slack;
}

}  // namespace ri
