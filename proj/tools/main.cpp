// Command-line front end: simulate finite-volume percolation curves, fit the
// smoothed profile, solve the constrained minimization, scan annulus decay,
// and run the verification suites.  Every run is seed-reproducible and every
// artifact embeds the producing config, seed, and component versions under a
// "run" key (CSV artifacts carry their statistical identity in columns and
// are accompanied by a JSON summary holding the rest).
//
// Exit codes: 0 success, 1 hard failure (verification suite failed, I/O),
// 2 statistical or property gate failure, 64 usage or precondition error.

#include "CLI11.hpp"
#include "json.hpp"

#include "ri/solver.hpp"
#include "ri/stats.hpp"
#include "ri/theta_model.hpp"
#include "ri/verify.hpp"
#include "ri/version.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitHard = 1;
constexpr int kExitGate = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifact I/O failures are hard errors, not statistical gates.
template <typename F>
void write_artifact(F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        throw HardError(e.what());
    }
}

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE)
        throw UsageError(what + ": bad number '" + s + "'");
    return v;
}

int64_t parse_int(const std::string& s, const std::string& what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE)
        throw UsageError(what + ": bad integer '" + s + "'");
    return v;
}

// Grid syntax: "a:b:step" inclusive of both endpoints within 1e-12, a comma
// list, or a single value.  The colon form snaps the final value to b exactly
// so downstream equality against the grid top is reliable.
std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        const auto parts = split(spec, ':');
        if (parts.size() != 3) throw UsageError(what + ": expected a:b:step");
        const double a = parse_double(parts[0], what);
        const double b = parse_double(parts[1], what);
        const double step = parse_double(parts[2], what);
        if (!(step > 0)) throw UsageError(what + ": step must be positive");
        if (b < a - 1e-12) throw UsageError(what + ": grid end below start");
        for (int k = 0;; ++k) {
            const double v = a + k * step;
            if (v > b + 1e-12) break;
            out.push_back(v);
            if (out.size() > 1000000) throw UsageError(what + ": grid too large");
        }
        if (!out.empty() && std::fabs(out.back() - b) <= 1e-12) out.back() = b;
    } else if (spec.find(',') != std::string::npos) {
        for (const auto& part : split(spec, ','))
            out.push_back(parse_double(part, what));
    } else {
        out.push_back(parse_double(spec, what));
    }
    if (out.empty()) throw UsageError(what + ": empty grid");
    for (size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1]))
            throw UsageError(what + ": values must strictly ascend");
    return out;
}

std::vector<int32_t> parse_radii(const std::string& spec, const std::string& what) {
    std::vector<int32_t> out;
    for (const auto& part : split(spec, ','))
        out.push_back(static_cast<int32_t>(parse_int(part, what)));
    for (size_t i = 0; i < out.size(); ++i) {
        if (out[i] < 1) throw UsageError(what + ": radii must be positive");
        if (i > 0 && out[i] <= out[i - 1])
            throw UsageError(what + ": radii must strictly ascend");
    }
    return out;
}

std::vector<int32_t> default_radii(int32_t probe) {
    std::vector<int32_t> out;
    for (int32_t r : {2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64})
        if (2 * r <= probe) out.push_back(r);
    return out;
}

ri::Domain parse_domain(const std::string& spec) {
    const auto parts = split(spec, ':');
    try {
        if (parts[0] == "ball" && parts.size() >= 2 && parts.size() <= 4) {
            const double radius = parse_double(parts[1], "--domain radius");
            const double h = parts.size() > 2 ? parse_double(parts[2], "--domain h") : 0;
            const double r_max = parts.size() > 3 ? parse_double(parts[3], "--domain r_max") : 0;
            return ri::make_ball(radius, h, r_max);
        }
        if (parts[0] == "box" && parts.size() == 3) {
            const double half = parse_double(parts[1], "--domain half-width");
            const auto n_side = static_cast<int32_t>(parse_int(parts[2], "--domain n_side"));
            return ri::make_box(half, n_side);
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--domain: ") + e.what());
    }
    throw UsageError("--domain: expected ball:R[:h[:r_max]] or box:R:n_side");
}

json domain_to_json(const ri::Domain& dom) {
    if (dom.shape == ri::Domain::Shape::ball)
        return json{{"shape", "ball"},
                    {"radius", dom.radius},
                    {"h", dom.h},
                    {"r_max", dom.r_max}};
    return json{{"shape", "box"}, {"radius", dom.radius}, {"n_side", dom.n_side}};
}

json versions_json() {
    return json{{"lattice", ri::kVersionLattice}, {"soup", ri::kVersionSoup},
                {"stats", ri::kVersionStats},     {"theta", ri::kVersionTheta},
                {"solver", ri::kVersionSolver},   {"cli", ri::kVersionCli}};
}

json run_meta(json config, uint64_t seed) {
    return json{{"config", std::move(config)}, {"seed", seed}, {"versions", versions_json()}};
}

void write_json_file(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw HardError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out.good()) throw HardError("write failed: " + path.string());
}

// Adds the run record to a JSON artifact a library serializer already wrote.
void inject_run_meta(const fs::path& path, const json& meta) {
    json j;
    {
        std::ifstream in(path);
        if (!in) throw HardError("cannot open for reading: " + path.string());
        j = json::parse(in);
    }
    j["run"] = meta;
    write_json_file(j, path);
}

// Output directory: --out flag, else $RI_OUT_DIR, else the working directory.
fs::path resolve_out_dir(const std::string& flag) {
    fs::path dir = ".";
    if (!flag.empty()) {
        dir = flag;
    } else if (const char* env = std::getenv("RI_OUT_DIR"); env != nullptr && *env != '\0') {
        dir = env;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw HardError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

json nlf_to_json(const ri::NlfScan& scan) {
    json j{{"u", scan.u},
           {"radii", scan.radii},
           {"p_hat", scan.p_hat},
           {"positive", scan.positive},
           {"fit_ok", scan.fit_ok}};
    if (scan.fit_ok) {
        j["c0"] = scan.c0;
        j["gamma"] = scan.gamma;
        j["residual"] = scan.residual;
        j["l0"] = scan.l0;
    }
    return j;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
    int d = 3;
    int32_t window = 0;
    int32_t probe = 0;  // 0 means "same as window"
    std::string levels;
    double u_max = -1;
    uint64_t soups = 10000;
    uint64_t seed = 1;
    uint64_t eq_samples = 300;
    int guard = 4;
    int threads = 1;
    std::string nlf_radii;
    int nlf_level = -1;
    std::string out;
};

int run_simulate(const SimulateOpts& o) {
    if (o.d != 3) throw UsageError("--d: only dimension 3 is supported");
    if (o.window <= 0) throw UsageError("--N: window radius must be positive");
    const int32_t probe = o.probe > 0 ? o.probe : o.window;
    if (probe > o.window) throw UsageError("--L: probe radius must not exceed the window");
    const auto levels = parse_grid(o.levels, "--levels");
    if (levels.front() < 0) throw UsageError("--levels: levels must be nonnegative");
    const double u_max = o.u_max >= 0 ? o.u_max : levels.back();
    if (u_max < levels.back()) throw UsageError("--u-max: must cover the top level");
    const size_t nlf_level = o.nlf_level < 0 ? levels.size() - 1 : static_cast<size_t>(o.nlf_level);
    if (nlf_level >= levels.size()) throw UsageError("--nlf-level: index out of range");
    auto radii = o.nlf_radii.empty() ? default_radii(probe) : parse_radii(o.nlf_radii, "--nlf-radii");
    if (!radii.empty() && 2 * radii.back() > probe)
        throw UsageError("--nlf-radii: the annulus needs 2 r <= L");
    const fs::path out_dir = resolve_out_dir(o.out);

    ri::BatchConfig config;
    config.window_radius = o.window;
    config.probe_radius = probe;
    config.levels = levels;
    config.u_max = u_max;
    config.guard_factor = o.guard;
    config.samples_per_site = o.eq_samples;
    config.n_soups = o.soups;
    config.seed = o.seed;
    config.threads = o.threads;

    const ri::BatchSummary summary = ri::run_batch(config);
    const ri::ThetaCurve curve = ri::theta_from_summary(summary, probe);
    ri::NlfScan scan;
    const bool have_scan = !radii.empty();
    if (have_scan) scan = ri::nlf_scan_from_summary(summary, nlf_level, radii);

    const fs::path theta_path = out_dir / "theta.csv";
    const fs::path nlf_path = out_dir / "nlf.csv";
    const fs::path summary_path = out_dir / "simulate.json";
    write_artifact([&] {
        ri::write_theta_csv_file(curve, theta_path.string());
        if (have_scan) {
            std::ofstream nlf_out(nlf_path);
            if (!nlf_out) throw std::runtime_error("cannot open for writing: " + nlf_path.string());
            ri::write_nlf_csv(scan, nlf_out);
            if (!nlf_out.good()) throw std::runtime_error("write failed: " + nlf_path.string());
        }
        json files{{"theta", theta_path.filename().string()}};
        if (have_scan) files["nlf"] = nlf_path.filename().string();
        json j{{"type", "simulate-summary"},
               {"format_version", 1},
               {"files", std::move(files)},
               {"theta", json{{"levels", curve.levels.size()}, {"top", curve.theta.back()}}}};
        if (have_scan) j["nlf"] = nlf_to_json(scan);
        j["run"] = run_meta(json{{"d", o.d},
                                 {"window_radius", o.window},
                                 {"probe_radius", probe},
                                 {"levels", levels},
                                 {"u_max", u_max},
                                 {"guard_factor", o.guard},
                                 {"eq_samples", o.eq_samples},
                                 {"n_soups", o.soups},
                                 {"nlf_radii", radii},
                                 {"nlf_level", nlf_level}},
                            o.seed);
        write_json_file(j, summary_path);
    });

    std::printf("theta curve: %s (%zu levels, %llu soups, L=%d, N=%d)\n", theta_path.c_str(),
                curve.levels.size(), static_cast<unsigned long long>(o.soups), probe, o.window);
    if (have_scan) {
        if (scan.fit_ok)
            std::printf("nlf scan: %s (u=%g, c0=%.4f, gamma=%.4f, residual=%.3f)\n",
                        nlf_path.c_str(), scan.u, scan.c0, scan.gamma, scan.residual);
        else
            std::printf("nlf scan: %s (u=%g, fit unavailable)\n", nlf_path.c_str(), scan.u);
    }
    std::printf("summary: %s\n", summary_path.c_str());

    // The coupling makes these exact, not merely statistical; a violation
    // means the sampler broke.
    for (size_t j = 1; j < curve.theta.size(); ++j)
        if (curve.theta[j] < curve.theta[j - 1])
            throw GateError("theta estimate decreased between levels " +
                            fmt_double(curve.levels[j - 1]) + " and " + fmt_double(curve.levels[j]));
    if (curve.levels.front() == 0 && curve.theta.front() != 0)
        throw GateError("theta at level 0 must be exactly 0");
    return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
    std::string curve;
    std::string toy;
    std::string name;
    double u0 = 0, u1 = 0, u_star = 0;
    std::string out;
};

int run_fit(const FitOpts& o) {
    if (o.curve.empty() == o.toy.empty())
        throw UsageError("fit: exactly one of --curve or --toy is required");
    if (!(o.u0 > 0) || !(o.u1 > o.u0) || !(o.u_star > o.u1))
        throw UsageError("fit: the profile requires 0 < u0 < u1 < u_star (got u0=" +
                         fmt_double(o.u0) + ", u1=" + fmt_double(o.u1) +
                         ", u_star=" + fmt_double(o.u_star) + ")");
    const fs::path out_dir = resolve_out_dir(o.out);

    ri::BaseCurve base;
    json source;
    uint64_t seed = 0;
    if (!o.toy.empty()) {
        try {
            base = ri::toy_base(o.toy);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        source = json{{"toy", o.toy}};
    } else {
        ri::ThetaCurve curve;
        try {
            curve = ri::read_theta_csv_file(o.curve);
        } catch (const std::exception& e) {
            throw UsageError(std::string("fit: ") + e.what());
        }
        if (curve.levels.size() < 8)
            throw UsageError("fit: the curve needs at least 8 levels (found " +
                             std::to_string(curve.levels.size()) + ")");
        if (curve.levels.front() > 1e-12 || curve.levels.back() < o.u0 - 1e-12)
            throw UsageError("fit: the curve must cover [0, u0]");
        if (curve.levels.back() < o.u1 - 1e-12)
            throw UsageError("fit: the curve must extend through u1 = " + fmt_double(o.u1));
        const std::string name =
            o.name.empty() ? fs::path(o.curve).filename().string() : o.name;
        base = ri::fit_base(curve, name);
        seed = curve.seed;
        source = json{{"curve", o.curve},
                      {"levels", curve.levels.size()},
                      {"n_soups", curve.n_soups}};
    }

    const ri::SmoothedTheta profile = ri::build_smoothed_theta(base, o.u0, o.u1, o.u_star);

    const fs::path profile_path = out_dir / "profile.json";
    write_artifact([&] { ri::save_profile_file(profile, profile_path.string()); });
    inject_run_meta(profile_path, run_meta(json{{"u0", o.u0},
                                                {"u1", o.u1},
                                                {"u_star", o.u_star},
                                                {"source", std::move(source)}},
                                           seed));
    std::printf("profile: %s (min theta'=%.3e, min eta'=%.3e, max join gap=%.2e)\n",
                profile_path.c_str(), profile.checks.min_theta_prime,
                profile.checks.min_eta_prime, profile.checks.max_join_gap);
    return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOpts {
    std::string profile;
    std::string toy;
    double u = 0;
    double nu = 0;
    bool have_nu = false;
    std::string nu_grid;
    std::string domain = "ball:1";
    double tol_constraint = 1e-6;
    double fp_tol = 1e-10;
    std::string out;
};

std::unique_ptr<ri::EtaModel> load_model(const SolveOpts& o) {
    if (!o.toy.empty()) {
        const auto parts = split(o.toy, ':');
        if (parts.size() != 4 || parts[0] != "affine")
            throw UsageError("solve: --toy expects affine:theta_u:kappa:u_star");
        try {
            return std::make_unique<ri::AffineEta>(
                o.u, parse_double(parts[1], "--toy theta_u"),
                parse_double(parts[2], "--toy kappa"), parse_double(parts[3], "--toy u_star"));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("solve: ") + e.what());
        }
    }
    try {
        return ri::load_eta_model_file(o.profile);
    } catch (const std::exception& e) {
        throw UsageError(std::string("solve: ") + e.what());
    }
}

int run_solve(const SolveOpts& o) {
    if (o.profile.empty() == o.toy.empty())
        throw UsageError("solve: exactly one of --profile or --toy is required");
    if (!(o.u > 0)) throw UsageError("solve: --u must be positive");
    if (o.have_nu == !o.nu_grid.empty())
        throw UsageError("solve: exactly one of --nu or --nu-grid is required");
    const std::unique_ptr<ri::EtaModel> model = load_model(o);
    const ri::Domain dom = parse_domain(o.domain);
    const double theta_u = model->theta_at(o.u);
    if (!(o.u < model->u_solve_limit()))
        throw UsageError("solve: u must lie below the model's certified limit " +
                         fmt_double(model->u_solve_limit()));
    const fs::path out_dir = resolve_out_dir(o.out);
    const json model_src = o.toy.empty() ? json{{"profile", o.profile}} : json{{"toy", o.toy}};

    if (o.have_nu) {
        if (o.nu < theta_u - 1e-12)
            throw UsageError("solve: requires nu >= theta(u) = " + fmt_double(theta_u));
        const double nu = std::max(o.nu, theta_u);
        const ri::MinimizerResult res =
            ri::solve_min(o.u, nu, *model, dom, o.tol_constraint, o.fp_tol);
        const fs::path min_path = out_dir / "minimizer.json";
        const fs::path phi_path = out_dir / "phi.csv";
        write_artifact([&] {
            ri::save_minimizer_file(res, min_path.string());
            ri::write_profile_csv_file(res, phi_path.string());
        });
        inject_run_meta(min_path, run_meta(json{{"u", o.u},
                                                {"nu", nu},
                                                {"domain", domain_to_json(dom)},
                                                {"model", model_src},
                                                {"tol_constraint", o.tol_constraint},
                                                {"fp_tol", o.fp_tol}},
                                           0));
        double sup_phi = 0;
        for (const double v : res.phi) sup_phi = std::max(sup_phi, v);
        std::printf("minimizer: %s (lambda=%.6g, energy=%.6g, sup phi=%.6g, constraint=%.8g)\n",
                    min_path.c_str(), res.lambda, res.energy, sup_phi, res.constraint);
        std::printf("profile csv: %s\n", phi_path.c_str());
        if (!res.props.passed()) throw GateError("solve: property checks failed");
        return 0;
    }

    const auto nus = parse_grid(o.nu_grid, "--nu-grid");
    if (nus.front() < theta_u - 1e-12)
        throw UsageError("solve: every nu must satisfy nu >= theta(u) = " + fmt_double(theta_u));
    std::vector<double> grid = nus;
    grid.front() = std::max(grid.front(), theta_u);
    const std::vector<ri::JPoint> points = ri::j_curve(o.u, *model, dom, grid);

    const fs::path curve_path = out_dir / "jcurve.csv";
    const fs::path summary_path = out_dir / "jcurve.json";
    write_artifact([&] {
        std::ofstream out(curve_path);
        if (!out) throw std::runtime_error("cannot open for writing: " + curve_path.string());
        out << "nu,j,lambda\n";
        for (const auto& p : points)
            out << fmt_double(p.nu) << ',' << fmt_double(p.j) << ',' << fmt_double(p.lambda)
                << '\n';
        if (!out.good()) throw std::runtime_error("write failed: " + curve_path.string());
        json rows = json::array();
        for (const auto& p : points)
            rows.push_back(json{{"nu", p.nu}, {"j", p.j}, {"lambda", p.lambda}});
        json j{{"type", "j-curve"},
               {"format_version", 1},
               {"files", json{{"curve", curve_path.filename().string()}}},
               {"points", std::move(rows)}};
        j["run"] = run_meta(json{{"u", o.u},
                                 {"nu_grid", grid},
                                 {"domain", domain_to_json(dom)},
                                 {"model", model_src},
                                 {"tol_constraint", o.tol_constraint},
                                 {"fp_tol", o.fp_tol}},
                            0);
        write_json_file(j, summary_path);
    });
    std::printf("j curve: %s (%zu points, J from %.6g to %.6g)\n", curve_path.c_str(),
                points.size(), points.front().j, points.back().j);
    std::printf("summary: %s\n", summary_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOpts {
    std::string suite;
    uint64_t seed = 7;
    int threads = 1;
    std::string out;
};

int run_verify(const VerifyOpts& o) {
    ri::SuiteResult result;
    try {
        result = ri::run_suite(o.suite, o.seed, o.threads);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    size_t passed = 0;
    for (const auto& c : result.criteria) {
        std::printf("[%s] criterion %2d: %s -- %s\n", c.pass ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), c.details.c_str());
        if (c.pass) ++passed;
    }
    const fs::path out_dir = resolve_out_dir(o.out);
    const fs::path report_path = out_dir / ("verify_" + o.suite + ".json");
    write_artifact([&] { ri::write_suite_json_file(result, report_path.string()); });
    inject_run_meta(report_path, run_meta(json{{"suite", o.suite}}, o.seed));
    std::printf("suite %s: %zu/%zu criteria passed (seed %llu), report %s\n", o.suite.c_str(),
                passed, result.criteria.size(), static_cast<unsigned long long>(o.seed),
                report_path.c_str());
    return result.passed() ? 0 : kExitHard;
}

// ---------------------------------------------------------------------------
// scan

struct ScanOpts {
    int32_t window = 24;
    double level = -1;
    double u_max = -1;
    uint64_t soups = 10000;
    uint64_t seed = 1;
    uint64_t eq_samples = 300;
    int guard = 4;
    int threads = 1;
    std::string radii = "2,3,4,6";
    std::string probe_gaps;
    int32_t probe_cap = 0;  // 0 means "same as window"
    std::string out;
};

int run_scan(const ScanOpts& o) {
    if (o.window <= 0) throw UsageError("--N: window radius must be positive");
    if (!(o.level > 0)) throw UsageError("--level: a positive level is required");
    const auto radii = parse_radii(o.radii, "--radii");
    if (radii.empty() || 2 * radii.back() > o.window)
        throw UsageError("--radii: the annulus needs 2 r <= N");
    const double u_max = std::max(o.level, o.u_max);
    const fs::path out_dir = resolve_out_dir(o.out);

    ri::BatchConfig config;
    config.window_radius = o.window;
    config.probe_radius = o.window;
    config.levels = {o.level};
    config.u_max = u_max;
    config.guard_factor = o.guard;
    config.samples_per_site = o.eq_samples;
    config.n_soups = o.soups;
    config.seed = o.seed;
    config.threads = o.threads;

    const ri::BatchSummary summary = ri::run_batch(config);
    const ri::NlfScan scan = ri::nlf_scan_from_summary(summary, 0, radii);

    json j{{"type", "nlf-scan"}, {"format_version", 1}, {"nlf", nlf_to_json(scan)}};
    std::string probe_note;
    if (!o.probe_gaps.empty()) {
        const auto parts = split(o.probe_gaps, ':');
        if (parts.size() != 3) throw UsageError("--probe-gaps: expected u:u':u''");
        const double u = parse_double(parts[0], "--probe-gaps");
        const double u1 = parse_double(parts[1], "--probe-gaps");
        const double u2 = parse_double(parts[2], "--probe-gaps");
        if (!(u < u1) || !(u1 <= u2))
            throw UsageError("--probe-gaps: requires u < u' <= u''");
        if (!scan.fit_ok)
            throw GateError("scan: decay fit unavailable, cannot derive probe radii");
        const int32_t cap = o.probe_cap > 0 ? o.probe_cap : o.window;
        const ri::ProbeRadii probe =
            ri::compute_probe_radii(scan.c0, scan.gamma, scan.l0, u, u1, u2, cap);
        j["probe"] = json{{"l_prime", probe.l_prime},
                          {"l_dprime", probe.l_dprime},
                          {"c3", probe.c3},
                          {"gamma", probe.gamma},
                          {"gaps", json{{"u", u}, {"u_prime", u1}, {"u_dprime", u2}}},
                          {"cap", cap}};
        probe_note = ", L'=" + std::to_string(probe.l_prime) +
                     ", L''=" + std::to_string(probe.l_dprime);
    }

    const fs::path nlf_path = out_dir / "nlf.csv";
    const fs::path summary_path = out_dir / "scan.json";
    write_artifact([&] {
        std::ofstream nlf_out(nlf_path);
        if (!nlf_out) throw std::runtime_error("cannot open for writing: " + nlf_path.string());
        ri::write_nlf_csv(scan, nlf_out);
        if (!nlf_out.good()) throw std::runtime_error("write failed: " + nlf_path.string());
        j["files"] = json{{"nlf", nlf_path.filename().string()}};
        j["run"] = run_meta(json{{"window_radius", o.window},
                                 {"level", o.level},
                                 {"u_max", u_max},
                                 {"guard_factor", o.guard},
                                 {"eq_samples", o.eq_samples},
                                 {"n_soups", o.soups},
                                 {"radii", radii},
                                 {"probe_gaps", o.probe_gaps},
                                 {"probe_cap", o.probe_cap}},
                            o.seed);
        write_json_file(j, summary_path);
    });
    if (scan.fit_ok)
        std::printf("nlf scan: %s (u=%g, c0=%.4f, gamma=%.4f, residual=%.3f%s)\n",
                    nlf_path.c_str(), scan.u, scan.c0, scan.gamma, scan.residual,
                    probe_note.c_str());
    else
        std::printf("nlf scan: %s (u=%g, fit unavailable)\n", nlf_path.c_str(), scan.u);
    std::printf("summary: %s\n", summary_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-interlacement percolation curves, profiles, and minimizers"};
    app.require_subcommand(1);

    SimulateOpts sim_opts;
    auto* sim = app.add_subcommand("simulate", "sample soups and estimate a theta curve");
    sim->add_option("--d", sim_opts.d, "lattice dimension")->capture_default_str();
    sim->add_option("--N", sim_opts.window, "window radius")->required();
    sim->add_option("--L", sim_opts.probe, "probe radius (default: N)");
    sim->add_option("--levels", sim_opts.levels, "level grid a:b:step, comma list, or one value")
        ->required();
    sim->add_option("--soups", sim_opts.soups, "number of soups")->capture_default_str();
    sim->add_option("--seed", sim_opts.seed, "rng seed")->capture_default_str();
    sim->add_option("--guard", sim_opts.guard, "guard band factor")->capture_default_str();
    sim->add_option("--u-max", sim_opts.u_max, "label horizon (default: top level)");
    sim->add_option("--eq-samples", sim_opts.eq_samples,
                    "equilibrium-measure samples per boundary site")
        ->capture_default_str();
    sim->add_option("--threads", sim_opts.threads, "worker threads")->capture_default_str();
    sim->add_option("--nlf-radii", sim_opts.nlf_radii,
                    "annulus scan radii, comma list (default: dyadic up to L/2)");
    sim->add_option("--nlf-level", sim_opts.nlf_level, "level index to scan (default: last)");
    sim->add_option("--out", sim_opts.out, "output directory (default: $RI_OUT_DIR or .)");

    FitOpts fit_opts;
    auto* fit = app.add_subcommand("fit", "build a smoothed C1 profile from a theta curve");
    fit->add_option("--curve", fit_opts.curve, "theta curve CSV path");
    fit->add_option("--toy", fit_opts.toy, "closed-form base, e.g. linear:0.5");
    fit->add_option("--name", fit_opts.name, "source label stored in the profile");
    fit->add_option("--u0", fit_opts.u0, "end of the untouched base range")->required();
    fit->add_option("--u1", fit_opts.u1, "level where the profile reaches 1")->required();
    fit->add_option("--u-star", fit_opts.u_star, "assumed critical level")->required();
    fit->add_option("--out", fit_opts.out, "output directory (default: $RI_OUT_DIR or .)");

    SolveOpts solve_opts;
    auto* solve = app.add_subcommand("solve", "minimize the energy at fixed constraint");
    solve->add_option("--profile", solve_opts.profile, "profile JSON path");
    solve->add_option("--toy", solve_opts.toy, "closed-form model affine:theta_u:kappa:u_star");
    solve->add_option("--u", solve_opts.u, "occupation level")->required();
    solve->add_option("--nu", solve_opts.nu, "constraint target");
    solve->add_option("--nu-grid", solve_opts.nu_grid, "constraint grid a:b:step");
    solve->add_option("--domain", solve_opts.domain, "ball:R[:h[:r_max]] or box:R:n_side")
        ->capture_default_str();
    solve->add_option("--tol-constraint", solve_opts.tol_constraint, "constraint tolerance")
        ->capture_default_str();
    solve->add_option("--fp-tol", solve_opts.fp_tol, "fixed-point tolerance")
        ->capture_default_str();
    solve->add_option("--out", solve_opts.out, "output directory (default: $RI_OUT_DIR or .)");

    VerifyOpts verify_opts;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", verify_opts.suite,
                       "potential | sampler | quotients | solver | rearrangement")
        ->required();
    verify->add_option("--seed", verify_opts.seed, "rng seed")->capture_default_str();
    verify->add_option("--threads", verify_opts.threads, "worker threads")->capture_default_str();
    verify->add_option("--out", verify_opts.out, "output directory (default: $RI_OUT_DIR or .)");

    ScanOpts scan_opts;
    auto* scan = app.add_subcommand("scan", "annulus decay scan and stretched-exponential fit");
    scan->add_option("--N", scan_opts.window, "window radius")->capture_default_str();
    scan->add_option("--level", scan_opts.level, "occupation level")->required();
    scan->add_option("--u-max", scan_opts.u_max, "label horizon (default: level)");
    scan->add_option("--soups", scan_opts.soups, "number of soups")->capture_default_str();
    scan->add_option("--seed", scan_opts.seed, "rng seed")->capture_default_str();
    scan->add_option("--guard", scan_opts.guard, "guard band factor")->capture_default_str();
    scan->add_option("--eq-samples", scan_opts.eq_samples,
                     "equilibrium-measure samples per boundary site")
        ->capture_default_str();
    scan->add_option("--threads", scan_opts.threads, "worker threads")->capture_default_str();
    scan->add_option("--radii", scan_opts.radii, "annulus radii, comma list")
        ->capture_default_str();
    scan->add_option("--probe-gaps", scan_opts.probe_gaps,
                     "derive probe radii for the level triple u:u':u''");
    scan->add_option("--probe-cap", scan_opts.probe_cap, "probe radius cap (default: N)");
    scan->add_option("--out", scan_opts.out, "output directory (default: $RI_OUT_DIR or .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        solve_opts.have_nu = solve->count("--nu") > 0;
        if (sim->parsed()) return run_simulate(sim_opts);
        if (fit->parsed()) return run_fit(fit_opts);
        if (solve->parsed()) return run_solve(solve_opts);
        if (verify->parsed()) return run_verify(verify_opts);
        if (scan->parsed()) return run_scan(scan_opts);
        std::fprintf(stderr, "error: no subcommand\n");
        return kExitUsage;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const GateError& e) {
        std::fprintf(stderr, "gate failure: %s\n", e.what());
        return kExitGate;
    } catch (const HardError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitHard;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "gate failure: %s\n", e.what());
        return kExitGate;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitHard;
    }
}
