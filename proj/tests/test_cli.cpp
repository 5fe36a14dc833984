// End-to-end checks of the command-line tool: exit codes, artifact shapes,
// determinism across worker counts, and agreement with in-process results.
// The binary path arrives in the RI_BIN environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "json.hpp"

#include "ri/solver.hpp"
#include "ri/stats.hpp"
#include "ri/theta_model.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin_path() {
    const char* p = std::getenv("RI_BIN");
    REQUIRE_MESSAGE(p != nullptr, "RI_BIN must point at the cli binary");
    return p;
}

fs::path scratch_root() {
    static const fs::path root = [] {
        fs::path dir = fs::temp_directory_path() / "ri_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = scratch_root() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json read_json(const fs::path& path) { return json::parse(read_file(path)); }

int run_cli(const std::string& args, std::string* output = nullptr) {
    static int counter = 0;
    const fs::path log = scratch_root() / ("log_" + std::to_string(counter++) + ".txt");
    const std::string cmd = bin_path() + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output != nullptr) *output = read_file(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

size_t line_count(const std::string& text) {
    size_t n = 0;
    for (const char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("usage errors exit 64") {
    const fs::path dir = fresh_dir("usage");
    CHECK(run_cli("") == 64);
    CHECK(run_cli("frobnicate") == 64);
    CHECK(run_cli("simulate --N 8 --out " + dir.string()) == 64);  // --levels missing
    CHECK(run_cli("simulate --N 8 --levels 0:1:0.5 --d 2 --out " + dir.string()) == 64);
    CHECK(run_cli("verify nonsense --out " + dir.string()) == 64);
    std::string msg;
    CHECK(run_cli("fit --toy linear:0.5 --u0 0.4 --u1 4 --u-star 4 --out " + dir.string(),
                  &msg) == 64);
    CHECK(msg.find("u0 < u1 < u_star") != std::string::npos);
    CHECK(run_cli("solve --toy affine:0.3:1:4 --u 0.09 --out " + dir.string()) == 64);
    CHECK(run_cli("solve --toy affine:0.3:1:4 --u 0.09 --nu 0.2 --out " + dir.string()) == 64);
}

TEST_CASE("simulate writes reproducible artifacts") {
    const fs::path a = fresh_dir("sim_a");
    const fs::path b = fresh_dir("sim_b");
    const std::string base =
        "simulate --N 8 --levels 0:1:0.25 --soups 400 --seed 5 --guard 4 --eq-samples 200";
    CHECK(run_cli(base + " --threads 1 --out " + a.string()) == 0);
    CHECK(run_cli(base + " --threads 3 --out " + b.string()) == 0);
    for (const char* name : {"theta.csv", "nlf.csv", "simulate.json"})
        CHECK_MESSAGE(read_file(a / name) == read_file(b / name),
                      name << " differs across worker counts");

    const ri::ThetaCurve curve = ri::read_theta_csv_file((a / "theta.csv").string());
    REQUIRE(curve.levels.size() == 5);
    CHECK(curve.levels.front() == 0.0);
    CHECK(curve.levels.back() == 1.0);  // grid endpoint snapped exactly
    CHECK(curve.theta.front() == 0.0);
    for (size_t i = 1; i < curve.theta.size(); ++i) CHECK(curve.theta[i] >= curve.theta[i - 1]);
    CHECK(curve.window_radius == 8);
    CHECK(curve.probe_radius == 8);
    CHECK(curve.n_soups == 400);
    CHECK(curve.seed == 5);

    const json summary = read_json(a / "simulate.json");
    CHECK(summary.at("type") == "simulate-summary");
    CHECK(summary.at("run").at("seed") == 5);
    CHECK(summary.at("run").at("config").at("n_soups") == 400);
    CHECK(summary.at("run").at("versions").size() == 6);
    CHECK(summary.at("nlf").at("radii") == json::array({2, 3, 4}));
}

TEST_CASE("simulate accepts a single level") {
    const fs::path dir = fresh_dir("sim_single");
    CHECK(run_cli("simulate --N 6 --levels 0 --soups 200 --seed 2 --out " + dir.string()) == 0);
    const ri::ThetaCurve curve = ri::read_theta_csv_file((dir / "theta.csv").string());
    REQUIRE(curve.levels.size() == 1);
    CHECK(curve.theta.front() == 0.0);
}

TEST_CASE("fit round-trips through the profile artifact") {
    const fs::path dir = fresh_dir("fit_toy");
    CHECK(run_cli("fit --toy linear:0.5 --u0 0.25 --u1 0.55 --u-star 4 --out " + dir.string()) ==
          0);
    const ri::SmoothedTheta reloaded = ri::load_profile_file((dir / "profile.json").string());
    const ri::SmoothedTheta direct =
        ri::build_smoothed_theta(ri::toy_base("linear:0.5"), 0.25, 0.55, 4.0);
    for (double u = 0.05; u < 5.0; u += 0.2) {
        CHECK(reloaded.theta(u) == doctest::Approx(direct.theta(u)).epsilon(1e-12));
        CHECK(reloaded.eta_prime(std::sqrt(u)) ==
              doctest::Approx(direct.eta_prime(std::sqrt(u))).epsilon(1e-12));
    }
    const json j = read_json(dir / "profile.json");
    CHECK(j.at("type") == "smoothed_theta");
    CHECK(j.at("checks").at("monotone") == true);
    CHECK(j.at("run").at("config").at("u0") == 0.25);
    CHECK(j.at("run").at("versions").contains("theta"));

    // A bridge window too narrow to hold the mass is a build failure (gate).
    CHECK(run_cli("fit --toy linear:0.5 --u0 0.4 --u1 0.55 --u-star 4 --out " + dir.string()) ==
          2);
}

TEST_CASE("fit consumes simulated curves and enforces coverage") {
    const fs::path dir = fresh_dir("fit_curve");
    CHECK(run_cli("simulate --N 8 --levels 0:0.6:0.05 --soups 800 --seed 11 --out " +
                  dir.string()) == 0);
    const ri::ThetaCurve curve = ri::read_theta_csv_file((dir / "theta.csv").string());
    REQUIRE(curve.levels.size() == 13);
    CHECK(curve.levels.back() == 0.6);  // 12 * 0.05 accumulates dirty without snapping
    CHECK(run_cli("fit --curve " + (dir / "theta.csv").string() +
                  " --u0 0.25 --u1 0.55 --u-star 4 --out " + dir.string()) == 0);
    const json j = read_json(dir / "profile.json");
    CHECK(j.at("base").at("kind") == "pchip");
    CHECK(j.at("run").at("seed") == 11);

    // Coarse curve: only 2 levels at or below u0, needs 8.
    const fs::path coarse = fresh_dir("fit_coarse");
    CHECK(run_cli("simulate --N 6 --levels 0:1:0.25 --soups 100 --seed 1 --out " +
                  coarse.string()) == 0);
    std::string msg;
    CHECK(run_cli("fit --curve " + (coarse / "theta.csv").string() +
                      " --u0 0.25 --u1 0.55 --u-star 4 --out " + coarse.string(),
                  &msg) == 64);
    CHECK(msg.find("at least 8 levels") != std::string::npos);
}

TEST_CASE("solve matches the in-process affine result") {
    const fs::path dir = fresh_dir("solve_affine");
    CHECK(run_cli("solve --toy affine:0.3:1:4 --u 0.09 --nu 0.42 --domain ball:1:0.001:4 --out " +
                  dir.string()) == 0);
    const ri::AffineEta model(0.09, 0.3, 1.0, 4.0);
    const ri::Domain dom = ri::make_ball(1.0, 1e-3, 4.0);
    const ri::MinimizerResult res = ri::solve_min(0.09, 0.42, model, dom);
    const json j = read_json(dir / "minimizer.json");
    CHECK(j.at("lambda").get<double>() ==
          doctest::Approx(res.lambda).epsilon(1e-6));
    CHECK(j.at("energy").get<double>() ==
          doctest::Approx(res.energy).epsilon(1e-6));
    CHECK(j.at("props").at("passed") == true);
    CHECK(j.at("run").at("config").at("nu") == 0.42);
    const std::string phi_csv = read_file(dir / "phi.csv");
    CHECK(phi_csv.rfind("r,phi", 0) == 0);
    CHECK(line_count(phi_csv) > 1000);
}

TEST_CASE("solve at the constraint floor returns the zero minimizer") {
    const fs::path dir = fresh_dir("solve_zero");
    CHECK(run_cli("solve --toy affine:0.3:1:4 --u 0.09 --nu 0.3 --domain ball:1:0.002:4 --out " +
                  dir.string()) == 0);
    const json j = read_json(dir / "minimizer.json");
    CHECK(j.at("lambda").get<double>() == 0.0);
    CHECK(j.at("energy").get<double>() == 0.0);
}

TEST_CASE("solve sweeps a nu grid into a monotone cost curve") {
    const fs::path dir = fresh_dir("solve_grid");
    CHECK(run_cli("solve --toy affine:0.3:1:4 --u 0.09 --nu-grid 0.32:0.4:0.02 "
                  "--domain ball:1:0.002:4 --out " +
                  dir.string()) == 0);
    const std::string csv = read_file(dir / "jcurve.csv");
    CHECK(csv.rfind("nu,j,lambda\n", 0) == 0);
    CHECK(line_count(csv) == 6);  // header + 5 points
    const json j = read_json(dir / "jcurve.json");
    const auto& points = j.at("points");
    REQUIRE(points.size() == 5);
    for (size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].at("j").get<double>() > points[i - 1].at("j").get<double>());
        CHECK(points[i].at("lambda").get<double>() >=
              points[i - 1].at("lambda").get<double>());
    }
}

TEST_CASE("verify runs a suite and reports per criterion") {
    const fs::path a = fresh_dir("verify_a");
    const fs::path b = fresh_dir("verify_b");
    std::string out;
    CHECK(run_cli("verify potential --seed 7 --out " + a.string(), &out) == 0);
    CHECK(out.find("criterion  1") != std::string::npos);
    CHECK(out.find("criterion  2") != std::string::npos);
    CHECK(out.find("criterion  8") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
    const json report = read_json(a / "verify_potential.json");
    CHECK(report.at("type") == "verify-suite");
    CHECK(report.at("passed") == true);
    CHECK(report.at("seed") == 7);
    CHECK_FALSE(report.contains("threads"));
    REQUIRE(report.at("criteria").size() == 3);

    // Same seed, different worker count: the report must not move a byte.
    CHECK(run_cli("verify potential --seed 7 --threads 3 --out " + b.string()) == 0);
    CHECK(read_file(a / "verify_potential.json") == read_file(b / "verify_potential.json"));
}

TEST_CASE("scan fits annulus decay and gates missing fits") {
    const fs::path dir = fresh_dir("scan");
    CHECK(run_cli("scan --N 12 --level 2.5 --soups 400 --seed 3 --radii 2,3,4,5 --out " +
                  dir.string()) == 0);
    const std::string csv = read_file(dir / "nlf.csv");
    CHECK(line_count(csv) == 5);  // header + 4 radii
    const json j = read_json(dir / "scan.json");
    CHECK(j.at("nlf").at("radii").size() == 4);
    CHECK(j.at("run").at("config").at("level") == 2.5);

    // At u = 0.3 the annulus event has no mass, so no fit and no probe radii.
    std::string msg;
    CHECK(run_cli("scan --N 12 --level 0.3 --soups 300 --seed 3 --probe-gaps 0.1:0.11:0.12 "
                  "--out " +
                      dir.string(),
                  &msg) == 2);
    CHECK(msg.find("fit unavailable") != std::string::npos);
}

TEST_CASE("RI_OUT_DIR supplies the default output directory") {
    const fs::path dir = fresh_dir("envdir");
    setenv("RI_OUT_DIR", dir.c_str(), 1);
    const int rc = run_cli("fit --toy linear:0.5 --u0 0.25 --u1 0.55 --u-star 4");
    unsetenv("RI_OUT_DIR");
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "profile.json"));
}
