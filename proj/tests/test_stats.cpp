#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ri/green.hpp"
#include "ri/stats.hpp"

using namespace ri;

namespace {

// one moderate batch shared across the estimator tests
const BatchSummary& shared_batch() {
    static const BatchSummary s = [] {
        BatchConfig cfg;
        cfg.dim = 3;
        cfg.window_radius = 8;
        cfg.probe_radius = 8;
        cfg.levels = {0.0, 0.3, 0.6, 1.0};
        cfg.u_max = 1.2;
        cfg.n_soups = 1500;
        cfg.seed = 11;
        return run_batch(cfg);
    }();
    return s;
}

}  // namespace

TEST_CASE("level zero has empty occupancy, so theta(0) is exactly zero") {
    const BatchSummary& s = shared_batch();
    for (uint64_t i = 0; i < s.config.n_soups; ++i)
        CHECK(s.reach_at(i, 0) == s.config.probe_radius);
    ThetaCurve c = theta_from_summary(s, 8);
    CHECK(c.theta[0] == 0.0);
    CHECK(c.std_err[0] == 0.0);
}

TEST_CASE("reach is nonincreasing in the level on every row") {
    const BatchSummary& s = shared_batch();
    for (uint64_t i = 0; i < s.config.n_soups; ++i)
        for (size_t j = 1; j < s.n_levels(); ++j)
            CHECK(s.reach_at(i, j) <= s.reach_at(i, j - 1));
}

TEST_CASE("occupied origin and first_cover label agree exactly") {
    const BatchSummary& s = shared_batch();
    for (uint64_t i = 0; i < s.config.n_soups; ++i)
        for (size_t j = 0; j < s.n_levels(); ++j)
            CHECK((s.reach_at(i, j) < 0) == (s.first_cover[i] <= s.config.levels[j]));
}

TEST_CASE("empty soups keep the probe reach at every level") {
    const BatchSummary& s = shared_batch();
    uint64_t empties = 0;
    for (uint64_t i = 0; i < s.config.n_soups; ++i) {
        if (s.traj_count[i] != 0) continue;
        ++empties;
        for (size_t j = 0; j < s.n_levels(); ++j)
            CHECK(s.reach_at(i, j) == s.config.probe_radius);
        CHECK(!std::isfinite(s.first_cover[i]));
    }
    INFO("empty soups seen: ", empties);
}

TEST_CASE("theta is nondecreasing in u and in L") {
    const BatchSummary& s = shared_batch();
    ThetaCurve prev;
    for (int32_t L : {2, 4, 6, 8}) {
        ThetaCurve c = theta_from_summary(s, L);
        for (size_t j = 1; j < c.theta.size(); ++j) CHECK(c.theta[j] >= c.theta[j - 1]);
        if (!prev.theta.empty())
            for (size_t j = 0; j < c.theta.size(); ++j) CHECK(c.theta[j] >= prev.theta[j]);
        prev = c;
    }
}

TEST_CASE("theta dominates the occupied-origin fraction sample by sample") {
    const BatchSummary& s = shared_batch();
    const size_t j = 3;  // u = 1.0
    uint64_t occupied = 0, disconnected = 0;
    for (uint64_t i = 0; i < s.config.n_soups; ++i) {
        const bool occ = s.reach_at(i, j) < 0;
        const bool dis = s.reach_at(i, j) < 2;
        occupied += occ;
        disconnected += dis;
        CHECK(dis >= occ);
    }
    // the occupied marginal itself has the closed form 1 - e^{-u/g(0,0)},
    // up to the guard-shell inflation (well under one sigma here)
    const double p = double(occupied) / double(s.config.n_soups);
    const double expect = 1.0 - std::exp(-1.0 / green_origin(3));
    const double se = std::sqrt(expect * (1 - expect) / double(s.config.n_soups));
    CHECK(std::abs(p - expect) < 4 * se);
    CHECK(disconnected >= occupied);
}

TEST_CASE("theta curve survives a csv round-trip bit for bit") {
    ThetaCurve c = theta_from_summary(shared_batch(), 7);
    std::ostringstream first;
    write_theta_csv(c, first);
    std::istringstream back(first.str());
    ThetaCurve c2 = read_theta_csv(back);
    std::ostringstream second;
    write_theta_csv(c2, second);
    CHECK(first.str() == second.str());
    CHECK(c2.levels == c.levels);
    CHECK(c2.theta == c.theta);
    CHECK(c2.std_err == c.std_err);
    CHECK(c2.probe_radius == c.probe_radius);
    CHECK(c2.window_radius == c.window_radius);
    CHECK(c2.n_soups == c.n_soups);
    CHECK(c2.seed == c.seed);
}

TEST_CASE("csv reader rejects malformed input") {
    std::istringstream bad_header("u,theta\n0,0\n");
    CHECK_THROWS(read_theta_csv(bad_header));
    std::istringstream empty("u,theta_hat,stderr,L,N,n_soups,seed\n");
    CHECK_THROWS(read_theta_csv(empty));
    std::istringstream varying(
        "u,theta_hat,stderr,L,N,n_soups,seed\n"
        "0.1,0.2,0.01,8,8,100,1\n"
        "0.2,0.3,0.01,8,8,100,2\n");
    CHECK_THROWS(read_theta_csv(varying));
    std::istringstream junk(
        "u,theta_hat,stderr,L,N,n_soups,seed\n"
        "0.1,abc,0.01,8,8,100,1\n");
    CHECK_THROWS(read_theta_csv(junk));
}

TEST_CASE("batches are byte-identical for any worker count") {
    BatchConfig cfg;
    cfg.dim = 3;
    cfg.window_radius = 6;
    cfg.probe_radius = 6;
    cfg.levels = {0.4, 0.8};
    cfg.u_max = 0.8;
    cfg.n_soups = 200;
    cfg.seed = 3;
    cfg.threads = 1;
    BatchSummary a = run_batch(cfg);
    cfg.threads = 3;
    BatchSummary b = run_batch(cfg);
    CHECK(a.reach == b.reach);
    CHECK(a.first_cover == b.first_cover);
    CHECK(a.traj_count == b.traj_count);
    CHECK(a.eq.weight == b.eq.weight);
    CHECK(a.eq.capacity.value == b.eq.capacity.value);
}

TEST_CASE("estimate_theta_curve matches the equivalent batch reduction") {
    const std::vector<double> levels{0.3, 0.6};
    ThetaCurve direct = estimate_theta_curve(levels, 5, 6, 150, 17);
    BatchConfig cfg;
    cfg.window_radius = 6;
    cfg.probe_radius = 5;
    cfg.levels = levels;
    cfg.u_max = 0.6;
    cfg.n_soups = 150;
    cfg.seed = 17;
    ThetaCurve manual = theta_from_summary(run_batch(cfg), 5);
    CHECK(direct.theta == manual.theta);
    CHECK(direct.std_err == manual.std_err);
}

TEST_CASE("covering increments match the closed-form rate") {
    const BatchSummary& s = shared_batch();
    IdentityReport rep = covering_identity_check(s, 1, 0.2, 4);
    CHECK(rep.u == 0.3);
    CHECK(rep.joint >= 0);
    CHECK(rep.expected > 0);
    CHECK(rep.std_err > 0);
    CHECK(rep.fv_slack > 0);
    CHECK(rep.fv_slack < 0.002);  // guard shell is far; the allowance is small
    CHECK(rep.pass);

    // eps reaching exactly u_max is legal, beyond it is not
    CHECK_NOTHROW(covering_identity_check(s, 3, 0.2, 4));
    CHECK_THROWS(covering_identity_check(s, 3, 0.21, 4));
    CHECK_THROWS(covering_identity_check(s, 1, -0.1, 4));
    CHECK_THROWS(covering_identity_check(s, 1, 0.2, 9));
    CHECK_THROWS(covering_identity_check(s, 4, 0.1, 4));
}

TEST_CASE("difference quotients from level zero reduce to theta over u") {
    const BatchSummary& s = shared_batch();
    ThetaCurve c = theta_from_summary(s, 6);
    QuotientReport rep = difference_quotients(s, 0, 1, 1, 6, 6);
    CHECK(rep.delta_prime == doctest::Approx(c.theta[1] / 0.3).epsilon(1e-12));
    CHECK(rep.delta_prime == rep.delta_dprime);
    CHECK(rep.se_prime == rep.se_dprime);
    CHECK(rep.delta_prime >= 0);
}

TEST_CASE("comparison bound degenerates cleanly when u' equals u''") {
    const BatchSummary& s = shared_batch();
    QuotientReport rep = difference_quotients(s, 0, 2, 2, 4, 4);
    PotentialEstimate cap;
    cap.value = 13.0;
    const double slack = verify_comparison_bound(rep, cap);
    // u' == u'' makes the comparison factor 1 and the deviation zero
    CHECK(rep.cap_l_prime == 13.0);
    CHECK(slack == doctest::Approx(3.0 * 0.6 * (1 + 169.0)).epsilon(1e-12));
    CHECK(rep.pass);
}

TEST_CASE("quotients demand ordered levels and a resolvable probe") {
    const BatchSummary& s = shared_batch();
    CHECK_THROWS(difference_quotients(s, 1, 1, 2, 4, 4));   // u == u'
    CHECK_THROWS(difference_quotients(s, 2, 1, 3, 4, 4));   // u > u'
    CHECK_THROWS(difference_quotients(s, 0, 1, 2, 9, 4));   // probe beyond reach cap
    CHECK_THROWS(difference_quotients(s, 0, 1, 7, 4, 4));   // index out of range
}

TEST_CASE("annulus scan at level zero has no events and no fit") {
    const BatchSummary& s = shared_batch();
    NlfScan scan = nlf_scan_from_summary(s, 0, {2, 3, 4});
    for (double p : scan.p_hat) CHECK(p == 0.0);
    for (uint64_t c : scan.positive) CHECK(c == 0);
    CHECK(!scan.fit_ok);
    CHECK_THROWS(nlf_scan_from_summary(s, 0, {2, 5}));  // 2*5 > probe radius
}

TEST_CASE("annulus scan counts match a direct recount") {
    const BatchSummary& s = shared_batch();
    NlfScan scan = nlf_scan_from_summary(s, 2, {2, 3, 4});
    for (size_t r = 0; r < scan.radii.size(); ++r) {
        uint64_t cnt = 0;
        for (uint64_t i = 0; i < s.config.n_soups; ++i) {
            const int16_t reach = s.reach_at(i, 2);
            if (reach >= scan.radii[r] && reach < 2 * scan.radii[r]) ++cnt;
        }
        CHECK(scan.positive[r] == cnt);
        CHECK(scan.p_hat[r] == double(cnt) / double(s.config.n_soups));
    }
}

TEST_CASE("decay fit recovers a planted stretched exponential") {
    const std::vector<int32_t> radii{4, 6, 8, 12, 16};
    std::vector<double> p_hat;
    std::vector<uint64_t> positive;
    for (int32_t L : radii) {
        p_hat.push_back(std::exp(-0.5 * std::pow(double(L), 0.8)));
        positive.push_back(1000);
    }
    double c0 = 0, gamma = 0, residual = 0;
    int32_t l0 = 0;
    CHECK(nlf_fit(radii, p_hat, positive, c0, gamma, residual, l0));
    CHECK(gamma == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(c0 == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(residual < 1e-9);
    CHECK(l0 == 4);

    // starving the counts disqualifies radii until the fit refuses
    positive.assign(radii.size(), 9);
    CHECK(!nlf_fit(radii, p_hat, positive, c0, gamma, residual, l0));
    positive.assign(radii.size(), 1000);
    CHECK(!nlf_fit({4, 6, 8}, {p_hat[0], p_hat[1], p_hat[2]}, {1000, 1000, 1000}, c0,
                   gamma, residual, l0));
}

TEST_CASE("nlf csv uses the shared column set") {
    const BatchSummary& s = shared_batch();
    NlfScan scan = nlf_scan_from_summary(s, 2, {2, 3, 4});
    std::ostringstream out;
    write_nlf_csv(scan, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "u,theta_hat,stderr,L,N,n_soups,seed");
    size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == scan.radii.size());
}

TEST_CASE("probe radii follow the log rule with clipping") {
    // c3 = 2/c0 = 4, gamma = 1: L = 4 log(1/du), clipped into [l0, N]
    ProbeRadii pr = compute_probe_radii(0.5, 1.0, 2, 0.0, std::exp(-1.0), 2 * std::exp(-1.0), 32);
    CHECK(pr.c3 == doctest::Approx(4.0));
    CHECK(pr.l_prime == 4);
    CHECK(pr.l_dprime == 2);  // raw value 1.2 clips up to l0
    CHECK(pr.l_prime >= pr.l_dprime);

    // a tiny gap wants a radius beyond the window: refuse rather than clip
    CHECK_THROWS(compute_probe_radii(0.5, 1.0, 2, 0.0, 1e-9, 1e-9, 32));
    CHECK_THROWS(compute_probe_radii(0.5, 1.0, 2, 0.3, 0.3, 0.4, 32));
    CHECK_THROWS(compute_probe_radii(-0.5, 1.0, 2, 0.0, 0.1, 0.2, 32));
    CHECK_THROWS(compute_probe_radii(0.5, 1.5, 2, 0.0, 0.1, 0.2, 32));
}

TEST_CASE("batch config validation") {
    BatchConfig cfg;
    cfg.window_radius = 4;
    cfg.probe_radius = 5;
    cfg.levels = {0.1};
    CHECK_THROWS(run_batch(cfg));  // probe beyond window
    cfg.probe_radius = 4;
    cfg.levels = {0.2, 0.1};
    CHECK_THROWS(run_batch(cfg));  // levels not ascending
    cfg.levels = {0.1, 2.0};
    CHECK_THROWS(run_batch(cfg));  // exceeds u_max
    cfg.levels.clear();
    CHECK_THROWS(run_batch(cfg));
    cfg.levels = {0.1};
    cfg.n_soups = 0;
    CHECK_THROWS(run_batch(cfg));
}
