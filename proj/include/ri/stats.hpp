// Estimators built on trajectory soups: finite-volume percolation curves,
// covering-increment identity checks, difference quotients with their
// capacity comparison bound, and stretched-exponential decay scans.
//
// Everything runs off one BatchSummary: a per-(soup, level) matrix of vacant
// reaches plus the per-soup first-cover label of the origin.  The reach of a
// soup at level u is the sup-norm radius the origin's vacant cluster attains
// (capped at the probe radius, -1 when the origin is occupied), so a single
// batch answers connectivity questions for every probe L <= probe_radius and
// every level in the grid, with all levels coupled through shared labels.
#pragma once

#include "ri/potential.hpp"
#include "ri/soup.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ri {

struct BatchConfig {
    int dim = 3;
    int32_t window_radius = 32;   // N
    int32_t probe_radius = 32;    // reach cap; <= window_radius
    std::vector<double> levels;   // ascending, levels.back() <= u_max
    double u_max = 1.0;
    int guard_factor = 8;
    uint64_t samples_per_site = 300;  // equilibrium-measure budget per boundary site
    uint64_t n_soups = 10000;
    uint64_t seed = 1;
    int threads = 1;
};

struct BatchSummary {
    BatchConfig config;
    EquilibriumMeasure eq;
    // reach[s * levels.size() + j]: vacant reach of soup s at level j;
    // nonincreasing along j on every row (coupling), -1 = origin occupied.
    std::vector<int16_t> reach;
    // smallest label whose trajectory covers the origin; +inf if none <= u_max
    std::vector<double> first_cover;
    std::vector<uint32_t> traj_count;  // per-soup Poisson draws

    size_t n_levels() const { return config.levels.size(); }
    int16_t reach_at(uint64_t soup, size_t level) const {
        return reach[soup * config.levels.size() + level];
    }
};

// Samples n_soups soups and fills the summary.  Per-soup work is keyed by the
// soup index alone, so the result is byte-identical for any thread count.
BatchSummary run_batch(const BatchConfig& config);

struct ThetaCurve {
    std::vector<double> levels;
    std::vector<double> theta;    // estimates of P[0 not connected to dB_L in the vacant set]
    std::vector<double> std_err;  // binomial
    int32_t probe_radius = 0;     // L
    int32_t window_radius = 0;    // N
    uint64_t n_soups = 0;
    uint64_t seed = 0;
};

// theta at probe L from a summary (L <= summary probe radius).  Exactly 0 at
// level 0 and nondecreasing along levels sample-by-sample.
ThetaCurve theta_from_summary(const BatchSummary& s, int32_t L);

// Convenience: run a dedicated batch (probe = L) and reduce it.
ThetaCurve estimate_theta_curve(const std::vector<double>& levels, int32_t L,
                                int32_t N, uint64_t n_soups, uint64_t seed,
                                int threads = 1);

// CSV with header u,theta_hat,stderr,L,N,n_soups,seed; one row per level.
// Doubles are written as shortest round-trip decimals, so write/read is
// bit-exact.
void write_theta_csv(const ThetaCurve& curve, std::ostream& out);
ThetaCurve read_theta_csv(std::istream& in);
void write_theta_csv_file(const ThetaCurve& curve, const std::string& path);
ThetaCurve read_theta_csv_file(const std::string& path);

// Covering-increment identity: fresh trajectories with labels in (u, u+eps]
// are independent of the level-u configuration and cover the origin with
// probability 1 - e^{-eps/g(0,0)}.  Checks the joint estimate
// P[0 connected to dB_L at u, 0 first covered in (u, u+eps]] against
// (1 - theta_hat(u)) (1 - e^{-eps/g}).  The window estimate uses the killed
// walk, which inflates the covering rate by at most the reported slack.
struct IdentityReport {
    double u = 0, eps = 0;
    int32_t probe_radius = 0;
    double joint = 0;       // estimate of the joint probability
    double expected = 0;    // (1 - theta_hat(u)) (1 - e^{-eps/g})
    double std_err = 0;     // of joint - expected, from per-soup contributions
    double fv_slack = 0;    // finite-volume allowance: (1-theta) eps g_as(R_guard)/g^2
    double z = 0;           // (joint - expected)/std_err
    bool pass = false;      // |joint - expected| <= 3 std_err + fv_slack
};
IdentityReport covering_identity_check(const BatchSummary& s, size_t level_index,
                                       double eps, int32_t L);

struct NlfScan {
    double u = 0;
    std::vector<int32_t> radii;        // probe radii L; annulus event uses 2L
    std::vector<double> p_hat;         // P[0 <-> dB_L, 0 </-> dB_2L]
    std::vector<double> std_err;
    std::vector<uint64_t> positive;    // raw event counts
    bool fit_ok = false;
    double c0 = 0, gamma = 0;          // fitted decay exp(-c0 L^gamma), gamma in (0,1]
    double residual = 0;               // rms of log-scale fit residuals
    int32_t l0 = 0;                    // smallest radius that entered the fit
    int32_t window_radius = 0;
    uint64_t n_soups = 0;
    uint64_t seed = 0;
};

// Annulus-decay scan at one level of the summary; requires
// 2 * max(radii) <= probe radius so the reach resolves every event.
NlfScan nlf_scan_from_summary(const BatchSummary& s, size_t level_index,
                              const std::vector<int32_t>& radii);

// Least squares of -log p against c0 L^gamma over radii with at least 10
// positive counts; gamma scanned over (0,1], c0 closed-form per gamma.
// Returns false (fit unavailable) when fewer than 4 radii qualify.
bool nlf_fit(const std::vector<int32_t>& radii, const std::vector<double>& p_hat,
             const std::vector<uint64_t>& positive, double& c0, double& gamma,
             double& residual, int32_t& l0);

// Same column set as the theta CSV, one row per radius (theta_hat = p_hat,
// L = radius).
void write_nlf_csv(const NlfScan& scan, std::ostream& out);

// Probe radii of the comparison bound: L' = (c3 log(1/(u'-u)))^{1/gamma}
// rounded and clipped to [l0, N], with c3 = 2/c0 from a decay fit.  Throws
// when the clip binds at N: the window cannot honor the rule.
struct ProbeRadii {
    int32_t l_prime = 0;
    int32_t l_dprime = 0;
    double c3 = 0, gamma = 0;
};
ProbeRadii compute_probe_radii(double c0, double gamma, int32_t l0, double u,
                               double u_prime, double u_dprime, int32_t N);

struct QuotientReport {
    double u = 0, u_prime = 0, u_dprime = 0;
    int32_t l_prime = 0, l_dprime = 0;
    double delta_prime = 0;    // (theta_{L'}(u') - theta_{L'}(u))/(u'-u)
    double delta_dprime = 0;   // (theta_{L''}(u'') - theta_{L''}(u))/(u''-u)
    double se_prime = 0, se_dprime = 0;
    double cap_l_prime = 0;    // capacity entering the comparison bound
    double slack = 0;          // bound minus |delta' - e^{(u''-u')cap} delta''|
    double tolerance = 0;      // 3 sigma plus the finite-volume quotient gaps
    bool pass = false;         // slack >= -tolerance
};

// Coupled difference quotients from one summary; u, u', u'' must be grid
// levels with u < u' <= u''.  Numerators are per-sample flip fractions, so
// they are nonnegative by construction.
QuotientReport difference_quotients(const BatchSummary& s, size_t iu, size_t iu1,
                                    size_t iu2, int32_t l_prime, int32_t l_dprime);

// Comparison bound: |D' - e^{(u''-u') cap} D''| <= 3 (u''-u)(1 + cap^2)
// e^{(u''-u') cap}, checked on the finite-volume quotients with tolerance
// 3 sigma + (u'-u) + e^{(u''-u') cap}(u''-u) for the quotient substitution.
// Fills slack/tolerance/pass on the report and returns the slack.
double verify_comparison_bound(QuotientReport& report, const PotentialEstimate& cap_l_prime);

}  // namespace ri
