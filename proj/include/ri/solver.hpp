#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ri/domain.hpp"
#include "ri/theta_model.hpp"

namespace ri {

// Normalized average over D of eta(sqrt(u) + phi).  Equals theta(u) at
// phi == 0 and is nondecreasing under pointwise increase of phi.  Rejects
// phi values below -1e-12.
double constraint_functional(const EtaModel& m, double u, const Field& phi, const Domain& dom);

// First variation of the above at phi in direction psi: normalized average
// of eta'(sqrt(u) + phi) * psi.
double directional_derivative(const EtaModel& m, double u, const Field& phi, const Field& psi,
                              const Domain& dom);

struct FixedPointResult {
    Field phi;
    int iterations = 0;
    double residual = 0;  // sup-norm of phi - lambda G(eta'(sqrt(u)+phi) 1_D)
};

// Damped iteration phi <- (1-omega) phi + omega lambda G(eta'(sqrt(u)+phi) 1_D)
// from phi == 0 until the sup-norm step falls below tol.  The returned field
// is nonnegative and its residual is verified to be <= 10 * tol.  Throws
// after max_iter steps with the recent step history (lambda is then likely
// outside the contraction regime).
FixedPointResult el_fixed_point(double lambda, double u, const EtaModel& m, const Domain& dom,
                                double omega = 1.0, double tol = 1e-10, int max_iter = 10000);

// Per-solve verification verdicts; every failure is itemized, none are
// silently ignored.
struct PropertyReport {
    bool box_bound_ok = false;      // 0 <= phi <= sqrt(u_star) - sqrt(u) + 1e-8
    double box_bound_excess = 0;
    bool exterior_ok = false;       // ball: r phi constant outside D (rel 1e-3)
    double exterior_metric = 0;     // box: sup discrete-Laplacian residual / (1e-6 sup phi)
    bool decay_ok = false;          // sup of r phi attained near the boundary
    double decay_sup = 0;
    double decay_argmax_r = 0;
    double harmonic_c = 0;          // fitted coefficient of the exterior 1/r decay
    bool small_excess_ok = false;   // sup phi <= lambda * sup eta' * sup G1_D
    double small_excess_c2 = 0;     // that bound divided by nu - theta(u)
    double sup_eta_prime = 0;
    bool multiplier_ok = false;     // phi / G(rho) constant where phi > 1e-8
    double multiplier_spread = 0;   // relative to lambda

    bool passed() const {
        return box_bound_ok && exterior_ok && decay_ok && small_excess_ok && multiplier_ok;
    }
};

struct MinimizerResult {
    Field phi;
    double lambda = 0;
    double energy = 0;       // (1/2d) integral |grad phi|^2, gradient quadrature
    double energy_dual = 0;  // lambda <rho, phi>, rho = eta'(sqrt(u)+phi) 1_D
    double constraint = 0;   // value of the constraint functional at phi
    double nu = 0;
    double u = 0;
    int iterations = 0;      // fixed-point steps of the accepted solve
    double residual = 0;
    double tol_constraint = 0;
    double tol_fixed_point = 0;
    uint64_t model_hash = 0;
    Domain domain;
    PropertyReport props;
};

// Both energy evaluations for a converged pair (phi = lambda G rho): the
// gradient quadrature and the duality value lambda <rho, phi>.  Throws when
// the relative gap exceeds 5e-2 (mesh resolution error).
std::pair<double, double> energy_pair(const Field& phi, double lambda, const Field& rho,
                                      const Domain& dom, double ext_factor = 4.0);

// Minimize the energy subject to constraint == nu: outer root-find on lambda
// (doubling bracket, then bisection to |constraint - nu| <= tol_constraint),
// inner el_fixed_point.  Requires 0 < u < m.u_solve_limit() and
// theta(u) <= nu < 1.  The accepted solve satisfies the dual-energy gap
// bound (1e-2) and every property check; violations throw.  Monotonicity of
// the constraint along the probed lambda sequence is verified a posteriori.
MinimizerResult solve_min(double u, double nu, const EtaModel& m, const Domain& dom,
                          double tol_constraint = 1e-6, double fp_tol = 1e-10);

PropertyReport check_minimizer_props(const MinimizerResult& res, const EtaModel& m,
                                     const Domain& dom);

struct ScalingReport {
    double slope = 0;        // of log lambda against log(nu - theta(u))
    double c_low = 0;        // min and max of lambda / (nu - theta(u))
    double c_high = 0;
    bool lambda_monotone = false;
    bool pass = false;       // slope in [0.9, 1.1] and monotone
    std::vector<double> nu;
    std::vector<double> lambda;
};

// Requires at least three sweep points strictly above theta(u).
ScalingReport lambda_scaling_check(double u, const EtaModel& m, const Domain& dom,
                                   const std::vector<double>& nus);

// Symmetric decreasing rearrangement on the radial mesh (ball domains): the
// volume distribution function is preserved up to one mesh cell and the
// output is radially nonincreasing.
Field rearrange_radial(const Field& phi, const Domain& dom);

struct DilationReport {
    double scale = 0;
    double energy_base = 0;
    double energy_scaled = 0;  // of z -> phi(z / scale), independent quadrature
    double expected_ratio = 0; // scale^(d-2)
    bool energy_ok = false;    // measured ratio within 1% of expected
    bool constraint_ok = false;
};

DilationReport dilation_check(const MinimizerResult& res, const EtaModel& m, const Domain& dom,
                              double scale);

struct JPoint {
    double nu = 0;
    double j = 0;       // minimal energy at this nu
    double lambda = 0;
};

// Solves along an ascending nu grid.  Throws on any non-monotone adjacent
// pair (J must increase strictly once nu clears theta(u) by more than the
// constraint tolerance).
std::vector<JPoint> j_curve(double u, const EtaModel& m, const Domain& dom,
                            const std::vector<double>& nus);

struct ThresholdReport {
    double nu_threshold = 0;  // where sup phi reaches sqrt(u_star) - sqrt(u)
    bool reachable = false;   // threshold below 1
    double mean_g1 = 0;       // domain average of G 1_D
    double max_g1 = 0;
};

// Closed-form scan for the affine profile: sup phi = lambda kappa max G1_D
// with lambda = (nu - theta(u)) / (kappa^2 mean G1_D).
ThresholdReport threshold_scan(double u, const AffineEta& m, const Domain& dom);

// JSON artifact with scalars, mesh spec, tolerances, verdicts, and the full
// profile; CSV export of the profile alone (r,phi or x,y,z,phi rows).
void save_minimizer(const MinimizerResult& res, std::ostream& out);
void save_minimizer_file(const MinimizerResult& res, const std::string& path);
void write_profile_csv(const MinimizerResult& res, std::ostream& out);
void write_profile_csv_file(const MinimizerResult& res, const std::string& path);

}  // namespace ri
