// Smoothed percolation profiles.  A raw finite-volume curve theta(u) is only
// known up to its fitted range and need not be smooth; the solver wants a C1
// profile defined on all of R_+ whose square-root reparametrization
// eta(b) = theta(b^2) has a bounded, uniformly positive derivative away from
// zero.  SmoothedTheta builds one from a base profile in four pieces:
//
//   [0, u0]     the base itself (closed-form toy or monotone fit)
//   [u0, u1]    base + a (v - u0)^2, with a pinned by theta(u1) = 1
//   [u1, u2]    a C1 monotone bridge (tabulated exponential-derivative blend)
//   [u2, inf)   sqrt(v), so that eta(b) = b from sqrt(u2) on
//
// u2 = max(u_star, 4).  Every build is verified numerically (monotonicity,
// C1 joins, positivity of eta') and rejected loudly on failure.
#pragma once

#include "ri/stats.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace ri {

// Evaluation interface the variational solver consumes: eta, its derivative,
// and the assumed critical level.  Implementations are immutable after
// construction and safe for concurrent evaluation.
class EtaModel {
  public:
    virtual ~EtaModel() = default;
    virtual double eta(double b) const = 0;
    virtual double eta_prime(double b) const = 0;
    virtual double u_star() const = 0;
    virtual uint64_t model_hash() const = 0;   // content hash for artifact linkage
    virtual double u_solve_limit() const = 0;  // largest level downstream solvers accept
    double theta_at(double u) const { return eta(std::sqrt(u)); }
};

// Base profile on [0, upper]: either a named closed form or a monotone
// piecewise-cubic through fitted knots.
struct BaseCurve {
    enum class Kind { linear, pchip };
    Kind kind = Kind::linear;
    double slope = 0.5;                  // linear: theta0(v) = slope * v
    std::vector<double> knot_v;          // pchip knots, strictly increasing
    std::vector<double> knot_val;
    std::vector<double> knot_der;        // nonnegative (shape-preserving)
    double ramp = 0;                     // added tilt: value += ramp * v
    std::string provenance;              // "toy:linear:<slope>" or "fit:<source>"

    double value(double v) const;
    double deriv(double v) const;
    double upper() const;                // end of the covered range
};

// Parses "linear:<slope>" (slope > 0).
BaseCurve toy_base(const std::string& spec);

// Monotone C1 fit of an estimated curve: isotonic regression of the theta
// column, shape-preserving cubic Hermite derivatives (nonnegative everywhere),
// then a 1e-3 * u ramp so the derivative floor 1e-3 holds between knots too.
BaseCurve fit_base(const ThetaCurve& curve, const std::string& source_name);

// Numeric verdicts of the build-time verification (10^4-point grids).
struct ProfileChecks {
    bool monotone = false;           // theta' > 0 across all pieces
    bool gamma_zero_low = false;     // theta == base on [0, u0]
    bool gamma_positive = false;     // theta > base on (u0, u1], theta >= 1 beyond
    bool dominates_bar = false;      // theta >= right-continuous profile clamp
    double max_join_gap = 0;         // one-sided derivative mismatch at u0, u1, u2
    double min_theta_prime = 0;      // over (0, u2 + 4]
    double min_eta_prime = 0;        // over [0.01, sqrt(u2) + 10], 10^5 points
    bool passed() const {
        return monotone && gamma_zero_low && gamma_positive && dominates_bar &&
               max_join_gap < 1e-8 && min_eta_prime > 0;
    }
};

class SmoothedTheta final : public EtaModel {
  public:
    BaseCurve base;
    double u0 = 0, u1 = 0, u2 = 0, a = 0;
    // bridge knots: values and derivatives at 17 evenly spaced points of
    // [u1, u2]; cubic Hermite in between
    std::vector<double> bridge_val;
    std::vector<double> bridge_der;
    uint64_t bridge_hash = 0;        // over bridge knots and piece boundaries
    ProfileChecks checks;

    double theta(double v) const;
    double theta_prime(double v) const;
    double eta(double b) const override { return theta(b * b); }
    double eta_prime(double b) const override { return 2.0 * b * theta_prime(b * b); }
    double u_star() const override { return u_star_; }
    uint64_t model_hash() const override { return bridge_hash; }
    // solves certify the regime where theta is still the plain base
    double u_solve_limit() const override { return u0; }
    // theta - base, defined up to u1 (base coverage); zero on [0, u0]
    double gamma(double v) const;

  private:
    friend SmoothedTheta build_smoothed_theta(const BaseCurve&, double, double, double);
    friend SmoothedTheta load_profile(std::istream&);
    double u_star_ = 0;
};

// Requires 0 < u0 < u1 < u_star, base covering [0, u1] with positive
// derivative on [0, u0] and base(u1) < 1.  Throws when a precondition or any
// numeric verification fails; a returned profile always has checks.passed().
SmoothedTheta build_smoothed_theta(const BaseCurve& base, double u0, double u1,
                                   double u_star);

// Right-continuous modification of the base profile: equals the (clamped)
// base below u_star and 1 from u_star on.  Between the end of the base's
// range and u_star it returns the last known value, a lower bound for the
// true nondecreasing profile.
struct ThetaBar {
    BaseCurve base;
    double u_star = 0;

    double value(double u) const;
};

// Affine test profile: eta(b) = theta_u + kappa (b - sqrt(u_anchor)).  Its
// derivative is the constant kappa, which makes every solver quantity closed
// form; used to pin oracles.
class AffineEta final : public EtaModel {
  public:
    AffineEta(double u_anchor, double theta_u, double kappa, double u_star);

    double eta(double b) const override {
        return theta_u_ + kappa_ * (b - sqrt_u_);
    }
    double eta_prime(double) const override { return kappa_; }
    double u_star() const override { return u_star_; }
    uint64_t model_hash() const override;
    double u_solve_limit() const override { return u_star_; }
    double u_anchor() const { return u_anchor_; }
    double kappa() const { return kappa_; }

  private:
    double u_anchor_, theta_u_, kappa_, u_star_, sqrt_u_;
};

// JSON round-trip.  Doubles survive exactly; load(save(m)) evaluates
// identically.  The generic loader dispatches on the embedded "type".
void save_profile(const SmoothedTheta& st, std::ostream& out);
void save_profile_file(const SmoothedTheta& st, const std::string& path);
SmoothedTheta load_profile(std::istream& in);
SmoothedTheta load_profile_file(const std::string& path);

void save_affine(const AffineEta& m, std::ostream& out);
void save_affine_file(const AffineEta& m, const std::string& path);

std::unique_ptr<EtaModel> load_eta_model(std::istream& in);
std::unique_ptr<EtaModel> load_eta_model_file(const std::string& path);

}  // namespace ri
