#include "ri/theta_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ri {

namespace {

// cubic Hermite on [x0, x1] with end values y and end derivatives m
double hermite(double x, double x0, double x1, double y0, double y1, double m0, double m1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
}

double hermite_deriv(double x, double x0, double x1, double y0, double y1, double m0,
                     double m1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * m0 +
            (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * m1) /
           h;
}

size_t knot_interval(const std::vector<double>& v, double x) {
    // largest k with v[k] <= x, clamped to the last interval
    size_t k = static_cast<size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
    if (k > 0) --k;
    if (k + 1 >= v.size()) k = v.size() - 2;
    return k;
}

uint64_t mix64(uint64_t h, uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

uint64_t hash_doubles(uint64_t h, const std::vector<double>& xs) {
    for (double x : xs) {
        uint64_t bits;
        static_assert(sizeof bits == sizeof x);
        std::memcpy(&bits, &x, sizeof bits);
        h = mix64(h, bits);
    }
    return h;
}

}  // namespace

double BaseCurve::value(double v) const {
    if (kind == Kind::linear) return slope * v;
    double raw;
    if (v <= knot_v.front())
        raw = knot_val.front() + knot_der.front() * (v - knot_v.front());
    else if (v >= knot_v.back())
        raw = knot_val.back() + knot_der.back() * (v - knot_v.back());
    else {
        const size_t k = knot_interval(knot_v, v);
        raw = hermite(v, knot_v[k], knot_v[k + 1], knot_val[k], knot_val[k + 1],
                      knot_der[k], knot_der[k + 1]);
    }
    return raw + ramp * v;
}

double BaseCurve::deriv(double v) const {
    if (kind == Kind::linear) return slope;
    double raw;
    if (v <= knot_v.front())
        raw = knot_der.front();
    else if (v >= knot_v.back())
        raw = knot_der.back();
    else {
        const size_t k = knot_interval(knot_v, v);
        raw = hermite_deriv(v, knot_v[k], knot_v[k + 1], knot_val[k], knot_val[k + 1],
                            knot_der[k], knot_der[k + 1]);
    }
    return raw + ramp;
}

double BaseCurve::upper() const {
    if (kind == Kind::linear) return std::numeric_limits<double>::infinity();
    return knot_v.back();
}

BaseCurve toy_base(const std::string& spec) {
    const std::string prefix = "linear:";
    if (spec.rfind(prefix, 0) != 0)
        throw std::invalid_argument("toy_base: unknown profile '" + spec +
                                    "' (supported: linear:<slope>)");
    double slope = 0;
    try {
        slope = std::stod(spec.substr(prefix.size()));
    } catch (const std::exception&) {
        throw std::invalid_argument("toy_base: bad slope in '" + spec + "'");
    }
    if (!(slope > 0)) throw std::invalid_argument("toy_base: slope must be positive");
    BaseCurve base;
    base.kind = BaseCurve::Kind::linear;
    base.slope = slope;
    base.provenance = "toy:" + spec;
    return base;
}

BaseCurve fit_base(const ThetaCurve& curve, const std::string& source_name) {
    const size_t n = curve.levels.size();
    if (n < 2) throw std::invalid_argument("fit_base: need at least two levels");
    for (size_t i = 1; i < n; ++i)
        if (!(curve.levels[i] > curve.levels[i - 1]))
            throw std::invalid_argument("fit_base: levels must strictly ascend");

    // pool-adjacent-violators: least-squares nondecreasing fit
    std::vector<double> y(curve.theta), w(n, 1.0);
    std::vector<size_t> len(n, 1);
    size_t m = 0;
    for (size_t i = 0; i < n; ++i) {
        y[m] = curve.theta[i];
        w[m] = 1.0;
        len[m] = 1;
        ++m;
        while (m > 1 && y[m - 2] > y[m - 1]) {
            const double wt = w[m - 2] + w[m - 1];
            y[m - 2] = (w[m - 2] * y[m - 2] + w[m - 1] * y[m - 1]) / wt;
            w[m - 2] = wt;
            len[m - 2] += len[m - 1];
            --m;
        }
    }
    std::vector<double> iso(n);
    for (size_t block = 0, i = 0; block < m; ++block)
        for (size_t k = 0; k < len[block]; ++k) iso[i++] = y[block];

    BaseCurve base;
    base.kind = BaseCurve::Kind::pchip;
    base.provenance = "fit:" + source_name;
    base.knot_v = curve.levels;
    base.knot_val = iso;
    base.ramp = 1e-3;  // tilt added at evaluation; derivative floor between knots too

    // shape-preserving derivatives (Fritsch-Carlson weighted harmonic means);
    // d <= 3 min(s) keeps the interpolant's derivative nonnegative everywhere
    std::vector<double> h(n - 1), s(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = base.knot_v[i + 1] - base.knot_v[i];
        s[i] = (base.knot_val[i + 1] - base.knot_val[i]) / h[i];
    }
    base.knot_der.assign(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] <= 0 || s[i] <= 0) continue;  // flat block boundary
        const double w1 = 2 * h[i] + h[i - 1];
        const double w2 = h[i] + 2 * h[i - 1];
        base.knot_der[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
    }
    auto endpoint = [&](double h0, double h1, double s0, double s1) {
        double d = ((2 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d < 0) d = 0;
        if (d > 3 * s0) d = 3 * s0;
        return d;
    };
    base.knot_der.front() = n > 2 ? endpoint(h[0], h[1], s[0], s[1]) : s[0];
    base.knot_der.back() =
        n > 2 ? endpoint(h[n - 2], h[n - 3], s[n - 2], s[n - 3]) : s[n - 2];
    return base;
}

double SmoothedTheta::theta(double v) const {
    if (v <= u0) return base.value(v);
    if (v <= u1) {
        const double d = v - u0;
        return base.value(v) + a * d * d;
    }
    if (v < u2) {
        const size_t nk = bridge_val.size() - 1;
        const double step = (u2 - u1) / static_cast<double>(nk);
        size_t k = static_cast<size_t>((v - u1) / step);
        if (k >= nk) k = nk - 1;
        const double x0 = u1 + static_cast<double>(k) * step;
        return hermite(v, x0, x0 + step, bridge_val[k], bridge_val[k + 1], bridge_der[k],
                       bridge_der[k + 1]);
    }
    return std::sqrt(v);
}

double SmoothedTheta::theta_prime(double v) const {
    if (v <= u0) return base.deriv(v);
    if (v <= u1) return base.deriv(v) + 2 * a * (v - u0);
    if (v < u2) {
        const size_t nk = bridge_val.size() - 1;
        const double step = (u2 - u1) / static_cast<double>(nk);
        size_t k = static_cast<size_t>((v - u1) / step);
        if (k >= nk) k = nk - 1;
        const double x0 = u1 + static_cast<double>(k) * step;
        return hermite_deriv(v, x0, x0 + step, bridge_val[k], bridge_val[k + 1],
                             bridge_der[k], bridge_der[k + 1]);
    }
    return 0.5 / std::sqrt(v);
}

double SmoothedTheta::gamma(double v) const {
    if (v < 0 || v > u1)
        throw std::invalid_argument("gamma: defined on [0, u1] (base coverage)");
    if (v <= u0) return 0.0;
    const double d = v - u0;
    return a * d * d;
}

SmoothedTheta build_smoothed_theta(const BaseCurve& base, double u0, double u1,
                                   double u_star) {
    if (!(0 < u0 && u0 < u1 && u1 < u_star))
        throw std::invalid_argument("build_smoothed_theta: need 0 < u0 < u1 < u_star");
    if (base.upper() < u1)
        throw std::invalid_argument("build_smoothed_theta: base profile must cover [0, u1]");
    for (int i = 0; i <= 2000; ++i) {
        const double v = u0 * static_cast<double>(i) / 2000.0;
        if (!(base.deriv(v) > 0))
            throw std::invalid_argument(
                "build_smoothed_theta: base derivative not positive on [0, u0]");
    }
    const double b1 = base.value(u1);
    if (!(b1 < 1))
        throw std::invalid_argument("build_smoothed_theta: base already reaches 1 before u1");

    SmoothedTheta st;
    st.base = base;
    st.u0 = u0;
    st.u1 = u1;
    st.u2 = std::max(u_star, 4.0);
    st.u_star_ = u_star;
    st.a = (1.0 - b1) / ((u1 - u0) * (u1 - u0));

    // Bridge on [u1, u2]: derivative profile exp(l_c), where l_c blends
    // log m1 -> log m2 through a smoothstep and adds a c-scaled bump; c is
    // the one scalar freedom, fixed so the derivative integrates to
    // sqrt(u2) - 1.  The exponential keeps the derivative positive for any
    // slope ratio (a plain Hermite bridge fails monotonicity when the left
    // slope exceeds three times the secant, which happens for every toy).
    const double m1 = base.deriv(u1) + 2 * st.a * (u1 - u0);
    const double m2 = 0.5 / std::sqrt(st.u2);
    const double span = st.u2 - u1;
    const double target = std::sqrt(st.u2) - 1.0;
    const double lm1 = std::log(m1), lm2 = std::log(m2);
    auto log_deriv = [&](double v, double c) {
        const double s = (v - u1) / span;
        const double w = s * s * (3 - 2 * s);
        return (1 - w) * lm1 + w * lm2 + c * 4 * w * (1 - w);
    };
    constexpr int kKnots = 16;
    constexpr int kSub = 128;  // Simpson sub-intervals per knot interval
    auto integrate = [&](double c, double* cumulative) {
        double total = 0;
        for (int k = 0; k < kKnots; ++k) {
            if (cumulative) cumulative[k] = total;
            const double a0 = u1 + span * static_cast<double>(k) / kKnots;
            const double hseg = span / (kKnots * kSub);
            double seg = 0;
            for (int j = 0; j < kSub; ++j) {
                const double x0 = a0 + hseg * j;
                seg += (std::exp(log_deriv(x0, c)) +
                        4 * std::exp(log_deriv(x0 + 0.5 * hseg, c)) +
                        std::exp(log_deriv(x0 + hseg, c))) *
                       (hseg / 6);
            }
            total += seg;
        }
        if (cumulative) cumulative[kKnots] = total;
        return total;
    };
    double lo = -80, hi = 80;
    if (integrate(lo, nullptr) > target || integrate(hi, nullptr) < target)
        throw std::runtime_error("build_smoothed_theta: bridge mass not bracketable");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (integrate(mid, nullptr) < target ? lo : hi) = mid;
    }
    const double c = 0.5 * (lo + hi);
    double cumulative[kKnots + 1];
    integrate(c, cumulative);
    st.bridge_val.resize(kKnots + 1);
    st.bridge_der.resize(kKnots + 1);
    for (int k = 0; k <= kKnots; ++k) {
        st.bridge_val[k] = 1.0 + cumulative[k];
        st.bridge_der[k] =
            std::exp(log_deriv(u1 + span * static_cast<double>(k) / kKnots, c));
    }
    // pin the joins exactly; the bisection residual (~1e-13) lands in the
    // last knot interval where it is invisible
    st.bridge_val.front() = 1.0;
    st.bridge_val.back() = std::sqrt(st.u2);
    st.bridge_der.front() = m1;
    st.bridge_der.back() = m2;
    // When the bump is strong the derivative profile swings by more than a
    // factor ~20 per knot interval and the Hermite cubic between knots dips
    // below zero (the monotone region ends at der = 4 * secant).  Cap the
    // interior knot derivatives at 2.95 * min(adjacent secants); knot values
    // and the pinned end derivatives stay exact, so the joins remain C^1.
    for (int k = 1; k < kKnots; ++k) {
        const double dv = span / kKnots;
        const double sec_l = (st.bridge_val[k] - st.bridge_val[k - 1]) / dv;
        const double sec_r = (st.bridge_val[k + 1] - st.bridge_val[k]) / dv;
        st.bridge_der[k] = std::min(st.bridge_der[k], 2.95 * std::min(sec_l, sec_r));
    }

    uint64_t h = mix64(0x7468657461ull, static_cast<uint64_t>(kKnots));
    h = hash_doubles(h, {st.u0, st.u1, st.u2, st.a, u_star});
    h = hash_doubles(h, st.bridge_val);
    st.bridge_hash = hash_doubles(h, st.bridge_der);

    // numeric verification on dense grids
    ProfileChecks& ck = st.checks;
    ck.min_theta_prime = std::numeric_limits<double>::infinity();
    ck.monotone = true;
    ck.gamma_zero_low = true;
    ck.gamma_positive = true;
    ck.dominates_bar = true;
    const ThetaBar bar{base, u_star};
    const double vmax = st.u2 + 4;
    double prev = st.theta(0.0);
    double argmin_v = 0;
    for (int i = 1; i <= 10000; ++i) {
        const double v = vmax * static_cast<double>(i) / 10000.0;
        const double t = st.theta(v);
        const double tp = st.theta_prime(v);
        if (!(t >= prev)) ck.monotone = false;
        if (!(tp > 0)) ck.monotone = false;
        if (tp < ck.min_theta_prime) argmin_v = v;
        ck.min_theta_prime = std::min(ck.min_theta_prime, tp);
        if (v <= u0 && st.theta(v) != base.value(v)) ck.gamma_zero_low = false;
        if (v > u0 && v <= u1 && !(t > base.value(v))) ck.gamma_positive = false;
        if (v > u1 && v <= st.u2 && !(t >= 1.0)) ck.gamma_positive = false;
        if (v <= st.u2 && t < bar.value(v) - 1e-12) ck.dominates_bar = false;
        prev = t;
    }
    // one-sided derivative agreement at the piece joins
    const double j0 = std::abs((base.deriv(u0) + 2 * st.a * 0.0) - base.deriv(u0));
    const double j1 = std::abs(st.bridge_der.front() - m1);
    const double j2 = std::abs(st.bridge_der.back() - 0.5 / std::sqrt(st.u2));
    ck.max_join_gap = std::max({j0, j1, j2});
    ck.min_eta_prime = std::numeric_limits<double>::infinity();
    const double bmax = std::sqrt(st.u2) + 10;
    for (int i = 0; i < 100000; ++i) {
        const double b = 0.01 + (bmax - 0.01) * static_cast<double>(i) / 99999.0;
        ck.min_eta_prime = std::min(ck.min_eta_prime, st.eta_prime(b));
    }
    if (!ck.passed()) {
        std::string what = "build_smoothed_theta: verification failed:";
        if (!ck.monotone) what += " monotone";
        if (!ck.gamma_zero_low) what += " gamma_zero_low";
        if (!ck.gamma_positive) what += " gamma_positive";
        if (!ck.dominates_bar) what += " dominates_bar";
        if (ck.max_join_gap >= 1e-8) what += " join_gap";
        if (!(ck.min_eta_prime > 0)) what += " eta_prime_positivity";
        what += " (min theta' = " + std::to_string(ck.min_theta_prime) + " at v = " +
                std::to_string(argmin_v) + ")";
        throw std::runtime_error(what);
    }
    return st;
}

double ThetaBar::value(double u) const {
    if (u >= u_star) return 1.0;
    const double v = std::min(u, base.upper());
    return std::min(base.value(v), 1.0);
}

AffineEta::AffineEta(double u_anchor, double theta_u, double kappa, double u_star)
    : u_anchor_(u_anchor), theta_u_(theta_u), kappa_(kappa), u_star_(u_star),
      sqrt_u_(std::sqrt(u_anchor)) {
    if (!(u_anchor > 0)) throw std::invalid_argument("AffineEta: anchor level must be positive");
    if (!(kappa > 0)) throw std::invalid_argument("AffineEta: slope must be positive");
    if (!(theta_u >= 0)) throw std::invalid_argument("AffineEta: theta_u must be nonnegative");
    if (!(u_star > u_anchor)) throw std::invalid_argument("AffineEta: need u_star > anchor");
}

uint64_t AffineEta::model_hash() const {
    return hash_doubles(0x616666696e65, {u_anchor_, theta_u_, kappa_, u_star_});
}

namespace {

using nlohmann::json;

json base_to_json(const BaseCurve& b) {
    json j;
    j["provenance"] = b.provenance;
    if (b.kind == BaseCurve::Kind::linear) {
        j["kind"] = "linear";
        j["slope"] = b.slope;
    } else {
        j["kind"] = "pchip";
        j["v"] = b.knot_v;
        j["value"] = b.knot_val;
        j["deriv"] = b.knot_der;
        j["ramp"] = b.ramp;
    }
    return j;
}

BaseCurve base_from_json(const json& j) {
    BaseCurve b;
    b.provenance = j.at("provenance").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
        b.kind = BaseCurve::Kind::linear;
        b.slope = j.at("slope").get<double>();
    } else if (kind == "pchip") {
        b.kind = BaseCurve::Kind::pchip;
        b.knot_v = j.at("v").get<std::vector<double>>();
        b.knot_val = j.at("value").get<std::vector<double>>();
        b.knot_der = j.at("deriv").get<std::vector<double>>();
        b.ramp = j.at("ramp").get<double>();
        if (b.knot_v.size() < 2 || b.knot_v.size() != b.knot_val.size() ||
            b.knot_v.size() != b.knot_der.size())
            throw std::runtime_error("profile json: inconsistent pchip arrays");
    } else {
        throw std::runtime_error("profile json: unknown base kind '" + kind + "'");
    }
    return b;
}

json checks_to_json(const ProfileChecks& c) {
    return json{{"monotone", c.monotone},
                {"gamma_zero_low", c.gamma_zero_low},
                {"gamma_positive", c.gamma_positive},
                {"dominates_bar", c.dominates_bar},
                {"max_join_gap", c.max_join_gap},
                {"min_theta_prime", c.min_theta_prime},
                {"min_eta_prime", c.min_eta_prime}};
}

ProfileChecks checks_from_json(const json& j) {
    ProfileChecks c;
    c.monotone = j.at("monotone").get<bool>();
    c.gamma_zero_low = j.at("gamma_zero_low").get<bool>();
    c.gamma_positive = j.at("gamma_positive").get<bool>();
    c.dominates_bar = j.at("dominates_bar").get<bool>();
    c.max_join_gap = j.at("max_join_gap").get<double>();
    c.min_theta_prime = j.at("min_theta_prime").get<double>();
    c.min_eta_prime = j.at("min_eta_prime").get<double>();
    return c;
}

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 15]; }

std::string hash_hex(uint64_t h) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<size_t>(i)] = hex_digit(h);
    return s;
}

uint64_t hash_from_hex(const std::string& s) {
    uint64_t h = 0;
    for (char c : s) {
        h <<= 4;
        if (c >= '0' && c <= '9') h |= static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') h |= static_cast<uint64_t>(c - 'a' + 10);
        else throw std::runtime_error("profile json: bad hash digit");
    }
    return h;
}

}  // namespace

void save_profile(const SmoothedTheta& st, std::ostream& out) {
    json j;
    j["type"] = "smoothed_theta";
    j["u0"] = st.u0;
    j["u1"] = st.u1;
    j["u2"] = st.u2;
    j["u_star"] = st.u_star();
    j["a"] = st.a;
    j["base"] = base_to_json(st.base);
    j["bridge"] = json{{"value", st.bridge_val}, {"deriv", st.bridge_der}};
    j["bridge_hash"] = hash_hex(st.bridge_hash);
    j["checks"] = checks_to_json(st.checks);
    out << j.dump(2) << '\n';
}

SmoothedTheta load_profile(std::istream& in) {
    json j = json::parse(in);
    if (j.at("type").get<std::string>() != "smoothed_theta")
        throw std::runtime_error("profile json: not a smoothed_theta");
    SmoothedTheta st;
    st.u0 = j.at("u0").get<double>();
    st.u1 = j.at("u1").get<double>();
    st.u2 = j.at("u2").get<double>();
    st.u_star_ = j.at("u_star").get<double>();
    st.a = j.at("a").get<double>();
    st.base = base_from_json(j.at("base"));
    st.bridge_val = j.at("bridge").at("value").get<std::vector<double>>();
    st.bridge_der = j.at("bridge").at("deriv").get<std::vector<double>>();
    if (st.bridge_val.size() < 2 || st.bridge_val.size() != st.bridge_der.size())
        throw std::runtime_error("profile json: inconsistent bridge arrays");
    st.bridge_hash = hash_from_hex(j.at("bridge_hash").get<std::string>());
    st.checks = checks_from_json(j.at("checks"));
    return st;
}

void save_affine(const AffineEta& m, std::ostream& out) {
    json j;
    j["type"] = "affine_eta";
    j["u_anchor"] = m.u_anchor();
    j["theta_u"] = m.eta(std::sqrt(m.u_anchor()));
    j["kappa"] = m.kappa();
    j["u_star"] = m.u_star();
    out << j.dump(2) << '\n';
}

std::unique_ptr<EtaModel> load_eta_model(std::istream& in) {
    json j = json::parse(in);
    const std::string type = j.at("type").get<std::string>();
    if (type == "smoothed_theta") {
        std::stringstream again(j.dump());
        return std::make_unique<SmoothedTheta>(load_profile(again));
    }
    if (type == "affine_eta") {
        return std::make_unique<AffineEta>(
            j.at("u_anchor").get<double>(), j.at("theta_u").get<double>(),
            j.at("kappa").get<double>(), j.at("u_star").get<double>());
    }
    throw std::runtime_error("eta model json: unknown type '" + type + "'");
}

namespace {

template <class F>
void with_output_file(const std::string& path, F&& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    f(out);
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void save_profile_file(const SmoothedTheta& st, const std::string& path) {
    with_output_file(path, [&](std::ostream& out) { save_profile(st, out); });
}

SmoothedTheta load_profile_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return load_profile(in);
}

void save_affine_file(const AffineEta& m, const std::string& path) {
    with_output_file(path, [&](std::ostream& out) { save_affine(m, out); });
}

std::unique_ptr<EtaModel> load_eta_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return load_eta_model(in);
}

}  // namespace ri
