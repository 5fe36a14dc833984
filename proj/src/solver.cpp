#include "ri/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ri {

namespace {

using json = nlohmann::json;

// interior cells of D: first n_inside shells for balls, the whole mesh for
// boxes (box fields carry no exterior cells)
int64_t interior_count(const Domain& dom) {
    return dom.shape == Domain::Shape::ball ? dom.n_inside : dom.n_mesh;
}

void check_field(const Field& f, const Domain& dom, const char* who) {
    if (static_cast<int64_t>(f.size()) != dom.n_mesh)
        throw std::invalid_argument(std::string(who) + ": field size does not match the mesh");
}

Field source_field(const EtaModel& m, double u, const Field& phi, const Domain& dom) {
    const double su = std::sqrt(u);
    Field rho(dom.n_mesh, 0.0);
    for (int64_t k = 0; k < interior_count(dom); ++k) rho[k] = m.eta_prime(su + phi[k]);
    return rho;
}

double sup_eta_prime(const EtaModel& m) {
    const double hi = std::sqrt(m.u_star()) + 10.0;
    double sup = 0;
    for (int i = 0; i <= 100000; ++i)
        sup = std::max(sup, m.eta_prime(hi * static_cast<double>(i) / 100000.0));
    return sup;
}

double max_g1(const Domain& dom) {
    Field ones(dom.n_mesh, 0.0);
    for (int64_t k = 0; k < interior_count(dom); ++k) ones[k] = 1.0;
    const Field g1 = green_convolve(ones, dom);
    return *std::max_element(g1.begin(), g1.end());
}

double mean_g1(const Domain& dom) {
    Field ones(dom.n_mesh, 0.0);
    for (int64_t k = 0; k < interior_count(dom); ++k) ones[k] = 1.0;
    const Field g1 = green_convolve(ones, dom);
    double acc = 0;
    for (int64_t k = 0; k < interior_count(dom); ++k) acc += dom.weight(k) * g1[k];
    return acc / dom.volume();
}

}  // namespace

double constraint_functional(const EtaModel& m, double u, const Field& phi, const Domain& dom) {
    if (!(u > 0)) throw std::invalid_argument("constraint_functional: level must be positive");
    check_field(phi, dom, "constraint_functional");
    const double su = std::sqrt(u);
    const double vol = dom.volume();
    double acc = 0;
    for (int64_t k = 0; k < interior_count(dom); ++k) {
        if (phi[k] < -1e-12)
            throw std::invalid_argument("constraint_functional: negative field value");
        acc += dom.weight(k) / vol * m.eta(su + phi[k]);
    }
    return acc;
}

double directional_derivative(const EtaModel& m, double u, const Field& phi, const Field& psi,
                              const Domain& dom) {
    if (!(u > 0)) throw std::invalid_argument("directional_derivative: level must be positive");
    check_field(phi, dom, "directional_derivative");
    check_field(psi, dom, "directional_derivative");
    const double su = std::sqrt(u);
    const double vol = dom.volume();
    double acc = 0;
    for (int64_t k = 0; k < interior_count(dom); ++k)
        acc += dom.weight(k) / vol * m.eta_prime(su + phi[k]) * psi[k];
    return acc;
}

FixedPointResult el_fixed_point(double lambda, double u, const EtaModel& m, const Domain& dom,
                                double omega, double tol, int max_iter) {
    if (!(lambda >= 0)) throw std::invalid_argument("el_fixed_point: lambda must be >= 0");
    if (!(u > 0)) throw std::invalid_argument("el_fixed_point: level must be positive");
    if (!(tol > 0)) throw std::invalid_argument("el_fixed_point: tol must be positive");
    if (!(omega > 0) || omega > 1)
        throw std::invalid_argument("el_fixed_point: damping must lie in (0, 1]");

    Field phi(dom.n_mesh, 0.0);
    auto target_of = [&](const Field& f) {
        Field g = green_convolve(source_field(m, u, f, dom), dom);
        for (double& v : g) v *= lambda;
        return g;
    };
    std::vector<double> steps;
    for (int it = 1; it <= max_iter; ++it) {
        const Field target = target_of(phi);
        double step = 0;
        for (int64_t k = 0; k < dom.n_mesh; ++k) {
            const double next = (1.0 - omega) * phi[k] + omega * target[k];
            step = std::max(step, std::abs(next - phi[k]));
            phi[k] = next;
        }
        steps.push_back(step);
        if (step < tol) {
            const Field verify = target_of(phi);
            double res = 0;
            for (int64_t k = 0; k < dom.n_mesh; ++k)
                res = std::max(res, std::abs(phi[k] - verify[k]));
            if (res <= 10.0 * tol) return {std::move(phi), it, res};
        }
    }
    std::string msg = "el_fixed_point: no convergence after " + std::to_string(max_iter) +
                      " iterations (lambda may be outside the contraction regime); recent steps:";
    for (size_t i = steps.size() >= 5 ? steps.size() - 5 : 0; i < steps.size(); ++i)
        msg += " " + std::to_string(steps[i]);
    throw std::runtime_error(msg);
}

std::pair<double, double> energy_pair(const Field& phi, double lambda, const Field& rho,
                                      const Domain& dom, double ext_factor) {
    check_field(phi, dom, "energy_pair");
    check_field(rho, dom, "energy_pair");
    const double energy = dom.shape == Domain::Shape::ball
                              ? gradient_energy(phi, dom)
                              : gradient_energy_box(rho, lambda, dom, ext_factor);
    double dual = 0;
    for (int64_t k = 0; k < interior_count(dom); ++k) dual += dom.weight(k) * rho[k] * phi[k];
    dual *= lambda;
    if (energy > 0) {
        const double gap = std::abs(energy - dual) / energy;
        if (gap > 5e-2)
            throw std::runtime_error("energy_pair: dual-energy gap " + std::to_string(gap) +
                                     " exceeds 5e-2, mesh resolution insufficient");
    }
    return {energy, dual};
}

PropertyReport check_minimizer_props(const MinimizerResult& res, const EtaModel& m,
                                     const Domain& dom) {
    PropertyReport rep;
    const double su = std::sqrt(res.u);
    double sup_phi = 0, min_phi = 0;
    for (double v : res.phi) {
        sup_phi = std::max(sup_phi, v);
        min_phi = std::min(min_phi, v);
    }
    const double cap = std::sqrt(m.u_star()) - su + 1e-8;
    rep.box_bound_ok = min_phi >= -1e-12 && sup_phi <= cap;
    rep.box_bound_excess = std::max(std::max(sup_phi - cap, -1e-12 - min_phi), 0.0);

    const Field rho = source_field(m, res.u, res.phi, dom);

    if (dom.shape == Domain::Shape::ball) {
        // exterior: r phi must sit on a constant plateau (harmonic decay)
        double acc = 0, pmin = std::numeric_limits<double>::infinity(), pmax = 0;
        for (int64_t k = dom.n_inside; k < dom.n_mesh; ++k) {
            const double p = dom.shell_r(k) * res.phi[k];
            acc += p;
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        const double c = acc / static_cast<double>(dom.n_mesh - dom.n_inside);
        rep.harmonic_c = c;
        rep.exterior_metric = c > 0 ? std::max(pmax - c, c - pmin) / c : 0.0;
        rep.exterior_ok = sup_phi == 0 || rep.exterior_metric <= 1e-3;

        double sup_p = 0;
        int64_t arg = 0;
        for (int64_t k = 0; k < dom.n_mesh; ++k) {
            const double p = dom.shell_r(k) * res.phi[k];
            if (p > sup_p) {
                sup_p = p;
                arg = k;
            }
        }
        rep.decay_sup = sup_p;
        rep.decay_argmax_r = dom.shell_r(arg);
        rep.decay_ok = sup_phi == 0 || sup_p <= c * (1.0 + 1e-3) + 1e-12;
    } else {
        // box: the extension lambda G rho must be discretely harmonic outside D
        auto value_at = [&](const std::array<double, 3>& z) {
            return res.lambda * green_eval_at(rho, dom, z);
        };
        const double H = 1e-3 * dom.radius;
        double max_resid = 0;
        double sup_p = 0, arg_r = 0;
        for (int sx = -1; sx <= 1; ++sx)
            for (int sy = -1; sy <= 1; ++sy)
                for (int sz = -1; sz <= 1; ++sz) {
                    if (sx == 0 && sy == 0 && sz == 0) continue;
                    for (double mult : {1.25, 1.5, 2.5}) {
                        // sup-norm placement keeps every stencil point outside D
                        const std::array<double, 3> z = {mult * dom.radius * sx,
                                                         mult * dom.radius * sy,
                                                         mult * dom.radius * sz};
                        double lap = -6.0 * value_at(z);
                        for (int axis = 0; axis < 3; ++axis)
                            for (double sgn : {-1.0, 1.0}) {
                                auto p = z;
                                p[axis] += sgn * H;
                                lap += value_at(p);
                            }
                        max_resid = std::max(max_resid, std::abs(lap) / (H * H));
                        const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
                        const double p = r * value_at(z);
                        if (p > sup_p) {
                            sup_p = p;
                            arg_r = r;
                        }
                    }
                }
        rep.exterior_metric = sup_phi > 0 ? max_resid / (1e-6 * sup_phi) : 0.0;
        rep.exterior_ok = max_resid <= 1e-6 * sup_phi + 1e-300;

        double c_acc = 0;
        int c_n = 0;
        for (int sx = -1; sx <= 1; ++sx)
            for (int sy = -1; sy <= 1; ++sy)
                for (int sz = -1; sz <= 1; ++sz) {
                    if (sx == 0 && sy == 0 && sz == 0) continue;
                    const double norm =
                        std::sqrt(static_cast<double>(sx * sx + sy * sy + sz * sz));
                    const double r = 3.0 * dom.radius;
                    const std::array<double, 3> z = {r * sx / norm, r * sy / norm,
                                                     r * sz / norm};
                    c_acc += r * value_at(z);
                    ++c_n;
                }
        rep.harmonic_c = c_acc / c_n;

        for (int64_t k = 0; k < dom.n_mesh; ++k) {
            const auto c = dom.cell_center(k);
            const double r = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
            const double p = r * res.phi[k];
            if (p > sup_p) {
                sup_p = p;
                arg_r = r;
            }
        }
        rep.decay_sup = sup_p;
        rep.decay_argmax_r = arg_r;
        rep.decay_ok =
            sup_phi == 0 || (arg_r >= 0.25 * dom.radius && arg_r <= 4.0 * dom.radius);
    }

    rep.sup_eta_prime = sup_eta_prime(m);
    const double bound = res.lambda * rep.sup_eta_prime * max_g1(dom);
    rep.small_excess_ok = sup_phi <= bound + 1e-9;
    const double excess = res.nu - m.theta_at(res.u);
    rep.small_excess_c2 = excess > 0 ? bound / excess : 0.0;

    if (res.lambda > 0 && sup_phi > 0) {
        const Field g = green_convolve(rho, dom);
        double qmin = std::numeric_limits<double>::infinity(), qmax = 0;
        for (int64_t k = 0; k < interior_count(dom); ++k)
            if (res.phi[k] > 1e-8) {
                const double q = res.phi[k] / g[k];
                qmin = std::min(qmin, q);
                qmax = std::max(qmax, q);
            }
        rep.multiplier_spread = qmax >= qmin ? (qmax - qmin) / res.lambda : 0.0;
        rep.multiplier_ok = rep.multiplier_spread <= 1e-3;
    } else {
        rep.multiplier_spread = 0;
        rep.multiplier_ok = true;
    }
    return rep;
}

namespace {

std::string itemize_failures(const PropertyReport& rep) {
    std::string out;
    auto add = [&](bool ok, const std::string& what) {
        if (ok) return;
        if (!out.empty()) out += "; ";
        out += what;
    };
    add(rep.box_bound_ok,
        "box bound violated by " + std::to_string(rep.box_bound_excess));
    add(rep.exterior_ok,
        "exterior harmonicity off, metric " + std::to_string(rep.exterior_metric));
    add(rep.decay_ok, "decay sup not attained near the boundary (argmax r " +
                          std::to_string(rep.decay_argmax_r) + ")");
    add(rep.small_excess_ok, "sup phi exceeds the multiplier bound");
    add(rep.multiplier_ok,
        "multiplier ratio spread " + std::to_string(rep.multiplier_spread));
    return out;
}

}  // namespace

MinimizerResult solve_min(double u, double nu, const EtaModel& m, const Domain& dom,
                          double tol_constraint, double fp_tol) {
    if (!(u > 0) || !(u < m.u_solve_limit()))
        throw std::invalid_argument("solve_min: level outside (0, " +
                                    std::to_string(m.u_solve_limit()) + ")");
    if (!(tol_constraint > 0)) throw std::invalid_argument("solve_min: bad tolerance");
    const double theta = m.theta_at(u);
    if (nu < theta - 1e-12)
        throw std::invalid_argument("solve_min: target " + std::to_string(nu) +
                                    " below theta(u) = " + std::to_string(theta));
    if (!(nu < 1)) throw std::invalid_argument("solve_min: target must be below 1");

    MinimizerResult res;
    res.nu = nu;
    res.u = u;
    res.tol_constraint = tol_constraint;
    res.tol_fixed_point = fp_tol;
    res.model_hash = m.model_hash();
    res.domain = dom;

    if (nu - theta <= tol_constraint) {
        res.phi.assign(dom.n_mesh, 0.0);
        res.constraint = theta;
        res.props = check_minimizer_props(res, m, dom);
        return res;
    }

    std::vector<std::pair<double, double>> probes;  // (lambda, constraint)
    FixedPointResult accepted;
    double lambda_acc = -1, a_acc = 0;
    // a divergent iteration reads as "lambda too large": the root search
    // backs off instead of giving up, so profiles with steep derivative
    // ranges still solve when the target itself sits in the small-excess
    // regime.  Probes get a reduced iteration budget; anything needing more
    // is treated the same way.
    auto probe = [&](double lambda) -> std::pair<bool, double> {
        FixedPointResult fp;
        try {
            fp = el_fixed_point(lambda, u, m, dom, 1.0, fp_tol, 2000);
        } catch (const std::runtime_error&) {
            return {false, 0.0};
        }
        const double a = constraint_functional(m, u, fp.phi, dom);
        probes.emplace_back(lambda, a);
        if (std::abs(a - nu) <= tol_constraint) {
            accepted = std::move(fp);
            lambda_acc = lambda;
            a_acc = a;
        }
        return {true, a};
    };
    auto regime_error = [&]() {
        double best = theta;
        for (const auto& p : probes) best = std::max(best, p.second);
        return std::runtime_error(
            "solve_min: outside the small-excess regime; largest converged constraint "
            "value " +
            std::to_string(best) + " against target " + std::to_string(nu));
    };

    const double s0 = std::max(m.eta_prime(std::sqrt(u)), 1e-6);
    double hi = (nu - theta) / (s0 * s0 * mean_g1(dom));
    double lo = 0;
    for (int doublings = 0; lambda_acc < 0; ++doublings) {
        if (doublings > 60) throw regime_error();
        const auto [converged, a] = probe(hi);
        if (lambda_acc >= 0) break;
        if (!converged || a >= nu) break;
        lo = hi;
        hi *= 2;
    }
    for (int iter = 0; lambda_acc < 0; ++iter) {
        if (iter > 80) throw regime_error();
        const double mid = 0.5 * (lo + hi);
        const auto [converged, a] = probe(mid);
        if (lambda_acc >= 0) break;
        (converged && a < nu ? lo : hi) = mid;
    }

    std::sort(probes.begin(), probes.end());
    for (size_t i = 1; i < probes.size(); ++i)
        if (probes[i].second < probes[i - 1].second - 1e-10)
            throw std::runtime_error(
                "solve_min: constraint is not monotone in lambda (violation at lambda " +
                std::to_string(probes[i].first) + "), refusing to pick a root");

    res.phi = std::move(accepted.phi);
    res.lambda = lambda_acc;
    res.iterations = accepted.iterations;
    res.residual = accepted.residual;
    res.constraint = a_acc;
    const Field rho = source_field(m, u, res.phi, dom);
    const auto [energy, dual] = energy_pair(res.phi, res.lambda, rho, dom);
    res.energy = energy;
    res.energy_dual = dual;
    if (energy > 0) {
        const double gap = std::abs(energy - dual) / energy;
        if (gap > 1e-2)
            throw std::runtime_error("solve_min: dual-energy gap " + std::to_string(gap) +
                                     " exceeds 1e-2, mesh too coarse for this tolerance");
    }
    res.props = check_minimizer_props(res, m, dom);
    if (!res.props.passed())
        throw std::runtime_error("solve_min: property checks failed: " +
                                 itemize_failures(res.props));
    return res;
}

ScalingReport lambda_scaling_check(double u, const EtaModel& m, const Domain& dom,
                                   const std::vector<double>& nus) {
    if (nus.size() < 3)
        throw std::invalid_argument("lambda_scaling_check: sweep needs at least 3 points");
    const double theta = m.theta_at(u);
    ScalingReport rep;
    for (double nu : nus) {
        if (!(nu > theta + 1e-6))
            throw std::invalid_argument(
                "lambda_scaling_check: sweep point at or below theta(u)");
        const MinimizerResult r = solve_min(u, nu, m, dom);
        rep.nu.push_back(nu);
        rep.lambda.push_back(r.lambda);
    }
    rep.lambda_monotone = true;
    for (size_t i = 1; i < rep.lambda.size(); ++i)
        if (rep.lambda[i] < rep.lambda[i - 1] - 1e-15) rep.lambda_monotone = false;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(nus.size());
    rep.c_low = std::numeric_limits<double>::infinity();
    rep.c_high = 0;
    for (size_t i = 0; i < nus.size(); ++i) {
        const double x = std::log(nus[i] - theta), y = std::log(rep.lambda[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        const double c = rep.lambda[i] / (nus[i] - theta);
        rep.c_low = std::min(rep.c_low, c);
        rep.c_high = std::max(rep.c_high, c);
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-14)
        throw std::invalid_argument("lambda_scaling_check: sweep too narrow to regress");
    rep.slope = (n * sxy - sx * sy) / denom;
    rep.pass = rep.lambda_monotone && rep.slope >= 0.9 && rep.slope <= 1.1;
    return rep;
}

Field rearrange_radial(const Field& phi, const Domain& dom) {
    if (dom.shape != Domain::Shape::ball)
        throw std::invalid_argument("rearrange_radial: ball domains only");
    check_field(phi, dom, "rearrange_radial");
    for (double v : phi)
        if (v < -1e-12)
            throw std::invalid_argument("rearrange_radial: field must be nonnegative");

    const int64_t n = dom.n_mesh;
    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int64_t a, int64_t b) { return phi[a] > phi[b]; });
    std::vector<double> cum(n + 1, 0.0);
    for (int64_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + dom.weight(order[i]);

    // shell k takes the value whose volume interval covers the shell's
    // volume midpoint; mismatch of distribution functions <= one cell
    Field out(n);
    double before = 0;
    int64_t ptr = 0;
    for (int64_t k = 0; k < n; ++k) {
        const double target = before + 0.5 * dom.weight(k);
        while (ptr + 1 < n && cum[ptr + 1] < target) ++ptr;
        out[k] = std::max(phi[order[ptr]], 0.0);
        before += dom.weight(k);
    }
    return out;
}

DilationReport dilation_check(const MinimizerResult& res, const EtaModel& m, const Domain& dom,
                              double scale) {
    if (!(scale > 0) || scale > 1)
        throw std::invalid_argument("dilation_check: scale must lie in (0, 1]");
    DilationReport rep;
    rep.scale = scale;
    rep.expected_ratio = std::pow(scale, dom.dim - 2);
    if (dom.shape == Domain::Shape::ball) {
        rep.energy_base = gradient_energy(res.phi, dom);
        const int64_t n = dom.n_mesh;
        const double c = dom.shell_r(n - 1) * res.phi[n - 1];
        Field scaled(n);
        for (int64_t k = 0; k < n; ++k) {
            const double w = dom.shell_r(k) / scale;
            if (w <= dom.shell_r(n - 1)) {
                const double t = w / dom.h - 0.5;
                if (t <= 0) {
                    scaled[k] = res.phi[0];
                } else {
                    const int64_t j = std::min(static_cast<int64_t>(t), n - 2);
                    const double f = t - static_cast<double>(j);
                    scaled[k] = (1.0 - f) * res.phi[j] + f * res.phi[j + 1];
                }
            } else {
                scaled[k] = c * scale / dom.shell_r(k);
            }
        }
        rep.energy_scaled = gradient_energy(scaled, dom);
    } else {
        const Field rho = source_field(m, res.u, res.phi, dom);
        rep.energy_base = gradient_energy_box(rho, res.lambda, dom);
        rep.energy_scaled = dilated_energy_box(rho, res.lambda, dom, scale);
    }
    if (rep.energy_base > 0) {
        const double ratio = rep.energy_scaled / rep.energy_base;
        rep.energy_ok = std::abs(ratio / rep.expected_ratio - 1.0) <= 1e-2;
    } else {
        rep.energy_ok = rep.energy_scaled == 0;
    }
    rep.constraint_ok = std::abs(res.constraint - res.nu) <= std::max(res.tol_constraint, 1e-6);
    return rep;
}

std::vector<JPoint> j_curve(double u, const EtaModel& m, const Domain& dom,
                            const std::vector<double>& nus) {
    if (nus.size() < 2) throw std::invalid_argument("j_curve: need at least two grid points");
    for (size_t i = 1; i < nus.size(); ++i)
        if (!(nus[i] > nus[i - 1]))
            throw std::invalid_argument("j_curve: grid must strictly ascend");
    const double theta = m.theta_at(u);
    std::vector<JPoint> out;
    for (double nu : nus) {
        const MinimizerResult r = solve_min(u, nu, m, dom);
        out.push_back({nu, r.energy, r.lambda});
    }
    for (size_t i = 1; i < out.size(); ++i) {
        const bool expect_strict =
            nus[i] - nus[i - 1] > 2e-6 && nus[i - 1] >= theta + 1e-6;
        if (out[i].j < out[i - 1].j - 1e-15 || (expect_strict && out[i].j <= out[i - 1].j))
            throw std::runtime_error("j_curve: values not increasing between nu = " +
                                     std::to_string(nus[i - 1]) + " and " +
                                     std::to_string(nus[i]));
    }
    return out;
}

ThresholdReport threshold_scan(double u, const AffineEta& m, const Domain& dom) {
    if (!(u > 0) || !(u < m.u_star()))
        throw std::invalid_argument("threshold_scan: level outside (0, u_star)");
    ThresholdReport rep;
    rep.mean_g1 = mean_g1(dom);
    rep.max_g1 = max_g1(dom);
    const double gap = std::sqrt(m.u_star()) - std::sqrt(u);
    rep.nu_threshold = m.theta_at(u) + gap * m.kappa() * rep.mean_g1 / rep.max_g1;
    rep.reachable = rep.nu_threshold < 1;
    return rep;
}

namespace {

char hex_digit(uint64_t v) { return "0123456789abcdef"[v & 15]; }

std::string hash_hex(uint64_t h) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<size_t>(i)] = hex_digit(h);
    return s;
}

void append_double(std::string& line, double v) {
    char buf[40];
    auto out = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, out.ptr);
}

json domain_to_json(const Domain& dom) {
    json j;
    j["shape"] = dom.shape == Domain::Shape::ball ? "ball" : "box";
    j["dim"] = dom.dim;
    j["radius"] = dom.radius;
    j["h"] = dom.h;
    if (dom.shape == Domain::Shape::ball)
        j["r_max"] = dom.r_max;
    else
        j["n_side"] = dom.n_side;
    j["n_inside"] = dom.n_inside;
    j["n_mesh"] = dom.n_mesh;
    return j;
}

json props_to_json(const PropertyReport& p) {
    json j;
    j["box_bound_ok"] = p.box_bound_ok;
    j["box_bound_excess"] = p.box_bound_excess;
    j["exterior_ok"] = p.exterior_ok;
    j["exterior_metric"] = p.exterior_metric;
    j["decay_ok"] = p.decay_ok;
    j["decay_sup"] = p.decay_sup;
    j["decay_argmax_r"] = p.decay_argmax_r;
    j["harmonic_c"] = p.harmonic_c;
    j["small_excess_ok"] = p.small_excess_ok;
    j["small_excess_c2"] = p.small_excess_c2;
    j["sup_eta_prime"] = p.sup_eta_prime;
    j["multiplier_ok"] = p.multiplier_ok;
    j["multiplier_spread"] = p.multiplier_spread;
    j["passed"] = p.passed();
    return j;
}

template <class F>
void with_output_file(const std::string& path, F&& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    f(out);
    if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void save_minimizer(const MinimizerResult& res, std::ostream& out) {
    json j;
    j["type"] = "minimizer";
    j["u"] = res.u;
    j["nu"] = res.nu;
    j["lambda"] = res.lambda;
    j["energy"] = res.energy;
    j["energy_dual"] = res.energy_dual;
    j["constraint"] = res.constraint;
    j["iterations"] = res.iterations;
    j["residual"] = res.residual;
    j["model_hash"] = hash_hex(res.model_hash);
    j["tolerances"] = {{"constraint", res.tol_constraint},
                       {"fixed_point", res.tol_fixed_point}};
    j["domain"] = domain_to_json(res.domain);
    j["props"] = props_to_json(res.props);
    json profile = json::array();
    if (res.domain.shape == Domain::Shape::ball) {
        for (int64_t k = 0; k < res.domain.n_mesh; ++k)
            profile.push_back({res.domain.shell_r(k), res.phi[k]});
    } else {
        for (int64_t k = 0; k < res.domain.n_mesh; ++k) {
            const auto c = res.domain.cell_center(k);
            profile.push_back({c[0], c[1], c[2], res.phi[k]});
        }
    }
    j["profile"] = std::move(profile);
    out << j.dump(2) << '\n';
}

void save_minimizer_file(const MinimizerResult& res, const std::string& path) {
    with_output_file(path, [&](std::ostream& out) { save_minimizer(res, out); });
}

void write_profile_csv(const MinimizerResult& res, std::ostream& out) {
    std::string line;
    if (res.domain.shape == Domain::Shape::ball) {
        out << "r,phi\n";
        for (int64_t k = 0; k < res.domain.n_mesh; ++k) {
            line.clear();
            append_double(line, res.domain.shell_r(k));
            line += ',';
            append_double(line, res.phi[k]);
            line += '\n';
            out << line;
        }
    } else {
        out << "x,y,z,phi\n";
        for (int64_t k = 0; k < res.domain.n_mesh; ++k) {
            const auto c = res.domain.cell_center(k);
            line.clear();
            for (double coord : c) {
                append_double(line, coord);
                line += ',';
            }
            append_double(line, res.phi[k]);
            line += '\n';
            out << line;
        }
    }
}

void write_profile_csv_file(const MinimizerResult& res, const std::string& path) {
    with_output_file(path, [&](std::ostream& out) { write_profile_csv(res, out); });
}

}  // namespace ri
