#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ri/solver.hpp"
#include "ri/theta_model.hpp"

using namespace ri;

namespace {

constexpr double kPi = 3.14159265358979323846;

// eta(b) = 0.3 + (b - 0.3), anchored at u = 0.09; theta(0.09) = 0.3
AffineEta toy_affine() { return AffineEta(0.09, 0.3, 1.0, 4.0); }

Field indicator(const Domain& dom) {
    Field f(dom.n_mesh, 0.0);
    const int64_t inside = dom.shape == Domain::Shape::ball ? dom.n_inside : dom.n_mesh;
    for (int64_t k = 0; k < inside; ++k) f[k] = 1.0;
    return f;
}

// volume of {f > t} on the mesh
double level_volume(const Field& f, const Domain& dom, double t) {
    double v = 0;
    for (int64_t k = 0; k < dom.n_mesh; ++k)
        if (f[k] > t) v += dom.weight(k);
    return v;
}

}  // namespace

TEST_CASE("ball mesh lands the boundary on a cell edge") {
    Domain dom = make_ball(1.0, 0.003, 2.0);
    CHECK(dom.shape == Domain::Shape::ball);
    CHECK(static_cast<double>(dom.n_inside) * dom.h == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dom.n_mesh > dom.n_inside);
    CHECK(dom.r_max == doctest::Approx(static_cast<double>(dom.n_mesh) * dom.h));

    // interior weights telescope to the exact ball volume
    double w = 0;
    for (int64_t k = 0; k < dom.n_inside; ++k) w += dom.weight(k);
    CHECK(w == doctest::Approx(dom.volume()).epsilon(1e-13));

    Domain def = make_ball(2.0);
    CHECK(def.h == doctest::Approx(2e-3));
    CHECK(def.r_max == doctest::Approx(20.0));

    CHECK_THROWS_AS(make_ball(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_ball(1.0, 0.5, 10.0), std::invalid_argument);   // too coarse
    CHECK_THROWS_AS(make_ball(1.0, 0.01, 0.5), std::invalid_argument);   // r_max inside
}

TEST_CASE("box mesh basics") {
    Domain dom = make_box(1.0, 8);
    CHECK(dom.h == doctest::Approx(0.25));
    CHECK(dom.n_mesh == 512);
    CHECK(dom.volume() == doctest::Approx(8.0));
    const auto c0 = dom.cell_center(0);
    CHECK(c0[0] == doctest::Approx(-0.875));
    CHECK(c0[1] == doctest::Approx(-0.875));
    CHECK(c0[2] == doctest::Approx(-0.875));
    const auto clast = dom.cell_center(dom.n_mesh - 1);
    CHECK(clast[0] == doctest::Approx(0.875));

    CHECK_THROWS_AS(make_box(1.0, 7), std::invalid_argument);
    CHECK_THROWS_AS(make_box(1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_box(0.0, 8), std::invalid_argument);
}

TEST_CASE("ball potential of the indicator matches the closed form exactly") {
    Domain dom = make_ball(1.0, 0.01, 5.0);
    const Field g1 = green_convolve(indicator(dom), dom);
    for (int64_t k = 0; k < dom.n_mesh; ++k) {
        const double r = dom.shell_r(k);
        const double want = r <= 1.0 ? 3.0 - r * r : 2.0 / r;
        CHECK(g1[k] == doctest::Approx(want).epsilon(1e-13));
    }

    // linearity over shell-constant sources
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Field a(dom.n_mesh, 0.0), b(dom.n_mesh, 0.0), mix(dom.n_mesh, 0.0);
    for (int64_t k = 0; k < dom.n_inside; ++k) {
        a[k] = unif(gen);
        b[k] = unif(gen);
        mix[k] = 2.0 * a[k] - 0.5 * b[k];
    }
    const Field ga = green_convolve(a, dom), gb = green_convolve(b, dom),
                gm = green_convolve(mix, dom);
    for (int64_t k = 0; k < dom.n_mesh; k += 37)
        CHECK(gm[k] == doctest::Approx(2.0 * ga[k] - 0.5 * gb[k]).epsilon(1e-11));

    Field bad(dom.n_mesh, 0.0);
    bad[dom.n_mesh - 1] = 1.0;
    CHECK_THROWS_AS(green_convolve(bad, dom), std::invalid_argument);
    CHECK_THROWS_AS(green_convolve(Field(3, 0.0), dom), std::invalid_argument);
}

TEST_CASE("indicator inner product hits 16 pi / 5") {
    Domain dom = make_ball(1.0, 0.005, 5.0);
    const Field ones = indicator(dom);
    const Field g1 = green_convolve(ones, dom);
    double ip = 0;
    for (int64_t k = 0; k < dom.n_inside; ++k) ip += dom.weight(k) * g1[k];
    CHECK(ip == doctest::Approx(16.0 * kPi / 5.0).epsilon(1e-3));
    CHECK(ip == doctest::Approx(16.0 * kPi / 5.0).epsilon(1e-5));
}

TEST_CASE("gradient energy of the exact profile") {
    Domain dom = make_ball(1.0, 0.005, 10.0);
    const double lambda = 0.05;
    Field phi = green_convolve(indicator(dom), dom);
    for (double& v : phi) v *= lambda;
    const double want = lambda * lambda * 16.0 * kPi / 5.0;
    CHECK(gradient_energy(phi, dom) == doctest::Approx(want).epsilon(1e-3));

    // halving h cuts the quadrature error by about four
    Domain fine = make_ball(1.0, 0.0025, 10.0);
    Field phif = green_convolve(indicator(fine), fine);
    for (double& v : phif) v *= lambda;
    const double err_c = std::abs(gradient_energy(phi, dom) - want);
    const double err_f = std::abs(gradient_energy(phif, fine) - want);
    CHECK(err_f < 0.5 * err_c);

    CHECK_THROWS_AS(gradient_energy(phi, make_box(1.0, 4)), std::invalid_argument);
}

TEST_CASE("box potential: symmetry and pointwise evaluation agree") {
    Domain dom = make_box(1.0, 8);
    const Field g1 = green_convolve(indicator(dom), dom);
    const int64_t n = dom.n_side;
    auto at = [&](int64_t i, int64_t j, int64_t k) { return g1[(i * n + j) * n + k]; };

    // cubic symmetry: reflections and axis permutations fix the profile
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j)
            for (int64_t k = 0; k < n; ++k) {
                CHECK(at(i, j, k) == doctest::Approx(at(n - 1 - i, j, k)).epsilon(1e-12));
                CHECK(at(i, j, k) == doctest::Approx(at(j, i, k)).epsilon(1e-12));
                CHECK(at(i, j, k) == doctest::Approx(at(i, k, j)).epsilon(1e-12));
            }
    CHECK(at(4, 4, 4) > at(0, 0, 0));

    // direct evaluation at a cell center reproduces the convolution
    for (int64_t k : {int64_t(0), int64_t(77), int64_t(300)}) {
        const double direct = green_eval_at(g1.size() == 0 ? g1 : indicator(dom), dom,
                                            dom.cell_center(k));
        CHECK(direct == doctest::Approx(g1[k]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(green_eval_at(indicator(dom), make_ball(1.0, 0.01, 2.0), {0, 0, 0}),
                    std::invalid_argument);
}

TEST_CASE("constraint functional: anchor value, affine shifts, monotonicity") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0, 0.01, 3.0);
    Field zero(dom.n_mesh, 0.0);
    CHECK(constraint_functional(m, 0.09, zero, dom) ==
          doctest::Approx(0.3).epsilon(1e-14));

    // constant shift c adds kappa * c in the affine regime
    Field shifted(dom.n_mesh, 0.07);
    CHECK(constraint_functional(m, 0.09, shifted, dom) ==
          doctest::Approx(0.37).epsilon(1e-13));

    Field bump = zero;
    for (int64_t k = 0; k < dom.n_inside / 2; ++k) bump[k] = 0.05;
    CHECK(constraint_functional(m, 0.09, bump, dom) >
          constraint_functional(m, 0.09, zero, dom));

    Field neg = zero;
    neg[2] = -1e-6;
    CHECK_THROWS_AS(constraint_functional(m, 0.09, neg, dom), std::invalid_argument);
    CHECK_THROWS_AS(constraint_functional(m, 0.0, zero, dom), std::invalid_argument);
    CHECK_THROWS_AS(constraint_functional(m, 0.09, Field(5, 0.0), dom),
                    std::invalid_argument);
}

TEST_CASE("directional derivative matches finite differences") {
    SmoothedTheta st = build_smoothed_theta(toy_base("linear:0.5"), 0.5, 0.9, 4.2);
    Domain dom = make_ball(1.0, 0.01, 3.0);
    const double u = 0.25;

    Field phi(dom.n_mesh, 0.0), psi(dom.n_mesh, 0.0);
    for (int64_t k = 0; k < dom.n_inside; ++k) {
        const double r = dom.shell_r(k);
        phi[k] = 0.1 * (1.0 - r * r);
        psi[k] = 0.3 + 0.2 * r;
    }
    const double exact = directional_derivative(st, u, phi, psi, dom);
    for (double t : {1e-3, 1e-4}) {
        Field up = phi, dn = phi;
        for (int64_t k = 0; k < dom.n_mesh; ++k) {
            up[k] += t * psi[k];
            dn[k] -= t * psi[k];
        }
        const double fd = (constraint_functional(st, u, up, dom) -
                           constraint_functional(st, u, dn, dom)) /
                          (2.0 * t);
        CHECK(fd == doctest::Approx(exact).epsilon(5e-6));
    }

    // affine model: derivative is kappa times the domain mean of psi
    const AffineEta m = toy_affine();
    double mean_psi = 0;
    for (int64_t k = 0; k < dom.n_inside; ++k) mean_psi += dom.weight(k) * psi[k];
    mean_psi /= dom.volume();
    CHECK(directional_derivative(m, 0.09, phi, psi, dom) ==
          doctest::Approx(mean_psi).epsilon(1e-13));
}

TEST_CASE("fixed point: zero level set, exact affine solution, damping") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0, 0.005, 5.0);

    FixedPointResult off = el_fixed_point(0.0, 0.09, m, dom);
    CHECK(off.iterations == 1);
    for (double v : off.phi) CHECK(v == 0.0);

    // eta' is constant, so the iteration lands on lambda G 1_D in one step
    const double lambda = 0.05;
    FixedPointResult fp = el_fixed_point(lambda, 0.09, m, dom);
    CHECK(fp.iterations == 2);
    CHECK(fp.residual <= 10.0 * 1e-10);
    const Field g1 = green_convolve(indicator(dom), dom);
    for (int64_t k = 0; k < dom.n_mesh; k += 101)
        CHECK(fp.phi[k] == doctest::Approx(lambda * g1[k]).epsilon(1e-13));
    CHECK(fp.phi[0] == doctest::Approx(3.0 * lambda).epsilon(1e-4));

    FixedPointResult damped = el_fixed_point(lambda, 0.09, m, dom, 0.5);
    CHECK(damped.iterations > fp.iterations);
    for (int64_t k = 0; k < dom.n_mesh; k += 101)
        CHECK(damped.phi[k] == doctest::Approx(fp.phi[k]).epsilon(1e-8));

    CHECK_THROWS_AS(el_fixed_point(-0.1, 0.09, m, dom), std::invalid_argument);
    CHECK_THROWS_AS(el_fixed_point(0.1, 0.0, m, dom), std::invalid_argument);
    CHECK_THROWS_AS(el_fixed_point(0.1, 0.09, m, dom, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(el_fixed_point(0.1, 0.09, m, dom, 1.0, 0.0), std::invalid_argument);
    // iteration budget too small to converge
    CHECK_THROWS_AS(el_fixed_point(lambda, 0.09, m, dom, 0.5, 1e-10, 3),
                    std::runtime_error);
}

TEST_CASE("affine minimizer: multiplier, sup, and energy in closed form") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0);
    MinimizerResult res = solve_min(0.09, 0.42, m, dom);

    CHECK(res.lambda == doctest::Approx(0.05).epsilon(1e-4));
    const double sup = *std::max_element(res.phi.begin(), res.phi.end());
    CHECK(sup == doctest::Approx(0.15).epsilon(1e-4));
    CHECK(res.energy == doctest::Approx(0.0025 * 16.0 * kPi / 5.0).epsilon(1e-4));
    CHECK(std::abs(res.constraint - 0.42) <= 1e-6);
    CHECK(std::abs(res.energy - res.energy_dual) <= 1e-3 * res.energy);
    CHECK(res.iterations == 2);
    CHECK(res.model_hash == m.model_hash());
    CHECK(res.props.passed());

    // exterior plateau r phi = 2 lambda kappa, multiplier ratio constant
    CHECK(res.props.harmonic_c == doctest::Approx(2.0 * res.lambda).epsilon(1e-6));
    CHECK(res.props.exterior_metric <= 1e-9);
    CHECK(res.props.multiplier_spread <= 1e-9);
    CHECK(res.props.small_excess_c2 == doctest::Approx(0.15 / 0.12).epsilon(1e-3));
    CHECK(res.props.decay_sup == doctest::Approx(0.1).epsilon(1e-4));

    // nu at theta(u): the zero field is the minimizer
    MinimizerResult flat = solve_min(0.09, 0.3 + 5e-7, m, dom);
    CHECK(flat.lambda == 0.0);
    CHECK(flat.energy == 0.0);
    for (double v : flat.phi) CHECK(v == 0.0);
    CHECK(flat.props.passed());

    CHECK_THROWS_AS(solve_min(0.09, 0.29, m, dom), std::invalid_argument);
    CHECK_THROWS_AS(solve_min(0.09, 1.0, m, dom), std::invalid_argument);
    CHECK_THROWS_AS(solve_min(0.0, 0.42, m, dom), std::invalid_argument);
    CHECK_THROWS_AS(solve_min(4.0, 0.42, m, dom), std::invalid_argument);
}

TEST_CASE("smoothed profile minimizer on a coarse ball") {
    SmoothedTheta st = build_smoothed_theta(toy_base("linear:0.5"), 0.5, 0.9, 4.2);
    Domain dom = make_ball(1.0, 0.005, 10.0);
    const double u = 0.25, nu = 0.14;
    CHECK(st.theta(u) == doctest::Approx(0.125));

    MinimizerResult res = solve_min(u, nu, st, dom);
    CHECK(res.lambda > 0.0);
    CHECK(std::abs(res.constraint - nu) <= 1e-6);
    CHECK(res.props.passed());
    CHECK(std::abs(res.energy - res.energy_dual) <= 1e-2 * res.energy);

    // the solve refuses levels the profile does not certify
    CHECK_THROWS_AS(solve_min(0.6, 0.9, st, dom), std::invalid_argument);

    // an excess far outside the contraction regime is reported, not solved
    CHECK_THROWS_AS(solve_min(u, 0.6, st, dom), std::runtime_error);
}

TEST_CASE("energy pair flags inconsistent quadratures") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0, 0.01, 10.0);
    const double lambda = 0.05;
    Field rho = indicator(dom);
    Field phi = green_convolve(rho, dom);
    for (double& v : phi) v *= lambda;
    auto [e, dual] = energy_pair(phi, lambda, rho, dom);
    CHECK(e == doctest::Approx(dual).epsilon(1e-3));

    // doubled source against the same field: duality off by 2x
    Field rho2 = rho;
    for (double& v : rho2) v *= 2.0;
    CHECK_THROWS_AS(energy_pair(phi, lambda, rho2, dom), std::runtime_error);

    // refinement shrinks the gap
    Domain fine = make_ball(1.0, 0.005, 10.0);
    Field rf = indicator(fine);
    Field pf = green_convolve(rf, fine);
    for (double& v : pf) v *= lambda;
    auto [ef, dualf] = energy_pair(pf, lambda, rf, fine);
    const double gap_c = std::abs(e - dual) / e;
    const double gap_f = std::abs(ef - dualf) / ef;
    CHECK(gap_f < gap_c);
}

TEST_CASE("lambda scales linearly in the excess") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0, 0.002, 10.0);
    const std::vector<double> nus = {0.34, 0.38, 0.42, 0.46};
    ScalingReport rep = lambda_scaling_check(0.09, m, dom, nus);
    CHECK(rep.pass);
    CHECK(rep.lambda_monotone);
    CHECK(rep.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.c_low == doctest::Approx(1.0 / 2.4).epsilon(1e-4));
    CHECK(rep.c_high == doctest::Approx(1.0 / 2.4).epsilon(1e-4));

    CHECK_THROWS_AS(lambda_scaling_check(0.09, m, dom, {0.34, 0.38}),
                    std::invalid_argument);
    CHECK_THROWS_AS(lambda_scaling_check(0.09, m, dom, {0.3, 0.34, 0.38}),
                    std::invalid_argument);
}

TEST_CASE("radial rearrangement: fixed points, distribution, energy drop") {
    Domain dom = make_ball(1.0, 0.01, 4.0);

    // a nonincreasing profile is its own rearrangement
    Field g1 = green_convolve(indicator(dom), dom);
    Field same = rearrange_radial(g1, dom);
    for (int64_t k = 0; k < dom.n_mesh; ++k) CHECK(same[k] == g1[k]);

    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double max_w = 0;
    for (int64_t k = 0; k < dom.n_mesh; ++k) max_w = std::max(max_w, dom.weight(k));
    for (int rep = 0; rep < 5; ++rep) {
        Field f(dom.n_mesh, 0.0);
        for (int64_t k = 0; k < dom.n_mesh / 2; ++k) f[k] = unif(gen);
        Field r = rearrange_radial(f, dom);
        for (int64_t k = 1; k < dom.n_mesh; ++k) CHECK(r[k] <= r[k - 1] + 1e-15);
        for (double t : {0.1, 0.3, 0.5, 0.7, 0.9})
            CHECK(std::abs(level_volume(f, dom, t) - level_volume(r, dom, t)) <=
                  max_w + 1e-12);
        CHECK(gradient_energy(r, dom) <= gradient_energy(f, dom) * 1.01);
    }

    Field neg(dom.n_mesh, 0.0);
    neg[0] = -1.0;
    CHECK_THROWS_AS(rearrange_radial(neg, dom), std::invalid_argument);
    CHECK_THROWS_AS(rearrange_radial(Field(64, 0.0), make_box(1.0, 4)),
                    std::invalid_argument);
}

TEST_CASE("dilation scales the energy like the first power") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0);
    MinimizerResult res = solve_min(0.09, 0.42, m, dom);

    DilationReport unit = dilation_check(res, m, dom, 1.0);
    CHECK(unit.energy_ok);
    CHECK(unit.constraint_ok);
    CHECK(unit.energy_scaled == doctest::Approx(unit.energy_base).epsilon(1e-12));

    for (double s : {0.5, 0.8}) {
        DilationReport rep = dilation_check(res, m, dom, s);
        CHECK(rep.energy_ok);
        CHECK(rep.expected_ratio == doctest::Approx(s));
        CHECK(rep.energy_scaled / rep.energy_base == doctest::Approx(s).epsilon(2e-3));
    }
    CHECK_THROWS_AS(dilation_check(res, m, dom, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(dilation_check(res, m, dom, 1.5), std::invalid_argument);
}

TEST_CASE("energy curve grows quadratically for the affine profile") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0, 0.002, 10.0);
    const double theta = 0.3;
    const std::vector<double> nus = {0.33, 0.36, 0.39, 0.42};
    const auto curve = j_curve(0.09, m, dom, nus);
    REQUIRE(curve.size() == nus.size());
    for (size_t i = 0; i < curve.size(); ++i) {
        const double d = nus[i] - theta;
        const double want = d * d / (2.4 * 2.4) * 16.0 * kPi / 5.0;
        CHECK(curve[i].j == doctest::Approx(want).epsilon(1e-3));
        if (i > 0) {
            CHECK(curve[i].j > curve[i - 1].j);
            CHECK(curve[i].lambda > curve[i - 1].lambda);
        }
    }
    CHECK_THROWS_AS(j_curve(0.09, m, dom, {0.42, 0.36}), std::invalid_argument);
    CHECK_THROWS_AS(j_curve(0.09, m, dom, {0.42}), std::invalid_argument);
}

TEST_CASE("threshold scan: ball geometry gives the 0.8 shape factor") {
    Domain dom = make_ball(1.0, 0.002, 10.0);

    // strong coupling: threshold beyond 1, not reachable
    const AffineEta strong = toy_affine();
    ThresholdReport rep = threshold_scan(0.09, strong, dom);
    CHECK(rep.mean_g1 == doctest::Approx(2.4).epsilon(1e-5));
    CHECK(rep.max_g1 == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(rep.nu_threshold == doctest::Approx(0.3 + 1.7 * 0.8).epsilon(1e-4));
    CHECK_FALSE(rep.reachable);

    // weak coupling keeps the threshold below 1
    const AffineEta weak(0.09, 0.3, 0.3, 1.0);
    ThresholdReport rep2 = threshold_scan(0.09, weak, dom);
    CHECK(rep2.nu_threshold == doctest::Approx(0.3 + 0.7 * 0.3 * 0.8).epsilon(1e-4));
    CHECK(rep2.reachable);

    CHECK_THROWS_AS(threshold_scan(4.0, strong, dom), std::invalid_argument);
    CHECK_THROWS_AS(threshold_scan(0.0, strong, dom), std::invalid_argument);
}

TEST_CASE("box minimizer: dual gap, harmonic extension, decay location") {
    const AffineEta m = toy_affine();
    Domain dom = make_box(1.0, 12);
    MinimizerResult res = solve_min(0.09, 0.42, m, dom);

    CHECK(res.lambda > 0.0);
    CHECK(std::abs(res.constraint - 0.42) <= 1e-6);
    CHECK(res.props.passed());
    CHECK(std::abs(res.energy - res.energy_dual) <= 1e-2 * res.energy);
    CHECK(res.props.multiplier_spread <= 1e-9);  // constant eta'

    // an 8-cell axis is below the dual-gap resolution and must be refused
    Domain coarse = make_box(1.0, 8);
    CHECK_THROWS_AS(solve_min(0.09, 0.42, m, coarse), std::runtime_error);
}

TEST_CASE("box dilation needs the finer grid to stay within one percent") {
    const AffineEta m = toy_affine();
    Domain dom = make_box(1.0, 16);
    MinimizerResult res = solve_min(0.09, 0.42, m, dom);

    DilationReport unit = dilation_check(res, m, dom, 1.0);
    CHECK(unit.energy_ok);
    CHECK(unit.energy_scaled == doctest::Approx(unit.energy_base).epsilon(1e-12));
    for (double s : {0.5, 0.8}) {
        DilationReport rep = dilation_check(res, m, dom, s);
        CHECK(rep.energy_ok);
        CHECK(rep.constraint_ok);
    }
}

TEST_CASE("minimizer artifacts round-trip through json and csv") {
    const AffineEta m = toy_affine();
    Domain dom = make_ball(1.0, 0.01, 3.0);
    MinimizerResult res = solve_min(0.09, 0.42, m, dom);

    std::stringstream js;
    save_minimizer(res, js);
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j.at("type") == "minimizer");
    CHECK(j.at("u").get<double>() == res.u);
    CHECK(j.at("nu").get<double>() == res.nu);
    CHECK(j.at("lambda").get<double>() == res.lambda);
    CHECK(j.at("energy").get<double>() == res.energy);
    CHECK(j.at("props").at("passed").get<bool>());
    CHECK(j.at("domain").at("shape") == "ball");
    CHECK(j.at("profile").size() == static_cast<size_t>(dom.n_mesh));
    CHECK(j.at("model_hash").get<std::string>().size() == 16);
    CHECK(j.at("tolerances").at("constraint").get<double>() == res.tol_constraint);

    std::stringstream cs;
    write_profile_csv(res, cs);
    std::string line;
    CHECK(std::getline(cs, line));
    CHECK(line == "r,phi");
    int64_t rows = 0;
    double first_phi = -1;
    while (std::getline(cs, line)) {
        if (rows == 0) first_phi = std::stod(line.substr(line.find(',') + 1));
        ++rows;
    }
    CHECK(rows == dom.n_mesh);
    CHECK(first_phi == doctest::Approx(res.phi[0]).epsilon(1e-15));

    // box profiles carry coordinates
    Domain box = make_box(1.0, 4);
    MinimizerResult bres;
    bres.domain = box;
    bres.phi.assign(box.n_mesh, 0.25);
    std::stringstream bs;
    write_profile_csv(bres, bs);
    CHECK(std::getline(bs, line));
    CHECK(line == "x,y,z,phi");
}
