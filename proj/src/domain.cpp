#include "ri/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ri/green.hpp"

namespace ri {

namespace {

// cell average of 1/|x| over the unit cube [-1/2, 1/2]^3 (regularizes the
// kernel singularity; a cell of side h contributes h^2 times this)
constexpr double kSelfCellUnit = 2.380077363972502;

// integral of |x|^-4 over {|x|_inf > 1}; scales as 1/s for half-width s,
// computed as 2 * integral over {1 < |x|_inf < 2} (the two regions match
// under x -> 2x up to the factor 1/2)
constexpr double kCubeTailUnit = 10.4450370;

double kernel_weight(double h, double dist) {
    // contribution of one cell of side h at center distance dist
    if (dist < h * 1e-9) return green_asymptotic_constant(3) * h * h * kSelfCellUnit;
    return h * h * h * green_asymptotic(3, dist);
}

}  // namespace

double Domain::volume() const {
    if (shape == Shape::ball) {
        const double pi = std::acos(-1.0);
        return 4.0 * pi / 3.0 * radius * radius * radius;
    }
    return 8.0 * radius * radius * radius;
}

double Domain::shell_r(int64_t k) const { return (static_cast<double>(k) + 0.5) * h; }

double Domain::weight(int64_t k) const {
    if (shape == Shape::ball) {
        const double pi = std::acos(-1.0);
        const double a = static_cast<double>(k) * h;
        const double b = a + h;
        return 4.0 * pi / 3.0 * (b * b * b - a * a * a);
    }
    return h * h * h;
}

std::array<double, 3> Domain::cell_center(int64_t k) const {
    const int64_t n = n_side;
    const int64_t iz = k % n, iy = (k / n) % n, ix = k / (n * n);
    auto coord = [&](int64_t i) { return -radius + (static_cast<double>(i) + 0.5) * h; };
    return {coord(ix), coord(iy), coord(iz)};
}

Domain make_ball(double radius, double h, double r_max) {
    if (!(radius > 0)) throw std::invalid_argument("make_ball: radius must be positive");
    if (h == 0) h = 1e-3 * radius;
    if (r_max == 0) r_max = 10.0 * radius;
    if (!(h > 0) || !(r_max > radius))
        throw std::invalid_argument("make_ball: need h > 0 and r_max > radius");
    Domain dom;
    dom.shape = Domain::Shape::ball;
    dom.radius = radius;
    dom.n_inside = std::llround(radius / h);
    if (dom.n_inside < 4) throw std::invalid_argument("make_ball: mesh too coarse");
    dom.h = radius / static_cast<double>(dom.n_inside);  // boundary on a cell edge
    dom.n_mesh = std::llround(r_max / dom.h);
    if (dom.n_mesh <= dom.n_inside) throw std::invalid_argument("make_ball: r_max too small");
    dom.r_max = static_cast<double>(dom.n_mesh) * dom.h;
    return dom;
}

Domain make_box(double half_width, int32_t n_side) {
    if (!(half_width > 0)) throw std::invalid_argument("make_box: half_width must be positive");
    if (n_side < 4 || n_side % 2 != 0)
        throw std::invalid_argument("make_box: n_side must be even and >= 4");
    Domain dom;
    dom.shape = Domain::Shape::box;
    dom.radius = half_width;
    dom.n_side = n_side;
    dom.h = 2.0 * half_width / n_side;
    dom.n_inside = static_cast<int64_t>(n_side) * n_side * n_side;
    dom.n_mesh = dom.n_inside;
    dom.r_max = 0;
    return dom;
}

namespace {

Field convolve_ball(const Field& rho, const Domain& dom) {
    const int64_t n = dom.n_mesh, ni = dom.n_inside;
    const double h = dom.h;
    for (int64_t k = ni; k < n; ++k)
        if (rho[k] != 0.0)
            throw std::invalid_argument("green_convolve: source has support outside the domain");

    // integrals of s^2 and s over each shell, exact for shell-constant rho
    std::vector<double> prefix_sq(n + 1, 0.0), suffix_lin(n + 1, 0.0);
    for (int64_t j = 0; j < n; ++j) {
        const double a = static_cast<double>(j) * h, b = a + h;
        prefix_sq[j + 1] = prefix_sq[j] + rho[j] * (b * b * b - a * a * a) / 3.0;
    }
    for (int64_t j = n - 1; j >= 0; --j) {
        const double a = static_cast<double>(j) * h, b = a + h;
        suffix_lin[j] = suffix_lin[j + 1] + rho[j] * (b * b - a * a) / 2.0;
    }
    Field out(n);
    for (int64_t k = 0; k < n; ++k) {
        const double a = static_cast<double>(k) * h, b = a + h;
        const double r = dom.shell_r(k);
        const double inner = prefix_sq[k] + rho[k] * (r * r * r - a * a * a) / 3.0;
        const double outer = rho[k] * (b * b - r * r) / 2.0 + suffix_lin[k + 1];
        out[k] = 6.0 * (inner / r + outer);
    }
    return out;
}

Field convolve_box(const Field& rho, const Domain& dom) {
    const int64_t n = dom.n_side;
    const double h = dom.h;
    // kernel table over cell-offset vectors; |offsets| <= n-1 per axis
    const int64_t m = 2 * n - 1;
    std::vector<double> table(m * m * m);
    for (int64_t dx = -(n - 1); dx <= n - 1; ++dx)
        for (int64_t dy = -(n - 1); dy <= n - 1; ++dy)
            for (int64_t dz = -(n - 1); dz <= n - 1; ++dz) {
                const double dist =
                    h * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
                table[((dx + n - 1) * m + (dy + n - 1)) * m + (dz + n - 1)] =
                    kernel_weight(h, dist);
            }
    Field out(dom.n_mesh, 0.0);
    for (int64_t ix = 0; ix < n; ++ix)
        for (int64_t iy = 0; iy < n; ++iy)
            for (int64_t iz = 0; iz < n; ++iz) {
                double acc = 0;
                for (int64_t jx = 0; jx < n; ++jx)
                    for (int64_t jy = 0; jy < n; ++jy) {
                        const double* row =
                            &table[((ix - jx + n - 1) * m + (iy - jy + n - 1)) * m + (iz + n - 1)];
                        const double* src = &rho[(jx * n + jy) * n];
                        for (int64_t jz = 0; jz < n; ++jz) acc += row[-jz] * src[jz];
                    }
                out[(ix * n + iy) * n + iz] = acc;
            }
    return out;
}

}  // namespace

Field green_convolve(const Field& rho, const Domain& dom) {
    if (static_cast<int64_t>(rho.size()) != dom.n_mesh)
        throw std::invalid_argument("green_convolve: field size does not match the mesh");
    return dom.shape == Domain::Shape::ball ? convolve_ball(rho, dom) : convolve_box(rho, dom);
}

double green_eval_at(const Field& rho, const Domain& dom, const std::array<double, 3>& z) {
    if (dom.shape != Domain::Shape::box)
        throw std::invalid_argument("green_eval_at: box domains only");
    if (static_cast<int64_t>(rho.size()) != dom.n_mesh)
        throw std::invalid_argument("green_eval_at: field size does not match the mesh");
    double acc = 0;
    for (int64_t k = 0; k < dom.n_mesh; ++k) {
        if (rho[k] == 0.0) continue;
        const auto c = dom.cell_center(k);
        const double dx = z[0] - c[0], dy = z[1] - c[1], dz = z[2] - c[2];
        acc += rho[k] * kernel_weight(dom.h, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return acc;
}

double gradient_energy(const Field& phi, const Domain& dom) {
    if (dom.shape != Domain::Shape::ball)
        throw std::invalid_argument("gradient_energy: ball domains only");
    if (static_cast<int64_t>(phi.size()) != dom.n_mesh)
        throw std::invalid_argument("gradient_energy: field size does not match the mesh");
    const double pi = std::acos(-1.0);
    const double h = dom.h;
    double sum = 0;
    for (int64_t f = 1; f < dom.n_mesh; ++f) {
        const double rf = static_cast<double>(f) * h;
        const double d = (phi[f] - phi[f - 1]) / h;
        sum += d * d * 4.0 * pi * rf * rf * h;
    }
    const double c_tail = dom.shell_r(dom.n_mesh - 1) * phi[dom.n_mesh - 1];
    sum += 4.0 * pi * c_tail * c_tail / dom.r_max;
    return sum / (2.0 * dom.dim);
}

namespace {

// phi = lambda * G rho on a cubic grid of half-extent q cells around the
// origin, aligned with the interior mesh (requires n_side even)
struct BoxGrid {
    int64_t q = 0;  // grid spans indices [-q, q) per axis
    double h = 0;
    std::vector<double> phi;

    int64_t idx(int64_t gx, int64_t gy, int64_t gz) const {
        const int64_t w = 2 * q;
        return ((gx + q) * w + (gy + q)) * w + (gz + q);
    }
    double extent() const { return static_cast<double>(q) * h; }
};

BoxGrid eval_extended(const Field& rho, double lambda, const Domain& dom, double ext_factor) {
    if (!(ext_factor >= 1.5))
        throw std::invalid_argument("gradient_energy_box: ext_factor must be >= 1.5");
    const int64_t n = dom.n_side, half = n / 2;
    BoxGrid grid;
    grid.h = dom.h;
    grid.q = static_cast<int64_t>(std::ceil(ext_factor * static_cast<double>(half) - 1e-9));
    const int64_t q = grid.q, w = 2 * q;
    const int64_t span = q + half;  // max |offset| between grid and source cells
    const int64_t m = 2 * span + 1;
    std::vector<double> table(m * m * m);
    for (int64_t dx = -span; dx <= span; ++dx)
        for (int64_t dy = -span; dy <= span; ++dy)
            for (int64_t dz = -span; dz <= span; ++dz) {
                const double dist =
                    grid.h * std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
                table[((dx + span) * m + (dy + span)) * m + (dz + span)] =
                    lambda * kernel_weight(grid.h, dist);
            }
    grid.phi.assign(w * w * w, 0.0);
    for (int64_t gx = -q; gx < q; ++gx)
        for (int64_t gy = -q; gy < q; ++gy)
            for (int64_t gz = -q; gz < q; ++gz) {
                double acc = 0;
                for (int64_t jx = 0; jx < n; ++jx)
                    for (int64_t jy = 0; jy < n; ++jy) {
                        const double* row = &table[((gx - (jx - half) + span) * m +
                                                    (gy - (jy - half) + span)) *
                                                       m +
                                                   (gz + half + span)];
                        const double* src = &rho[(jx * n + jy) * n];
                        for (int64_t jz = 0; jz < n; ++jz) acc += row[-jz] * src[jz];
                    }
                grid.phi[grid.idx(gx, gy, gz)] = acc;
            }
    return grid;
}

// monopole coefficient: mean of |z| phi(z) over 26 lattice directions near
// the grid rim
double fit_monopole(const Field& rho, double lambda, const Domain& dom, double r_probe) {
    double acc = 0;
    int count = 0;
    for (int sx = -1; sx <= 1; ++sx)
        for (int sy = -1; sy <= 1; ++sy)
            for (int sz = -1; sz <= 1; ++sz) {
                if (sx == 0 && sy == 0 && sz == 0) continue;
                const double norm = std::sqrt(static_cast<double>(sx * sx + sy * sy + sz * sz));
                const std::array<double, 3> z = {r_probe * sx / norm, r_probe * sy / norm,
                                                 r_probe * sz / norm};
                acc += r_probe * lambda * green_eval_at(rho, dom, z);
                ++count;
            }
    return acc / count;
}

double face_energy(const BoxGrid& grid) {
    const int64_t q = grid.q, w = 2 * q;
    double sum = 0;
    auto at = [&](int64_t a, int64_t b, int64_t c) { return grid.phi[(a * w + b) * w + c]; };
    for (int64_t a = 0; a < w; ++a)
        for (int64_t b = 0; b < w; ++b)
            for (int64_t c = 0; c < w; ++c) {
                const double v = at(a, b, c);
                if (a + 1 < w) sum += (at(a + 1, b, c) - v) * (at(a + 1, b, c) - v);
                if (b + 1 < w) sum += (at(a, b + 1, c) - v) * (at(a, b + 1, c) - v);
                if (c + 1 < w) sum += (at(a, b, c + 1) - v) * (at(a, b, c + 1) - v);
            }
    return sum * grid.h;  // ((dphi/h)^2) * h^3 summed over faces
}

}  // namespace

double gradient_energy_box(const Field& rho, double lambda, const Domain& dom,
                           double ext_factor) {
    if (dom.shape != Domain::Shape::box)
        throw std::invalid_argument("gradient_energy_box: box domains only");
    const BoxGrid grid = eval_extended(rho, lambda, dom, ext_factor);
    const double ext = grid.extent();
    const double c_fit = fit_monopole(rho, lambda, dom, 0.93 * ext);
    return (face_energy(grid) + c_fit * c_fit * kCubeTailUnit / ext) / (2.0 * dom.dim);
}

double dilated_energy_box(const Field& rho, double lambda, const Domain& dom, double scale,
                          double ext_factor) {
    if (dom.shape != Domain::Shape::box)
        throw std::invalid_argument("dilated_energy_box: box domains only");
    if (!(scale > 0) || scale > 1)
        throw std::invalid_argument("dilated_energy_box: scale must be in (0, 1]");
    const BoxGrid base = eval_extended(rho, lambda, dom, ext_factor);
    const double ext = base.extent();
    const double c_fit = fit_monopole(rho, lambda, dom, 0.93 * ext);

    // phi_s(z) = phi(z / s): trilinear inside the evaluated grid, monopole
    // tail c * s / |z| beyond it
    BoxGrid scaled;
    scaled.q = base.q;
    scaled.h = base.h;
    const int64_t q = base.q, w = 2 * q;
    scaled.phi.assign(w * w * w, 0.0);
    // grid coords usable for interpolation: corners exist for t in [-q, q-1]
    const auto in_grid = [q](double t) {
        return t >= -static_cast<double>(q) && t <= static_cast<double>(q) - 1.0;
    };
    for (int64_t gx = -q; gx < q; ++gx)
        for (int64_t gy = -q; gy < q; ++gy)
            for (int64_t gz = -q; gz < q; ++gz) {
                const double zx = (gx + 0.5) * base.h, zy = (gy + 0.5) * base.h,
                             zz = (gz + 0.5) * base.h;
                const double wx = zx / scale, wy = zy / scale, wz = zz / scale;
                const double tx = wx / base.h - 0.5, ty = wy / base.h - 0.5,
                             tz = wz / base.h - 0.5;
                double value;
                if (in_grid(tx) && in_grid(ty) && in_grid(tz)) {
                    // clamp so the upper interpolation corner stays on the grid
                    auto low = [&](double t) {
                        return std::min(static_cast<int64_t>(std::floor(t)), q - 2);
                    };
                    const int64_t bx = low(tx), by = low(ty), bz = low(tz);
                    const double fx = tx - bx, fy = ty - by, fz = tz - bz;
                    value = 0;
                    for (int ax = 0; ax <= 1; ++ax)
                        for (int ay = 0; ay <= 1; ++ay)
                            for (int az = 0; az <= 1; ++az) {
                                const double wgt = (ax ? fx : 1 - fx) * (ay ? fy : 1 - fy) *
                                                   (az ? fz : 1 - fz);
                                value += wgt * base.phi[base.idx(bx + ax, by + ay, bz + az)];
                            }
                } else {
                    const double dist = std::sqrt(zx * zx + zy * zy + zz * zz);
                    value = c_fit * scale / dist;
                }
                scaled.phi[scaled.idx(gx, gy, gz)] = value;
            }
    const double c_scaled = c_fit * scale;
    return (face_energy(scaled) + c_scaled * c_scaled * kCubeTailUnit / ext) / (2.0 * dom.dim);
}

}  // namespace ri
