#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ri {

// Mesh field: one value per mesh cell, in the cell order of its Domain.
using Field = std::vector<double>;

// Quadrature mesh for the continuum solver, d = 3 only.
//
//  ball: concentric shells of width h covering [0, r_max]; the domain is the
//        first n_inside shells and n_inside * h == radius holds exactly, so
//        interior weights sum to |D| exactly.  Fields span the whole mesh,
//        exterior shells included.
//  box:  cubic cells of side h tiling [-radius, radius]^3 (radius is the
//        half-width), lexicographic order; fields span interior cells only,
//        exterior values are evaluated on demand from the source.
struct Domain {
    enum class Shape { ball, box };
    Shape shape = Shape::ball;
    int32_t dim = 3;
    double radius = 1.0;
    double h = 1e-3;
    double r_max = 10.0;   // ball mesh extent
    int64_t n_inside = 0;  // shells (ball) or cells (box) covering the domain
    int64_t n_mesh = 0;    // field length
    int32_t n_side = 0;    // box cells per axis (even)

    double volume() const;                               // |D|
    double shell_r(int64_t k) const;                     // ball: shell center
    double weight(int64_t k) const;                      // cell measure
    std::array<double, 3> cell_center(int64_t k) const;  // box
};

// Defaults: h = 1e-3 * radius, r_max = 10 * radius.  h is snapped so that the
// domain boundary and the mesh extent land exactly on cell edges.
Domain make_ball(double radius, double h = 0, double r_max = 0);
Domain make_box(double half_width, int32_t n_side);

// Newton potential of a source supported in D, with kernel 3 / (2 pi |x|),
// the inverse of -(1/2d) Laplacian for d = 3.  Ball: interior/exterior shell
// split, exact for shell-constant sources, evaluated on the whole mesh.
// Box: direct kernel sums over cells with the analytic self-cell average.
// Throws when the source has support outside D.
Field green_convolve(const Field& rho, const Domain& dom);

// Direct kernel evaluation at an arbitrary point (box domains).
double green_eval_at(const Field& rho, const Domain& dom, const std::array<double, 3>& z);

// (1/2d) * integral of |grad phi|^2 over all space by face-centered
// differences on the radial mesh, plus the harmonic tail (4 pi / 2d) C^2 /
// r_max with C read off the outermost shell.  Ball fields only.
double gradient_energy(const Field& phi, const Domain& dom);

// Box counterpart: evaluates phi = lambda * G rho on a grid extended to
// ext_factor * radius, integrates face differences over that cube and adds
// the analytic monopole tail over the cube complement.
double gradient_energy_box(const Field& rho, double lambda, const Domain& dom,
                           double ext_factor = 4.0);

// Energy of z -> phi(z / scale) for a box source, same quadrature as above.
double dilated_energy_box(const Field& rho, double lambda, const Domain& dom,
                          double scale, double ext_factor = 4.0);

}  // namespace ri
