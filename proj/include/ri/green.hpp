#pragma once

#include <cstdint>

#include "ri/rng.hpp"

namespace ri {

// Green function of simple random walk on Z^d at the origin, d >= 3:
//
//   g(0,0) = (2pi)^-d  int_{[-pi,pi]^d}  (1 - (1/d) sum_i cos t_i)^-1  dt.
//
// Evaluated by a tensorized midpoint rule (even node counts keep the grid off
// the integrable singularity at t = 0) with Richardson extrapolation until
// successive extrapolants differ by < 1e-7; relative accuracy is well below
// 1e-6 for d = 3, 4.  Throws std::invalid_argument for d < 3 (the walk is
// recurrent below three dimensions and the integral diverges).
double green_origin(int d);

// Leading asymptotics of g(0,y): c_d |y|^(2-d) with
// c_d = d Gamma(d/2 - 1) / (2 pi^(d/2));  c_3 = 3/(2 pi).
double green_asymptotic_constant(int d);
double green_asymptotic(int d, double r);

struct NeverReturnEstimate {
    double p_hat = 0;     // estimated P_0[no return to the origin]
    double std_err = 0;
    uint64_t walks = 0;
    int escape_radius = 0;
    double tail_correction = 0;  // mean of the harmonic re-hit weight at the truncation shell
};

// Monte Carlo estimate of the never-return probability 1/g(0,0).  Walks are
// truncated at the exit of B(0, escape_radius); a walk that survives to the
// shell still returns later with probability g(y,0)/g(0,0), so each survivor
// contributes 1 - g_as(y) * p rather than 1, and the fixed point
//     p = m1 / (1 + m2),   m1 = mean survive,  m2 = mean survive * g_as(exit)
// removes the truncation bias up to the O(|y|^-d) error of the kernel
// asymptotics, which is far below one standard error at radius 64 and 1e6
// walks.  Plain truncation at a shell large enough to get the bias under a
// standard error would need radii (and runtimes) ~50x larger.
NeverReturnEstimate never_return_probability(int d, int escape_radius, uint64_t walks,
                                             RngKey key, int threads);

}  // namespace ri
