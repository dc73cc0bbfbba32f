#pragma once

#include <functional>
#include <vector>

#include "grid.hpp"
#include "hurst.hpp"
#include "kernel.hpp"

namespace fracbdsde {

// Transfer operator K on step functions, computed exactly by linearity from
// the kernel identity K 1_{[0,t]} = K_H(t,.) 1_{[0,t]} over cell indicators.
// Input and output are cell-based (output entries are cell averages of K phi,
// taken straight from the kernel-weight table).
GridFunction op_K(const GridFunction& phi, const Hurst& h, const KernelWeights& weights);

// Pointwise exact evaluation of (K phi)(s) for a cell-based step phi.
double op_K_pointwise(const GridFunction& phi, const Hurst& h, double s);

// Generic-quadrature fallback: applies the fractional-derivative formula
// (K phi)(s) = C_H Gamma(H+1/2) s^{1/2-H} D_{T-}^{1/2-H}[u^{H-1/2} phi(u)](s)
// to a node-based phi (test path; requires phi(0) = 0).
GridFunction op_K_fallback(const GridFunction& phi, const Hurst& h);

// Adjoint K*: (K* g)(u) = C_H Gamma(H+1/2) u^{H-1/2} D_{0+}^{1/2-H}[s^{1/2-H} g(s)](u),
// evaluated through frac_derivative_left on a node-based g.
GridFunction op_K_star(const GridFunction& g, const Hurst& h);

// Same formula for a callable g at one point (tanh-sinh Marchaud with
// breakpoints on g's integrable singularities).
double op_K_star_at(const std::function<double(double)>& g, const Hurst& h, double u,
                    const std::vector<double>& breakpoints, double tol = 1e-9);

// Lambda-space inner product of two cell-based step functions through the
// R_H bilinear form (closed form, no quadrature).
double lambda_inner(const GridFunction& phi, const GridFunction& psi, const Hurst& h);

// (K* K phi) at every cell midpoint, for a cell-based step phi whose jump
// locations are grid nodes. Powers the duality-check pairing.
std::vector<double> k_star_k_midpoints(const GridFunction& phi, const Hurst& h);

}  // namespace fracbdsde
