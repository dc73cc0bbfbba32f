#pragma once

#include <functional>
#include <vector>

#include "grid.hpp"

namespace fracbdsde {

// Riemann-Liouville fractional integrals and Marchaud-form fractional
// derivatives of order alpha in (0,1) on a uniform grid. Inputs are
// node-based GridFunctions read as piecewise-linear interpolants; every cell
// contribution (including the singular cell of the derivatives) is the exact
// integral of the interpolant against the power weight, so no quadrature
// error enters on the critical path.

GridFunction frac_integral_right(const GridFunction& f, double alpha);
GridFunction frac_integral_left(const GridFunction& f, double alpha);

// Value at the closed endpoint (s = T right / s = 0 left) is 0 when f
// vanishes there and +inf otherwise; convergence studies use interior nodes.
GridFunction frac_derivative_right(const GridFunction& f, double alpha);
GridFunction frac_derivative_left(const GridFunction& f, double alpha);

// Marchaud left derivative of a callable at a single point, by tanh-sinh
// quadrature split at the supplied breakpoints (integrable singularities of f
// must sit on breakpoints). Used by the transfer-operator plumbing where the
// integrand is not grid-resident.
double marchaud_left(const std::function<double(double)>& f, double s, double alpha,
                     std::vector<double> breakpoints, double tol = 1e-10);

}  // namespace fracbdsde
