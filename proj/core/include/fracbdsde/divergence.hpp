#pragma once

#include <string>
#include <vector>

#include "functional.hpp"
#include "girsanov.hpp"
#include "grid.hpp"
#include "hurst.hpp"
#include "sampling.hpp"

namespace fracbdsde {

// For deterministic step u the extended divergence is the Wiener integral of
// the transferred integrand: delta(u) = sum_m (K u)_m dW0_m per path.
std::vector<double> divergence_deterministic(const GridFunction& u, const Hurst& h,
                                             const KernelWeights& weights,
                                             const std::vector<WienerPath>& paths);

struct DualityReport {
    std::string functional;
    double lhs = 0.0;  // E <K*K D^B F, u>_{L2}
    double rhs = 0.0;  // E[F delta]
    double diff = 0.0;
    double se = 0.0;
    double z = 0.0;
};

// The defining duality E[<K*K D^B F, u>] = E[F delta^B(u)] for a per-path
// integrand u (cell values) and a per-path divergence candidate delta,
// typically identified as the residual of a solved equation. The pairing is
// evaluated in the adjoint-equivalent form <K phi_i, K u> through the exact
// cell-averaged transfer tables (midpoint sums of K*K phi carry an
// O(dt^{2H}) endpoint bias that would mask the statistical comparison; the
// adjoint identity itself is checked separately). F must be prepared against
// the ensemble's weight table. When consecutive samples share one driving
// path (block designs), pass the block length as `cluster`: the standard
// error is then taken over block means, the independent sampling unit.
DualityReport duality_check(const std::vector<std::vector<double>>& u_cells,
                            const std::vector<double>& deltas, const TestFunctional& F,
                            const Hurst& h, const TimeGrid& grid, const KernelWeights& weights,
                            const std::vector<WienerPath>& paths, int cluster = 1);

// Discrete backward Ito integral sum_i z_i (W_{t_{i+1}} - W_{t_i}) with the
// cell value z_i measurable for the backward filtration (right-endpoint
// convention). dW are the plain Brownian increments of W.
double backward_ito_integral(const std::vector<double>& z_cells, const std::vector<double>& dW);

}  // namespace fracbdsde
