#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "grid.hpp"
#include "hurst.hpp"
#include "kernel.hpp"

namespace fracbdsde {

// One Wiener path (cell increments of W0) together with the fBm node values
// derived from it through the kernel-weight table.
struct WienerPath {
    std::vector<double> dW0;  // n cells, Var = dt
    std::vector<double> B;    // n+1 nodes, B[0] = 0
};

struct PathEnsemble {
    TimeGrid grid;
    Hurst hurst;
    std::uint64_t seed;
    std::shared_ptr<const KernelWeights> weights;
    std::vector<WienerPath> paths;
};

// Draw i.i.d. Gaussian W0 increments per cell and set
// B_{t_j} = sum_i w[j][i] dW0_i. Deterministic given (seed, path index).
PathEnsemble sample_fbm(const TimeGrid& grid, const Hurst& h, std::uint64_t seed, int n_paths,
                        std::shared_ptr<const KernelWeights> weights = nullptr);

// Rebuild the B node values of a path from its increments (after shifts).
void rederive_B(WienerPath& path, const KernelWeights& weights);

// Distributional test oracle only: node-covariance Cholesky sampler. Does not
// expose a W0 path and is never used by the solvers.
std::vector<std::vector<double>> cholesky_fbm_oracle(const TimeGrid& grid, const Hurst& h,
                                                     std::uint64_t seed, int n_paths);

}  // namespace fracbdsde
