#include "fracbdsde/sampling.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fracbdsde/parallel.hpp"
#include "fracbdsde/rng.hpp"

namespace fracbdsde {

void rederive_B(WienerPath& path, const KernelWeights& weights) {
    const int n = weights.grid.n_steps();
    path.B.assign(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < j; ++i) acc += weights.w[j][i] * path.dW0[i];
        path.B[j] = acc;
    }
}

PathEnsemble sample_fbm(const TimeGrid& grid, const Hurst& h, std::uint64_t seed, int n_paths,
                        std::shared_ptr<const KernelWeights> weights) {
    if (n_paths < 1) throw std::invalid_argument("sample_fbm: n_paths must be >= 1");
    if (!weights) weights = build_kernel_weights(grid, h);
    require_same_grid(grid, weights->grid, "sample_fbm");
    PathEnsemble ens{grid, h, seed, weights, std::vector<WienerPath>(std::size_t(n_paths))};
    const int n = grid.n_steps();
    const double sdt = std::sqrt(grid.dt());
    parallel_for(std::size_t(n_paths), [&](std::size_t k) {
        NormalStream rng(seed, k);
        WienerPath& p = ens.paths[k];
        p.dW0.resize(n);
        for (int i = 0; i < n; ++i) p.dW0[i] = sdt * rng.normal();
        rederive_B(p, *weights);
    });
    return ens;
}

std::vector<std::vector<double>> cholesky_fbm_oracle(const TimeGrid& grid, const Hurst& h,
                                                     std::uint64_t seed, int n_paths) {
    const int n = grid.n_steps();
    Eigen::MatrixXd cov(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            cov(i - 1, j - 1) = covariance_R(h, grid.node(i), grid.node(j));
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("cholesky_fbm_oracle: covariance not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const std::size_t np = std::size_t(n_paths);
    std::vector<std::vector<double>> out(np);
    parallel_for(std::size_t(n_paths), [&](std::size_t k) {
        NormalStream rng(seed, k);
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        const Eigen::VectorXd b = L * z;
        auto& path = out[k];
        path.assign(std::size_t(n) + 1, 0.0);
        for (int i = 1; i <= n; ++i) path[std::size_t(i)] = b(i - 1);
    });
    return out;
}

}  // namespace fracbdsde
