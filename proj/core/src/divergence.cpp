#include "fracbdsde/divergence.hpp"

#include <stdexcept>

#include "fracbdsde/parallel.hpp"
#include "fracbdsde/stats.hpp"
#include "fracbdsde/transfer.hpp"

namespace fracbdsde {

std::vector<double> divergence_deterministic(const GridFunction& u, const Hurst& h,
                                             const KernelWeights& weights,
                                             const std::vector<WienerPath>& paths) {
    const GridFunction ku = op_K(u, h, weights);
    std::vector<double> out(paths.size(), 0.0);
    parallel_for(paths.size(), [&](std::size_t k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < ku.values.size(); ++m)
            acc += ku.values[m] * paths[k].dW0[m];
        out[k] = acc;
    });
    return out;
}

DualityReport duality_check(const std::vector<std::vector<double>>& u_cells,
                            const std::vector<double>& deltas, const TestFunctional& F,
                            const Hurst& h, const TimeGrid& grid, const KernelWeights& weights,
                            const std::vector<WienerPath>& paths, int cluster) {
    if (u_cells.size() != paths.size() || deltas.size() != paths.size())
        throw std::invalid_argument("duality_check: per-path inputs must match the ensemble");
    if (cluster < 1 || paths.size() % std::size_t(cluster) != 0)
        throw std::invalid_argument("duality_check: cluster must divide the sample count");
    if (F.kphi_avg.size() != F.phis.size())
        throw std::invalid_argument("duality_check: functional not prepared");
    const double dt = grid.dt();

    std::vector<double> lhs(paths.size()), rhs(paths.size()), diff(paths.size());
    parallel_for(paths.size(), [&](std::size_t k) {
        const std::vector<double> b = F.coordinates(paths[k]);
        const std::vector<double> grad = F.partials(b);
        const GridFunction ku =
            op_K(GridFunction(grid, Basis::cell, u_cells[k]), h, weights);
        double l = 0.0;
        for (std::size_t i = 0; i < F.kphi_avg.size(); ++i) {
            if (grad[i] == 0.0) continue;
            double pair = 0.0;
            for (std::size_t m = 0; m < ku.values.size(); ++m)
                pair += F.kphi_avg[i][m] * ku.values[m];
            l += grad[i] * pair * dt;
        }
        lhs[k] = l;
        rhs[k] = F.eval(b) * deltas[k];
        diff[k] = lhs[k] - rhs[k];
    });
    DualityReport rep;
    rep.functional = F.name;
    rep.lhs = summarize(lhs).mean;
    rep.rhs = summarize(rhs).mean;
    if (cluster > 1) {
        std::vector<double> block_means(diff.size() / std::size_t(cluster), 0.0);
        for (std::size_t k = 0; k < diff.size(); ++k)
            block_means[k / std::size_t(cluster)] += diff[k] / double(cluster);
        diff = std::move(block_means);
    }
    const Summary d = summarize(diff);
    rep.diff = d.mean;
    rep.se = d.se();
    rep.z = rep.se > 0.0 ? rep.diff / rep.se : 0.0;
    return rep;
}

double backward_ito_integral(const std::vector<double>& z_cells, const std::vector<double>& dW) {
    if (z_cells.size() > dW.size())
        throw std::invalid_argument("backward_ito_integral: more z cells than increments");
    double acc = 0.0;
    for (std::size_t i = 0; i < z_cells.size(); ++i) acc += z_cells[i] * dW[i];
    return acc;
}

}  // namespace fracbdsde
