#include "fracbdsde/anticipating.hpp"

#include <cmath>
#include <stdexcept>

#include "fracbdsde/parallel.hpp"
#include "fracbdsde/rng.hpp"

namespace fracbdsde {

namespace {

// Deterministic node-shift table D[k][j] = B(T_{t_j} omega)_k - B_k.
std::vector<std::vector<double>> shift_B_table(const GirsanovFrame& frame) {
    const int n = frame.grid().n_steps();
    const double dt = frame.grid().dt();
    std::vector<std::vector<double>> D(std::size_t(n) + 1,
                                       std::vector<double>(std::size_t(n) + 1, 0.0));
    for (int k = 1; k <= n; ++k)
        for (int j = 0; j <= n; ++j) {
            double acc = 0.0;
            for (int m = 0; m < k; ++m) acc += frame.weights().at(k, m) * frame.kg(j, m);
            D[k][j] = acc * dt;
        }
    return D;
}

struct ZetaTables {
    const TimeGrid* grid = nullptr;
    std::vector<double> log_eps_Ts;   // log eps_s(T_s . ) along the composed data, per node
    std::vector<double> B_composed;   // B nodes of the composed path (A_v applied)
    const std::vector<std::vector<double>>* D = nullptr;  // optional T_s adjustment for b_path
    int shift_idx = -1;
};

double heun_zeta(const ZetaTables& tab, const DriftSpec& drift, double x0, int t_end,
                 int substeps, std::vector<double>* nodes_out) {
    const TimeGrid& grid = *tab.grid;
    const double dt = grid.dt();
    double z = x0;
    if (nodes_out) {
        nodes_out->assign(std::size_t(grid.n_steps()) + 1, 0.0);
        (*nodes_out)[0] = x0;
    }
    for (int j = 0; j < t_end; ++j) {
        const double le0 = tab.log_eps_Ts[j];
        const double le1 = tab.log_eps_Ts[j + 1];
        // b composed with T_s: at cell resolution, apply the T_{t_j} node shift
        std::vector<double> b_nodes;
        if (drift.b_path && tab.D) {
            b_nodes = tab.B_composed;
            for (std::size_t k = 0; k < b_nodes.size(); ++k) {
                b_nodes[k] += (*tab.D)[k][std::size_t(j)];
                if (tab.shift_idx >= 0) b_nodes[k] -= (*tab.D)[k][std::size_t(tab.shift_idx)];
            }
        }
        auto rhs = [&](double frac, double zz) {
            const double le = le0 + frac * (le1 - le0);
            const double x = std::exp(le) * zz;
            const double bv = drift.b_path ? drift.b_path(grid.node(j) + frac * dt, x, b_nodes)
                                           : drift.b(grid.node(j) + frac * dt, x);
            return std::exp(-le) * bv;
        };
        const double h = dt / substeps;
        for (int s = 0; s < substeps; ++s) {
            const double f0 = rhs(double(s) / substeps, z);
            const double zp = z + h * f0;
            const double f1 = rhs(double(s + 1) / substeps, zp);
            z += 0.5 * h * (f0 + f1);
            if (!std::isfinite(z))
                throw std::runtime_error("solve_zeta: ODE step produced a non-finite value");
        }
        if (nodes_out) (*nodes_out)[std::size_t(j) + 1] = z;
    }
    return z;
}

ZetaTables make_tables(const WienerPath& path, const GirsanovFrame& frame, int shift_idx,
                       const std::vector<std::vector<double>>* D) {
    const int n = frame.grid().n_steps();
    ZetaTables tab;
    tab.grid = &frame.grid();
    tab.shift_idx = shift_idx;
    tab.D = D;
    tab.log_eps_Ts.resize(std::size_t(n) + 1);
    for (int j = 0; j <= n; ++j) {
        const double ij = int_gamma_dB(path, frame, j);
        double le = ij + 0.5 * frame.q(j);
        if (shift_idx >= 0) le -= frame.cross(j, shift_idx);
        tab.log_eps_Ts[std::size_t(j)] = le;
    }
    tab.B_composed = path.B;
    if (shift_idx >= 0 && D)
        for (int k = 0; k <= n; ++k)
            tab.B_composed[std::size_t(k)] -= (*D)[std::size_t(k)][std::size_t(shift_idx)];
    return tab;
}

}  // namespace

void validate_drift(const DriftSpec& drift, const TimeGrid& grid, std::uint64_t seed,
                    int n_samples) {
    if (!drift.b && !drift.b_path)
        throw std::invalid_argument("validate_drift: no drift evaluator supplied");
    if (!drift.b) return;  // path-dependent drifts are spot-checked by their callers
    NormalStream rng(seed, 0xd21f7);
    for (int i = 0; i < n_samples; ++i) {
        const double t = grid.horizon() * std::abs(rng.normal()) / 3.0;
        const double x = 3.0 * rng.normal();
        const double y = 3.0 * rng.normal();
        const double lhs = std::abs(drift.b(t, x) - drift.b(t, y));
        if (lhs > drift.lipschitz * std::abs(x - y) * (1.0 + 1e-9) + 1e-12)
            throw std::invalid_argument("validate_drift: declared Lipschitz envelope violated");
    }
}

GridFunction solve_zeta(const WienerPath& path, const GirsanovFrame& frame,
                        const DriftSpec& drift, double x0, int shift_idx, int substeps,
                        int t_end) {
    const int n = frame.grid().n_steps();
    if (t_end < 0) t_end = n;
    std::vector<std::vector<double>> D;
    const std::vector<std::vector<double>>* Dp = nullptr;
    if (drift.b_path) {
        D = shift_B_table(frame);
        Dp = &D;
    }
    const ZetaTables tab = make_tables(path, frame, shift_idx, Dp);
    std::vector<double> nodes;
    heun_zeta(tab, drift, x0, t_end, substeps, &nodes);
    return GridFunction(frame.grid(), Basis::node, std::move(nodes));
}

AnticipatingSolution solve_anticipating(const PathEnsemble& ensemble, const GirsanovFrame& frame,
                                        const DriftSpec& drift, const PolynomialXi& xi,
                                        int substeps) {
    const int n = frame.grid().n_steps();
    const std::vector<std::vector<double>> D = shift_B_table(frame);
    AnticipatingSolution sol;
    const std::size_t np = ensemble.paths.size();
    sol.X.assign(np, {});
    sol.zeta.assign(np, {});
    sol.eps.assign(np, {});
    parallel_for(np, [&](std::size_t k) {
        const WienerPath& path = ensemble.paths[k];
        std::vector<double> X(std::size_t(n) + 1), Z(std::size_t(n) + 1), E(std::size_t(n) + 1);
        for (int j = 0; j <= n; ++j) {
            const ZetaTables tab = make_tables(path, frame, j, &D);
            const double x0 = xi.eval(tab.B_composed);
            const double zj = heun_zeta(tab, drift, x0, j, substeps, nullptr);
            const double ej = epsilon(path, frame, j);
            Z[std::size_t(j)] = zj;
            E[std::size_t(j)] = ej;
            X[std::size_t(j)] = ej * zj;
        }
        sol.X[k] = std::move(X);
        sol.zeta[k] = std::move(Z);
        sol.eps[k] = std::move(E);
    });
    return sol;
}

std::vector<DualityReport> residual_duality_check(const AnticipatingSolution& solution,
                                                  const PathEnsemble& ensemble,
                                                  const GirsanovFrame& frame,
                                                  const DriftSpec& drift,
                                                  const PolynomialXi& xi, int t_idx,
                                                  const std::vector<TestFunctional>& functionals) {
    const TimeGrid& grid = frame.grid();
    const double dt = grid.dt();
    const std::size_t np = ensemble.paths.size();
    std::vector<std::vector<double>> u(np, std::vector<double>(std::size_t(grid.n_steps()), 0.0));
    std::vector<double> deltas(np, 0.0);
    parallel_for(np, [&](std::size_t k) {
        const auto& X = solution.X[k];
        for (int m = 0; m < t_idx; ++m)
            u[k][std::size_t(m)] = frame.gamma().cells[std::size_t(m)] * X[std::size_t(m)];
        // trapezoid of the drift integral along the solved trajectory
        double ib = 0.0;
        for (int m = 0; m < t_idx; ++m) {
            const double b0 = drift.b(grid.node(m), X[std::size_t(m)]);
            const double b1 = drift.b(grid.node(m + 1), X[std::size_t(m) + 1]);
            ib += 0.5 * dt * (b0 + b1);
        }
        deltas[k] = X[std::size_t(t_idx)] - xi.eval(ensemble.paths[k].B) - ib;
    });
    std::vector<DualityReport> out;
    for (const TestFunctional& F : functionals)
        out.push_back(duality_check(u, deltas, F, frame.hurst(), grid, *ensemble.weights,
                                    ensemble.paths));
    return out;
}

}  // namespace fracbdsde
