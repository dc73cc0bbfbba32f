#include "fracbdsde/transfer.hpp"

#include <cmath>

#include "fracbdsde/frac_calc.hpp"
#include "fracbdsde/parallel.hpp"

namespace fracbdsde {

GridFunction op_K(const GridFunction& phi, const Hurst& h, const KernelWeights& weights) {
    if (phi.basis != Basis::cell)
        throw std::invalid_argument("op_K: exact path requires a cell-based step function");
    require_same_grid(phi.grid, weights.grid, "op_K");
    (void)h;
    const int n = phi.grid.n_steps();
    GridFunction out = GridFunction::zeros(phi.grid, Basis::cell);
    // K 1_{(t_i, t_{i+1}]} = K_H(t_{i+1},.)1_{[0,t_{i+1}]} - K_H(t_i,.)1_{[0,t_i]}
    for (int m = 0; m < n; ++m) {
        double acc = 0.0;
        for (int i = m; i < n; ++i)
            acc += phi.values[i] * (weights.at(i + 1, m) - weights.at(i, m));
        out.values[m] = acc;
    }
    return out;
}

double op_K_pointwise(const GridFunction& phi, const Hurst& h, double s) {
    if (phi.basis != Basis::cell)
        throw std::invalid_argument("op_K_pointwise: cell-based step function expected");
    const int n = phi.grid.n_steps();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (phi.values[i] == 0.0) continue;
        const double a = phi.grid.node(i);
        const double b = phi.grid.node(i + 1);
        double v = 0.0;
        if (s < b) v += kernel_K_H(h, b, s);
        if (s < a) v -= kernel_K_H(h, a, s);
        acc += phi.values[i] * v;
    }
    return acc;
}

GridFunction op_K_fallback(const GridFunction& phi, const Hurst& h) {
    if (phi.basis != Basis::node)
        throw std::invalid_argument("op_K_fallback: node-based GridFunction expected");
    if (phi.values[0] != 0.0)
        throw std::invalid_argument("op_K_fallback: phi(0) must vanish (u^{H-1/2} weight)");
    const double H = h.h();
    const int n = phi.grid.n_steps();
    GridFunction g = GridFunction::zeros(phi.grid, Basis::node);
    for (int j = 1; j <= n; ++j)
        g.values[j] = std::pow(phi.grid.node(j), H - 0.5) * phi.values[j];
    GridFunction d = frac_derivative_right(g, 0.5 - H);
    const double c = h.c_h() * std::tgamma(H + 0.5);
    GridFunction out = GridFunction::zeros(phi.grid, Basis::node);
    for (int j = 0; j <= n; ++j)
        out.values[j] = c * std::pow(phi.grid.node(j), 0.5 - H) * d.values[j];
    out.values[0] = 0.0;
    return out;
}

GridFunction op_K_star(const GridFunction& g, const Hurst& h) {
    if (g.basis != Basis::node)
        throw std::invalid_argument("op_K_star: node-based GridFunction expected");
    const double H = h.h();
    const int n = g.grid.n_steps();
    GridFunction inner = GridFunction::zeros(g.grid, Basis::node);
    for (int j = 1; j <= n; ++j)
        inner.values[j] = std::pow(g.grid.node(j), 0.5 - H) * g.values[j];
    GridFunction d = frac_derivative_left(inner, 0.5 - H);
    const double c = h.c_h() * std::tgamma(H + 0.5);
    GridFunction out = GridFunction::zeros(g.grid, Basis::node);
    for (int j = 1; j <= n; ++j) {
        out.values[j] = c * std::pow(g.grid.node(j), H - 0.5) * d.values[j];
        if (!std::isfinite(out.values[j]))
            throw std::runtime_error("op_K_star: non-finite value (quadrature failure)");
    }
    return out;
}

double op_K_star_at(const std::function<double(double)>& g, const Hurst& h, double u,
                    const std::vector<double>& breakpoints, double tol) {
    const double H = h.h();
    auto inner = [&](double s) { return std::pow(s, 0.5 - H) * g(s); };
    const double d = marchaud_left(inner, u, 0.5 - H, breakpoints, tol);
    return h.c_h() * std::tgamma(H + 0.5) * std::pow(u, H - 0.5) * d;
}

double lambda_inner(const GridFunction& phi, const GridFunction& psi, const Hurst& h) {
    if (phi.basis != Basis::cell || psi.basis != Basis::cell)
        throw std::invalid_argument("lambda_inner: cell-based step functions expected");
    require_same_grid(phi.grid, psi.grid, "lambda_inner");
    const int n = phi.grid.n_steps();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (phi.values[i] == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            if (psi.values[j] == 0.0) continue;
            const double r = covariance_R(h, phi.grid.node(i + 1), psi.grid.node(j + 1)) -
                             covariance_R(h, phi.grid.node(i + 1), psi.grid.node(j)) -
                             covariance_R(h, phi.grid.node(i), psi.grid.node(j + 1)) +
                             covariance_R(h, phi.grid.node(i), psi.grid.node(j));
            acc += phi.values[i] * psi.values[j] * r;
        }
    }
    return acc;
}

std::vector<double> k_star_k_midpoints(const GridFunction& phi, const Hurst& h) {
    if (phi.basis != Basis::cell)
        throw std::invalid_argument("k_star_k_midpoints: cell-based step function expected");
    const int n = phi.grid.n_steps();
    // breakpoints: edges of cells where phi changes value (kernel singularities)
    std::vector<double> breaks;
    double prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double cur = i < n ? phi.values[i] : 0.0;
        if (cur != prev) breaks.push_back(phi.grid.node(i));
        prev = cur;
    }
    auto g = [&](double s) { return op_K_pointwise(phi, h, s); };
    std::vector<double> out(n, 0.0);
    parallel_for(std::size_t(n), [&](std::size_t m) {
        out[m] = op_K_star_at(g, h, phi.grid.midpoint(int(m)), breaks);
    });
    return out;
}

}  // namespace fracbdsde
