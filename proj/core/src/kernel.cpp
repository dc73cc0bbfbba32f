#include "fracbdsde/kernel.hpp"

#include <cmath>

#include "fracbdsde/parallel.hpp"
#include "fracbdsde/quadrature.hpp"

namespace fracbdsde {

double kernel_K_H(const Hurst& h, double t, double s) {
    if (!(s > 0.0) || !(s < t))
        throw std::invalid_argument("kernel_K_H: requires 0 < s < t");
    const double H = h.h();
    const double a = H + 0.5;  // substitution exponent
    // inner = int_s^t u^{H-3/2} (u-s)^{H-1/2} du
    //       = (1/a) int_0^{(t-s)^a} (s + v^{1/a})^{H-3/2} dv   (smooth integrand)
    const double vmax = std::pow(t - s, a);
    const double inner =
        (1.0 / a) *
        tanh_sinh([&](double v) { return std::pow(s + std::pow(v, 1.0 / a), H - 1.5); }, 0.0, vmax);
    return h.c_h() * (std::pow(t / s, H - 0.5) * std::pow(t - s, H - 0.5) -
                      (H - 0.5) * std::pow(s, 0.5 - H) * inner);
}

double covariance_R(const Hurst& h, double t, double s) {
    const double H2 = 2.0 * h.h();
    return 0.5 * (std::pow(t, H2) + std::pow(s, H2) - std::pow(std::abs(t - s), H2));
}

double kernel_covariance_quadrature(const Hurst& h, double t, double s, double tol) {
    const double lo = std::min(t, s);
    if (!(lo > 0.0)) return 0.0;
    auto f = [&](double r) { return kernel_K_H(h, t, r) * kernel_K_H(h, s, r); };
    // singularities at r -> 0 and r -> lo; split mid-way so both sit on endpoints
    return tanh_sinh(f, 0.0, 0.5 * lo, tol) + tanh_sinh(f, 0.5 * lo, lo, tol);
}

std::shared_ptr<const KernelWeights> build_kernel_weights(const TimeGrid& grid, const Hurst& h) {
    auto table = std::make_shared<KernelWeights>(grid, h);
    const int n = grid.n_steps();
    const double dt = grid.dt();
    table->w.resize(n + 1);
    for (int j = 0; j <= n; ++j) table->w[j].resize(j, 0.0);
    // rows are independent; the singular column i = j-1 (s -> t_j) is an
    // endpoint of its cell, which tanh-sinh absorbs
    std::vector<int> rows;
    for (int j = 1; j <= n; ++j) rows.push_back(j);
    parallel_for(rows.size(), [&](std::size_t idx) {
        const int j = rows[idx];
        const double tj = grid.node(j);
        for (int i = 0; i < j; ++i) {
            table->w[j][i] =
                tanh_sinh([&](double s) { return kernel_K_H(h, tj, s); }, grid.node(i),
                          grid.node(i + 1), 1e-10) /
                dt;
        }
    });
    return table;
}

}  // namespace fracbdsde
