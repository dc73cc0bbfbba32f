#include "fracbdsde/functional.hpp"

#include <cmath>

#include "fracbdsde/transfer.hpp"

namespace fracbdsde {

void TestFunctional::prepare(const Hurst& h, const KernelWeights& weights) {
    kphi_avg.clear();
    for (const GridFunction& phi : phis) {
        GridFunction kphi = op_K(phi, h, weights);
        kphi_avg.push_back(kphi.values);
    }
}

std::vector<double> TestFunctional::coordinates(const WienerPath& path) const {
    std::vector<double> b(phis.size(), 0.0);
    for (std::size_t i = 0; i < phis.size(); ++i) {
        double acc = 0.0;
        for (std::size_t m = 0; m < kphi_avg[i].size(); ++m)
            acc += kphi_avg[i][m] * path.dW0[m];
        b[i] = acc;
    }
    return b;
}

double TestFunctional::eval(const std::vector<double>& b) const {
    double acc = 0.0;
    for (const Term& t : terms) {
        double v = t.coef;
        for (std::size_t i = 0; i < t.powers.size(); ++i)
            for (int p = 0; p < t.powers[i]; ++p) v *= b[i];
        acc += v;
    }
    return acc;
}

std::vector<double> TestFunctional::partials(const std::vector<double>& b) const {
    std::vector<double> grad(phis.size(), 0.0);
    for (const Term& t : terms) {
        for (std::size_t i = 0; i < t.powers.size(); ++i) {
            if (t.powers[i] == 0) continue;
            double v = t.coef * t.powers[i];
            for (std::size_t j = 0; j < t.powers.size(); ++j) {
                const int p = t.powers[j] - (j == i ? 1 : 0);
                for (int q = 0; q < p; ++q) v *= b[j];
            }
            grad[i] += v;
        }
    }
    return grad;
}

TestFunctional TestFunctional::constant(const TimeGrid& grid, double c) {
    TestFunctional f;
    f.name = "const";
    f.phis.push_back(GridFunction::zeros(grid, Basis::cell));
    f.terms.push_back({c, {0}});
    return f;
}

TestFunctional TestFunctional::b_power(const TimeGrid& grid, double t, int power) {
    TestFunctional f;
    f.name = "B(" + std::to_string(t) + ")^" + std::to_string(power);
    GridFunction phi = GridFunction::zeros(grid, Basis::cell);
    bool hit = false;
    for (int i = 0; i < grid.n_steps(); ++i) {
        if (grid.node(i + 1) <= t + 1e-12 * grid.horizon()) {
            phi.values[i] = 1.0;
            hit = grid.node(i + 1) >= t - 1e-12 * grid.horizon();
        }
    }
    if (!hit) throw std::invalid_argument("TestFunctional::b_power: t must be a grid node");
    f.phis.push_back(phi);
    f.terms.push_back({1.0, {power}});
    return f;
}

}  // namespace fracbdsde
