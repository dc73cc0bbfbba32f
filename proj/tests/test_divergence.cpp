#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "fracbdsde/divergence.hpp"
#include "fracbdsde/sampling.hpp"
#include "fracbdsde/stats.hpp"
#include "fracbdsde/transfer.hpp"

using namespace fracbdsde;

TEST_CASE("backward ito integral is the right-endpoint sum") {
    CHECK(backward_ito_integral({1.0, 2.0}, {0.5, -0.25}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(backward_ito_integral({1.0, 2.0, 3.0}, {0.5}), std::invalid_argument);
}

TEST_CASE("deterministic divergence is the transferred wiener integral") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble ens = sample_fbm(g, h, 7, 2000);
    GridFunction u(g, Basis::cell, std::vector<double>(16, 1.0));
    const std::vector<double> d = divergence_deterministic(u, h, *ens.weights, ens.paths);
    // for u = 1_{[0,T]}, K u = K_H(T, .) and delta(u) = B_T
    for (std::size_t k = 0; k < ens.paths.size(); ++k)
        CHECK(d[k] == doctest::Approx(ens.paths[k].B[16]).epsilon(1e-12));
}

TEST_CASE("duality holds for deterministic integrands") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const int np = 40000;
    const PathEnsemble ens = sample_fbm(g, h, 17, np);
    std::vector<double> cells(16, 1.0);
    for (std::size_t i = 4; i < 10; ++i) cells[i] = -0.5;
    const GridFunction u(g, Basis::cell, cells);
    const std::vector<double> deltas = divergence_deterministic(u, h, *ens.weights, ens.paths);
    const std::vector<std::vector<double>> u_cells(ens.paths.size(), cells);
    for (int pw : {1, 2}) {
        TestFunctional F = TestFunctional::b_power(g, 1.0, pw);
        F.prepare(h, *ens.weights);
        const DualityReport rep =
            duality_check(u_cells, deltas, F, h, g, *ens.weights, ens.paths);
        CHECK(std::abs(rep.z) < 5.0);
    }
}

TEST_CASE("midpoint K*K pairing approximates the lambda form") {
    // coarse grid: the midpoint rule carries an O(dt^{2H}) endpoint bias, so
    // the tolerance here is deliberately loose
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    std::vector<double> pv(16, 1.0), qv(16, 0.0);
    for (std::size_t i = 0; i < 8; ++i) qv[i] = 1.0;
    const GridFunction phi(g, Basis::cell, pv), psi(g, Basis::cell, qv);
    const auto mid = k_star_k_midpoints(phi, h);
    double acc = 0.0;
    for (std::size_t m = 0; m < mid.size(); ++m) acc += mid[m] * psi.values[m] * g.dt();
    CHECK(acc == doctest::Approx(lambda_inner(phi, psi, h)).epsilon(0.15));
}
