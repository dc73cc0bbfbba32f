#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "fracbdsde/frac_calc.hpp"
#include "fracbdsde/grid.hpp"
#include "fracbdsde/hurst.hpp"
#include "fracbdsde/kernel.hpp"
#include "fracbdsde/quadrature.hpp"
#include "fracbdsde/rng.hpp"
#include "fracbdsde/sampling.hpp"
#include "fracbdsde/stats.hpp"
#include "fracbdsde/transfer.hpp"

using namespace fracbdsde;

TEST_CASE("time grid validation and nodes") {
    CHECK_THROWS_AS(TimeGrid(0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 1), std::invalid_argument);
    const TimeGrid g(2.0, 8);
    CHECK(g.dt() == doctest::Approx(0.25));
    CHECK(g.node(8) == doctest::Approx(2.0));
    CHECK(g.midpoint(0) == doctest::Approx(0.125));
}

TEST_CASE("hurst parameter is restricted to (0, 1/2)") {
    CHECK_THROWS_AS(Hurst(0.5), std::invalid_argument);
    CHECK_THROWS_AS(Hurst(0.0), std::invalid_argument);
    CHECK_NOTHROW(Hurst(0.49));
}

TEST_CASE("kernel normalization constants") {
    CHECK(Hurst(0.1).c_h() == doctest::Approx(0.35768577342233514).epsilon(1e-12));
    CHECK(Hurst(0.25).c_h() == doctest::Approx(0.64599800374075197).epsilon(1e-12));
    CHECK(Hurst(0.3).c_h() == doctest::Approx(0.73028293407992297).epsilon(1e-12));
    CHECK(Hurst(0.4).c_h() == doctest::Approx(0.88072568336372688).epsilon(1e-12));
}

TEST_CASE("gamma function reference values") {
    CHECK(std::tgamma(1.4) == doctest::Approx(0.88726381750307529).epsilon(1e-14));
    CHECK(std::tgamma(1.3) == doctest::Approx(0.89747069630627719).epsilon(1e-14));
}

TEST_CASE("tanh-sinh absorbs endpoint power singularities") {
    const double v = tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
    const double b = tanh_sinh([](double x) { return std::pow(x, -0.2) *
                                                     std::pow(1.0 - x, -0.3); },
                               0.0, 1.0);
    CHECK(b == doctest::Approx(std::exp(std::lgamma(0.8) + std::lgamma(0.7) -
                                        std::lgamma(1.5)))
                   .epsilon(1e-9));
}

TEST_CASE("fractional integral of the identity map") {
    const TimeGrid g(1.0, 64);
    GridFunction f(g, Basis::node, std::vector<double>(65));
    for (int j = 0; j <= 64; ++j) f.values[std::size_t(j)] = g.node(j);
    // exact for piecewise-linear data
    const GridFunction r = frac_integral_right(f, 0.3);
    CHECK(r.values[0] == doctest::Approx(0.25713288658783889).epsilon(1e-12));
    const GridFunction l = frac_integral_left(f, 0.3);
    // I^a_{0+} u = u^{1+a} / Gamma(2+a) * Gamma(2)
    const double x = g.node(32);
    CHECK(l.values[32] ==
          doctest::Approx(std::pow(x, 1.3) / std::tgamma(2.3)).epsilon(1e-12));
}

TEST_CASE("fractional derivative of the identity map is exact on the grid") {
    const TimeGrid g(1.0, 64);
    GridFunction f(g, Basis::node, std::vector<double>(65));
    for (int j = 0; j <= 64; ++j) f.values[std::size_t(j)] = g.node(j);
    const GridFunction d = frac_derivative_left(f, 0.2);
    CHECK(d.values[32] == doctest::Approx(0.6166622131433951).epsilon(1e-12));
}

TEST_CASE("marchaud point evaluation against frozen references") {
    const auto parab = [](double u) { return u * (1.0 - u); };
    CHECK(marchaud_left(parab, 0.5, 0.2, {0.0, 0.5}) ==
          doctest::Approx(0.2740720947303978).epsilon(1e-9));
    CHECK(marchaud_left([](double u) { return u; }, 0.5, 0.2, {0.0, 0.5}) ==
          doctest::Approx(0.6166622131433951).epsilon(1e-9));
}

TEST_CASE("grid derivative converges for non-polygonal data") {
    // D^{0.2}_{T-} [u(1-u)] at 0.5 equals the left value by symmetry
    const int n = 4096;
    const TimeGrid g(1.0, n);
    GridFunction f(g, Basis::node, std::vector<double>(std::size_t(n) + 1));
    for (int j = 0; j <= n; ++j) f.values[std::size_t(j)] = g.node(j) * (1.0 - g.node(j));
    const GridFunction d = frac_derivative_right(f, 0.2);
    CHECK(d.values[n / 2] == doctest::Approx(0.2740720947303978).epsilon(5e-4));
    const GridFunction i = frac_integral_right(f, 0.2);
    CHECK(i.values[n / 4] == doctest::Approx(0.2044770200495866).epsilon(1e-6));
}

TEST_CASE("volterra kernel point values and covariance") {
    const Hurst h(0.3);
    CHECK(kernel_K_H(h, 1.0, 0.5) == doctest::Approx(0.873014114338668).epsilon(1e-9));
    CHECK(kernel_K_H(h, 0.75, 0.25) == doctest::Approx(0.898224784594168).epsilon(1e-9));
    CHECK_THROWS_AS(kernel_K_H(h, 0.5, 0.5), std::invalid_argument);
    CHECK(kernel_covariance_quadrature(h, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(kernel_covariance_quadrature(h, 1.0, 0.5) ==
          doctest::Approx(covariance_R(h, 1.0, 0.5)).epsilon(1e-6));
}

TEST_CASE("adjoint transfer operator frozen values") {
    const Hurst h(0.3);
    const auto ident = [](double s) { return s; };
    CHECK(op_K_star_at(ident, h, 0.5, {0.0}) ==
          doctest::Approx(0.5380338308073326).epsilon(1e-7));
    CHECK(op_K_star_at(ident, h, 0.25, {0.0}) ==
          doctest::Approx(0.309019288190568).epsilon(1e-7));
}

TEST_CASE("transfer operator matches the kernel identity on indicators") {
    const Hurst h(0.3);
    const TimeGrid g(1.0, 16);
    const auto w = build_kernel_weights(g, h);
    // K 1_{[0,T]} cell averages integrate to int K_H(T, s) ds
    GridFunction one(g, Basis::cell, std::vector<double>(16, 1.0));
    const GridFunction k1 = op_K(one, h, *w);
    double acc = 0.0;
    for (double v : k1.values) acc += v * g.dt();
    const double direct =
        tanh_sinh([&](double s) { return kernel_K_H(h, 1.0, s); }, 0.0, 1.0);
    CHECK(acc == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("counter-based normal stream is reproducible and well distributed") {
    NormalStream a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 8; ++i) CHECK(a.normal() == b.normal());
    CHECK(c.normal() != b.normal());
    NormalStream d(1234, 0);
    std::vector<double> xs(200000);
    for (double& x : xs) x = d.normal();
    const Summary s = summarize(xs);
    CHECK(std::abs(s.mean) < 0.01);
    CHECK(s.var == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(s.skewness) < 0.02);
    CHECK(std::abs(s.excess_kurtosis) < 0.05);
}

TEST_CASE("volterra sampler agrees with the cholesky oracle in law") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const int np = 20000;
    const PathEnsemble ens = sample_fbm(g, h, 99, np);
    const auto chol = cholesky_fbm_oracle(g, h, 100, np);
    std::vector<double> v1(np), v2(np);
    for (int k = 0; k < np; ++k) {
        v1[std::size_t(k)] = ens.paths[std::size_t(k)].B[16];
        v2[std::size_t(k)] = chol[std::size_t(k)][16];
    }
    const Summary s1 = summarize(v1), s2 = summarize(v2);
    const double se = std::sqrt(2.0) * s1.var * std::sqrt(2.0 / double(np));
    CHECK(std::abs(s1.var - s2.var) < 5.0 * se + 0.01);
    CHECK(std::abs(s1.mean) < 5.0 * s1.se());
}
