#include <cmath>
#include <cstring>
#include <stdexcept>

#include <doctest.h>

#include "fracbdsde/anticipating.hpp"
#include "fracbdsde/bdsde.hpp"
#include "fracbdsde/config.hpp"
#include "fracbdsde/rng.hpp"
#include "fracbdsde/sampling.hpp"
#include "fracbdsde/spde.hpp"
#include "fracbdsde/stats.hpp"

using namespace fracbdsde;

namespace {

std::vector<std::vector<double>> draw(int np, int n, double dt, std::uint64_t seed) {
    std::vector<std::vector<double>> dW(std::size_t(np),
                                        std::vector<double>(std::size_t(n), 0.0));
    const double sdt = std::sqrt(dt);
    for (int k = 0; k < np; ++k) {
        NormalStream rng(seed, std::uint64_t(k));
        for (int j = 0; j < n; ++j) dW[std::size_t(k)][std::size_t(j)] = sdt * rng.normal();
    }
    return dW;
}

}  // namespace

TEST_CASE("anticipating sde reduces to the ode when gamma vanishes") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble ens = sample_fbm(g, h, 5, 20);
    const GirsanovFrame f0 = build_frame(GammaSpec::constant(g, 0.0), h, g, ens.weights);
    const DriftSpec drift = make_drift("linear");
    PolynomialXi xi;
    xi.constant = 1.0;
    xi.terms.push_back({0.5, {{16, 1}}});
    const AnticipatingSolution sol = solve_anticipating(ens, f0, drift, xi, 32);
    for (std::size_t k = 0; k < ens.paths.size(); ++k) {
        const double x0 = xi.eval(ens.paths[k].B);
        for (int j = 0; j <= 16; ++j)
            CHECK(sol.X[k][std::size_t(j)] ==
                  doctest::Approx(x0 * std::exp(0.4 * g.node(j))).epsilon(1e-6));
    }
}

TEST_CASE("driver and drift envelope validation fail loudly") {
    BdsdeDriver d;
    d.f = [](double, double, double y, double) { return y * y; };
    d.lipschitz = 0.1;
    CHECK_THROWS_AS(validate_driver(d, 3), std::invalid_argument);
    CHECK_NOTHROW(validate_driver(make_driver("linear"), 3));
    CHECK_NOTHROW(validate_coefficients(make_coefficients("smooth"), 3));
}

TEST_CASE("classical reference is bit-identical when gamma vanishes") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const GirsanovFrame f0 = build_frame(GammaSpec::constant(g, 0.0), h, g);
    const BTables btab = BTables::identity(16);
    const BdsdeDriver driver = make_driver("linear");
    const TerminalSpec terminal = make_terminal("x", 16);
    const CoefficientSet coeff = make_coefficients("linear");
    const auto dW = draw(400, 16, g.dt(), 13);
    const auto X = simulate_forward(coeff, g, 16, 1.0, dW);
    const BlockSolution a =
        solve_pathwise_bsde_block(dW, btab, f0, driver, terminal, BasisConfig{2}, &X);
    const BlockSolution b =
        solve_classical_reference(dW, g, driver, terminal, BasisConfig{2}, &X);
    for (std::size_t k = 0; k < a.Yhat.size(); ++k) {
        CHECK(std::memcmp(a.Yhat[k].data(), b.Yhat[k].data(),
                          a.Yhat[k].size() * sizeof(double)) == 0);
        CHECK(std::memcmp(a.Zhat[k].data(), b.Zhat[k].data(),
                          a.Zhat[k].size() * sizeof(double)) == 0);
    }
}

TEST_CASE("linear example: regression solver tracks the closed form") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble bens = sample_fbm(g, h, 23, 2);
    const GirsanovFrame frame = build_frame(GammaSpec::constant(g, 0.5), h, g, bens.weights);
    const BTables btab = BTables::from_path(bens.paths[0], frame);
    const LinearCoeffs lc = linear_example();
    const CoefficientSet coeff = make_coefficients("linear");
    const BdsdeDriver driver = make_driver("linear");
    const auto dW = draw(4000, 16, g.dt(), 29);
    const auto X = simulate_forward(coeff, g, 16, 1.0, dW);
    BlockSolution sol = solve_pathwise_bsde_block(dW, btab, frame, driver,
                                                  make_terminal("x", 16), BasisConfig{2}, &X);
    to_bdsde(sol, dW, btab, frame, driver, make_terminal("x", 16), BasisConfig{2}, &X);
    for (int s : {8, 16}) {
        const std::vector<double> cf = linear_closed_form_y(lc, 1.0, 16, s, btab, frame, dW);
        std::vector<double> diff(cf.size());
        for (std::size_t k = 0; k < cf.size(); ++k)
            diff[k] = sol.Y[k][std::size_t(s)] - cf[k];
        const Summary d = summarize(diff);
        const Summary m = summarize(cf);
        CHECK(std::abs(d.mean) / std::abs(m.mean) < 0.05);  // O(dt) scheme bias at 16 steps
    }
    // closed-form yhat agrees with the nested monte carlo evaluation in mean
    const std::vector<double> yh = linear_closed_form_yhat(lc, 1.0, 16, 8, btab, frame, dW);
    const std::vector<double> nm = linear_nested_mc_yhat(
        lc, [](double x) { return x; }, 1.0, 16, 8, btab, frame,
        {dW.begin(), dW.begin() + 200}, 4000, 77);
    std::vector<double> diff(nm.size());
    for (std::size_t k = 0; k < nm.size(); ++k) diff[k] = yh[k] - nm[k];
    const Summary d = summarize(diff);
    CHECK(std::abs(d.mean) < 5.0 * d.se() + 0.01);
}

TEST_CASE("representation error of the round trip is small") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble bens = sample_fbm(g, h, 41, 1);
    const GirsanovFrame frame = build_frame(GammaSpec::constant(g, 0.5), h, g, bens.weights);
    const BTables btab = BTables::from_path(bens.paths[0], frame);
    const BdsdeDriver driver = make_driver("linear");
    const CoefficientSet coeff = make_coefficients("linear");
    const auto dW = draw(4000, 16, g.dt(), 43);
    const auto X = simulate_forward(coeff, g, 16, 1.0, dW);
    const TerminalSpec terminal = make_terminal("x", 16);
    const BlockSolution sol =
        solve_pathwise_bsde_block(dW, btab, frame, driver, terminal, BasisConfig{2}, &X);
    const double err = representation_error(sol, dW, btab, frame, driver, terminal,
                                            BasisConfig{2}, 16, &X);
    CHECK(err < 1e-8);  // table arithmetic round trip, exact up to fp noise
}

TEST_CASE("spde heat case: field equals the heat solution times epsilon") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble bens = sample_fbm(g, h, 51, 1);
    const GirsanovFrame frame = build_frame(GammaSpec::constant(g, 0.5), h, g, bens.weights);
    const BTables btab = BTables::from_path(bens.paths[0], frame);
    const CoefficientSet heat = make_coefficients("heat");
    const FieldGrid f =
        value_field_u(heat, frame, btab, {1.0}, {16}, 20000, 61, BasisConfig{2});
    const double uh = 1.0 + 1.0;  // x^2 + t
    CHECK(f.u_hat[0][0] == doctest::Approx(uh).epsilon(0.02));
    const double eps = std::exp(btab.I[16] - 0.5 * frame.q(16));
    CHECK(f.u[0][0] == doctest::Approx(eps * uh).epsilon(0.02));
}

TEST_CASE("variational z carries the recorded sign against the regression z") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble bens = sample_fbm(g, h, 71, 1);
    const GirsanovFrame frame = build_frame(GammaSpec::constant(g, 0.5), h, g, bens.weights);
    const BTables btab = BTables::from_path(bens.paths[0], frame);
    // f == 0, phi(x) = x, b == 0, sigma == 1: Y_bar == 1, nabla X == 1, z_hat == -1
    CoefficientSet c = make_coefficients("heat");
    c.phi = [](double x) { return x; };
    c.phi_prime = [](double) { return 1.0; };
    c.lip_phi = 1.0;
    const auto dW = draw(200, 16, g.dt(), 83);
    const VariationalState st = variational_z(c, frame, btab, dW, 16, 0.0, BasisConfig{2});
    for (std::size_t k = 0; k < st.z_hat.size(); ++k)
        for (int j = 0; j <= 16; ++j) {
            CHECK(st.nabla_x[k][std::size_t(j)] == doctest::Approx(1.0));
            CHECK(st.z_hat[k][std::size_t(j)] == doctest::Approx(-1.0).epsilon(1e-9));
        }
}
