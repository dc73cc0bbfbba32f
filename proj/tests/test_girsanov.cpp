#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "fracbdsde/girsanov.hpp"
#include "fracbdsde/sampling.hpp"
#include "fracbdsde/stats.hpp"

using namespace fracbdsde;

namespace {

GirsanovFrame small_frame(const TimeGrid& g, const Hurst& h,
                          std::shared_ptr<const KernelWeights> w) {
    std::vector<double> cells(std::size_t(g.n_steps()), 0.5);
    for (std::size_t i = cells.size() / 2; i < cells.size(); ++i) cells[i] = -0.3;
    return build_frame(GammaSpec(g, cells, 4.0), h, g, std::move(w));
}

}  // namespace

TEST_CASE("gamma spec validation") {
    const TimeGrid g(1.0, 8);
    CHECK_THROWS_AS(GammaSpec(g, std::vector<double>(7, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(GammaSpec(g, std::vector<double>(8, 1.0), 0.5), std::invalid_argument);
}

TEST_CASE("frame tables satisfy the discrete quadratic identities") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const auto w = build_kernel_weights(g, h);
    const GirsanovFrame f = small_frame(g, h, w);
    // cross(j, j) is the quadratic variation q_j; cross is symmetric
    for (int j = 0; j <= 16; ++j) {
        CHECK(f.cross(j, j) == doctest::Approx(f.q(j)).epsilon(1e-14));
        for (int k = 0; k <= 16; ++k)
            CHECK(f.cross(j, k) == doctest::Approx(f.cross(k, j)).epsilon(1e-14));
    }
    CHECK(f.q(0) == 0.0);
    CHECK(f.q(16) > 0.0);
}

TEST_CASE("shift algebra per path") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const PathEnsemble ens = sample_fbm(g, h, 11, 32);
    const GirsanovFrame f = small_frame(g, h, ens.weights);
    for (const WienerPath& p : ens.paths) {
        // involution
        const WienerPath rt = shift_path(shift_path(p, f, 16, +1), f, 16, -1);
        for (std::size_t m = 0; m < p.dW0.size(); ++m)
            CHECK(rt.dW0[m] == doctest::Approx(p.dW0[m]).epsilon(1e-13));
        // eps_s(T_s) = eps_s exp(q_s)
        const WienerPath ts = shift_path(p, f, 8, +1);
        CHECK(log_epsilon(ts, f, 8) ==
              doctest::Approx(log_epsilon(p, f, 8) + f.q(8)).epsilon(1e-12));
        // I_r(A_v omega) = I_r - cross(r, v)
        const WienerPath av = shift_path(p, f, 12, -1);
        CHECK(int_gamma_dB(av, f, 8) ==
              doctest::Approx(int_gamma_dB(p, f, 8) - f.cross(8, 12)).epsilon(1e-12));
        CHECK(j_factor(f, 8, 12) == doctest::Approx(std::exp(f.cross(12, 8))));
    }
}

TEST_CASE("radon-nikodym density is a mean-one exponential") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.35);
    const int np = 40000;
    const PathEnsemble ens = sample_fbm(g, h, 21, np);
    const GirsanovFrame f = small_frame(g, h, ens.weights);
    std::vector<double> eps(std::size_t(np), 0.0);
    for (int k = 0; k < np; ++k)
        eps[std::size_t(k)] = std::exp(log_epsilon(ens.paths[std::size_t(k)], f, 16));
    const Summary s = summarize(eps);
    CHECK(std::abs(s.mean - 1.0) < 5.0 * s.se());
}

TEST_CASE("moment bound: constant gamma closed form and divergence diagnosis") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const MomentBound mb = exp_moment_bound(GammaSpec::constant(g, 0.7, 4.0), h, 1.0);
    CHECK(mb.g_p == doctest::Approx(0.7).epsilon(1e-8));  // |c| T^H with T = 1
    CHECK(mb.bound > 2.0);

    // jump with p (1/2 - H) >= 1 puts the nested integral outside L^p
    std::vector<double> cells(16, 0.5);
    for (std::size_t i = 8; i < 16; ++i) cells[i] = -0.5;
    CHECK_THROWS_AS(exp_moment_bound(GammaSpec(g, cells, 10.0), h, 1.0), std::exception);
    CHECK_THROWS_AS(exp_moment_bound(GammaSpec::constant(g, 0.5, 2.0), h, 1.0),
                    std::invalid_argument);  // needs p > 1/H
}

TEST_CASE("expectation invariance under the girsanov pair") {
    const TimeGrid g(1.0, 16);
    const Hurst h(0.3);
    const int np = 40000;
    const PathEnsemble ens = sample_fbm(g, h, 31, np);
    const GirsanovFrame f = small_frame(g, h, ens.weights);
    TestFunctional F = TestFunctional::b_power(g, 1.0, 2);
    F.prepare(h, *ens.weights);
    const CheckStat cs = girsanov_expectation_check(F, f, 8, ens);
    CHECK(std::abs(cs.z) < 5.0);
}
