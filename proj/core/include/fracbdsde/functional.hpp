#pragma once

#include <string>
#include <vector>

#include "grid.hpp"
#include "hurst.hpp"
#include "kernel.hpp"
#include "sampling.hpp"

namespace fracbdsde {

// Smooth test random variable F = f(B(phi_1), ..., B(phi_k)) with f a
// polynomial; the Malliavin derivative D^B F = sum_i (d_i f) phi_i comes out
// symbolically from the coefficient table. The registered family for all
// statistical checks: polynomials of degree <= 4 in at most 3 coordinates.
struct TestFunctional {
    struct Term {
        double coef;
        std::vector<int> powers;  // one exponent per phi
    };

    std::string name;
    std::vector<GridFunction> phis;  // cell-based step functions
    std::vector<Term> terms;
    std::vector<std::vector<double>> kphi_avg;  // cell averages of K phi_i

    void prepare(const Hurst& h, const KernelWeights& weights);

    // B(phi_i) = sum_m (K phi_i)_m dW0_m along the given path.
    std::vector<double> coordinates(const WienerPath& path) const;

    double eval(const std::vector<double>& b) const;
    std::vector<double> partials(const std::vector<double>& b) const;

    static TestFunctional constant(const TimeGrid& grid, double c);
    // B_t^power through phi = 1_{[0,t]} (t a node time)
    static TestFunctional b_power(const TimeGrid& grid, double t, int power);
};

}  // namespace fracbdsde
