#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace fracbdsde {

// Tanh-sinh (double-exponential) quadrature on (a, b). Endpoint singularities
// of integrable power type are absorbed by the double-exponential decay of the
// transformed weights, which is exactly what the fractional kernels need.
template <class F>
double tanh_sinh(F&& f, double a, double b, double tol = 1e-11, int max_level = 12) {
    if (!(b > a)) {
        if (b == a) return 0.0;
        throw std::invalid_argument("tanh_sinh: requires a < b");
    }
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    const double tmax = 3.8;  // abscissae beyond this underflow to the endpoints

    auto eval = [&](double t) -> double {
        const double st = std::sinh(t) * 1.5707963267948966;  // (pi/2) sinh t
        const double x = c + r * std::tanh(st);
        if (x <= a || x >= b) return 0.0;  // weight underflow at the endpoint
        const double ch = std::cosh(st);
        const double w = 1.5707963267948966 * std::cosh(t) / (ch * ch);
        const double v = f(x) * w;
        return std::isfinite(v) ? v : 0.0;
    };

    double h = 1.0;
    double sum = eval(0.0);
    {
        double t = h;
        while (t <= tmax) {
            sum += eval(t) + eval(-t);
            t += h;
        }
    }
    double prev = sum * h * r;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double t = h; t <= tmax; t += 2.0 * h) add += eval(t) + eval(-t);
        sum += add;
        const double cur = sum * h * r;
        if (level >= 3 && std::abs(cur - prev) <= tol * (std::abs(cur) + 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

// Integrate across a list of interior breakpoints (singularities of the
// integrand land on subinterval endpoints, where tanh-sinh absorbs them).
template <class F>
double integrate_with_breakpoints(F&& f, const std::vector<double>& pts, double tol = 1e-11) {
    if (pts.size() < 2) throw std::invalid_argument("integrate_with_breakpoints: need >= 2 points");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] > pts[i]) acc += tanh_sinh(f, pts[i], pts[i + 1], tol);
    }
    return acc;
}

}  // namespace fracbdsde
