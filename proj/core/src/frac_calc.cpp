#include "fracbdsde/frac_calc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracbdsde/quadrature.hpp"

namespace fracbdsde {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("fractional order alpha must lie in (0,1)");
}

void check_node_input(const GridFunction& f) {
    if (f.basis != Basis::node)
        throw std::invalid_argument("fractional operators expect a node-based GridFunction");
    for (double v : f.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("fractional operators expect finite-valued input");
}

}  // namespace

GridFunction frac_integral_right(const GridFunction& f, double alpha) {
    check_alpha(alpha);
    check_node_input(f);
    const int n = f.grid.n_steps();
    const double dt = f.grid.dt();
    const double ginv = 1.0 / std::tgamma(alpha);
    GridFunction out = GridFunction::zeros(f.grid, Basis::node);
    for (int k = 0; k < n; ++k) {
        const double xk = f.grid.node(k);
        double acc = 0.0;
        for (int m = k; m < n; ++m) {
            const double A = f.grid.node(m) - xk;
            const double B = f.grid.node(m + 1) - xk;
            const double slope = (f.values[m + 1] - f.values[m]) / dt;
            const double c0 = f.values[m] - slope * A;  // f(u) = c0 + slope*(u - xk)
            acc += c0 * (std::pow(B, alpha) - std::pow(A, alpha)) / alpha +
                   slope * (std::pow(B, alpha + 1.0) - std::pow(A, alpha + 1.0)) / (alpha + 1.0);
        }
        out.values[k] = ginv * acc;
    }
    out.values[n] = 0.0;
    return out;
}

GridFunction frac_integral_left(const GridFunction& f, double alpha) {
    check_alpha(alpha);
    check_node_input(f);
    const int n = f.grid.n_steps();
    const double dt = f.grid.dt();
    const double ginv = 1.0 / std::tgamma(alpha);
    GridFunction out = GridFunction::zeros(f.grid, Basis::node);
    for (int k = 1; k <= n; ++k) {
        const double xk = f.grid.node(k);
        double acc = 0.0;
        for (int m = 0; m < k; ++m) {
            // substitute w = xk - u; w runs over [A, B]
            const double A = xk - f.grid.node(m + 1);
            const double B = xk - f.grid.node(m);
            const double slope = (f.values[m + 1] - f.values[m]) / dt;
            const double c0 = f.values[m] + slope * B;  // f(u) = c0 - slope*w
            acc += c0 * (std::pow(B, alpha) - std::pow(A, alpha)) / alpha -
                   slope * (std::pow(B, alpha + 1.0) - std::pow(A, alpha + 1.0)) / (alpha + 1.0);
        }
        out.values[k] = ginv * acc;
    }
    out.values[0] = 0.0;
    return out;
}

GridFunction frac_derivative_right(const GridFunction& f, double alpha) {
    check_alpha(alpha);
    check_node_input(f);
    const int n = f.grid.n_steps();
    const double dt = f.grid.dt();
    const double T = f.grid.horizon();
    const double ginv = 1.0 / std::tgamma(1.0 - alpha);
    GridFunction out = GridFunction::zeros(f.grid, Basis::node);
    for (int k = 0; k < n; ++k) {
        const double sk = f.grid.node(k);
        double acc = f.values[k] * std::pow(T - sk, -alpha) * ginv;
        // singular cell [sk, sk+dt]: exact integral of the local linear interpolant
        {
            const double slope = (f.values[k + 1] - f.values[k]) / dt;
            acc += alpha * ginv * (-slope) * std::pow(dt, 1.0 - alpha) / (1.0 - alpha);
        }
        for (int m = k + 1; m < n; ++m) {
            const double A = f.grid.node(m) - sk;
            const double B = f.grid.node(m + 1) - sk;
            const double slope = (f.values[m + 1] - f.values[m]) / dt;
            // f(sk) - f(u) = (c0 + slope*A) - slope*w with w = u - sk
            const double c0 = f.values[k] - f.values[m];
            acc += alpha * ginv *
                   ((c0 + slope * A) * (std::pow(A, -alpha) - std::pow(B, -alpha)) / alpha -
                    slope * (std::pow(B, 1.0 - alpha) - std::pow(A, 1.0 - alpha)) / (1.0 - alpha));
        }
        out.values[k] = acc;
    }
    out.values[n] =
        f.values[n] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
}

GridFunction frac_derivative_left(const GridFunction& f, double alpha) {
    check_alpha(alpha);
    check_node_input(f);
    const int n = f.grid.n_steps();
    const double dt = f.grid.dt();
    const double ginv = 1.0 / std::tgamma(1.0 - alpha);
    GridFunction out = GridFunction::zeros(f.grid, Basis::node);
    for (int k = 1; k <= n; ++k) {
        const double sk = f.grid.node(k);
        double acc = f.values[k] * std::pow(sk, -alpha) * ginv;
        // singular cell [sk-dt, sk]
        {
            const double slope = (f.values[k] - f.values[k - 1]) / dt;
            acc += alpha * ginv * slope * std::pow(dt, 1.0 - alpha) / (1.0 - alpha);
        }
        for (int m = 0; m < k - 1; ++m) {
            // w = sk - u over [A, B]
            const double A = sk - f.grid.node(m + 1);
            const double B = sk - f.grid.node(m);
            const double slope = (f.values[m + 1] - f.values[m]) / dt;
            // f(sk) - f(u) = c0 + slope*w
            const double c0 = f.values[k] - f.values[m] - slope * B;
            acc += alpha * ginv *
                   (c0 * (std::pow(A, -alpha) - std::pow(B, -alpha)) / alpha +
                    slope * (std::pow(B, 1.0 - alpha) - std::pow(A, 1.0 - alpha)) / (1.0 - alpha));
        }
        out.values[k] = acc;
    }
    out.values[0] =
        f.values[0] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
}

double marchaud_left(const std::function<double(double)>& f, double s, double alpha,
                     std::vector<double> breakpoints, double tol) {
    check_alpha(alpha);
    if (!(s > 0.0)) throw std::invalid_argument("marchaud_left: s must be positive");
    const double ginv = 1.0 / std::tgamma(1.0 - alpha);
    const double fs = f(s);
    breakpoints.push_back(0.0);
    breakpoints.push_back(s);
    std::sort(breakpoints.begin(), breakpoints.end());
    std::vector<double> pts;
    for (double p : breakpoints) {
        if (p < 0.0 || p > s) continue;
        if (pts.empty() || p > pts.back() + 1e-15) pts.push_back(p);
    }
    // an interval shorter than the dedupe threshold carries no tail mass
    const double tail =
        pts.size() >= 2
            ? integrate_with_breakpoints(
                  [&](double u) { return (fs - f(u)) * std::pow(s - u, -1.0 - alpha); }, pts, tol)
            : 0.0;
    const double result = fs * std::pow(s, -alpha) * ginv + alpha * ginv * tail;
    if (!std::isfinite(result))
        throw std::runtime_error("marchaud_left: quadrature produced a non-finite value");
    return result;
}

}  // namespace fracbdsde
