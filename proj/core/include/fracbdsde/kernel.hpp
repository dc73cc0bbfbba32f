#pragma once

#include <memory>
#include <vector>

#include "grid.hpp"
#include "hurst.hpp"

namespace fracbdsde {

// Volterra kernel K_H(t,s) of the fBm representation B_t = int_0^t K_H(t,s) dW0_s.
// The inner integral's endpoint singularity (u-s)^{H-1/2} is removed by the
// substitution u = s + v^{1/(H+1/2)} before tanh-sinh quadrature.
double kernel_K_H(const Hurst& h, double t, double s);

// Covariance R_H(t,s) = 1/2 (t^{2H} + s^{2H} - |t-s|^{2H}).
double covariance_R(const Hurst& h, double t, double s);

// Quadrature of int_0^{s^t} K_H(t,r) K_H(s,r) dr, the kernel-side of the
// covariance identity (equal arguments give the variance identity t^{2H}).
double kernel_covariance_quadrature(const Hurst& h, double t, double s, double tol = 1e-9);

// Cell-averaged kernel weights w[j][i] = (1/dt) int_{cell i} K_H(t_j, s) ds,
// i < j; precomputed once per (grid, Hurst) and shared read-only.
struct KernelWeights {
    TimeGrid grid;
    Hurst hurst;
    std::vector<std::vector<double>> w;  // w[j] has j entries (cells 0..j-1)

    KernelWeights(TimeGrid g, Hurst h) : grid(g), hurst(h) {}
    double at(int j, int i) const { return i < j ? w[j][i] : 0.0; }
};

std::shared_ptr<const KernelWeights> build_kernel_weights(const TimeGrid& grid, const Hurst& h);

}  // namespace fracbdsde
