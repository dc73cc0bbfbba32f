#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bdsde.hpp"
#include "girsanov.hpp"
#include "grid.hpp"

namespace fracbdsde {

// Markovian coefficient data (d = 1): forward pair (sigma, b), terminal Phi,
// driver f(t,x,y,z); derivatives feed the variational layer.
struct CoefficientSet {
    std::function<double(double)> sigma, b, phi;
    std::function<double(double)> sigma_prime, b_prime, phi_prime;
    BdsdeDriver driver;
    std::function<double(double, double, double, double)> fx, fy, fz;  // driver partials
    double lip_sigma = 0.0, lip_b = 0.0, lip_phi = 0.0;
};

void validate_coefficients(const CoefficientSet& coeff, std::uint64_t seed, int n_samples = 256);

// Forward SDE dX = -b ds - sigma dW (backward Ito), X_t = x: Euler-Maruyama
// in reversed time, marching node t_idx down to 0. Returns X[path][node],
// nodes 0..t_idx filled.
std::vector<std::vector<double>> simulate_forward(const CoefficientSet& coeff,
                                                  const TimeGrid& grid, int t_idx, double x,
                                                  const std::vector<std::vector<double>>& dW);

struct FieldGrid {
    std::vector<double> xs;
    std::vector<int> t_idxs;
    std::vector<std::vector<double>> u_hat;  // [t][x]
    std::vector<std::vector<double>> u;      // [t][x] (filled when requested)
    std::vector<std::vector<double>> se;     // MC standard error of u_hat
};

// u_hat(t,x) = Yhat_t^{t,x} per frozen B path (btab), W ensembles underneath;
// with_u also assembles u(t,x) = u_hat(A_t,t,x) eps_t through the regression
// representation.
FieldGrid value_field_hat(const CoefficientSet& coeff, const GirsanovFrame& frame,
                          const BTables& btab, const std::vector<double>& xs,
                          const std::vector<int>& t_idxs, int n_w, std::uint64_t seed,
                          const BasisConfig& basis, bool with_u = false);

inline FieldGrid value_field_u(const CoefficientSet& coeff, const GirsanovFrame& frame,
                               const BTables& btab, const std::vector<double>& xs,
                               const std::vector<int>& t_idxs, int n_w, std::uint64_t seed,
                               const BasisConfig& basis) {
    return value_field_hat(coeff, frame, btab, xs, t_idxs, n_w, seed, basis, true);
}

struct FdRow {
    double t, x, fd, mc, se, discrepancy;
};

struct FdReport {
    std::vector<FdRow> rows;
    double max_rel_discrepancy = 0.0;  // relative to the field scale
    int substeps_per_cell = 0;
};

// Explicit finite differences for the pathwise PDE
//   d u_hat = [L u_hat + f(t, x, u_hat e1, du_hat sigma e1) e1^{-1}] dt,
// central space / forward time, CFL-checked substeps, on the same frozen B
// path; compares against the MC field at its lattice points.
FdReport pde_crosscheck(const CoefficientSet& coeff, const GirsanovFrame& frame,
                        const BTables& btab, const FieldGrid& mc_field, double x_max,
                        int n_space = 201);

struct VariationalState {
    std::vector<std::vector<double>> nabla_x;  // [path][node], = 1 at s = t
    std::vector<std::vector<double>> y_bar;    // auxiliary linear BSDE value
    std::vector<std::vector<double>> z_hat;    // -y_bar (nabla_x)^{-1} sigma(X)
};

// Variational representation of Z: co-simulates the derivative flow and the
// linear auxiliary BSDE along the base solution. Throws on singular nabla_x.
VariationalState variational_z(const CoefficientSet& coeff, const GirsanovFrame& frame,
                               const BTables& btab, const std::vector<std::vector<double>>& dW,
                               int t_idx, double x, const BasisConfig& basis);

}  // namespace fracbdsde
