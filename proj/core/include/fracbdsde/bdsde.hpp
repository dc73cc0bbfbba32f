#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "divergence.hpp"
#include "girsanov.hpp"
#include "grid.hpp"
#include "sampling.hpp"

namespace fracbdsde {

// Driver f(t, x, y, z) under (H3); has_x marks the Markovian variant whose x
// slot is fed by the forward trajectory.
struct BdsdeDriver {
    std::function<double(double, double, double, double)> f;
    bool has_x = false;
    double lipschitz = 0.0;
};

void validate_driver(const BdsdeDriver& driver, std::uint64_t seed, int n_samples = 256);

// Terminal datum xi, measurable for the W path over [0,T]: a constant, a
// polynomial of W node values, or Phi(X_0) along a supplied forward
// trajectory.
struct TerminalSpec {
    enum class Kind { constant, w_polynomial, phi_x0 };
    struct WTerm {
        double coef;
        std::vector<std::pair<int, int>> node_powers;  // (node index, power)
    };

    Kind kind = Kind::constant;
    double c = 0.0;
    std::vector<WTerm> wterms;
    std::function<double(double)> phi;

    static TerminalSpec constant(double v) {
        TerminalSpec t;
        t.kind = Kind::constant;
        t.c = v;
        return t;
    }
    static TerminalSpec w_poly(std::vector<WTerm> terms) {
        TerminalSpec t;
        t.kind = Kind::w_polynomial;
        t.wterms = std::move(terms);
        return t;
    }
    static TerminalSpec phi_of_x0(std::function<double(double)> f) {
        TerminalSpec t;
        t.kind = Kind::phi_x0;
        t.phi = std::move(f);
        return t;
    }
};

struct BasisConfig {
    int degree = 2;
};

// Per-B-path tables the pathwise solver needs: the realized int gamma dB at
// every node (B frozen within a block; W paths underneath).
struct BTables {
    std::vector<double> I;  // [node]
    static BTables from_path(const WienerPath& b_path, const GirsanovFrame& frame);
    static BTables identity(int n_steps) { return BTables{std::vector<double>(n_steps + 1, 0.0)}; }
};

// Solution of one frozen-B block. C and Zhat per (path, cell) are the fitted
// conditional expectations; together with the shift algebra they form the
// regression representation that A_t composes with.
struct BlockSolution {
    std::vector<double> xi;                 // [path]
    std::vector<std::vector<double>> Yhat;  // [path][node]
    std::vector<std::vector<double>> C;     // [path][cell]: E[Yhat_j | H_{j+1}]
    std::vector<std::vector<double>> Zhat;  // [path][cell]
    std::vector<std::vector<double>> Y;      // filled by to_bdsde
    std::vector<std::vector<double>> Z;      // filled by to_bdsde
    std::vector<std::vector<double>> Fcell;  // driver density f(s,X,Y,Z) per cell in
                                             // Y units, as the scheme realizes it
    double max_condition = 0.0;
};

// Transformed driver F_s(y,z) = f(s, x, y e1, z e1) e2 with
// e1 = eps_s(T_s) = exp(I_s + q_s/2), e2 = e1^{-1}, evaluated in log space.
// log e1 is the trapezoid average over the cell [node-1, node] (the eps path
// is only H-Hoelder, so a right-node rectangle rule would bias the driver
// integral by O(dt^H)); i_shift / i_shift_prev are added to log e1 at the
// right / left cell node (A_v compositions).
double transformed_driver(const BdsdeDriver& driver, const GirsanovFrame& frame,
                          const BTables& btab, int node, double x, double y, double z,
                          double i_shift = 0.0, double i_shift_prev = 0.0);

// Backward sweep in reversed time (original-time indexing: the terminal xi
// anchors Yhat_0 and the recursion marches j -> j+1):
//   Zhat_j = (1/dt) E[Yhat_j dW_j | H_{j+1}]      (regression)
//   Yhat_{j+1} = E[Yhat_j | H_{j+1}] + dt F_{t_{j+1}}(C_j, Zhat_j)
// Conditional expectations by global polynomial least squares on W-tail
// features (and X when Markovian); H_{j+1} = sigma{dW_i : i >= j+1} v F^B.
BlockSolution solve_pathwise_bsde_block(const std::vector<std::vector<double>>& dW,
                                        const BTables& btab, const GirsanovFrame& frame,
                                        const BdsdeDriver& driver, const TerminalSpec& terminal,
                                        const BasisConfig& basis,
                                        const std::vector<std::vector<double>>* X = nullptr,
                                        int t_end = -1);

// (Y_v, Z_{v-1}) = (Yhat_v(A_v) eps_v, Zhat_{v-1}(A_v) eps_v). The shift A_v
// moves every eps-factor of the recursion (I_r -> I_r - c_{r,v}), so the
// composition re-solves the sweep under the shifted tables, one pass per node
// with the same regression estimator.
void to_bdsde(BlockSolution& sol, const std::vector<std::vector<double>>& dW,
              const BTables& btab, const GirsanovFrame& frame, const BdsdeDriver& driver,
              const TerminalSpec& terminal, const BasisConfig& basis,
              const std::vector<std::vector<double>>* X = nullptr);

// Girsanov round trip at node v: evaluating the composed Y functional on the
// T_v-shifted B path and undoing eps_v(T_v) must recover Yhat_v per path.
// Returns the RMS relative deviation.
double representation_error(const BlockSolution& sol, const std::vector<std::vector<double>>& dW,
                            const BTables& btab, const GirsanovFrame& frame,
                            const BdsdeDriver& driver, const TerminalSpec& terminal,
                            const BasisConfig& basis, int v,
                            const std::vector<std::vector<double>>* X = nullptr);

// Classical-BSDE reference sweep: the identical recursion with the
// eps-factors omitted entirely. Used for the gamma == 0 bit-equivalence gate.
BlockSolution solve_classical_reference(const std::vector<std::vector<double>>& dW,
                                        const TimeGrid& grid, const BdsdeDriver& driver,
                                        const TerminalSpec& terminal, const BasisConfig& basis,
                                        const std::vector<std::vector<double>>* X = nullptr,
                                        int t_end = -1);

// Linear example with constant coefficients: driver f1 x + f2 y + f3 z,
// forward dX = -b ds - sigma dW (X_t = x), terminal Phi(x) = x. Closed-form
// Gaussian-moment evaluation of the E_Q conditional expectation per path.
struct LinearCoeffs {
    double f1 = 0.0, f2 = 0.0, f3 = 0.0;
    double b = 0.0, sigma = 1.0;
};

// Yhat_s per W path (B frozen via btab); t_idx is the field time, s_idx <= t_idx.
std::vector<double> linear_closed_form_yhat(const LinearCoeffs& lc, double x, int t_idx,
                                            int s_idx, const BTables& btab,
                                            const GirsanovFrame& frame,
                                            const std::vector<std::vector<double>>& dW);

// Y_s = Yhat_s(A_s) eps_s in closed form (I_r -> I_r - c_{r,s} inside).
std::vector<double> linear_closed_form_y(const LinearCoeffs& lc, double x, int t_idx, int s_idx,
                                         const BTables& btab, const GirsanovFrame& frame,
                                         const std::vector<std::vector<double>>& dW);

// Nested-Monte-Carlo fallback for the same conditional expectation (inner
// draws take the Q-drift analytically); general Phi.
std::vector<double> linear_nested_mc_yhat(const LinearCoeffs& lc,
                                          const std::function<double(double)>& phi, double x,
                                          int t_idx, int s_idx, const BTables& btab,
                                          const GirsanovFrame& frame,
                                          const std::vector<std::vector<double>>& dW,
                                          int n_inner, std::uint64_t seed);

// Residual identification int_0^t gamma Y dB := Y_t - xi - int f ds + int Z dW
// per path, ready for the divergence duality.
std::vector<double> bdsde_residual(const BlockSolution& sol, const GirsanovFrame& frame,
                                   const std::vector<std::vector<double>>& dW, int t_idx);

}  // namespace fracbdsde
