#include "fracbdsde/spde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fracbdsde/parallel.hpp"
#include "fracbdsde/rng.hpp"
#include "fracbdsde/stats.hpp"

namespace fracbdsde {

namespace {

void check_lipschitz(const std::function<double(double)>& g, double lip, const char* name,
                     NormalStream& rng, int n_samples) {
    if (!g) throw std::invalid_argument(std::string("CoefficientSet: missing ") + name);
    if (!(lip >= 0.0) || !std::isfinite(lip))
        throw std::invalid_argument(std::string("CoefficientSet: bad Lipschitz bound for ") +
                                    name);
    for (int i = 0; i < n_samples; ++i) {
        const double x1 = 3.0 * rng.normal();
        const double x2 = 3.0 * rng.normal();
        const double lhs = std::abs(g(x1) - g(x2));
        if (lhs > lip * std::abs(x1 - x2) * (1.0 + 1e-9) + 1e-12)
            throw std::invalid_argument(std::string("CoefficientSet: declared Lipschitz bound "
                                                    "violated for ") +
                                        name);
    }
}

void check_derivative(const std::function<double(double)>& g,
                      const std::function<double(double)>& gp, const char* name,
                      NormalStream& rng, int n_samples) {
    if (!gp) return;  // derivatives are optional unless the variational layer runs
    const double h = 1e-4;
    for (int i = 0; i < n_samples; ++i) {
        const double x = 2.0 * rng.normal();
        const double fd = (g(x + h) - g(x - h)) / (2.0 * h);
        const double d = gp(x);
        if (std::abs(fd - d) > 1e-5 * (1.0 + std::abs(d)) + 1e-7)
            throw std::invalid_argument(std::string("CoefficientSet: derivative inconsistent "
                                                    "with finite differences for ") +
                                        name);
    }
}

}  // namespace

void validate_coefficients(const CoefficientSet& coeff, std::uint64_t seed, int n_samples) {
    NormalStream rng(seed, 0x59de);
    check_lipschitz(coeff.sigma, coeff.lip_sigma, "sigma", rng, n_samples);
    check_lipschitz(coeff.b, coeff.lip_b, "b", rng, n_samples);
    check_lipschitz(coeff.phi, coeff.lip_phi, "phi", rng, n_samples);
    check_derivative(coeff.sigma, coeff.sigma_prime, "sigma", rng, n_samples);
    check_derivative(coeff.b, coeff.b_prime, "b", rng, n_samples);
    check_derivative(coeff.phi, coeff.phi_prime, "phi", rng, n_samples);
    validate_driver(coeff.driver, seed);
}

std::vector<std::vector<double>> simulate_forward(const CoefficientSet& coeff,
                                                  const TimeGrid& grid, int t_idx, double x,
                                                  const std::vector<std::vector<double>>& dW) {
    if (t_idx < 0 || t_idx > grid.n_steps())
        throw std::invalid_argument("simulate_forward: t_idx out of range");
    const double dt = grid.dt();
    const std::size_t np = dW.size();
    std::vector<std::vector<double>> X(np, std::vector<double>(std::size_t(t_idx) + 1, x));
    parallel_for(np, [&](std::size_t k) {
        if (int(dW[k].size()) < t_idx)
            throw std::invalid_argument("simulate_forward: dW path shorter than t_idx");
        for (int j = t_idx - 1; j >= 0; --j) {
            const double xr = X[k][std::size_t(j) + 1];
            X[k][std::size_t(j)] = xr + coeff.b(xr) * dt + coeff.sigma(xr) * dW[k][std::size_t(j)];
        }
    });
    return X;
}

FieldGrid value_field_hat(const CoefficientSet& coeff, const GirsanovFrame& frame,
                          const BTables& btab, const std::vector<double>& xs,
                          const std::vector<int>& t_idxs, int n_w, std::uint64_t seed,
                          const BasisConfig& basis, bool with_u) {
    const TimeGrid& grid = frame.grid();
    if (xs.empty() || t_idxs.empty())
        throw std::invalid_argument("value_field_hat: empty evaluation lattice");
    if (n_w < 8) throw std::invalid_argument("value_field_hat: need at least 8 inner paths");
    for (int t : t_idxs)
        if (t < 0 || t > grid.n_steps())
            throw std::invalid_argument("value_field_hat: time index out of range");

    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    const TerminalSpec terminal = TerminalSpec::phi_of_x0(coeff.phi);

    FieldGrid field;
    field.xs = xs;
    field.t_idxs = t_idxs;
    field.u_hat.assign(t_idxs.size(), std::vector<double>(xs.size(), 0.0));
    field.se.assign(t_idxs.size(), std::vector<double>(xs.size(), 0.0));
    if (with_u) field.u.assign(t_idxs.size(), std::vector<double>(xs.size(), 0.0));

    for (std::size_t ti = 0; ti < t_idxs.size(); ++ti) {
        const int t = t_idxs[ti];
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            const double x = xs[xi];
            if (t == 0) {
                field.u_hat[ti][xi] = coeff.phi(x);
                if (with_u) field.u[ti][xi] = coeff.phi(x);
                continue;
            }
            const std::uint64_t point = (std::uint64_t(ti) * xs.size() + xi) * std::uint64_t(n_w);
            std::vector<std::vector<double>> dW(
                std::size_t(n_w), std::vector<double>(std::size_t(t), 0.0));
            parallel_for(std::size_t(n_w), [&](std::size_t k) {
                NormalStream rng(seed, 0x1f1e1d + point + k);
                for (int j = 0; j < t; ++j) dW[k][std::size_t(j)] = sdt * rng.normal();
            });
            const auto X = simulate_forward(coeff, grid, t, x, dW);
            BlockSolution sol = solve_pathwise_bsde_block(dW, btab, frame, coeff.driver,
                                                          terminal, basis, &X, t);
            std::vector<double> yh(std::size_t(n_w), 0.0), yc;
            for (std::size_t k = 0; k < yh.size(); ++k) yh[k] = sol.Yhat[k][std::size_t(t)];
            const Summary sh = summarize(yh);
            field.u_hat[ti][xi] = sh.mean;
            field.se[ti][xi] = sh.se();
            if (with_u) {
                // u = eps_t E^W[Yhat_t(A_t)]: the shift moves every eps-factor
                // of the recursion, so the composition re-solves under the
                // shifted tables.
                BTables shifted = btab;
                for (std::size_t r = 0; r < shifted.I.size(); ++r)
                    shifted.I[r] -= frame.cross(int(r), t);
                const BlockSolution solA = solve_pathwise_bsde_block(
                    dW, shifted, frame, coeff.driver, terminal, basis, &X, t);
                yc.resize(yh.size());
                const double eps = std::exp(btab.I[std::size_t(t)] - 0.5 * frame.q(t));
                for (std::size_t k = 0; k < yc.size(); ++k)
                    yc[k] = solA.Yhat[k][std::size_t(t)] * eps;
                field.u[ti][xi] = summarize(yc).mean;
            }
        }
    }
    return field;
}

FdReport pde_crosscheck(const CoefficientSet& coeff, const GirsanovFrame& frame,
                        const BTables& btab, const FieldGrid& mc_field, double x_max,
                        int n_space) {
    const TimeGrid& grid = frame.grid();
    if (!(x_max > 0.0)) throw std::invalid_argument("pde_crosscheck: x_max must be positive");
    if (n_space < 5) throw std::invalid_argument("pde_crosscheck: need at least 5 space nodes");
    int t_max = 0;
    for (int t : mc_field.t_idxs) t_max = std::max(t_max, t);
    for (double x : mc_field.xs)
        if (std::abs(x) > x_max)
            throw std::invalid_argument("pde_crosscheck: field point outside FD domain");

    const int N = n_space;
    const double dx = 2.0 * x_max / double(N - 1);
    const double dt = grid.dt();
    std::vector<double> xg(std::size_t(N), 0.0), sg(std::size_t(N), 0.0), bg(std::size_t(N), 0.0);
    for (int i = 0; i < N; ++i) {
        xg[std::size_t(i)] = -x_max + double(i) * dx;
        sg[std::size_t(i)] = coeff.sigma(xg[std::size_t(i)]);
        bg[std::size_t(i)] = coeff.b(xg[std::size_t(i)]);
    }
    double smax = 0.0, bmax = 0.0;
    for (int i = 0; i < N; ++i) {
        smax = std::max(smax, std::abs(sg[std::size_t(i)]));
        bmax = std::max(bmax, std::abs(bg[std::size_t(i)]));
    }
    // CFL: diffusion, advection and reaction each limited with safety 0.4
    int m = 1;
    m = std::max(m, int(std::ceil(dt * smax * smax / (0.4 * dx * dx))));
    m = std::max(m, int(std::ceil(dt * bmax / (0.4 * dx))));
    m = std::max(m, int(std::ceil(dt * coeff.driver.lipschitz / 0.4)));
    if (m > 2000000) throw std::runtime_error("pde_crosscheck: CFL substep count unreasonable");
    const double dts = dt / double(m);

    std::vector<double> u(std::size_t(N), 0.0), un(std::size_t(N), 0.0);
    for (int i = 0; i < N; ++i) u[std::size_t(i)] = coeff.phi(xg[std::size_t(i)]);

    FdReport rep;
    rep.substeps_per_cell = m;
    double scale = 0.0;
    for (const auto& row : mc_field.u_hat)
        for (double v : row) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-12);

    auto record = [&](int t_node) {
        for (std::size_t ti = 0; ti < mc_field.t_idxs.size(); ++ti) {
            if (mc_field.t_idxs[ti] != t_node) continue;
            for (std::size_t xi = 0; xi < mc_field.xs.size(); ++xi) {
                const double x = mc_field.xs[xi];
                double pos = (x + x_max) / dx;
                int i0 = std::min(N - 2, std::max(0, int(std::floor(pos))));
                const double w = pos - double(i0);
                const double fd =
                    (1.0 - w) * u[std::size_t(i0)] + w * u[std::size_t(i0) + 1];
                const double mc = mc_field.u_hat[ti][xi];
                FdRow row;
                row.t = grid.node(t_node);
                row.x = x;
                row.fd = fd;
                row.mc = mc;
                row.se = mc_field.se[ti][xi];
                row.discrepancy = fd - mc;
                rep.rows.push_back(row);
                rep.max_rel_discrepancy =
                    std::max(rep.max_rel_discrepancy, std::abs(row.discrepancy) / scale);
            }
        }
    };
    record(0);

    for (int j = 0; j < t_max; ++j) {
        const double le0 = btab.I[std::size_t(j)] + 0.5 * frame.q(j);
        const double le1 = btab.I[std::size_t(j) + 1] + 0.5 * frame.q(j + 1);
        for (int s = 0; s < m; ++s) {
            const double frac = (double(s) + 0.5) / double(m);
            const double tau = grid.node(j) + frac * dt;
            const double le = (1.0 - frac) * le0 + frac * le1;
            const double e1 = std::exp(le);
            const double e2 = std::exp(-le);
            for (int i = 0; i < N; ++i) {
                double uxx, ux;
                if (i == 0) {
                    uxx = 0.0;  // linear-extrapolation boundary
                    ux = (u[1] - u[0]) / dx;
                } else if (i == N - 1) {
                    uxx = 0.0;
                    ux = (u[std::size_t(N) - 1] - u[std::size_t(N) - 2]) / dx;
                } else {
                    uxx = (u[std::size_t(i) - 1] - 2.0 * u[std::size_t(i)] +
                           u[std::size_t(i) + 1]) /
                          (dx * dx);
                    ux = (u[std::size_t(i) + 1] - u[std::size_t(i) - 1]) / (2.0 * dx);
                }
                const double sig = sg[std::size_t(i)];
                const double rhs =
                    0.5 * sig * sig * uxx + bg[std::size_t(i)] * ux +
                    coeff.driver.f(tau, xg[std::size_t(i)], u[std::size_t(i)] * e1,
                                   sig * ux * e1) *
                        e2;
                un[std::size_t(i)] = u[std::size_t(i)] + dts * rhs;
                if (!std::isfinite(un[std::size_t(i)]))
                    throw std::runtime_error("pde_crosscheck: FD solution blew up");
            }
            u.swap(un);
        }
        record(j + 1);
    }
    return rep;
}

VariationalState variational_z(const CoefficientSet& coeff, const GirsanovFrame& frame,
                               const BTables& btab, const std::vector<std::vector<double>>& dW,
                               int t_idx, double x, const BasisConfig& basis) {
    const TimeGrid& grid = frame.grid();
    if (t_idx < 1 || t_idx > grid.n_steps())
        throw std::invalid_argument("variational_z: t_idx out of range");
    if (!coeff.sigma_prime || !coeff.b_prime || !coeff.phi_prime || !coeff.fx || !coeff.fy ||
        !coeff.fz)
        throw std::invalid_argument("variational_z: derivative data missing");
    const double dt = grid.dt();
    const std::size_t np = dW.size();
    if (np < 4) throw std::invalid_argument("variational_z: need at least 4 paths");

    const auto X = simulate_forward(coeff, grid, t_idx, x, dW);
    BlockSolution base = solve_pathwise_bsde_block(dW, btab, frame, coeff.driver,
                                                   TerminalSpec::phi_of_x0(coeff.phi), basis, &X,
                                                   t_idx);

    VariationalState st;
    st.nabla_x.assign(np, std::vector<double>(std::size_t(t_idx) + 1, 1.0));
    st.y_bar.assign(np, std::vector<double>(std::size_t(t_idx) + 1, 0.0));
    st.z_hat.assign(np, std::vector<double>(std::size_t(t_idx) + 1, 0.0));

    // derivative flow of the reversed-time Euler map, nabla X_{t} = 1
    parallel_for(np, [&](std::size_t k) {
        for (int j = t_idx - 1; j >= 0; --j) {
            const double xr = X[k][std::size_t(j) + 1];
            st.nabla_x[k][std::size_t(j)] =
                st.nabla_x[k][std::size_t(j) + 1] *
                (1.0 + coeff.b_prime(xr) * dt + coeff.sigma_prime(xr) * dW[k][std::size_t(j)]);
        }
        st.y_bar[k][0] = coeff.phi_prime(X[k][0]) * st.nabla_x[k][0];
    });

    // linear auxiliary sweep: same recursion, per-path driver
    //   G = fx e2 nablaX + fy C_bar + fz Z_bar   (partials at the base point)
    const int degree = basis.degree;
    const Eigen::Index nb = Eigen::Index(degree) + 1;
    if (Eigen::Index(np) < nb)
        throw std::invalid_argument("variational_z: fewer paths than basis functions");
    Eigen::MatrixXd A;
    Eigen::MatrixXd rhs(Eigen::Index(np), 2);
    for (int j = 0; j < t_idx; ++j) {
        // degenerate level (X pinned at the field point): only the flow
        // derivative column survives, higher powers are proportional to it
        double lo = X[0][std::size_t(j) + 1], hi = lo;
        for (std::size_t k = 1; k < np; ++k) {
            lo = std::min(lo, X[k][std::size_t(j) + 1]);
            hi = std::max(hi, X[k][std::size_t(j) + 1]);
        }
        const bool spread = hi - lo > 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
        const Eigen::Index nbj = spread ? nb : 1;
        A.resize(Eigen::Index(np), nbj);
        for (std::size_t k = 0; k < np; ++k) {
            // basis nablaX_{j+1} X_{j+1}^m: the variational value factors
            // through the flow derivative
            double f = st.nabla_x[k][std::size_t(j) + 1];
            const double xv = X[k][std::size_t(j) + 1];
            for (Eigen::Index c = 0; c < nbj; ++c) {
                A(Eigen::Index(k), c) = f;
                f *= xv;
            }
            rhs(Eigen::Index(k), 0) = st.y_bar[k][std::size_t(j)];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < nbj)
            throw std::runtime_error("variational_z: rank-deficient regression at step " +
                                     std::to_string(j));
        const Eigen::VectorXd cb = A * qr.solve(rhs.col(0));
        // same control variate as the main sweep
        for (std::size_t k = 0; k < np; ++k)
            rhs(Eigen::Index(k), 1) = (st.y_bar[k][std::size_t(j)] - cb(Eigen::Index(k))) *
                                      dW[k][std::size_t(j)] / dt;
        const Eigen::VectorXd zb = A * qr.solve(rhs.col(1));
        const double tj1 = grid.node(j + 1);
        const double le = 0.5 * (btab.I[std::size_t(j)] + 0.5 * frame.q(j) +
                                 btab.I[std::size_t(j) + 1] + 0.5 * frame.q(j + 1));
        const double e1 = std::exp(le), e2 = std::exp(-le);
        for (std::size_t k = 0; k < np; ++k) {
            const double xv = X[k][std::size_t(j) + 1];
            const double yb = base.C[k][std::size_t(j)] * e1;
            const double zbb = base.Zhat[k][std::size_t(j)] * e1;
            const double g = coeff.fx(tj1, xv, yb, zbb) * e2 * st.nabla_x[k][std::size_t(j) + 1] +
                             coeff.fy(tj1, xv, yb, zbb) * cb(Eigen::Index(k)) +
                             coeff.fz(tj1, xv, yb, zbb) * zb(Eigen::Index(k));
            const double y = cb(Eigen::Index(k)) + dt * g;
            if (!std::isfinite(y))
                throw std::runtime_error("variational_z: non-finite value propagated");
            st.y_bar[k][std::size_t(j) + 1] = y;
        }
    }

    parallel_for(np, [&](std::size_t k) {
        for (int j = 0; j <= t_idx; ++j) {
            const double nx = st.nabla_x[k][std::size_t(j)];
            if (std::abs(nx) < 1e-12)
                throw std::runtime_error("variational_z: singular derivative flow");
            st.z_hat[k][std::size_t(j)] =
                -st.y_bar[k][std::size_t(j)] / nx * coeff.sigma(X[k][std::size_t(j)]);
        }
    });
    return st;
}

}  // namespace fracbdsde
