#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fracbdsde {

// Uniform partition of [0, T]. Every discretized object in the library is
// indexed on one of these; node j lives at j * dt().
class TimeGrid {
public:
    TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw std::invalid_argument("TimeGrid: horizon must be finite and positive");
        if (n_steps < 2)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
    }

    double horizon() const { return horizon_; }
    int n_steps() const { return n_steps_; }
    double dt() const { return horizon_ / n_steps_; }
    double node(int j) const { return horizon_ * j / n_steps_; }
    double midpoint(int cell) const { return horizon_ * (cell + 0.5) / n_steps_; }

    std::vector<double> nodes() const {
        std::vector<double> out(n_steps_ + 1);
        for (int j = 0; j <= n_steps_; ++j) out[j] = node(j);
        return out;
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.horizon_ == b.horizon_ && a.n_steps_ == b.n_steps_;
    }

private:
    double horizon_;
    int n_steps_;
};

enum class Basis { node, cell };

// Values attached to either the n+1 nodes or the n cells of a TimeGrid.
// Cell-based functions are read as step functions, constant on each cell.
struct GridFunction {
    TimeGrid grid;
    Basis basis;
    std::vector<double> values;

    GridFunction(TimeGrid g, Basis b, std::vector<double> v)
        : grid(g), basis(b), values(std::move(v)) {
        const std::size_t want =
            basis == Basis::node ? std::size_t(grid.n_steps()) + 1 : std::size_t(grid.n_steps());
        if (values.size() != want)
            throw std::invalid_argument("GridFunction: value count does not match grid/basis");
    }

    static GridFunction zeros(const TimeGrid& g, Basis b) {
        const std::size_t n =
            b == Basis::node ? std::size_t(g.n_steps()) + 1 : std::size_t(g.n_steps());
        return GridFunction(g, b, std::vector<double>(n, 0.0));
    }
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* where) {
    if (!(a == b)) throw std::invalid_argument(std::string(where) + ": mismatched grids");
}

// L2 norm over interior nodes (endpoints of fractional derivatives can be
// singular by nature; convergence studies measure the interior).
inline double l2_interior(const GridFunction& f) {
    if (f.basis != Basis::node) throw std::invalid_argument("l2_interior: node basis expected");
    double acc = 0.0;
    const int n = f.grid.n_steps();
    for (int j = 1; j < n; ++j) acc += f.values[j] * f.values[j];
    return std::sqrt(acc * f.grid.dt());
}

}  // namespace fracbdsde
