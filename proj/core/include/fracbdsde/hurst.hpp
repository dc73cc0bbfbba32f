#pragma once

#include <cmath>
#include <stdexcept>

namespace fracbdsde {

// Hurst parameter H in the open interval (0, 1/2) together with the kernel
// normalizing constant C_H = sqrt(2H / ((1-2H) Beta(1-2H, H+1/2))).
class Hurst {
public:
    explicit Hurst(double h) : h_(h) {
        if (!(h > 0.0) || !(h < 0.5))
            throw std::invalid_argument("Hurst: h must lie strictly in (0, 1/2)");
        c_h_ = std::sqrt(2.0 * h / ((1.0 - 2.0 * h) * std::beta(1.0 - 2.0 * h, h + 0.5)));
    }

    double h() const { return h_; }
    double c_h() const { return c_h_; }

private:
    double h_;
    double c_h_;
};

}  // namespace fracbdsde
