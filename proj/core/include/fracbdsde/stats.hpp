#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracbdsde {

// Plain accumulator for Monte Carlo summaries; deterministic reduction order.
struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0;       // unbiased
    double skewness = 0.0;  // standardized third moment
    double excess_kurtosis = 0.0;
    double se() const { return n > 1 ? std::sqrt(var / double(n)) : 0.0; }
};

inline Summary summarize(const std::vector<double>& xs) {
    Summary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= double(s.n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(s.n);
    m3 /= double(s.n);
    m4 /= double(s.n);
    s.mean = m;
    s.var = s.n > 1 ? m2 * double(s.n) / double(s.n - 1) : 0.0;
    if (m2 > 0.0) {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

// z-score of a difference of paired samples against zero.
inline double paired_zscore(const std::vector<double>& diffs) {
    const Summary s = summarize(diffs);
    const double se = s.se();
    return se > 0.0 ? s.mean / se : 0.0;
}

// Ordinary least squares y ~ a + b x; returns {intercept, slope}.
inline std::pair<double, double> fit_line(const std::vector<double>& x,
                                          const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need matched samples, n >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    return {(sy - slope * sx) / n, slope};
}

}  // namespace fracbdsde
