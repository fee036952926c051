#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ctrp/rng.hpp"
#include "ctrp/tensor.hpp"

namespace ctrp_test {

inline ctrp::DenseTensor random_tensor(const std::vector<int>& shape, ctrp::RngStream& rng) {
    ctrp::DenseTensor t(shape);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

/// Trapezoid moments of an unnormalized log density over [lo, hi].
/// Returns {mass, E[X], E[X^2]} relative to the normalized density.
struct QuadratureMoments {
    double mean = 0.0;
    double second = 0.0;
};

inline QuadratureMoments quadrature_moments(const std::function<double(double)>& log_unnorm,
                                            double lo, double hi, int points = 400000) {
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
    const double step = (hi - lo) / points;
    // Shift by the max of the log density for overflow safety.
    double log_max = -1e300;
    for (int i = 0; i <= points; ++i) {
        const double x = lo + step * i;
        log_max = std::max(log_max, log_unnorm(x));
    }
    for (int i = 0; i <= points; ++i) {
        const double x = lo + step * i;
        const double w = (i == 0 || i == points) ? 0.5 : 1.0;
        const double f = std::exp(log_unnorm(x) - log_max) * w;
        mass += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    return {m1 / mass, m2 / mass};
}

/// Two-sided Kolmogorov-Smirnov p-value (asymptotic series) for a sample
/// against a continuous CDF.
inline double ks_p_value(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::min(std::max(p, 0.0), 1.0);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace ctrp_test
