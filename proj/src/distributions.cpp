#include "ctrp/distributions.hpp"

#include <cmath>
#include <limits>

#include "ctrp/errors.hpp"

namespace ctrp {

double gamma_log_unnorm(double x, double shape, double rate) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return (shape - 1.0) * std::log(x) - rate * x;
}

double inverse_gamma_log_unnorm(double x, double shape, double rate) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return -(shape + 1.0) * std::log(x) - rate / x;
}

double gig_log_unnorm(double x, const GigParams& g) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return (g.p - 1.0) * std::log(x) - 0.5 * (g.a * x + g.b / x);
}

double sample_gamma(double shape, double rate, RngStream& rng) {
    if (shape <= 0.0 || rate <= 0.0) throw parameter_error("gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // Boost: G(shape) = G(shape+1) * U^(1/shape).
        const double u = rng.uniform01();
        return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
    if (shape <= 0.0 || rate <= 0.0)
        throw parameter_error("inverse gamma: shape and rate must be positive");
    return rate / sample_gamma(shape, 1.0, rng);
}

namespace {

bool effectively_zero(double x) { return x < kPositiveFloor; }

}  // namespace

double sample_gig(const GigParams& g, RngStream& rng) {
    const bool a_zero = effectively_zero(g.a);
    const bool b_zero = effectively_zero(g.b);
    if (a_zero && b_zero) throw parameter_error("gig: a and b cannot both be zero");
    if (b_zero) {
        if (g.p <= 0.0) throw parameter_error("gig: b = 0 requires p > 0");
        return sample_gamma(g.p, g.a / 2.0, rng);
    }
    if (a_zero) {
        if (g.p >= 0.0) throw parameter_error("gig: a = 0 requires p < 0");
        return sample_inverse_gamma(-g.p, g.b / 2.0, rng);
    }

    // Interior case. Mode of g and maximizer of x^2 g(x) solve quadratics:
    //   a m^2 - 2(p-1) m - b = 0,   a x+^2 - 2(p+1) x+ - b = 0.
    const double ab = g.a * g.b;
    const double mode = ((g.p - 1.0) + std::sqrt((g.p - 1.0) * (g.p - 1.0) + ab)) / g.a;
    const double xplus = ((g.p + 1.0) + std::sqrt((g.p + 1.0) * (g.p + 1.0) + ab)) / g.a;
    const double lg_mode = gig_log_unnorm(mode, g);
    // Envelope in normalized units: u in (0, 1], v in (0, v_max].
    const double v_max = xplus * std::exp(0.5 * (gig_log_unnorm(xplus, g) - lg_mode));

    for (long attempt = 0; attempt < 100000000L; ++attempt) {
        const double u = rng.uniform01();
        const double v = rng.uniform01() * v_max;
        const double x = v / u;
        if (2.0 * std::log(u) <= gig_log_unnorm(x, g) - lg_mode) return x;
    }
    throw numeric_error("gig: ratio-of-uniforms rejection loop exhausted");
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng) {
    const Eigen::Index k = alpha.size();
    if (k < 1) throw parameter_error("dirichlet: need at least one component");
    Eigen::VectorXd x(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (alpha(i) <= 0.0) throw parameter_error("dirichlet: concentrations must be positive");
        x(i) = sample_gamma(alpha(i), 1.0, rng);
    }
    x /= x.sum();
    // Close the simplex on the largest component: with rest the
    // left-to-right sum of the others, rest + x(imax) == 1.0 bit-exactly
    // and x(imax) >= 1/k - eps stays positive.
    Eigen::Index imax;
    x.maxCoeff(&imax);
    double rest = 0.0;
    for (Eigen::Index i = 0; i < k; ++i)
        if (i != imax) rest += x(i);
    x(imax) = 1.0 - rest;
    return x;
}

Eigen::VectorXd sample_mvn_from_precision(const Eigen::VectorXd& h, const Eigen::MatrixXd& precision,
                                          RngStream& rng) {
    if (precision.rows() != precision.cols() || precision.rows() != h.size())
        throw shape_error("mvn: precision must be square and match the linear term");
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success)
        throw numeric_error("mvn: precision matrix is not positive definite");
    Eigen::VectorXd z(h.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    // x = P^{-1} h + U^{-1} z with P = L U and U = L^T.
    return llt.solve(h) + llt.matrixU().solve(z);
}

}  // namespace ctrp
