#pragma once

#include <Eigen/Dense>

#include "ctrp/rng.hpp"

namespace ctrp {

/// Floor for variance-like quantities so full conditionals never degenerate
/// after underflow.
inline constexpr double kPositiveFloor = 1e-300;

/// Generalized inverse Gaussian parameters; density on x > 0 proportional to
/// x^(p-1) * exp(-(a*x + b/x)/2). Limiting cases: b = 0 with p > 0 is
/// Gamma(p, a/2); a = 0 with p < 0 is InverseGamma(-p, b/2).
struct GigParams {
    double p = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Log density (up to normalization) of the GIG law; -inf for x <= 0.
double gig_log_unnorm(double x, const GigParams& params);

/// Exact GIG draw. Limiting cases dispatch to the Gamma / InverseGamma
/// samplers; the interior case uses rejection from the two-sided
/// ratio-of-uniforms envelope [0, u_max] x [0, v_max], where u_max = sqrt(g(m))
/// at the density mode m and v_max = sup_x x*sqrt(g(x)), both closed-form.
double sample_gig(const GigParams& params, RngStream& rng);

/// Gamma(shape, rate) with mean shape/rate, via Marsaglia-Tsang squeeze.
double sample_gamma(double shape, double rate, RngStream& rng);
double gamma_log_unnorm(double x, double shape, double rate);

/// InverseGamma(shape, rate): 1/X with X ~ Gamma(shape, rate); mean rate/(shape-1).
double sample_inverse_gamma(double shape, double rate, RngStream& rng);
double inverse_gamma_log_unnorm(double x, double shape, double rate);

/// Dirichlet draw. The largest component is closed against the
/// left-to-right sum of the others, so `rest + x(imax) == 1.0` holds
/// bit-exactly in that reduction order and every component stays positive.
Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng);

/// Multivariate normal in natural parameterization: precision P and linear
/// term h, i.e. covariance P^{-1} and mean P^{-1} h. Solved by Cholesky;
/// the covariance is never formed.
Eigen::VectorXd sample_mvn_from_precision(const Eigen::VectorXd& h, const Eigen::MatrixXd& precision,
                                          RngStream& rng);

}  // namespace ctrp
