#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctrp/distributions.hpp"
#include "ctrp/rng.hpp"
#include "ctrp/tensor.hpp"

namespace ctrp {

/// Regression data after projection: one compressed covariate tensor per
/// observation (all the same shape) and the responses.
struct CompressedDataset {
    std::vector<DenseTensor> x;
    Eigen::VectorXd y;

    int size() const { return static_cast<int>(y.size()); }
    void validate() const;
};

/// Hierarchical shrinkage prior on the low-rank coefficient representation.
/// Margin vectors gamma[d][m] are Gaussian with scale tau * zeta_d * W; the
/// local scales w are exponential with Gamma-distributed rate parameters
/// lambda, zeta lives on the simplex with Dirichlet(alpha) prior, and tau
/// carries a Gamma(a_tau, b_tau) prior (the kernel its full conditional
/// integrates against).
struct ParafacPriorConfig {
    int rank = 5;
    double alpha = 1.0 / 25.0;  // rank^-2 under the default rank
    double a_tau = 3.0, b_tau = 100.0;
    double a_lambda = 20.0, b_lambda = 2.0;
    double a_sigma = 3.0, b_sigma = 1.0;
    double sigma2_mu = 1.0;

    void validate() const;
};

/// Full latent state of the hierarchical sampler.
struct ParafacState {
    MarginSet margins;                            // gamma[d][m], lengths q_m
    Eigen::VectorXd zeta;                         // simplex over components
    double tau = 1.0;
    std::vector<std::vector<double>> lambda;      // [d][m]
    std::vector<std::vector<Eigen::VectorXd>> w;  // [d][m](j)
    double mu = 0.0;
    double sigma2 = 1.0;

    DenseTensor coefficient() const { return parafac_compose(margins); }
    void validate() const;
};

/// Natural parameters of a Gaussian full conditional: x ~ N(P^{-1} h, P^{-1}).
struct MvnNatural {
    Eigen::MatrixXd precision;
    Eigen::VectorXd linear;
};

// Full-conditional parameter maps. Each is a deterministic function of the
// state/data, so they unit-test directly; the sweep pipes them into the
// distribution samplers. Dimensions throughout are the compressed q_m.

/// zeta_d | rest: GIG(alpha - sum_m q_m / 2, 0, sum_m gamma' W^{-1} gamma / tau).
GigParams fc_zeta(int d, const ParafacState& s, const ParafacPriorConfig& c);

/// tau | rest: GIG(a_tau - D sum_m q_m / 2, 2 b_tau,
///                 sum_d sum_m gamma' W^{-1} gamma / zeta_d).
GigParams fc_tau(const ParafacState& s, const ParafacPriorConfig& c);

/// lambda_{d,m} | rest: Gamma(a_lambda + q_m,
///                            sum_j |gamma_{m,j}| / sqrt(tau zeta_d) + b_lambda).
std::pair<double, double> fc_lambda(int d, int m, const ParafacState& s, const ParafacPriorConfig& c);

/// w_{d,m,j} | rest: GIG(1/2, lambda^2, gamma^2 / (tau zeta_d)).
GigParams fc_w(int d, int m, int j, const ParafacState& s);

/// gamma_{d,m} | rest in natural form:
///   P = sum_t psi psi' / sigma2 + W^{-1} / (tau zeta_d),
///   h = sum_t (y_t - mu - R_t) psi / sigma2,
/// with psi the partial contraction of x_t skipping mode m and R_t the
/// contribution of the other components.
MvnNatural fc_margin(int d, int m, const ParafacState& s, const CompressedDataset& data);

/// sigma2 | rest: InverseGamma(a_sigma + T/2, b_sigma + RSS/2).
std::pair<double, double> fc_sigma2(const ParafacState& s, const CompressedDataset& data,
                                    const ParafacPriorConfig& c);

/// mu | rest: Normal(mean, var) with var = (T/sigma2 + 1/sigma2_mu)^{-1}.
std::pair<double, double> fc_mu(const ParafacState& s, const CompressedDataset& data,
                                const ParafacPriorConfig& c);

/// How the simplex-constrained zeta block is advanced. The component-wise
/// GIG conditionals are stated for an unconstrained vector, so renormalizing
/// their draws onto the simplex is an approximation of the constrained
/// conditional; the Metropolized variant uses the renormalized draw as an
/// independence proposal and accept/rejects so the chain targets the
/// constrained law exactly. Metropolized is the default; see README.
enum class ZetaUpdate { Renormalize, Metropolized };

struct McmcConfig {
    int iterations = 1000;
    int burn_in = 200;
    int thin = 1;

    void validate() const;
    int retained() const { return (iterations - burn_in) / thin; }
};

struct ChainDraw {
    DenseTensor coefficient;
    double mu = 0.0;
    double sigma2 = 1.0;
    std::optional<MarginSet> margins;  // kept for the hierarchical prior
};

/// Posterior means of the top-level scales, used as the conditioning point
/// of the hierarchical prior density in model-weight estimation.
struct ParafacScaleSummary {
    double tau = 1.0;
    Eigen::VectorXd zeta;
    std::vector<std::vector<Eigen::VectorXd>> w;  // [d][m]
};

struct ChainOutput {
    std::vector<ChainDraw> draws;
    int iterations = 0;
    int burn_in = 0;
    int thin = 1;
    std::uint64_t seed = 0;
    std::string projection_id;
    std::optional<ParafacScaleSummary> scale_summary;
};

/// Draws a complete state from the prior (the initialization used by the
/// chain and the reference distribution of the sampler-correctness tests).
ParafacState draw_parafac_prior(const ParafacPriorConfig& c, const std::vector<int>& shape,
                                RngStream& rng);

/// One full sweep in fixed order: margins (component-major, mode-minor),
/// zeta, tau, lambda, w, sigma2, mu.
void parafac_sweep(ParafacState& s, const CompressedDataset& data, const ParafacPriorConfig& c,
                   ZetaUpdate zeta_update, RngStream& rng);

/// Replaces the responses with draws from the likelihood at the current
/// state (used by prior-predictive checks and sampler-correctness tests).
void redraw_responses(CompressedDataset& data, const ParafacState& s, RngStream& rng);

ChainOutput run_parafac_chain(const CompressedDataset& data, const ParafacPriorConfig& c,
                              const McmcConfig& mcmc, std::uint64_t seed,
                              ZetaUpdate zeta_update = ZetaUpdate::Metropolized);

/// Separable Gaussian prior on the coefficient tensor: one symmetric PD
/// covariance per compressed mode. Under the canonical first-mode-fastest
/// vectorization the implied covariance of vec(B) is
/// kron(Sigma_M, ..., Sigma_1), i.e. Cov(B_i, B_j) = prod_m Sigma_m(i_m, j_m).
struct GaussianPriorConfig {
    std::vector<Eigen::MatrixXd> mode_covariances;
    double a_sigma = 3.0, b_sigma = 1.0;
    double sigma2_mu = 1.0;

    static GaussianPriorConfig identity(const std::vector<int>& shape, double scale = 1.0);
    void validate() const;
};

struct GaussianChainOptions {
    std::optional<double> fixed_sigma2;
    std::optional<double> fixed_mu;
};

/// Gibbs sampler cycling vec(B) | rest, sigma2 | rest, mu | rest. With an
/// identity projection this is the uncompressed tensor-regression baseline:
/// same code path, identity projection spec.
ChainOutput run_gaussian_chain(const CompressedDataset& data, const GaussianPriorConfig& c,
                               const McmcConfig& mcmc, std::uint64_t seed,
                               const GaussianChainOptions& options = {});

/// kron(Sigma_M, ..., Sigma_1): prior covariance of the canonical vec(B).
Eigen::MatrixXd separable_covariance(const std::vector<Eigen::MatrixXd>& mode_covariances);

}  // namespace ctrp
