#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ctrp/gibbs.hpp"
#include "ctrp/projection.hpp"

namespace ctrp {

enum class PriorFamily { Parafac, Gaussian };

/// Prior used by every ensemble member. For the Gaussian family an empty
/// mode_covariances list means identity covariances of the compressed shape.
struct PriorSpec {
    PriorFamily family = PriorFamily::Parafac;
    ParafacPriorConfig parafac;
    GaussianPriorConfig gaussian;
};

struct EnsembleMember {
    GtrpSpec spec;
    ChainOutput chain;
    Eigen::MatrixXd compressed_rows;  // T x q(M), canonical vec of the compressed covariates
};

/// Model average over independent projections of one shared configuration
/// (input shape, output shape, prior). Heterogeneous members are rejected.
struct EnsembleModel {
    std::vector<EnsembleMember> members;
    Eigen::VectorXd weights;      // simplex
    Eigen::VectorXd etas;         // fitted reverse-logistic offsets, etas(0) = 0
    Eigen::VectorXd responses;    // training responses
    PriorSpec prior;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(members.size()); }
    void validate() const;
};

/// Log of likelihood(y | member projection, theta) * prior(theta), up to
/// model-independent constants. For the hierarchical prior this conditions
/// the margin density on the member's fitted top-level scales (a documented
/// surrogate for the intractable marginal over the scales).
double log_unnormalized_posterior(const EnsembleMember& member, const ChainDraw& theta,
                                  const Eigen::VectorXd& y, const PriorSpec& prior);

/// h[l](s, k) = log_unnormalized_posterior of member k at draw s of member
/// l, for every retained draw (subsampled to the shortest chain). Matches
/// the per-draw op exactly but batches the likelihood work.
std::vector<Eigen::MatrixXd> cross_evaluations(const EnsembleModel& model, const Eigen::VectorXd& y,
                                               const PriorSpec& prior);

struct RlrResult {
    Eigen::VectorXd weights;
    Eigen::VectorXd etas;
    int iterations = 0;
    double grad_norm = 0.0;
};

/// Reverse logistic regression on pooled cross-evaluations.
/// h[l] is an S x L matrix with h[l](s, k) = log unnormalized density of
/// model k at draw s of model l; unequal draw counts are subsampled to the
/// minimum. Maximizes the concave reverse-logistic objective by damped
/// Newton with eta_1 = 0, stopping at gradient max-norm 1e-8 (cap 500
/// iterations); weights are softmax(-eta).
RlrResult rlr_weights(const std::vector<Eigen::MatrixXd>& h);

/// One predictive draw per retained posterior draw:
/// y_s ~ N(mu_s + <proj(x_new), B_s>, sigma2_s).
Eigen::VectorXd predictive_draws(const EnsembleMember& member, const DenseTensor& x_new,
                                 RngStream& rng);

/// Per-point predictive summary; draws come from a substream of `seed` per
/// member, so results are independent of evaluation order.
struct PredictiveSummary {
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> member_draws;

    double pooled_mean() const;
    Eigen::VectorXd member_means() const;
    /// Left-continuous weighted-ECDF inversion: q(p) = inf{t : F(t) >= p}.
    double quantile(double prob) const;
};

PredictiveSummary predict_point(const EnsembleModel& model, const DenseTensor& x_new,
                                std::uint64_t seed);

double pooled_point_forecast(const EnsembleModel& model, const DenseTensor& x_new,
                             std::uint64_t seed);
std::vector<double> pooled_quantile(const EnsembleModel& model, const DenseTensor& x_new,
                                    std::span<const double> probs, std::uint64_t seed);

/// Shared projection configuration for the ensemble members.
struct EnsembleConfig {
    ProjectionFamily family;
    int members = 10;
    PriorSpec prior;
    McmcConfig mcmc;
    std::uint64_t seed = 1;
    ZetaUpdate zeta_update = ZetaUpdate::Metropolized;
};

/// Fits one chain per independent projection (members run concurrently on
/// pre-split streams: spec seeds at substream l, chain seeds at substream
/// L + l) and estimates the model weights by reverse logistic regression.
EnsembleModel fit_ensemble(const std::vector<DenseTensor>& x, const Eigen::VectorXd& y,
                           const EnsembleConfig& config);

}  // namespace ctrp
