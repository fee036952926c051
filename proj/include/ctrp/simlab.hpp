#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctrp/ensemble.hpp"
#include "ctrp/tensor.hpp"

namespace ctrp {

/// Binary coefficient patterns for the synthetic studies. The geometric
/// parameters (radii, band widths, quadrant) are explicit choices:
///   Circle: annulus around the center with radii 0.25 and 0.4 of the
///           smaller side; Cross: union of a centered horizontal and a
///           centered vertical band of width ceil(p/10); Line: the
///           horizontal band alone; Block: the upper-left quadrant;
///   Unstructured: i.i.d. Bernoulli(sparsity) entries (sparsity = fraction
///           of ones).
enum class CoefficientPattern { Circle, Cross, Line, Block, Unstructured };

enum class ProjectionKind { TensorWise, ModeWise };

struct ScenarioConfig {
    CoefficientPattern pattern = CoefficientPattern::Cross;
    double sparsity = 0.5;              // Unstructured only
    std::vector<int> shape = {20, 20};  // 2-mode coefficient
    int n_train = 1000;
    int n_test = 500;
    double sigma = 1.0;
    double mu0 = 0.0;
    double compression = 0.36;          // r = q(M)/p(N)
    double psi = 3.0;
    ProjectionKind projection = ProjectionKind::ModeWise;
    std::vector<int> preserve_modes;    // 0-based, mode-wise only
    int members = 10;
    std::uint64_t seed = 1;
    PriorSpec prior;
    McmcConfig mcmc;
    ZetaUpdate zeta_update = ZetaUpdate::Metropolized;
    std::vector<double> quantile_probs = {0.05, 0.5, 0.95};
};

/// Deterministic pattern construction; the stream is consumed only by the
/// unstructured pattern. Structured patterns need shape >= 5x5.
DenseTensor make_coefficient(CoefficientPattern pattern, const std::vector<int>& shape,
                             double sparsity, RngStream& rng);

/// y_j = mu0 + <b0, X_j> + sigma * eps_j with standard-normal covariates.
std::pair<std::vector<DenseTensor>, Eigen::VectorXd> generate_dataset(const DenseTensor& b0, int n,
                                                                      double sigma, double mu0,
                                                                      RngStream& rng);

/// Squared distance of each response from the test-set mean.
Eigen::VectorXd distance_to_mean(const Eigen::VectorXd& y_test);

/// Root mean square error of one response across the per-projection point
/// predictions.
double rmse_across_projections(double y, const Eigen::VectorXd& member_predictions);

struct MseDecomposition {
    double mse = 0.0;
    double variance_share = 0.0;
    double bias2_share = 0.0;
};

/// Exact split of the per-point MSE over projections into the prediction
/// variance and the squared bias of the mean prediction; shares sum to 1.
MseDecomposition bias_variance_decomposition(double y, const Eigen::VectorXd& member_predictions);

/// Performance per cost: 1 / (rmse * cost_hours).
double efficiency_score(double rmse, double cost_hours);

/// Maps the compression rate to per-mode output sizes. Mode-wise 2-mode
/// projections use q_m = round(p_m * sqrt(r)); with one preserved mode the
/// other mode carries the whole rate (q = round(p * r)); tensor-wise uses a
/// single q_1 = round(r * p(N)). All sizes are clamped to >= 1.
std::vector<int> derive_output_shape(const std::vector<int>& shape, double compression,
                                     ProjectionKind kind, const std::vector<int>& preserve_modes);

struct ScenarioPoint {
    double y = 0.0;
    double distance = 0.0;
    double pooled_mean = 0.0;
    double rmse = 0.0;
    double variance_share = 0.0;
    double bias2_share = 0.0;
    Eigen::VectorXd member_means;
    std::vector<double> quantiles;
};

struct ScenarioReport {
    std::vector<ScenarioPoint> points;
    double mean_rmse = 0.0;
    double fit_cpu_hours = 0.0;
    double efficiency = 0.0;
    Eigen::VectorXd weights;
    std::string content_hash;
};

/// End to end: pattern -> data -> L independent projections -> chains ->
/// model averaging -> point metrics. Reproducible from the config seed;
/// the report carries a content hash over the config echo and results.
ScenarioReport run_scenario(const ScenarioConfig& config);

}  // namespace ctrp
