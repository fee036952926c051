#include "ctrp/simlab.hpp"

#include <cmath>
#include <ctime>

#include "ctrp/errors.hpp"
#include "ctrp/io.hpp"
#include "ctrp/parallel.hpp"

namespace ctrp {

namespace {

int band_low(int p, int width) { return (p - width) / 2; }

}  // namespace

DenseTensor make_coefficient(CoefficientPattern pattern, const std::vector<int>& shape,
                             double sparsity, RngStream& rng) {
    if (shape.size() != 2) throw shape_error("coefficient pattern: 2-mode shapes only");
    const int p1 = shape[0], p2 = shape[1];
    DenseTensor out(shape);

    if (pattern == CoefficientPattern::Unstructured) {
        if (!(sparsity > 0.0 && sparsity < 1.0))
            throw parameter_error("coefficient pattern: sparsity must lie in (0,1)");
        for (std::int64_t i = 0; i < out.size(); ++i) out[i] = rng.uniform01() < sparsity ? 1.0 : 0.0;
        return out;
    }
    if (p1 < 5 || p2 < 5) throw shape_error("coefficient pattern: structured patterns need shape >= 5x5");

    const int w1 = (p1 + 9) / 10;
    const int w2 = (p2 + 9) / 10;
    const int r1lo = band_low(p1, w1), r2lo = band_low(p2, w2);
    const double cx = p1 / 2.0, cy = p2 / 2.0;
    const double radius_ref = static_cast<double>(std::min(p1, p2));

    for (int j = 0; j < p2; ++j) {
        for (int i = 0; i < p1; ++i) {
            bool on = false;
            const bool in_rows = i >= r1lo && i < r1lo + w1;
            const bool in_cols = j >= r2lo && j < r2lo + w2;
            switch (pattern) {
                case CoefficientPattern::Circle: {
                    const double dx = (i + 0.5) - cx, dy = (j + 0.5) - cy;
                    const double d = std::sqrt(dx * dx + dy * dy);
                    on = d >= 0.25 * radius_ref && d <= 0.4 * radius_ref;
                    break;
                }
                case CoefficientPattern::Cross:
                    on = in_rows || in_cols;
                    break;
                case CoefficientPattern::Line:
                    on = in_rows;
                    break;
                case CoefficientPattern::Block:
                    on = i < (p1 + 1) / 2 && j < (p2 + 1) / 2;
                    break;
                case CoefficientPattern::Unstructured:
                    break;
            }
            const int idx[2] = {i, j};
            out.at(idx) = on ? 1.0 : 0.0;
        }
    }
    return out;
}

std::pair<std::vector<DenseTensor>, Eigen::VectorXd> generate_dataset(const DenseTensor& b0, int n,
                                                                      double sigma, double mu0,
                                                                      RngStream& rng) {
    if (n < 1) throw parameter_error("dataset: need at least one observation");
    if (sigma < 0.0) throw parameter_error("dataset: sigma must be nonnegative");
    std::vector<DenseTensor> x;
    x.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd y(n);
    for (int j = 0; j < n; ++j) {
        DenseTensor xj(b0.shape());
        for (std::int64_t i = 0; i < xj.size(); ++i) xj[i] = rng.normal();
        y(j) = mu0 + inner(b0, xj) + sigma * rng.normal();
        x.push_back(std::move(xj));
    }
    return {std::move(x), std::move(y)};
}

Eigen::VectorXd distance_to_mean(const Eigen::VectorXd& y_test) {
    const double mean = y_test.mean();
    return (y_test.array() - mean).square();
}

double rmse_across_projections(double y, const Eigen::VectorXd& member_predictions) {
    if (member_predictions.size() < 1) throw parameter_error("rmse: need at least one prediction");
    return std::sqrt((member_predictions.array() - y).square().mean());
}

MseDecomposition bias_variance_decomposition(double y, const Eigen::VectorXd& member_predictions) {
    if (member_predictions.size() < 2)
        throw parameter_error("mse decomposition: need at least two projections");
    MseDecomposition out;
    const double mean = member_predictions.mean();
    const double variance = (member_predictions.array() - mean).square().mean();
    const double bias2 = (y - mean) * (y - mean);
    out.mse = (member_predictions.array() - y).square().mean();
    if (out.mse > 0.0) {
        out.variance_share = variance / out.mse;
        out.bias2_share = bias2 / out.mse;
    }
    return out;
}

double efficiency_score(double rmse, double cost_hours) {
    if (!(rmse > 0.0) || !(cost_hours > 0.0))
        throw parameter_error("efficiency score: rmse and cost must be positive");
    return 1.0 / (rmse * cost_hours);
}

std::vector<int> derive_output_shape(const std::vector<int>& shape, double compression,
                                     ProjectionKind kind, const std::vector<int>& preserve_modes) {
    if (!(compression > 0.0 && compression <= 1.0))
        throw parameter_error("projection: compression rate must lie in (0,1]");
    double total = 1.0;
    for (int p : shape) total *= p;

    if (kind == ProjectionKind::TensorWise)
        return {std::max(1, static_cast<int>(std::lround(compression * total)))};

    if (shape.size() != 2) throw shape_error("projection: rate mapping defined for 2-mode shapes");
    std::vector<int> q(2);
    if (preserve_modes.empty()) {
        for (int m = 0; m < 2; ++m)
            q[static_cast<std::size_t>(m)] =
                std::max(1, static_cast<int>(std::lround(shape[static_cast<std::size_t>(m)] *
                                                         std::sqrt(compression))));
    } else if (preserve_modes.size() == 1) {
        const int kept = preserve_modes.front();
        const int other = 1 - kept;
        q[static_cast<std::size_t>(kept)] = shape[static_cast<std::size_t>(kept)];
        q[static_cast<std::size_t>(other)] =
            std::max(1, static_cast<int>(std::lround(shape[static_cast<std::size_t>(other)] * compression)));
    } else {
        throw parameter_error("projection: at most one preserved mode for 2-mode rate mapping");
    }
    return q;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
    if (config.n_train < 1 || config.n_test < 1)
        throw parameter_error("scenario: train and test sizes must be >= 1");

    RngStream pattern_rng = RngStream::substream(config.seed, 0);
    const DenseTensor b0 = make_coefficient(config.pattern, config.shape, config.sparsity, pattern_rng);

    RngStream data_rng = RngStream::substream(config.seed, 1);
    auto [x_all, y_all] =
        generate_dataset(b0, config.n_train + config.n_test, config.sigma, config.mu0, data_rng);

    std::vector<DenseTensor> x_train(x_all.begin(), x_all.begin() + config.n_train);
    std::vector<DenseTensor> x_test(x_all.begin() + config.n_train, x_all.end());
    const Eigen::VectorXd y_train = y_all.head(config.n_train);
    const Eigen::VectorXd y_test = y_all.tail(config.n_test);

    EnsembleConfig ens;
    ens.family.input_shape = config.shape;
    ens.family.output_shape = derive_output_shape(config.shape, config.compression, config.projection,
                                                  config.preserve_modes);
    ens.family.mode_wise_count =
        config.projection == ProjectionKind::ModeWise ? static_cast<int>(config.shape.size()) : 0;
    ens.family.psi = config.psi;
    ens.family.preserve_modes = config.preserve_modes;
    ens.members = config.members;
    ens.prior = config.prior;
    ens.mcmc = config.mcmc;
    ens.seed = RngStream::substream(config.seed, 2).next_u64();
    ens.zeta_update = config.zeta_update;

    const std::clock_t t0 = std::clock();
    const EnsembleModel model = fit_ensemble(x_train, y_train, ens);
    const double cpu_hours =
        static_cast<double>(std::clock() - t0) / static_cast<double>(CLOCKS_PER_SEC) / 3600.0;

    const std::uint64_t predict_seed = RngStream::substream(config.seed, 3).next_u64();
    const Eigen::VectorXd distances = distance_to_mean(y_test);

    ScenarioReport report;
    report.points.resize(static_cast<std::size_t>(config.n_test));
    parallel_for(config.n_test, [&](int j) {
        const PredictiveSummary summary =
            predict_point(model, x_test[static_cast<std::size_t>(j)],
                          RngStream::substream(predict_seed, static_cast<std::uint64_t>(j)).next_u64());
        ScenarioPoint& pt = report.points[static_cast<std::size_t>(j)];
        pt.y = y_test(j);
        pt.distance = distances(j);
        pt.pooled_mean = summary.pooled_mean();
        pt.member_means = summary.member_means();
        pt.rmse = rmse_across_projections(pt.y, pt.member_means);
        if (config.members >= 2) {
            const MseDecomposition dec = bias_variance_decomposition(pt.y, pt.member_means);
            pt.variance_share = dec.variance_share;
            pt.bias2_share = dec.bias2_share;
        }
        pt.quantiles.reserve(config.quantile_probs.size());
        for (double p : config.quantile_probs) pt.quantiles.push_back(summary.quantile(p));
    });

    double rmse_sum = 0.0;
    for (const auto& pt : report.points) rmse_sum += pt.rmse;
    report.mean_rmse = rmse_sum / static_cast<double>(config.n_test);
    report.fit_cpu_hours = cpu_hours;
    report.efficiency = cpu_hours > 0.0 ? efficiency_score(report.mean_rmse, cpu_hours) : 0.0;
    report.weights = model.weights;

    std::string payload;
    payload += std::to_string(config.seed) + "|" + std::to_string(static_cast<int>(config.pattern)) +
               "|" + std::to_string(static_cast<int>(config.projection)) + "|" +
               format_double(config.compression) + "|" + format_double(config.psi) + "|" +
               std::to_string(config.members) + "|" + std::to_string(config.n_train) + "|" +
               std::to_string(config.n_test) + "\n";
    for (const auto& pt : report.points)
        payload += format_double(pt.y) + "," + format_double(pt.pooled_mean) + "," +
                   format_double(pt.rmse) + "\n";
    report.content_hash = sha1_hex(payload);
    return report;
}

}  // namespace ctrp
