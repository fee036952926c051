#include "ctrp/jl_bounds.hpp"

#include <cmath>

#include "ctrp/errors.hpp"
#include "ctrp/parallel.hpp"

namespace ctrp {

namespace {

void check_common(double eps, double beta, double n) {
    if (!(eps > 0.0 && eps < 1.0)) throw parameter_error("bound: eps must lie in (0,1)");
    if (!(beta > 0.0)) throw parameter_error("bound: beta must be positive");
    if (!(n >= 2.0)) throw parameter_error("bound: need at least two points");
}

}  // namespace

double q0_tensorwise(double eps, double beta, double n) {
    check_common(eps, beta, n);
    const double denom = eps * eps / 2.0 - eps * eps * eps / 3.0;
    if (denom <= 0.0) throw parameter_error("tensor-wise bound: nonpositive denominator");
    return (4.0 + 2.0 * beta) / denom * std::log(n);
}

double q0_modewise(double eps, double beta, double n, int order) {
    check_common(eps, beta, n);
    if (order < 1) throw parameter_error("mode-wise bound: order must be >= 1");
    const double t = std::pow(3.0, order) - 1.0;
    const double denom = eps * eps / t - (3.0 * std::pow(3.0, order) - 2.0) * eps * eps * eps / (3.0 * t * t * t);
    if (denom <= 0.0) throw parameter_error("mode-wise bound: nonpositive denominator");
    return (4.0 + 2.0 * beta) / denom * std::log(n);
}

double q0_hypercontractive(double eps, double beta, double n, int order, double c) {
    check_common(eps, beta, n);
    if (c <= 0.0) throw parameter_error("hyper-contractive bound: constant must be positive");
    return c / (eps * eps) * std::pow(3.0, order) * std::pow(2.0 + beta, 2 * order) *
           std::pow(std::log(n), 2 * order);
}

double q0_cp(double eps, double beta, double n, int order, int rank, double c) {
    check_common(eps, beta, n);
    if (rank < 1) throw parameter_error("cp bound: rank must be >= 1");
    if (c <= 0.0) throw parameter_error("cp bound: constant must be positive");
    const double lg = std::log(std::pow(n, 2.0 + beta) / 2.0);
    return c / (eps * eps) * std::pow(3.0, order - 1) * std::pow(1.0 + 2.0 / rank, order) *
           std::pow(lg, 2 * order);
}

double q0_tt(double eps, double beta, double n, int order, int rank, double c) {
    return q0_cp(eps, beta, n, order, rank, c) / std::pow(3.0, order - 1);
}

double evaluate_bound(const BoundQuery& q) {
    switch (q.variant) {
        case BoundVariant::TensorWise: return q0_tensorwise(q.eps, q.beta, q.n);
        case BoundVariant::ModeWise: return q0_modewise(q.eps, q.beta, q.n, q.order);
        case BoundVariant::HyperContractive: return q0_hypercontractive(q.eps, q.beta, q.n, q.order, q.c);
        case BoundVariant::Cp: return q0_cp(q.eps, q.beta, q.n, q.order, q.rank, q.c);
        case BoundVariant::Tt: return q0_tt(q.eps, q.beta, q.n, q.order, q.rank, q.c);
    }
    throw parameter_error("unknown bound variant");
}

std::vector<BoundCurveRow> bound_curve(const std::vector<double>& eps_grid, double beta,
                                       double n, int order) {
    std::vector<BoundCurveRow> rows;
    rows.reserve(eps_grid.size());
    for (double e : eps_grid)
        rows.push_back({e, q0_tensorwise(e, beta, n), q0_modewise(e, beta, n, order)});
    return rows;
}

DistortionReport distortion_experiment(const std::vector<DenseTensor>& points,
                                       const ProjectionFamily& family, double eps, int trials,
                                       std::uint64_t seed) {
    if (points.size() < 2) throw parameter_error("distortion: need at least two points");
    for (const auto& p : points)
        if (p.shape() != family.input_shape) throw shape_error("distortion: point shape mismatch");

    const int n = static_cast<int>(points.size());
    DistortionReport report;
    report.trials = trials;
    report.pair_fractions.assign(static_cast<std::size_t>(trials), 0.0);

    parallel_for(trials, [&](int trial) {
        GtrpSpec spec =
            build_gtrp(family.input_shape, family.output_shape, family.mode_wise_count, family.psi,
                       RngStream::substream(seed, static_cast<std::uint64_t>(trial)).next_u64(),
                       family.preserve_modes, /*scale_on_apply=*/true);
        std::vector<DenseTensor> images;
        images.reserve(points.size());
        for (const auto& p : points) images.push_back(apply(spec, p));

        std::int64_t preserved = 0, total = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                double d2 = 0.0, f2 = 0.0;
                d2 = (points[static_cast<std::size_t>(i)].vec() - points[static_cast<std::size_t>(j)].vec()).squaredNorm();
                f2 = (images[static_cast<std::size_t>(i)].vec() - images[static_cast<std::size_t>(j)].vec()).squaredNorm();
                ++total;
                if (f2 >= (1.0 - eps) * d2 && f2 <= (1.0 + eps) * d2) ++preserved;
            }
        }
        report.pair_fractions[static_cast<std::size_t>(trial)] =
            static_cast<double>(preserved) / static_cast<double>(total);
    });

    for (double f : report.pair_fractions) {
        report.mean_fraction += f;
        if (f == 1.0) ++report.all_pairs_preserved;
    }
    report.mean_fraction /= static_cast<double>(trials);
    return report;
}

}  // namespace ctrp
