#pragma once

#include <cstdint>
#include <vector>

#include "ctrp/projection.hpp"
#include "ctrp/tensor.hpp"

namespace ctrp {

/// Closed-form embedding-dimension bounds. All logarithms are natural, and
/// the returned values are real; callers ceil to an integer dimension.

/// Tensor-wise bound: (4+2b) / (e^2/2 - e^3/3) * log n.
double q0_tensorwise(double eps, double beta, double n);

/// Mode-wise bound for an order-N tensor:
/// (4+2b) / (e^2/(3^N-1) - (3^{N+1}-2) e^3 / (3 (3^N-1)^3)) * log n.
/// Note: substituting N = 1 gives cubic coefficient 7/24 rather than the
/// tensor-wise 1/3, so the two bounds do not coincide at N = 1; both
/// formulas are implemented verbatim and no reconciliation is attempted.
double q0_modewise(double eps, double beta, double n, int order);

/// Hyper-contractivity bound, up to the user-supplied absolute constant C:
/// C e^-2 3^N (2+b)^{2N} log^{2N} n.
double q0_hypercontractive(double eps, double beta, double n, int order, double c = 1.0);

/// Low-rank projection bounds, up to absolute constants:
/// CP: C' e^-2 3^{N-1} (1+2/R)^N log^{2N}(n^{2+b}/2); TT drops the 3^{N-1}.
double q0_cp(double eps, double beta, double n, int order, int rank, double c = 1.0);
double q0_tt(double eps, double beta, double n, int order, int rank, double c = 1.0);

enum class BoundVariant { TensorWise, ModeWise, HyperContractive, Cp, Tt };

struct BoundQuery {
    BoundVariant variant = BoundVariant::TensorWise;
    double eps = 0.5;
    double beta = 0.2;
    double n = 1e4;
    int order = 1;
    int rank = 1;       // cp/tt only
    double c = 1.0;     // hypercontractive/cp/tt only
};

double evaluate_bound(const BoundQuery& q);

struct BoundCurveRow {
    double eps;
    double q0_tw;
    double q0_mw;
};

/// Tensor-wise and mode-wise bounds evaluated over an epsilon grid.
std::vector<BoundCurveRow> bound_curve(const std::vector<double>& eps_grid, double beta,
                                       double n, int order);

struct DistortionReport {
    int trials = 0;
    int all_pairs_preserved = 0;            // trials with every pair within (1 +/- eps)
    std::vector<double> pair_fractions;     // per-trial fraction of preserved pairs
    double mean_fraction = 0.0;
};

/// Draws `trials` independent scaled projections of the family and checks
/// every pairwise squared distance of `points` for preservation within
/// (1-eps, 1+eps). Trials run on pre-split substreams of `seed` and the
/// report folds them in trial order.
DistortionReport distortion_experiment(const std::vector<DenseTensor>& points,
                                       const ProjectionFamily& family, double eps, int trials,
                                       std::uint64_t seed);

}  // namespace ctrp
