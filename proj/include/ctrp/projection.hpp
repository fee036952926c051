#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctrp/rng.hpp"
#include "ctrp/tensor.hpp"

namespace ctrp {

/// A realized random projection: per-mode matrices H_m (q_m x p_m) for the
/// first R modes, plus an optional block tensor of shape
/// (q_{R+1},..,q_M, p_{R+1},..,p_N) contracting the remaining modes jointly.
/// Pure mode-wise projections have R = M = N and no block; pure tensor-wise
/// ones have R = 0. Every random entry lies in {-sqrt(psi), 0, +sqrt(psi)}.
///
/// When `scale_on_apply` is set, apply() multiplies by the isometry scale
/// 1/sqrt(prod of q_m over randomly drawn blocks), which makes
/// E||apply(x)||^2 = ||x||^2; identity-preserved modes contribute no factor.
/// Regression fitting leaves the scale off (the coefficient absorbs it); the
/// distance-preservation harness turns it on.
struct GtrpSpec {
    std::vector<int> input_shape;                 // p_1..p_N
    std::vector<Eigen::MatrixXd> mode_matrices;   // H_1..H_R
    std::optional<DenseTensor> tensor_block;      // absent iff R == N
    double psi = 3.0;
    std::uint64_t seed = 0;
    bool scale_on_apply = false;
    std::vector<int> preserve_modes;              // 0-based modes held at identity

    int mode_wise_count() const { return static_cast<int>(mode_matrices.size()); }
    std::vector<int> output_shape() const;
    bool is_preserved(int mode) const;
    void validate() const;
};

/// One i.i.d. draw from the sparse three-point law: +sqrt(psi) and
/// -sqrt(psi) each with probability 1/(2 psi), 0 otherwise. psi = 1 is the
/// Rademacher case (zero never drawn); larger psi is sparser.
double sample_projection_entry(double psi, RngStream& rng);
std::vector<double> sample_projection_entries(std::int64_t count, double psi, RngStream& rng);

/// Builds a projection with R mode-wise matrices and, when M > R, one block
/// tensor contracting modes R+1..N to output modes R+1..M. Deterministic
/// given the seed; preserved modes (subset of the first R, 0-based) receive
/// exact identity matrices and must keep q_m == p_m.
GtrpSpec build_gtrp(const std::vector<int>& input_shape, const std::vector<int>& output_shape,
                    int mode_wise_count, double psi, std::uint64_t seed,
                    const std::vector<int>& preserve_modes = {}, bool scale_on_apply = false);

/// Applies the projection; output shape (q_1,..,q_M), linear in x.
DenseTensor apply(const GtrpSpec& spec, const DenseTensor& x);

/// The factor apply() uses when scale_on_apply is set.
double isometry_scale(const GtrpSpec& spec);

/// Compressed-to-original parameter ratio q(M)/p(N), in (0, 1] for genuine
/// compressions.
double compression_rate(const GtrpSpec& spec);

/// Low-rank projections of a 2-mode tensor into a q1-vector: entry i is the
/// scalar product of x with an independently drawn rank-`rank` tensor. The
/// tensor-train variant with 2 cores coincides entrywise with the CP variant
/// when built from the same seed, because 2-mode cores form a rank-D sum of
/// outer products.
Eigen::VectorXd apply_cprp(const DenseTensor& x, int rank, int q1, double psi, std::uint64_t seed);
Eigen::VectorXd apply_ttrp(const DenseTensor& x, int rank, int q1, double psi, std::uint64_t seed);

/// Shape-level description of a projection; realized specs draw fresh
/// entries from per-use seeds.
struct ProjectionFamily {
    std::vector<int> input_shape;
    std::vector<int> output_shape;
    int mode_wise_count = 0;
    double psi = 3.0;
    std::vector<int> preserve_modes;

    GtrpSpec realize(std::uint64_t seed, bool scale_on_apply = false) const {
        return build_gtrp(input_shape, output_shape, mode_wise_count, psi, seed, preserve_modes,
                          scale_on_apply);
    }
};

}  // namespace ctrp
