#include "ctrp/projection.hpp"

#include <algorithm>
#include <cmath>

#include "ctrp/errors.hpp"

namespace ctrp {

std::vector<int> GtrpSpec::output_shape() const {
    std::vector<int> q;
    for (const auto& h : mode_matrices) q.push_back(static_cast<int>(h.rows()));
    if (tensor_block) {
        const int contracted = static_cast<int>(input_shape.size()) - mode_wise_count();
        const int out_modes = tensor_block->order() - contracted;
        for (int m = 0; m < out_modes; ++m) q.push_back(tensor_block->dim(m));
    }
    return q;
}

bool GtrpSpec::is_preserved(int mode) const {
    return std::find(preserve_modes.begin(), preserve_modes.end(), mode) != preserve_modes.end();
}

void GtrpSpec::validate() const {
    const int n = static_cast<int>(input_shape.size());
    const int r = mode_wise_count();
    if (n < 1) throw shape_error("projection: empty input shape");
    if (r > n) throw shape_error("projection: more mode matrices than modes");
    if (r == n && tensor_block) throw shape_error("projection: block tensor present but no modes left");
    if (r < n && !tensor_block) throw shape_error("projection: modes beyond the mode-wise range need a block tensor");
    for (int m = 0; m < r; ++m)
        if (mode_matrices[static_cast<std::size_t>(m)].cols() != input_shape[static_cast<std::size_t>(m)])
            throw shape_error("projection: mode matrix columns must match the input mode size");
    if (tensor_block) {
        const int contracted = n - r;
        const int out_modes = tensor_block->order() - contracted;
        if (out_modes < 1) throw shape_error("projection: block tensor must produce at least one mode");
        for (int m = 0; m < contracted; ++m)
            if (tensor_block->dim(out_modes + m) != input_shape[static_cast<std::size_t>(r + m)])
                throw shape_error("projection: block tensor trailing modes must match input");
    }
    if (psi < 1.0) throw parameter_error("projection: psi must be >= 1");
}

double sample_projection_entry(double psi, RngStream& rng) {
    const double u = rng.uniform01();
    const double half = 0.5 / psi;
    if (u < half) return std::sqrt(psi);
    if (u < 2.0 * half) return -std::sqrt(psi);
    return 0.0;
}

std::vector<double> sample_projection_entries(std::int64_t count, double psi, RngStream& rng) {
    if (psi < 1.0) throw parameter_error("projection entries: psi must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (auto& v : out) v = sample_projection_entry(psi, rng);
    return out;
}

GtrpSpec build_gtrp(const std::vector<int>& input_shape, const std::vector<int>& output_shape,
                    int mode_wise_count, double psi, std::uint64_t seed,
                    const std::vector<int>& preserve_modes, bool scale_on_apply) {
    const int n = static_cast<int>(input_shape.size());
    const int m_out = static_cast<int>(output_shape.size());
    if (mode_wise_count < 0 || mode_wise_count > n)
        throw shape_error("build_gtrp: mode-wise count out of range");
    if (m_out < mode_wise_count || (mode_wise_count < n && m_out < mode_wise_count + 1) || m_out > n)
        throw shape_error("build_gtrp: output order incompatible with mode-wise count");
    if (mode_wise_count == n && m_out != n)
        throw shape_error("build_gtrp: pure mode-wise projection must keep the tensor order");
    if (psi < 1.0) throw parameter_error("build_gtrp: psi must be >= 1");
    for (int q : output_shape)
        if (q < 1) throw shape_error("build_gtrp: output dims must be positive");
    for (int m : preserve_modes) {
        if (m < 0 || m >= mode_wise_count)
            throw shape_error("build_gtrp: preserved modes must lie in the mode-wise range");
        if (output_shape[static_cast<std::size_t>(m)] != input_shape[static_cast<std::size_t>(m)])
            throw shape_error("build_gtrp: preserved modes must keep their size");
    }

    GtrpSpec spec;
    spec.input_shape = input_shape;
    spec.psi = psi;
    spec.seed = seed;
    spec.scale_on_apply = scale_on_apply;
    spec.preserve_modes = preserve_modes;

    RngStream rng(seed);
    for (int m = 0; m < mode_wise_count; ++m) {
        const int p = input_shape[static_cast<std::size_t>(m)];
        const int q = output_shape[static_cast<std::size_t>(m)];
        if (spec.is_preserved(m)) {
            spec.mode_matrices.push_back(Eigen::MatrixXd::Identity(q, p));
            continue;
        }
        Eigen::MatrixXd h(q, p);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < q; ++i) h(i, j) = sample_projection_entry(psi, rng);
        spec.mode_matrices.push_back(std::move(h));
    }
    if (mode_wise_count < n) {
        std::vector<int> block_shape(output_shape.begin() + mode_wise_count, output_shape.end());
        for (int m = mode_wise_count; m < n; ++m) block_shape.push_back(input_shape[static_cast<std::size_t>(m)]);
        DenseTensor block(block_shape);
        for (std::int64_t i = 0; i < block.size(); ++i) block[i] = sample_projection_entry(psi, rng);
        spec.tensor_block = std::move(block);
    }
    spec.validate();
    return spec;
}

double isometry_scale(const GtrpSpec& spec) {
    double q_random = 1.0;
    for (int m = 0; m < spec.mode_wise_count(); ++m)
        if (!spec.is_preserved(m)) q_random *= static_cast<double>(spec.mode_matrices[static_cast<std::size_t>(m)].rows());
    if (spec.tensor_block) {
        const int contracted = static_cast<int>(spec.input_shape.size()) - spec.mode_wise_count();
        const int out_modes = spec.tensor_block->order() - contracted;
        for (int m = 0; m < out_modes; ++m) q_random *= static_cast<double>(spec.tensor_block->dim(m));
    }
    return 1.0 / std::sqrt(q_random);
}

DenseTensor apply(const GtrpSpec& spec, const DenseTensor& x) {
    spec.validate();
    if (x.shape() != spec.input_shape) throw shape_error("apply: input shape mismatch");

    DenseTensor cur = x;
    for (int m = 0; m < spec.mode_wise_count(); ++m)
        cur = mode_product(cur, spec.mode_matrices[static_cast<std::size_t>(m)], m);
    if (spec.tensor_block) {
        const int from = spec.mode_wise_count();
        const int to = x.order() - 1;
        const int out_modes = spec.tensor_block->order() - (to - from + 1);
        cur = mode_range_product(cur, *spec.tensor_block, from, to, out_modes);
    }
    if (spec.scale_on_apply) {
        const double s = isometry_scale(spec);
        for (std::int64_t i = 0; i < cur.size(); ++i) cur[i] *= s;
    }
    return cur;
}

double compression_rate(const GtrpSpec& spec) {
    double p = 1.0, q = 1.0;
    for (int d : spec.input_shape) p *= d;
    for (int d : spec.output_shape()) q *= d;
    return q / p;
}

namespace {

// Shared kernel: entry i is sum_d a1[:,d]' X a2[:,d] with fresh factor
// matrices per i. The CP and 2-core tensor-train constructions of a matrix
// projection both reduce to this form.
Eigen::VectorXd low_rank_projection(const DenseTensor& x, int rank, int q1, double psi,
                                    std::uint64_t seed) {
    if (x.order() != 2) throw shape_error("low-rank projection: input must be 2-mode");
    if (rank < 1 || q1 < 1) throw parameter_error("low-rank projection: rank and q1 must be >= 1");
    if (psi < 1.0) throw parameter_error("low-rank projection: psi must be >= 1");

    const int p1 = x.dim(0), p2 = x.dim(1);
    Eigen::Map<const Eigen::MatrixXd> xm(x.data(), p1, p2);
    Eigen::VectorXd out(q1);
    RngStream rng(seed);
    Eigen::MatrixXd a1(p1, rank), a2(p2, rank);
    for (int i = 0; i < q1; ++i) {
        for (int d = 0; d < rank; ++d)
            for (int j = 0; j < p1; ++j) a1(j, d) = sample_projection_entry(psi, rng);
        for (int d = 0; d < rank; ++d)
            for (int j = 0; j < p2; ++j) a2(j, d) = sample_projection_entry(psi, rng);
        double v = 0.0;
        for (int d = 0; d < rank; ++d) v += a1.col(d).dot(xm * a2.col(d));
        out(i) = v;
    }
    return out;
}

}  // namespace

Eigen::VectorXd apply_cprp(const DenseTensor& x, int rank, int q1, double psi, std::uint64_t seed) {
    return low_rank_projection(x, rank, q1, psi, seed);
}

Eigen::VectorXd apply_ttrp(const DenseTensor& x, int rank, int q1, double psi, std::uint64_t seed) {
    return low_rank_projection(x, rank, q1, psi, seed);
}

}  // namespace ctrp
