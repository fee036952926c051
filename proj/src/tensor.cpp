#include "ctrp/tensor.hpp"

#include <algorithm>
#include <numeric>

#include "ctrp/errors.hpp"

namespace ctrp {

std::int64_t shape_size(std::span<const int> shape) {
    std::int64_t n = 1;
    for (int p : shape) {
        if (p < 1) throw shape_error("tensor shape entries must be >= 1");
        n *= p;
    }
    return n;
}

DenseTensor::DenseTensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_size(shape_)), 0.0) {}

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != static_cast<std::int64_t>(data_.size()))
        throw shape_error("tensor data length does not match product of shape");
}

std::int64_t DenseTensor::linear_index(std::span<const int> idx) const {
    if (idx.size() != shape_.size()) throw shape_error("multi-index order mismatch");
    std::int64_t lin = 0, stride = 1;
    for (std::size_t m = 0; m < shape_.size(); ++m) {
        if (idx[m] < 0 || idx[m] >= shape_[m]) throw shape_error("multi-index out of range");
        lin += stride * idx[m];
        stride *= shape_[m];
    }
    return lin;
}

bool next_index(std::span<int> idx, std::span<const int> shape) {
    for (std::size_t m = 0; m < shape.size(); ++m) {
        if (++idx[m] < shape[m]) return true;
        idx[m] = 0;
    }
    return false;
}

DenseTensor mode_product(const DenseTensor& t, const Eigen::MatrixXd& h, int mode) {
    if (mode < 0 || mode >= t.order()) throw shape_error("mode_product: mode out of range");
    const int p = t.dim(mode);
    if (h.cols() != p) throw shape_error("mode_product: matrix columns must match tensor mode size");
    const int q = static_cast<int>(h.rows());

    std::int64_t inner_stride = 1;
    for (int m = 0; m < mode; ++m) inner_stride *= t.dim(m);
    std::int64_t outer = 1;
    for (int m = mode + 1; m < t.order(); ++m) outer *= t.dim(m);

    std::vector<int> out_shape = t.shape();
    out_shape[static_cast<std::size_t>(mode)] = q;
    DenseTensor out(out_shape);

    // Each outer slab is an (inner_stride x p) column-major block; the
    // contraction is one GEMM per slab.
    for (std::int64_t o = 0; o < outer; ++o) {
        Eigen::Map<const Eigen::MatrixXd> src(t.data() + o * inner_stride * p, inner_stride, p);
        Eigen::Map<Eigen::MatrixXd> dst(out.data() + o * inner_stride * q, inner_stride, q);
        dst.noalias() = src * h.transpose();
    }
    return out;
}

DenseTensor mode_range_product(const DenseTensor& t, const DenseTensor& h,
                               int from, int to, int out_modes) {
    const int n = t.order();
    if (from < 0 || to >= n || from > to) throw shape_error("mode_range_product: mode range out of bounds");
    if (out_modes < 0 || h.order() != out_modes + (to - from + 1))
        throw shape_error("mode_range_product: h order must be out_modes + contracted modes");
    for (int m = from; m <= to; ++m)
        if (h.dim(out_modes + (m - from)) != t.dim(m))
            throw shape_error("mode_range_product: trailing modes of h must match contracted modes of t");

    std::int64_t inner_stride = 1;
    for (int m = 0; m < from; ++m) inner_stride *= t.dim(m);
    std::int64_t contracted = 1;
    for (int m = from; m <= to; ++m) contracted *= t.dim(m);
    std::int64_t outer = 1;
    for (int m = to + 1; m < n; ++m) outer *= t.dim(m);
    std::int64_t block = 1;
    for (int m = 0; m < out_modes; ++m) block *= h.dim(m);

    std::vector<int> out_shape;
    for (int m = 0; m < from; ++m) out_shape.push_back(t.dim(m));
    for (int m = 0; m < out_modes; ++m) out_shape.push_back(h.dim(m));
    for (int m = to + 1; m < n; ++m) out_shape.push_back(t.dim(m));
    DenseTensor out(out_shape);

    // h linearizes with its leading block fastest, so it maps onto a
    // (block x contracted) column-major matrix.
    Eigen::Map<const Eigen::MatrixXd> hm(h.data(), block, contracted);
    for (std::int64_t o = 0; o < outer; ++o) {
        Eigen::Map<const Eigen::MatrixXd> src(t.data() + o * inner_stride * contracted,
                                              inner_stride, contracted);
        Eigen::Map<Eigen::MatrixXd> dst(out.data() + o * inner_stride * block, inner_stride, block);
        dst.noalias() = src * hm.transpose();
    }
    return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (!a.same_shape(b)) throw shape_error("inner: shape mismatch");
    return a.vec().dot(b.vec());
}

double frobenius_norm(const DenseTensor& t) { return t.vec().norm(); }

Eigen::MatrixXd matricize(const DenseTensor& t, std::span<const int> row_modes) {
    const int n = t.order();
    if (row_modes.empty()) throw shape_error("matricize: row mode list must be nonempty");
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int m : row_modes) {
        if (m < 0 || m >= n) throw shape_error("matricize: invalid mode");
        if (used[static_cast<std::size_t>(m)]) throw shape_error("matricize: duplicate mode");
        used[static_cast<std::size_t>(m)] = true;
    }
    std::vector<int> col_modes;
    for (int m = 0; m < n; ++m)
        if (!used[static_cast<std::size_t>(m)]) col_modes.push_back(m);

    std::int64_t rows = 1, cols = 1;
    for (int m : row_modes) rows *= t.dim(m);
    for (int m : col_modes) cols *= t.dim(m);

    Eigen::MatrixXd out(rows, cols);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    do {
        std::int64_t r = 0, rs = 1;
        for (int m : row_modes) {
            r += rs * idx[static_cast<std::size_t>(m)];
            rs *= t.dim(m);
        }
        std::int64_t c = 0, cs = 1;
        for (int m : col_modes) {
            c += cs * idx[static_cast<std::size_t>(m)];
            cs *= t.dim(m);
        }
        out(r, c) = t.at(idx);
    } while (next_index(idx, t.shape()));
    return out;
}

DenseTensor dematricize(const Eigen::MatrixXd& mat, std::span<const int> row_modes,
                        std::span<const int> shape) {
    DenseTensor out(std::vector<int>(shape.begin(), shape.end()));
    const int n = out.order();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int m : row_modes) used[static_cast<std::size_t>(m)] = true;
    std::vector<int> col_modes;
    for (int m = 0; m < n; ++m)
        if (!used[static_cast<std::size_t>(m)]) col_modes.push_back(m);

    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    do {
        std::int64_t r = 0, rs = 1;
        for (int m : row_modes) {
            r += rs * idx[static_cast<std::size_t>(m)];
            rs *= out.dim(m);
        }
        std::int64_t c = 0, cs = 1;
        for (int m : col_modes) {
            c += cs * idx[static_cast<std::size_t>(m)];
            cs *= out.dim(m);
        }
        out.at(idx) = mat(r, c);
    } while (next_index(idx, out.shape()));
    return out;
}

std::vector<int> MarginSet::composed_shape() const {
    std::vector<int> shape;
    for (const auto& g : margins.at(0)) shape.push_back(static_cast<int>(g.size()));
    return shape;
}

void MarginSet::validate() const {
    if (rank < 1 || margins.size() != static_cast<std::size_t>(rank))
        throw shape_error("margin set: rank must match number of components");
    const std::size_t order = margins[0].size();
    if (order == 0) throw shape_error("margin set: components must have at least one mode");
    for (const auto& comp : margins) {
        if (comp.size() != order) throw shape_error("margin set: components disagree on order");
        for (std::size_t m = 0; m < order; ++m)
            if (comp[m].size() != margins[0][m].size())
                throw shape_error("margin set: margin lengths disagree across components");
    }
}

DenseTensor parafac_compose(const MarginSet& ms) {
    ms.validate();
    DenseTensor out(ms.composed_shape());
    const int n = out.order();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::int64_t lin = 0;
    do {
        double v = 0.0;
        for (int d = 0; d < ms.rank; ++d) {
            double prod = 1.0;
            for (int m = 0; m < n; ++m)
                prod *= ms.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)](idx[static_cast<std::size_t>(m)]);
            v += prod;
        }
        out[lin++] = v;
    } while (next_index(idx, out.shape()));
    return out;
}

namespace {

// Contracts one mode of a flat buffer against a vector, shrinking dims[mode] to 1.
void contract_mode_with_vector(std::vector<double>& buf, std::vector<int>& dims,
                               int mode, const Eigen::VectorXd& v) {
    std::int64_t inner_stride = 1;
    for (int m = 0; m < mode; ++m) inner_stride *= dims[static_cast<std::size_t>(m)];
    const int p = dims[static_cast<std::size_t>(mode)];
    std::int64_t outer = 1;
    for (std::size_t m = static_cast<std::size_t>(mode) + 1; m < dims.size(); ++m) outer *= dims[m];

    std::vector<double> next(static_cast<std::size_t>(inner_stride * outer));
    for (std::int64_t o = 0; o < outer; ++o) {
        Eigen::Map<const Eigen::MatrixXd> src(buf.data() + o * inner_stride * p, inner_stride, p);
        Eigen::Map<Eigen::VectorXd> dst(next.data() + o * inner_stride, inner_stride);
        dst.noalias() = src * v;
    }
    buf = std::move(next);
    dims[static_cast<std::size_t>(mode)] = 1;
}

}  // namespace

Eigen::VectorXd partial_parafac_contract(const DenseTensor& x, const MarginSet& ms,
                                         int d, int skip_mode) {
    ms.validate();
    if (d < 0 || d >= ms.rank) throw shape_error("partial_parafac_contract: component index out of range");
    if (skip_mode < 0 || skip_mode >= x.order())
        throw shape_error("partial_parafac_contract: skip mode out of range");
    if (ms.composed_shape() != x.shape())
        throw shape_error("partial_parafac_contract: margin lengths must match tensor shape");

    std::vector<double> buf = x.values();
    std::vector<int> dims = x.shape();
    for (int m = x.order() - 1; m >= 0; --m) {
        if (m == skip_mode) continue;
        contract_mode_with_vector(buf, dims, m, ms.margins[static_cast<std::size_t>(d)][static_cast<std::size_t>(m)]);
    }
    return Eigen::Map<const Eigen::VectorXd>(buf.data(), x.dim(skip_mode));
}

}  // namespace ctrp
