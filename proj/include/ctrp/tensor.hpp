#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace ctrp {

/// Dense N-mode real tensor with a fixed linearization rule: the first mode
/// runs fastest, i.e. linear index = j1 + p1*j2 + p1*p2*j3 + ... (0-based).
/// All matricization/vectorization in the project derives from this rule,
/// and vec() of a 2-mode tensor equals column-major stacking.
///
/// Modes are 0-based throughout the C++ API; file formats and CLI flags use
/// 1-based mode numbers.
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<int> shape);
    DenseTensor(std::vector<int> shape, std::vector<double> data);

    int order() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int dim(int mode) const { return shape_[static_cast<std::size_t>(mode)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

    std::int64_t linear_index(std::span<const int> idx) const;
    double at(std::span<const int> idx) const { return data_[static_cast<std::size_t>(linear_index(idx))]; }
    double& at(std::span<const int> idx) { return data_[static_cast<std::size_t>(linear_index(idx))]; }

    /// View of the flat buffer as an Eigen column vector (canonical vec()).
    Eigen::Map<const Eigen::VectorXd> vec() const {
        return Eigen::Map<const Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size()));
    }
    Eigen::Map<Eigen::VectorXd> vec() {
        return Eigen::Map<Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size()));
    }

    bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

/// Number of elements implied by a shape; validates entries >= 1.
std::int64_t shape_size(std::span<const int> shape);

/// Advances a multi-index in canonical order (first mode fastest).
/// Returns false when the index wraps past the end.
bool next_index(std::span<int> idx, std::span<const int> shape);

/// n-mode product: contracts `mode` of t against the columns of h (q x p_mode).
/// Result keeps t's shape except dim(mode) becomes q; entry
/// (i1,..,iN) = sum_j t(..,j,..) * h(i_mode, j).
DenseTensor mode_product(const DenseTensor& t, const Eigen::MatrixXd& h, int mode);

/// Contracts the contiguous mode range [from, to] of t against the trailing
/// modes of h, replacing them with h's leading `out_modes` modes. With
/// from=0, to=N-1 the result entry (i1,..,iM) is the full scalar product
/// <t, h(i1,..,iM, :, .., :)>.
DenseTensor mode_range_product(const DenseTensor& t, const DenseTensor& h,
                               int from, int to, int out_modes);

/// Scalar (Frobenius) product of two tensors with identical shape.
double inner(const DenseTensor& a, const DenseTensor& b);

double frobenius_norm(const DenseTensor& t);

/// Rearranges t into a matrix whose rows are indexed by `row_modes` (in the
/// listed order, first listed fastest) and whose columns are indexed by the
/// remaining modes in increasing order. Bijective for any valid mode list.
Eigen::MatrixXd matricize(const DenseTensor& t, std::span<const int> row_modes);

/// Inverse of matricize: restores the tensor with the given original shape.
DenseTensor dematricize(const Eigen::MatrixXd& m, std::span<const int> row_modes,
                        std::span<const int> shape);

/// Rank-D set of per-mode margin vectors; margins[d][m] has the length of
/// mode m of the composed tensor.
struct MarginSet {
    int rank = 0;
    std::vector<std::vector<Eigen::VectorXd>> margins;  // [d][m]

    int order() const { return margins.empty() ? 0 : static_cast<int>(margins[0].size()); }
    std::vector<int> composed_shape() const;
    void validate() const;
};

/// Sum over d of the outer products margins[d][0] o margins[d][1] o ...
DenseTensor parafac_compose(const MarginSet& m);

/// Contracts x with component d's margin vectors along every mode except
/// `skip_mode`; the result has length dim(skip_mode) and satisfies
/// <rank-1 component d, x> = margins[d][skip_mode] . result.
Eigen::VectorXd partial_parafac_contract(const DenseTensor& x, const MarginSet& m,
                                         int d, int skip_mode);

}  // namespace ctrp
