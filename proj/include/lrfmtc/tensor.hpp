// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace lrfmtc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::array<Index, 3>;

/// Dense third-order tensor in column-major order (first index fastest).
///
/// Entry (i1, i2, i3), 0-based, lives at i1 + I1 * (i2 + I2 * i3).
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(Dims dims, double fill = 0.0);
    Tensor3(Dims dims, std::vector<double> data);

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] Index dim(int mode) const;  // 1-based mode
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(data_.size()); }

    [[nodiscard]] double& operator()(Index i, Index j, Index k) {
        return data_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
    }
    [[nodiscard]] double operator()(Index i, Index j, Index k) const {
        return data_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
    }
    [[nodiscard]] double& operator[](Index n) { return data_[static_cast<std::size_t>(n)]; }
    [[nodiscard]] double operator[](Index n) const { return data_[static_cast<std::size_t>(n)]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

    /// Flat Eigen view over the storage.
    [[nodiscard]] Eigen::Map<Vector> vec() { return {data_.data(), size()}; }
    [[nodiscard]] Eigen::Map<const Vector> vec() const { return {data_.data(), size()}; }

    /// Zero-copy view of the mode-1 unfolding (I1 x I2*I3).
    [[nodiscard]] Eigen::Map<const Matrix> mode1() const {
        return {data_.data(), dims_[0], dims_[1] * dims_[2]};
    }

    [[nodiscard]] double norm() const { return vec().norm(); }
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    Dims dims_{0, 0, 0};
    std::vector<double> data_;
};

/// Binary indicator of observed entries.
class ObservationMask {
public:
    ObservationMask() = default;
    /// Validates that every entry is exactly 0 or 1 and at least one is set.
    explicit ObservationMask(Tensor3 indicator);
    /// All-ones mask.
    static ObservationMask full(Dims dims);
    /// Skips the nonempty check; used to build empty masks in tests.
    static ObservationMask unchecked(Tensor3 indicator);

    [[nodiscard]] const Tensor3& indicator() const noexcept { return indicator_; }
    [[nodiscard]] const Dims& dims() const noexcept { return indicator_.dims(); }
    [[nodiscard]] Index observed_count() const noexcept { return observed_count_; }
    [[nodiscard]] double sampling_ratio() const noexcept {
        return static_cast<double>(observed_count_) / static_cast<double>(indicator_.size());
    }
    [[nodiscard]] bool observed(Index n) const { return indicator_[n] != 0.0; }

private:
    Tensor3 indicator_;
    Index observed_count_ = 0;
};

/// The three CPD factor matrices B1 (I1 x L), B2 (I2 x L), B3 (I3 x L).
struct FactorSet {
    std::array<Matrix, 3> b;

    FactorSet() = default;
    FactorSet(Matrix b1, Matrix b2, Matrix b3);

    /// 1-based access, matching mode numbering.
    [[nodiscard]] const Matrix& mode(int k) const;
    [[nodiscard]] Matrix& mode(int k);
    [[nodiscard]] Index width() const { return b[0].cols(); }
    [[nodiscard]] Dims dims() const { return {b[0].rows(), b[1].rows(), b[2].rows()}; }
    /// Throws ArgumentError if column counts differ or entries are non-finite.
    void validate() const;
};

void check_mode(int mode);

/// Mode-k unfolding. Entry (i1,i2,i3) maps to row i_k and column
/// sum_{m != k} i_m * J_m with J_m = prod_{l < m, l != k} I_l (0-based), so that
/// X_(1) = A1 G_(1) (A3 kron A2)^T.
[[nodiscard]] Matrix unfold(const Tensor3& t, int mode);
/// Inverse of unfold.
[[nodiscard]] Tensor3 fold(const Matrix& m, int mode, const Dims& dims);

[[nodiscard]] Matrix khatri_rao(const Matrix& a, const Matrix& b);
[[nodiscard]] Matrix kronecker(const Matrix& a, const Matrix& b);
[[nodiscard]] Tensor3 hadamard(const Tensor3& a, const Tensor3& b);

/// Khatri-Rao product of the two factors other than `skip`, in descending
/// mode order: skip=1 -> B3 (.) B2, skip=2 -> B3 (.) B1, skip=3 -> B2 (.) B1.
[[nodiscard]] Matrix kr_complement(const FactorSet& factors, int skip);

/// t x_mode a, where a has t.dim(mode) columns.
[[nodiscard]] Tensor3 mode_product(const Tensor3& t, const Matrix& a, int mode);

/// Sum over l of B1[:,l] o B2[:,l] o B3[:,l].
[[nodiscard]] Tensor3 cpd_reconstruct(const FactorSet& factors);

/// core x1 a1 x2 a2 x3 a3.
[[nodiscard]] Tensor3 tucker_reconstruct(const Tensor3& core, const Matrix& a1,
                                         const Matrix& a2, const Matrix& a3);

/// 0.5 * || (y - x) * O ||_F^2
[[nodiscard]] double masked_residual(const Tensor3& y, const Tensor3& x,
                                     const ObservationMask& o);

}  // namespace lrfmtc
