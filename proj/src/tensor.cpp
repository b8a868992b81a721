// SPDX-License-Identifier: MIT
#include "lrfmtc/tensor.hpp"

#include "lrfmtc/errors.hpp"

#include <cmath>
#include <string>

namespace lrfmtc {

namespace {

std::string dims_str(const Dims& d) {
    return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

void check_dims(const Dims& dims) {
    for (Index d : dims)
        if (d < 1) throw ArgumentError("tensor extents must be >= 1, got " + dims_str(dims));
}

void check_same_dims(const Tensor3& a, const Tensor3& b, const char* what) {
    if (a.dims() != b.dims())
        throw ArgumentError(std::string(what) + ": dimension mismatch " + dims_str(a.dims()) +
                            " vs " + dims_str(b.dims()));
}

// Strides of the unfolded column index: for mode k, col = sum_{m != k} i_m * J_m.
std::array<Index, 3> unfold_strides(const Dims& d, int mode) {
    std::array<Index, 3> j{0, 0, 0};
    Index stride = 1;
    for (int m = 0; m < 3; ++m) {
        if (m == mode - 1) continue;
        j[m] = stride;
        stride *= d[m];
    }
    return j;
}

}  // namespace

void check_mode(int mode) {
    if (mode < 1 || mode > 3)
        throw ArgumentError("mode must be 1, 2 or 3, got " + std::to_string(mode));
}

Tensor3::Tensor3(Dims dims, double fill) : dims_(dims) {
    check_dims(dims);
    data_.assign(static_cast<std::size_t>(dims[0] * dims[1] * dims[2]), fill);
}

Tensor3::Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    check_dims(dims);
    if (static_cast<Index>(data_.size()) != dims[0] * dims[1] * dims[2])
        throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                            " does not match extents " + dims_str(dims));
}

Index Tensor3::dim(int mode) const {
    check_mode(mode);
    return dims_[mode - 1];
}

bool Tensor3::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

ObservationMask::ObservationMask(Tensor3 indicator) : ObservationMask(unchecked(std::move(indicator))) {
    if (observed_count_ == 0) throw ArgumentError("observation mask has no observed entries");
}

ObservationMask ObservationMask::full(Dims dims) {
    return ObservationMask(Tensor3(dims, 1.0));
}

ObservationMask ObservationMask::unchecked(Tensor3 indicator) {
    ObservationMask m;
    Index count = 0;
    for (Index n = 0; n < indicator.size(); ++n) {
        double v = indicator[n];
        if (v != 0.0 && v != 1.0)
            throw ArgumentError("mask entry " + std::to_string(n) + " is " + std::to_string(v) +
                                ", expected 0 or 1");
        count += v == 1.0;
    }
    m.indicator_ = std::move(indicator);
    m.observed_count_ = count;
    return m;
}

FactorSet::FactorSet(Matrix b1, Matrix b2, Matrix b3) : b{std::move(b1), std::move(b2), std::move(b3)} {}

const Matrix& FactorSet::mode(int k) const {
    check_mode(k);
    return b[k - 1];
}

Matrix& FactorSet::mode(int k) {
    check_mode(k);
    return b[k - 1];
}

void FactorSet::validate() const {
    if (b[0].cols() != b[1].cols() || b[0].cols() != b[2].cols())
        throw ArgumentError("factor matrices must have equal column counts, got " +
                            std::to_string(b[0].cols()) + ", " + std::to_string(b[1].cols()) +
                            ", " + std::to_string(b[2].cols()));
    for (const auto& m : b) {
        if (m.rows() < 1 || m.cols() < 1) throw ArgumentError("empty factor matrix");
        if (!m.allFinite()) throw ArgumentError("factor matrix has non-finite entries");
    }
}

Matrix unfold(const Tensor3& t, int mode) {
    check_mode(mode);
    const Dims& d = t.dims();
    if (mode == 1) return t.mode1();

    const Index rows = d[mode - 1];
    Matrix m(rows, t.size() / rows);
    const auto j = unfold_strides(d, mode);
    for (Index i3 = 0; i3 < d[2]; ++i3)
        for (Index i2 = 0; i2 < d[1]; ++i2)
            for (Index i1 = 0; i1 < d[0]; ++i1) {
                const std::array<Index, 3> idx{i1, i2, i3};
                m(idx[mode - 1], i1 * j[0] + i2 * j[1] + i3 * j[2]) = t(i1, i2, i3);
            }
    return m;
}

Tensor3 fold(const Matrix& m, int mode, const Dims& dims) {
    check_mode(mode);
    check_dims(dims);
    const Index rows = dims[mode - 1];
    const Index cols = dims[0] * dims[1] * dims[2] / rows;
    if (m.rows() != rows || m.cols() != cols)
        throw ArgumentError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " for mode " + std::to_string(mode));
    if (mode == 1) return Tensor3(dims, std::vector<double>(m.data(), m.data() + m.size()));

    Tensor3 t(dims);
    const auto j = unfold_strides(dims, mode);
    for (Index i3 = 0; i3 < dims[2]; ++i3)
        for (Index i2 = 0; i2 < dims[1]; ++i2)
            for (Index i1 = 0; i1 < dims[0]; ++i1) {
                const std::array<Index, 3> idx{i1, i2, i3};
                t(i1, i2, i3) = m(idx[mode - 1], i1 * j[0] + i2 * j[1] + i3 * j[2]);
            }
    return t;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw ArgumentError("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                            " vs " + std::to_string(b.cols()) + ")");
    Matrix out(a.rows() * b.rows(), a.cols());
    for (Index l = 0; l < a.cols(); ++l)
        for (Index i = 0; i < a.rows(); ++i)
            out.col(l).segment(i * b.rows(), b.rows()) = a(i, l) * b.col(l);
    return out;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Tensor3 hadamard(const Tensor3& a, const Tensor3& b) {
    check_same_dims(a, b, "hadamard");
    Tensor3 out(a.dims());
    out.vec() = a.vec().cwiseProduct(b.vec());
    return out;
}

Matrix kr_complement(const FactorSet& factors, int skip) {
    check_mode(skip);
    factors.validate();
    switch (skip) {
        case 1: return khatri_rao(factors.b[2], factors.b[1]);
        case 2: return khatri_rao(factors.b[2], factors.b[0]);
        default: return khatri_rao(factors.b[1], factors.b[0]);
    }
}

Tensor3 mode_product(const Tensor3& t, const Matrix& a, int mode) {
    check_mode(mode);
    if (a.cols() != t.dims()[mode - 1])
        throw ArgumentError("mode_product: factor has " + std::to_string(a.cols()) +
                            " columns, tensor mode " + std::to_string(mode) + " has extent " +
                            std::to_string(t.dims()[mode - 1]));
    Dims out_dims = t.dims();
    out_dims[mode - 1] = a.rows();
    Matrix product = a * unfold(t, mode);
    return fold(product, mode, out_dims);
}

Tensor3 cpd_reconstruct(const FactorSet& factors) {
    factors.validate();
    const Dims d = factors.dims();
    Matrix x1 = factors.b[0] * kr_complement(factors, 1).transpose();
    return Tensor3(d, std::vector<double>(x1.data(), x1.data() + x1.size()));
}

Tensor3 tucker_reconstruct(const Tensor3& core, const Matrix& a1, const Matrix& a2,
                           const Matrix& a3) {
    const Dims& r = core.dims();
    if (a1.cols() != r[0] || a2.cols() != r[1] || a3.cols() != r[2])
        throw ArgumentError("tucker_reconstruct: core is " + dims_str(r) +
                            " but factor column counts are " + std::to_string(a1.cols()) + ", " +
                            std::to_string(a2.cols()) + ", " + std::to_string(a3.cols()));
    return mode_product(mode_product(mode_product(core, a1, 1), a2, 2), a3, 3);
}

double masked_residual(const Tensor3& y, const Tensor3& x, const ObservationMask& o) {
    check_same_dims(y, x, "masked_residual");
    if (o.dims() != y.dims())
        throw ArgumentError("masked_residual: mask is " + dims_str(o.dims()) + ", data is " +
                            dims_str(y.dims()));
    return 0.5 * (y.vec() - x.vec()).cwiseProduct(o.indicator().vec()).squaredNorm();
}

}  // namespace lrfmtc
