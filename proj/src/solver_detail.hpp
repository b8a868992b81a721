// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/tensor.hpp"

#include <array>
#include <vector>

namespace lrfmtc::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Observed entries of one unfolding: row i_k, unfolded column, value of Y.
struct ModeObservations {
    std::vector<Index> row;
    std::vector<Index> col;
    std::vector<double> value;
};

/// Observed entries listed once per mode, each sorted by unfolded column.
struct Observations {
    Dims dims{0, 0, 0};
    std::array<ModeObservations, 3> mode;
};

[[nodiscard]] Observations gather_observations(const Tensor3& y, const ObservationMask& o);

/// Residual norm and gradient of 0.5||(B K^T - Y_(k)) * O_(k)||^2 over observed entries only.
/// `k_rows` is kr_complement(F, k) stored row-major.
double masked_gradient(const ModeObservations& obs, const RowMatrix& b, const RowMatrix& k_rows,
                       RowMatrix* grad);

}  // namespace lrfmtc::detail
