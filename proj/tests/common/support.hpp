// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/tensor.hpp"

#include <random>

namespace lrfmtc::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
    return m;
}

inline Tensor3 random_tensor(const Dims& dims, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Tensor3 t(dims);
    for (Index n = 0; n < t.size(); ++n) t[n] = nd(rng);
    return t;
}

/// Bernoulli(p) mask with at least one observed entry.
inline ObservationMask random_mask(const Dims& dims, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution bd(p);
    Tensor3 ind(dims);
    for (Index n = 0; n < ind.size(); ++n) ind[n] = bd(rng) ? 1.0 : 0.0;
    ind[0] = 1.0;
    return ObservationMask(std::move(ind));
}

inline FactorSet random_factors(const Dims& dims, Index L, std::mt19937_64& rng) {
    FactorSet f;
    for (int k = 0; k < 3; ++k) f.b[k] = random_matrix(dims[k], L, rng);
    return f;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
    const double d = b.norm();
    return (a - b).norm() / (d > 0 ? d : 1.0);
}

inline double rel_diff(const Tensor3& a, const Tensor3& b) {
    const double d = b.norm();
    return (a.vec() - b.vec()).norm() / (d > 0 ? d : 1.0);
}

}  // namespace lrfmtc::testing
