// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/tensor.hpp"

namespace lrfmtc {

/// Thin SVD, u * s.asDiagonal() * vt. s is nonincreasing and nonnegative.
struct SvdResult {
    Matrix u;   // m x r
    Vector s;   // r
    Matrix vt;  // r x n
};

/// Thin SVD keeping r = min(rows, cols) triplets.
[[nodiscard]] SvdResult thin_svd(const Matrix& m);

/// Singular value shrinkage: U diag(max(s - threshold, 0)) V^T, the proximal map
/// of threshold * ||.||_*.
[[nodiscard]] Matrix svt(const Matrix& m, double threshold);

/// Same as svt, also returning the shrunk singular values (for the nuclear norm
/// of the result).
[[nodiscard]] Matrix svt(const Matrix& m, double threshold, Vector& shrunk);

/// svt for wide matrices through the eigendecomposition of m m^T:
/// U diag(max(1 - threshold / s, 0)) U^T m. Cheaper than svt when rows << cols;
/// singular values below ~1e-8 s_max are resolved only approximately.
[[nodiscard]] Matrix svt_wide(const Matrix& m, double threshold, Vector& shrunk);

[[nodiscard]] double nuclear_norm(const Matrix& m);

/// Hadamard product of the Gram matrices of the two factors other than `skip`.
/// Equals kr_complement(f, skip)^T kr_complement(f, skip).
[[nodiscard]] Matrix gram_hadamard(const FactorSet& factors, int skip);

struct PowerIterationOptions {
    double rel_tol = 1e-10;
    int max_iters = 5000;
    double symmetry_tol = 1e-10;
};

/// Largest eigenvalue of a symmetric matrix by power iteration on a
/// Gershgorin-shifted copy, stopping on relative change of the Rayleigh quotient.
/// Starts from the all-ones vector; restarts from a fixed pseudo-random vector
/// if the iterate collapses to zero.
[[nodiscard]] double max_eig_sym(const Matrix& m, const PowerIterationOptions& opts = {});

/// Number of singular values with s_i^2 > ratio * s_max^2.
[[nodiscard]] Index count_above_ratio(const Vector& s, double ratio);

}  // namespace lrfmtc
