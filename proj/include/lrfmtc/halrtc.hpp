// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/solver.hpp"

namespace lrfmtc {

/// Noisy HaLRTC: ADMM on
///   gamma/2 ||X_O - T_O||^2 + sum_i alpha_i ||M_i(i)||_*   s.t. X = M_i.
struct HalrtcConfig {
    std::array<double, 3> alphas{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double rho = 1e-2;
    double rho_growth = 1.05;
    double rho_max = 1e2;
    double gamma = 1.0;
    int max_iters = 300;
    double tol = 1e-6;
    double rank_threshold_ratio = 1e-4;

    void validate() const;
};

struct HalrtcResult {
    Tensor3 estimate;
    SolveReport report;  // change_trace holds ||X_t - X_{t-1}|| / ||X_{t-1}||
};

/// M_i = fold_i[ D_{alpha_i / rho}(X_(i) + Y_i(i) / rho) ].
[[nodiscard]] Tensor3 halrtc_m_update(const Tensor3& x, const Tensor3& dual, int mode,
                                      double alpha, double rho);

/// Closed-form minimizer over X of
///   gamma/2 ||X_O - T_O||^2 + sum_i rho/2 ||X - M_i + Y_i / rho||^2.
[[nodiscard]] Tensor3 halrtc_x_update(const Tensor3& observed, const ObservationMask& o,
                                      const std::array<Tensor3, 3>& m,
                                      const std::array<Tensor3, 3>& dual, double rho,
                                      double gamma);

/// n-rank of a dense tensor: per-mode count of unfolding singular values with
/// s_i^2 > ratio * s_max^2.
[[nodiscard]] RankTriple thresholded_nrank(const Tensor3& x, double ratio);

[[nodiscard]] HalrtcResult halrtc_solve(const Tensor3& y, const ObservationMask& o,
                                        const HalrtcConfig& cfg);

}  // namespace lrfmtc
