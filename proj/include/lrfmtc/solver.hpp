// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/tensor.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace lrfmtc {

using RankTriple = std::array<Index, 3>;

struct SolverConfig {
    double alpha = 30.0;       // trace-norm weight
    Index L = 150;             // CPD width
    int max_outer = 200;
    int max_inner = 50;
    double inner_tol = 1e-4;   // relative change of B between inner iterations
    double outer_tol = 1e-6;   // relative change of the reconstruction between sweeps
    double rank_threshold_ratio = 1e-4;
    double step_safety = 1.0;  // tau = step_safety / lambda_max, in (0, 2)
    std::uint64_t seed = 0;
    int als_sweeps = 30;
    double als_ridge = 1e-8;

    void validate() const;
};

/// Core plus orthonormal factors recovered from a FactorSet.
struct TuckerModel {
    Tensor3 core;
    std::array<Matrix, 3> u;
    RankTriple rank{0, 0, 0};

    [[nodiscard]] Tensor3 reconstruct() const;
};

struct SolveReport {
    std::vector<double> objective_trace;  // after each completed subproblem solve
    std::vector<double> change_trace;     // relative change of the estimate per outer iteration
    std::vector<double> elapsed;          // seconds since start, aligned with objective_trace
    int outer_iters = 0;
    long inner_iters_total = 0;
    bool converged = false;
    RankTriple estimated_rank{0, 0, 0};
    double wall_time = 0.0;
};

struct SolveResult {
    FactorSet factors;
    TuckerModel model;
    SolveReport report;
};

/// alpha * sum_k ||B_k||_* + 0.5 * ||(Y - [[B1,B2,B3]]) * O||_F^2
[[nodiscard]] double objective(const FactorSet& factors, const Tensor3& y,
                               const ObservationMask& o, double alpha);

/// Gradient of the smooth term with respect to B_k:
/// [(B_k K^T - Y_(k)) * O_(k)] K with K = kr_complement(factors, k).
[[nodiscard]] Matrix subgrad_smooth(const FactorSet& factors, int k, const Tensor3& y,
                                    const ObservationMask& o);

/// safety / lambda_max(gram_hadamard(factors, k)).
[[nodiscard]] double step_size(const FactorSet& factors, int k, double safety);

/// Objective of the single-block problem in B_k with the other factors fixed:
/// alpha ||B_k||_* + 0.5 ||(Y_(k) - B_k K^T) * O_(k)||_F^2.
[[nodiscard]] double subproblem_objective(const FactorSet& factors, int k, const Tensor3& y,
                                          const ObservationMask& o, double alpha);

struct SubproblemOptions {
    int max_inner = 50;
    double inner_tol = 1e-4;
    double step_safety = 1.0;
    bool accelerate = true;  // false gives the plain proximal-gradient fixed point
};

struct SubproblemResult {
    Matrix b;
    int iterations = 0;
    double tau = 0.0;
};

/// Accelerated fixed-point iteration for B_k with the other two factors frozen.
/// The returned matrix never has a larger block objective than the input.
[[nodiscard]] SubproblemResult solve_subproblem(const FactorSet& factors, int k,
                                                const Tensor3& y, const ObservationMask& o,
                                                double alpha, const SubproblemOptions& opts = {});

/// Mean-fill the unobserved entries, then run rank-L ALS from standard-normal
/// factors drawn from `seed`.
[[nodiscard]] FactorSet initialize(const Tensor3& y, const ObservationMask& o, Index L,
                                   std::uint64_t seed, int sweeps = 30, double ridge = 1e-8);

/// SVD of each B_k, keeping triplets with s_i^2 > ratio * s_max^2.
[[nodiscard]] TuckerModel extract_tucker(const FactorSet& factors, double threshold_ratio);

/// Full BCD solve followed by Tucker extraction.
[[nodiscard]] SolveResult solve(const Tensor3& y, const ObservationMask& o,
                                const SolverConfig& cfg);

}  // namespace lrfmtc
