// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/halrtc.hpp"
#include "lrfmtc/solver.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace lrfmtc {

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    Dims dims{50, 50, 50};
    RankTriple rank{2, 2, 2};
    std::uint64_t seed = 0;
    /// Orthonormalize the Gaussian factor columns (QR). Without it the raw
    /// factors are used and the returned model folds their R factors into the core.
    bool orthogonalize = true;
    /// Rescale the core so the tensor has unit per-entry standard deviation.
    /// The regularization weights (alpha = 30 in particular) are calibrated
    /// for this scale.
    bool unit_variance = true;

    void validate() const;
};

/// Gaussian core and factors; returns the dense tensor and its ground-truth
/// model with orthonormal factors (core absorbs any scaling).
[[nodiscard]] std::pair<Tensor3, TuckerModel> generate_tucker(const SyntheticSpec& spec);

enum class NoiseKind { none, gaussian_snr, poisson };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double snr_db = std::numeric_limits<double>::infinity();
    double scale = 100.0;  // Poisson counts per unit intensity
};

/// gaussian_snr: i.i.d. noise with variance var(x) * 10^(-snr/10).
/// poisson: Poisson(scale * (x - min x)) / scale + min x.
[[nodiscard]] Tensor3 apply_noise(const Tensor3& x, const NoiseSpec& spec, std::uint64_t seed);

enum class MaskKind { random, block_ltuple };

struct MaskSpec {
    MaskKind kind = MaskKind::random;
    double sampling_ratio = 0.2;
    Index l = 4;
    std::uint64_t seed = 0;
    int block_mode = 0;  // 0: uniformly chosen per run, else the fixed fiber mode (1..3)
};

/// random: exactly ceil(SR * N) observed entries chosen uniformly without
/// replacement. block_ltuple: runs of l consecutive entries along fibers are
/// removed until exactly N - ceil(SR * N) entries are missing; runs are kept
/// apart along their fiber while that remains possible.
[[nodiscard]] ObservationMask make_mask(const Dims& dims, const MaskSpec& spec);

[[nodiscard]] Index target_observed(Index total, double sampling_ratio);

// ---------------------------------------------------------------------------
// Trials and sweeps
// ---------------------------------------------------------------------------

enum class Method { lrfmtc, halrtc };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method parse_method(const std::string& s);
[[nodiscard]] std::string to_string(MaskKind k);
[[nodiscard]] MaskKind parse_mask_kind(const std::string& s);

struct TrialSpec {
    Dims dims{50, 50, 50};
    RankTriple rank{2, 2, 2};
    double sampling_ratio = 0.2;
    double snr_db = 20.0;  // +inf: noiseless
    MaskKind mask = MaskKind::random;
    Index l = 4;
    bool orthogonalize = true;
    bool unit_variance = true;
    SolverConfig solver;
    HalrtcConfig halrtc;
    std::uint64_t root_seed = 1;
    int trial = 0;
};

struct TrialRecord {
    Method method = Method::lrfmtc;
    int trial = 0;
    std::uint64_t trial_seed = 0;
    double rse = std::numeric_limits<double>::quiet_NaN();
    RankTriple estimated_rank{0, 0, 0};
    double wall_time = 0.0;
    int iterations = 0;
    bool converged = false;
    /// "ok", "collapsed" (the estimate shrank to zero) or "failed".
    std::string status = "ok";
    std::string message;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Seeds of one trial: data, mask, noise and solver initialization streams.
struct TrialSeeds {
    std::uint64_t trial, data, mask, noise, init;
};
[[nodiscard]] TrialSeeds trial_seeds(std::uint64_t root, int trial);

[[nodiscard]] TrialRecord run_trial(const TrialSpec& spec, Method method);

struct SweepGrid {
    Dims dims{50, 50, 50};
    std::vector<RankTriple> ranks{{2, 2, 2}};
    std::vector<double> sampling_ratios{0.2};
    std::vector<double> snr_db{20.0};
    std::vector<Index> Ls{150};
    std::vector<double> alphas{30.0};
    std::vector<Method> methods{Method::lrfmtc};
    MaskKind mask = MaskKind::random;
    Index l = 4;
    SolverConfig solver;  // alpha and L are overridden per cell
    HalrtcConfig halrtc;
    std::uint64_t root_seed = 1;

    void validate() const;
};

struct SweepCell {
    RankTriple rank{};
    double sampling_ratio = 0.0;
    double snr_db = 0.0;
    Index L = 0;
    double alpha = 0.0;
    Method method = Method::lrfmtc;
    std::array<double, 3> mean_rank{};
    double mean_rse = 0.0;
    double std_rse = 0.0;
    double mean_wall_time = 0.0;
    int trials = 0;
    int failed = 0;
    std::vector<TrialRecord> records;
};

struct SweepTable {
    std::vector<SweepCell> cells;
};

/// Cartesian sweep. Trials run on up to `threads` workers (0: LRFMTC_THREADS
/// or 1); results do not depend on the worker count.
[[nodiscard]] SweepTable run_sweep(const SweepGrid& grid, int trials, int threads = 0);

/// Mean and sample standard deviation of RSE plus mean rank over the
/// non-failed records.
void aggregate(SweepCell& cell);

}  // namespace lrfmtc
