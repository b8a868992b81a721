// SPDX-License-Identifier: MIT
#include "common/oracles.hpp"

#include "lrfmtc/errors.hpp"
#include "lrfmtc/experiments.hpp"

#include <gtest/gtest.h>

namespace lrfmtc {
namespace {

using testing::random_mask;
using testing::random_tensor;
using testing::rel_diff;

struct AdmmState {
    Tensor3 t;
    ObservationMask o;
    std::array<Tensor3, 3> m, dual;
};

AdmmState random_state(const Dims& d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AdmmState s{random_tensor(d, rng), random_mask(d, 0.5, rng), {}, {}};
    for (int i = 0; i < 3; ++i) {
        s.m[i] = random_tensor(d, rng);
        s.dual[i] = random_tensor(d, rng);
    }
    return s;
}

TEST(HalrtcXUpdate, MatchesDenseSolve) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const AdmmState s = random_state(Dims{3, 3, 3}, seed);
        for (double rho : {1e-2, 0.7, 30.0})
            for (double gamma : {0.1, 1.0, 50.0}) {
                const Tensor3 got = halrtc_x_update(s.t, s.o, s.m, s.dual, rho, gamma);
                const Tensor3 want = testing::dense_x_update(s.t, s.o, s.m, s.dual, rho, gamma);
                EXPECT_LT((got.vec() - want.vec()).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, want.vec().cwiseAbs().maxCoeff()));
            }
    }
}

TEST(HalrtcXUpdate, LargeGammaPinsObservations) {
    const AdmmState s = random_state(Dims{3, 3, 3}, 11);
    const Tensor3 x = halrtc_x_update(s.t, s.o, s.m, s.dual, 1.0, 1e12);
    for (Index n = 0; n < x.size(); ++n)
        if (s.o.observed(n)) EXPECT_NEAR(x[n], s.t[n], 1e-6);
}

TEST(HalrtcMUpdate, ProxOptimalBySampling) {
    std::mt19937_64 rng(12);
    const AdmmState s = random_state(Dims{4, 3, 5}, 12);
    const double alpha = 1.0 / 3.0, rho = 0.4;
    for (int mode = 1; mode <= 3; ++mode) {
        const Tensor3 m = halrtc_m_update(s.t, s.dual[0], mode, alpha, rho);
        Tensor3 shifted = s.t;
        shifted.vec() += s.dual[0].vec() / rho;
        const Matrix z = unfold(shifted, mode);
        EXPECT_GE(testing::prox_sampling_gap(z, alpha / rho, unfold(m, mode), 1000, rng), 0.0);
    }
}

TEST(HalrtcSolve, FullyObservedNoiselessLargeGamma) {
    SyntheticSpec spec;
    spec.dims = {12, 12, 12};
    spec.rank = {2, 2, 2};
    spec.seed = 13;
    const Tensor3 x = generate_tucker(spec).first;
    HalrtcConfig cfg;
    cfg.gamma = 1e6;
    const HalrtcResult r = halrtc_solve(x, ObservationMask::full(x.dims()), cfg);
    EXPECT_LT(rel_diff(r.estimate, x), 1e-3);
}

TEST(HalrtcSolve, RankTwoNoisyTrial) {
    TrialSpec spec;
    spec.rank = {2, 2, 2};
    spec.root_seed = 14;
    const TrialRecord rec = run_trial(spec, Method::halrtc);
    ASSERT_EQ(rec.status, "ok");
    for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(rec.estimated_rank[k] - 2), 1);
}

TEST(HalrtcSolve, TraceAndDeterminism) {
    std::mt19937_64 rng(15);
    const Tensor3 y = random_tensor(Dims{6, 6, 6}, rng);
    const ObservationMask o = random_mask(y.dims(), 0.5, rng);
    HalrtcConfig cfg;
    cfg.max_iters = 40;
    const HalrtcResult a = halrtc_solve(y, o, cfg), b = halrtc_solve(y, o, cfg);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.report.change_trace.size(), static_cast<std::size_t>(a.report.outer_iters));
    EXPECT_TRUE(a.estimate.all_finite());
}

TEST(ThresholdedNrank, KnownTensor) {
    SyntheticSpec spec;
    spec.dims = {9, 8, 7};
    spec.rank = {3, 2, 4};
    spec.seed = 16;
    EXPECT_EQ(thresholded_nrank(generate_tucker(spec).first, 1e-4), (RankTriple{3, 2, 4}));
}

TEST(HalrtcConfigType, Validation) {
    HalrtcConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.alphas = {0.5, 0.5, 0.5};
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.rho = 0.0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.gamma = -1.0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
}

}  // namespace
}  // namespace lrfmtc
