// SPDX-License-Identifier: MIT
#include "common/oracles.hpp"

#include "lrfmtc/errors.hpp"
#include "lrfmtc/experiments.hpp"

#include <gtest/gtest.h>

namespace lrfmtc {
namespace {

using testing::random_factors;
using testing::random_mask;
using testing::random_matrix;
using testing::random_tensor;
using testing::rel_diff;

struct Instance {
    FactorSet f;
    Tensor3 y;
    ObservationMask o;
};

Instance random_instance(const Dims& d, Index L, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Instance in{random_factors(d, L, rng), random_tensor(d, rng), ObservationMask::full(d)};
    in.o = random_mask(d, p, rng);
    return in;
}

Tensor3 low_rank_tensor(const Dims& d, const RankTriple& r, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.dims = d;
    spec.rank = r;
    spec.seed = seed;
    return generate_tucker(spec).first;
}

TEST(Objective, Trivial) {
    FactorSet zero;
    for (int k = 0; k < 3; ++k) zero.b[k] = Matrix::Zero(3, 2);
    const Dims d{3, 3, 3};
    EXPECT_EQ(objective(zero, Tensor3(d), ObservationMask::full(d), 5.0), 0.0);

    std::mt19937_64 rng(1);
    const FactorSet f = random_factors(d, 2, rng);
    EXPECT_NEAR(objective(f, cpd_reconstruct(f), ObservationMask::full(d), 0.0), 0.0, 1e-20);
}

TEST(Objective, MatchesComponentwiseOracle) {
    const Instance in = random_instance(Dims{4, 5, 3}, 3, 0.6, 2);
    const double alpha = 0.7;
    double want = testing::smooth_term_loops(in.f, in.y, in.o);
    for (int k = 0; k < 3; ++k) want += alpha * testing::nuclear_norm_gram(in.f.b[k]);
    EXPECT_NEAR(objective(in.f, in.y, in.o, alpha), want, 1e-11 * want);
}

TEST(Objective, ShapeMismatchThrows) {
    const Instance in = random_instance(Dims{3, 3, 3}, 2, 0.5, 3);
    EXPECT_THROW((void)objective(in.f, Tensor3(Dims{3, 3, 4}), in.o, 1.0), ArgumentError);
}

TEST(SubgradSmooth, ZeroAtExactFitAndEmptyMask) {
    const Instance in = random_instance(Dims{3, 4, 5}, 2, 0.5, 4);
    const Tensor3 fit = cpd_reconstruct(in.f);
    for (int k = 1; k <= 3; ++k) {
        EXPECT_LT(subgrad_smooth(in.f, k, fit, in.o).norm(), 1e-12);
        const ObservationMask empty = ObservationMask::unchecked(Tensor3(in.y.dims()));
        EXPECT_EQ(subgrad_smooth(in.f, k, in.y, empty).norm(), 0.0);
    }
}

TEST(SubgradSmooth, MatchesCentralDifferences) {
    for (auto [d, L] : {std::pair<Dims, Index>{{3, 3, 3}, 2}, {{4, 4, 4}, 3}, {{2, 4, 3}, 3}}) {
        const Instance in = random_instance(d, L, 0.6, 5 + L);
        for (int k = 1; k <= 3; ++k) {
            const Matrix g = subgrad_smooth(in.f, k, in.y, in.o);
            const Matrix fd = testing::fd_gradient(in.f, k, in.y, in.o);
            EXPECT_LT(testing::max_entry_rel_error(g, fd), 1e-5) << "mode " << k;
        }
    }
}

TEST(StepSize, OrthonormalComplementGivesSafety) {
    std::mt19937_64 rng(6);
    FactorSet f;
    for (int k = 0; k < 3; ++k) {
        Eigen::HouseholderQR<Matrix> qr(random_matrix(6, 3, rng));
        f.b[k] = qr.householderQ() * Matrix::Identity(6, 3);
    }
    EXPECT_NEAR(step_size(f, 1, 1.0), 1.0, 1e-10);
    EXPECT_NEAR(step_size(f, 2, 1.5), 1.5, 1e-10);
}

TEST(StepSize, ScalesAsInverseFourthPower) {
    std::mt19937_64 rng(7);
    FactorSet f = random_factors(Dims{5, 6, 7}, 3, rng);
    const double tau = step_size(f, 1, 1.0);
    const double c = 1.7;
    f.b[1] *= c;
    f.b[2] *= c;
    EXPECT_NEAR(step_size(f, 1, 1.0), tau / std::pow(c, 4), 1e-9 * tau);
}

TEST(StepSize, DefinitionalAgainstDenseEigensolver) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const FactorSet f = random_factors(Dims{5, 6, 7}, 4, rng);
        for (int k = 1; k <= 3; ++k) {
            const double lmax = testing::dense_max_eig(gram_hadamard(f, k));
            EXPECT_NEAR(step_size(f, k, 0.9) * lmax, 0.9, 1e-8);
        }
    }
}

TEST(StepSize, ZeroComplementIsDegenerate) {
    FactorSet f;
    f.b = {Matrix::Ones(3, 2), Matrix::Zero(3, 2), Matrix::Zero(3, 2)};
    EXPECT_THROW((void)step_size(f, 1, 1.0), DegenerateError);
}

TEST(Subproblem, UnregularizedFullMaskReachesLeastSquares) {
    Instance in = random_instance(Dims{4, 5, 6}, 3, 1.0, 9);
    in.o = ObservationMask::full(in.y.dims());
    SubproblemOptions opts;
    opts.max_inner = 20000;
    opts.inner_tol = 1e-14;
    for (int k = 1; k <= 3; ++k) {
        FactorSet f = in.f;
        f.mode(k) = solve_subproblem(in.f, k, in.y, in.o, 0.0, opts).b;
        EXPECT_LT(subgrad_smooth(f, k, in.y, in.o).norm(), 1e-6) << "mode " << k;
    }
}

TEST(Subproblem, HeavyShrinkageGivesZero) {
    const Instance in = random_instance(Dims{4, 5, 6}, 3, 0.7, 10);
    for (int k = 1; k <= 3; ++k) {
        const Matrix kr = kr_complement(in.f, k);
        const Matrix rhs = unfold(in.y, k).cwiseProduct(unfold(in.o.indicator(), k)) * kr;
        // alpha at or above ||(Y*O) K||_2 makes zero a fixed point of every step.
        const double alpha = 2.0 * thin_svd(rhs).s(0) + 1.0;
        SubproblemOptions opts;
        opts.max_inner = 500;
        const Matrix b = solve_subproblem(in.f, k, in.y, in.o, alpha, opts).b;
        EXPECT_EQ(b.norm(), 0.0);
    }
}

TEST(Subproblem, AcceleratedMatchesBasicFixedPoint) {
    const Instance in = random_instance(Dims{4, 4, 4}, 3, 0.7, 11);
    const double alpha = 0.3;
    SubproblemOptions opts;
    opts.max_inner = 2000;
    opts.inner_tol = 1e-13;
    for (int k = 1; k <= 3; ++k) {
        FactorSet fast = in.f, slow = in.f;
        fast.mode(k) = solve_subproblem(in.f, k, in.y, in.o, alpha, opts).b;
        slow.mode(k) = testing::basic_fixed_point(in.f, k, in.y, in.o, alpha, 20000);
        const double a = subproblem_objective(fast, k, in.y, in.o, alpha);
        const double b = subproblem_objective(slow, k, in.y, in.o, alpha);
        EXPECT_NEAR(a, b, 1e-6 * std::abs(b)) << "mode " << k;
    }
}

TEST(Subproblem, NeverWorseThanInput) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Instance in = random_instance(Dims{5, 4, 6}, 4, 0.5, 100 + seed);
        const double alpha = 0.05 * static_cast<double>(seed % 7);
        for (int k = 1; k <= 3; ++k) {
            FactorSet f = in.f;
            const double before = subproblem_objective(f, k, in.y, in.o, alpha);
            SubproblemOptions opts;
            opts.max_inner = 3;
            f.mode(k) = solve_subproblem(in.f, k, in.y, in.o, alpha, opts).b;
            EXPECT_LE(subproblem_objective(f, k, in.y, in.o, alpha), before + 1e-10);
        }
    }
}

// No inner iteration diverges for any admissible step safety factor.
TEST(Subproblem, BoundedOnRandomInstances) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> safety(0.1, 1.99), alpha(0.0, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
        const Instance in = random_instance(Dims{3 + rep % 3, 4, 3 + rep % 4}, 1 + rep % 4, 0.6, 1000 + rep);
        SubproblemOptions opts;
        opts.step_safety = safety(rng);
        opts.max_inner = 60;
        const double a = alpha(rng);
        for (int k = 1; k <= 3; ++k) {
            const double start = subproblem_objective(in.f, k, in.y, in.o, a);
            FactorSet f = in.f;
            f.mode(k) = solve_subproblem(in.f, k, in.y, in.o, a, opts).b;
            ASSERT_TRUE(f.mode(k).allFinite());
            EXPECT_LE(subproblem_objective(f, k, in.y, in.o, a), start + 1e-10);
        }
    }
}

TEST(Initialize, RecoversRankOne) {
    std::mt19937_64 rng(13);
    const FactorSet truth = random_factors(Dims{5, 6, 7}, 1, rng);
    const Tensor3 y = cpd_reconstruct(truth);
    const FactorSet f = initialize(y, ObservationMask::full(y.dims()), 1, 3);
    EXPECT_LT(rel_diff(cpd_reconstruct(f), y), 1e-6);
}

TEST(Initialize, ConstantObservationsGiveConstantTensor) {
    std::mt19937_64 rng(14);
    const Dims d{5, 5, 5};
    const Tensor3 y(d, 2.5);
    const ObservationMask o = random_mask(d, 0.3, rng);
    const FactorSet f = initialize(y, o, 3, 5);
    EXPECT_LT(rel_diff(cpd_reconstruct(f), Tensor3(d, 2.5)), 1e-8);
}

TEST(Initialize, DeterministicPerSeed) {
    const Instance in = random_instance(Dims{6, 5, 4}, 3, 0.5, 15);
    const FactorSet a = initialize(in.y, in.o, 4, 77);
    const FactorSet b = initialize(in.y, in.o, 4, 77);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(a.b[k] == b.b[k]);
}

TEST(Initialize, RejectsEmptyMask) {
    const Dims d{3, 3, 3};
    EXPECT_THROW((void)initialize(Tensor3(d), ObservationMask::unchecked(Tensor3(d)), 2, 0), ArgumentError);
}

TEST(ExtractTucker, ExactRank) {
    std::mt19937_64 rng(16);
    FactorSet f;
    for (int k = 0; k < 3; ++k) f.b[k] = random_matrix(6, 3, rng) * random_matrix(3, 8, rng);
    const TuckerModel m = extract_tucker(f, 1e-4);
    EXPECT_EQ(m.rank, (RankTriple{3, 3, 3}));
    for (int k = 0; k < 3; ++k)
        EXPECT_LT((m.u[k].transpose() * m.u[k] - Matrix::Identity(3, 3)).norm(), 1e-8);
    EXPECT_LT(rel_diff(m.reconstruct(), cpd_reconstruct(f)), 1e-10);
}

TEST(ExtractTucker, ThresholdArithmetic) {
    FactorSet f;
    Matrix b = Matrix::Zero(2, 2);
    b(0, 0) = 10.0;
    b(1, 1) = 0.05;
    f.b = {b, Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    EXPECT_EQ(extract_tucker(f, 1e-4).rank[0], 1);
    b(1, 1) = 0.2;
    f.b[0] = b;
    EXPECT_EQ(extract_tucker(f, 1e-4).rank[0], 2);
}

TEST(ExtractTucker, TruncationEnergyBound) {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        FactorSet f;
        for (int k = 0; k < 3; ++k)
            f.b[k] = random_matrix(7, 2, rng) * random_matrix(2, 6, rng) + 1e-4 * random_matrix(7, 6, rng);
        const double ratio = 1e-4;
        double discarded = 0.0, total = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Vector s = thin_svd(f.b[k]).s;
            total += s.squaredNorm();
            for (Index i = 0; i < s.size(); ++i)
                if (!(s(i) * s(i) > ratio * s(0) * s(0))) discarded += s(i) * s(i);
        }
        const Tensor3 x = cpd_reconstruct(f);
        const double err = (extract_tucker(f, ratio).reconstruct().vec() - x.vec()).norm() / x.norm();
        EXPECT_LE(err, 10.0 * std::sqrt(discarded / total));
    }
}

TEST(ExtractTucker, ZeroFactorIsDegenerate) {
    FactorSet f;
    f.b = {Matrix::Zero(3, 2), Matrix::Ones(3, 2), Matrix::Ones(3, 2)};
    EXPECT_THROW((void)extract_tucker(f, 1e-4), DegenerateError);
}

TEST(Solve, FullyObservedNoiselessRecovery) {
    const Tensor3 x = low_rank_tensor(Dims{20, 20, 20}, {2, 2, 2}, 18);
    SolverConfig cfg;
    cfg.alpha = 1.0;
    cfg.L = 20;
    const SolveResult r = solve(x, ObservationMask::full(x.dims()), cfg);
    EXPECT_EQ(r.report.estimated_rank, (RankTriple{2, 2, 2}));
    EXPECT_LT(rel_diff(r.model.reconstruct(), x), 1e-3);
}

// Objective is nonincreasing across subproblem solves.
TEST(Solve, MonotoneObjectiveOnSeededInstances) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Instance in = random_instance(Dims{6, 7, 5}, 3, 0.5, 500 + seed);
        SolverConfig cfg;
        cfg.alpha = 0.1 + 0.2 * static_cast<double>(seed % 10);
        cfg.L = 4;
        cfg.max_outer = 15;
        cfg.seed = seed;
        const SolveReport rep = solve(in.y, in.o, cfg).report;
        ASSERT_FALSE(rep.objective_trace.empty());
        for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
            ASSERT_LE(rep.objective_trace[i], rep.objective_trace[i - 1] + 1e-10) << "seed " << seed << " step " << i;
    }
}

TEST(Solve, FixedPointStationarityAtConvergence) {
    const Tensor3 x = low_rank_tensor(Dims{10, 10, 10}, {2, 2, 2}, 19);
    std::mt19937_64 rng(19);
    const ObservationMask o = random_mask(x.dims(), 0.6, rng);
    SolverConfig cfg;
    cfg.alpha = 0.5;
    cfg.L = 8;
    cfg.max_outer = 5000;
    const SolveResult r = solve(x, o, cfg);
    ASSERT_TRUE(r.report.converged);
    for (int k = 1; k <= 3; ++k) {
        const Matrix& b = r.factors.mode(k);
        const double tau = step_size(r.factors, k, cfg.step_safety);
        const Matrix next = svt(b - tau * subgrad_smooth(r.factors, k, x, o), tau * cfg.alpha);
        EXPECT_LT((next - b).norm() / b.norm(), 10 * cfg.inner_tol) << "mode " << k;
    }
}

// With Y -> cY the minimizer maps B_k -> c^(1/3) B_k when alpha -> c^(5/3) alpha,
// and the objective scales by c^2.
TEST(Solve, ScaleCovariance) {
    const Instance in = random_instance(Dims{5, 6, 4}, 3, 0.5, 20);
    const double c = 3.0, alpha = 0.4;
    FactorSet scaled = in.f;
    for (auto& b : scaled.b) b *= std::cbrt(c);
    Tensor3 cy = in.y;
    cy.vec() *= c;
    EXPECT_NEAR(objective(scaled, cy, in.o, alpha * std::pow(c, 5.0 / 3.0)),
                c * c * objective(in.f, in.y, in.o, alpha), 1e-10 * c * c * objective(in.f, in.y, in.o, alpha));

    const Tensor3 x = low_rank_tensor(Dims{15, 15, 15}, {2, 3, 2}, 21);
    std::mt19937_64 rng(21);
    const ObservationMask o = random_mask(x.dims(), 0.5, rng);
    SolverConfig cfg;
    cfg.alpha = 1.0;
    cfg.L = 12;
    cfg.max_outer = 60;
    const RankTriple base = solve(x, o, cfg).report.estimated_rank;
    for (double cc : {0.25, 4.0, 100.0}) {
        Tensor3 y = x;
        y.vec() *= cc;
        SolverConfig scaled_cfg = cfg;
        scaled_cfg.alpha = cfg.alpha * std::pow(cc, 5.0 / 3.0);
        EXPECT_EQ(solve(y, o, scaled_cfg).report.estimated_rank, base) << "c = " << cc;
    }
}

TEST(SolverConfigType, Validation) {
    SolverConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.step_safety = 2.0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.alpha = -1.0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.inner_tol = 0.0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
    cfg = {};
    cfg.L = 0;
    EXPECT_THROW(cfg.validate(), ArgumentError);
}

}  // namespace
}  // namespace lrfmtc
