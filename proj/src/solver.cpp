// SPDX-License-Identifier: MIT
#include "lrfmtc/solver.hpp"

#include "lrfmtc/errors.hpp"
#include "lrfmtc/linalg.hpp"
#include "solver_detail.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace lrfmtc {

namespace detail {

Observations gather_observations(const Tensor3& y, const ObservationMask& o) {
    if (y.dims() != o.dims()) throw ArgumentError("data and mask dimensions differ");
    Observations out;
    const Dims& d = y.dims();
    out.dims = d;
    for (auto& m : out.mode) {
        m.row.reserve(static_cast<std::size_t>(o.observed_count()));
        m.col.reserve(static_cast<std::size_t>(o.observed_count()));
        m.value.reserve(static_cast<std::size_t>(o.observed_count()));
    }
    // Column strides per mode (see unfold): mode1 -> (i2 + I2 i3), mode2 -> (i1 + I1 i3),
    // mode3 -> (i1 + I1 i2).
    for (Index i3 = 0; i3 < d[2]; ++i3)
        for (Index i2 = 0; i2 < d[1]; ++i2)
            for (Index i1 = 0; i1 < d[0]; ++i1) {
                const Index n = i1 + d[0] * (i2 + d[1] * i3);
                if (!o.observed(n)) continue;
                const double v = y[n];
                const std::array<Index, 3> rows{i1, i2, i3};
                const std::array<Index, 3> cols{i2 + d[1] * i3, i1 + d[0] * i3, i1 + d[0] * i2};
                for (int m = 0; m < 3; ++m) {
                    out.mode[m].row.push_back(rows[m]);
                    out.mode[m].col.push_back(cols[m]);
                    out.mode[m].value.push_back(v);
                }
            }
    // Group by column so consecutive entries reuse the same row of K.
    for (auto& m : out.mode) {
        std::vector<std::size_t> perm(m.row.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return m.col[a] < m.col[b]; });
        ModeObservations sorted;
        sorted.row.reserve(perm.size());
        sorted.col.reserve(perm.size());
        sorted.value.reserve(perm.size());
        for (std::size_t p : perm) {
            sorted.row.push_back(m.row[p]);
            sorted.col.push_back(m.col[p]);
            sorted.value.push_back(m.value[p]);
        }
        m = std::move(sorted);
    }
    return out;
}

double masked_gradient(const ModeObservations& obs, const RowMatrix& b, const RowMatrix& k_rows,
                       RowMatrix* grad) {
    if (grad) grad->setZero(b.rows(), b.cols());
    double sq = 0.0;
    const std::size_t n = obs.row.size();
    for (std::size_t e = 0; e < n; ++e) {
        const auto krow = k_rows.row(obs.col[e]);
        const double r = b.row(obs.row[e]).dot(krow) - obs.value[e];
        sq += r * r;
        if (grad) grad->row(obs.row[e]).noalias() += r * krow;
    }
    return 0.5 * sq;
}

}  // namespace detail

namespace {

using detail::RowMatrix;
using Clock = std::chrono::steady_clock;

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_problem(const FactorSet& f, const Tensor3& y, const ObservationMask& o) {
    f.validate();
    if (f.dims() != y.dims())
        throw ArgumentError("factor row counts do not match the data extents");
    if (o.dims() != y.dims()) throw ArgumentError("mask and data extents differ");
}

double relative_change(const Matrix& next, const Matrix& prev) {
    return (next - prev).norm() / std::max(prev.norm(), kEps);
}

// Prox-gradient loop on one block. Shared by the public entry point and solve().
struct BlockProblem {
    const detail::ModeObservations& obs;
    RowMatrix k_rows;
    double tau = 0.0;
    double alpha = 0.0;

    double block_objective(const Matrix& b) const {
        RowMatrix br = b;
        return alpha * nuclear_norm(b) + detail::masked_gradient(obs, br, k_rows, nullptr);
    }

    SubproblemResult run(const Matrix& b0, const SubproblemOptions& opts) const {
        RowMatrix grad;
        Matrix b_prev = b0;
        Matrix m = b0;
        double u = 1.0;
        int it = 0;
        while (it < opts.max_inner) {
            ++it;
            RowMatrix mr = m;
            detail::masked_gradient(obs, mr, k_rows, &grad);
            Matrix z = m - tau * Matrix(grad);
            Vector shrunk;
            Matrix b_next = svt_wide(z, tau * alpha, shrunk);
            if (!b_next.allFinite())
                throw NumericalError("subproblem iterate became non-finite", it);
            const double change = relative_change(b_next, b_prev);
            if (opts.accelerate) {
                const double u_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * u * u));
                m = b_next + ((u - 1.0) / u_next) * (b_next - b_prev);
                u = u_next;
            } else {
                m = b_next;
            }
            b_prev = std::move(b_next);
            if (change < opts.inner_tol) break;
        }
        // The accelerated scheme is not monotone; never return a worse block.
        if (block_objective(b_prev) > block_objective(b0)) b_prev = b0;
        return {std::move(b_prev), it, tau};
    }
};

double safe_step(const FactorSet& f, int k, double safety) {
    if (!(safety > 0.0 && safety < 2.0))
        throw ArgumentError("step safety must lie in (0, 2), got " + std::to_string(safety));
    Matrix g = gram_hadamard(f, k);
    if (g.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateError("complement factors of mode " + std::to_string(k) +
                              " are zero; step size undefined");
    double lmax = 0.0;
    try {
        lmax = max_eig_sym(g);
    } catch (const NumericalError&) {
        // Clustered leading eigenvalues stall power iteration; solve densely instead.
        lmax = Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    }
    if (!(lmax > 0.0))
        throw DegenerateError("largest eigenvalue of the complement Gram product is " +
                              std::to_string(lmax));
    return safety / lmax;
}

double full_objective(const FactorSet& f, const detail::Observations& obs, double alpha) {
    RowMatrix k1 = kr_complement(f, 1);
    RowMatrix b1 = f.b[0];
    double fit = detail::masked_gradient(obs.mode[0], b1, k1, nullptr);
    double reg = 0.0;
    for (const auto& b : f.b) reg += nuclear_norm(b);
    return alpha * reg + fit;
}

void balance_columns(FactorSet& f) {
    for (Index l = 0; l < f.width(); ++l) {
        std::array<double, 3> n{};
        for (int k = 0; k < 3; ++k) n[k] = f.b[k].col(l).norm();
        if (n[0] == 0.0 || n[1] == 0.0 || n[2] == 0.0) {
            for (auto& b : f.b) b.col(l).setZero();
            continue;
        }
        const double g = std::cbrt(n[0] * n[1] * n[2]);
        for (int k = 0; k < 3; ++k) f.b[k].col(l) *= g / n[k];
    }
}

}  // namespace

void SolverConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ArgumentError("alpha must be a finite nonnegative number");
    if (L < 1) throw ArgumentError("L must be positive");
    if (max_outer < 1 || max_inner < 1) throw ArgumentError("iteration caps must be positive");
    if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) throw ArgumentError("tolerances must be positive");
    if (!(rank_threshold_ratio > 0.0 && rank_threshold_ratio < 1.0))
        throw ArgumentError("rank_threshold_ratio must lie in (0, 1)");
    if (!(step_safety > 0.0 && step_safety < 2.0))
        throw ArgumentError("step_safety must lie in (0, 2)");
    if (als_sweeps < 0) throw ArgumentError("als_sweeps must be nonnegative");
    if (!(als_ridge >= 0.0)) throw ArgumentError("als_ridge must be nonnegative");
}

Tensor3 TuckerModel::reconstruct() const {
    return tucker_reconstruct(core, u[0], u[1], u[2]);
}

double objective(const FactorSet& factors, const Tensor3& y, const ObservationMask& o,
                 double alpha) {
    check_problem(factors, y, o);
    double reg = 0.0;
    for (const auto& b : factors.b) reg += nuclear_norm(b);
    return alpha * reg + masked_residual(y, cpd_reconstruct(factors), o);
}

Matrix subgrad_smooth(const FactorSet& factors, int k, const Tensor3& y,
                      const ObservationMask& o) {
    check_mode(k);
    check_problem(factors, y, o);
    const Matrix kr = kr_complement(factors, k);
    Matrix r = (factors.mode(k) * kr.transpose() - unfold(y, k))
                   .cwiseProduct(unfold(o.indicator(), k));
    return r * kr;
}

double step_size(const FactorSet& factors, int k, double safety) {
    check_mode(k);
    factors.validate();
    return safe_step(factors, k, safety);
}

double subproblem_objective(const FactorSet& factors, int k, const Tensor3& y,
                            const ObservationMask& o, double alpha) {
    check_mode(k);
    check_problem(factors, y, o);
    const Matrix kr = kr_complement(factors, k);
    Matrix r = (unfold(y, k) - factors.mode(k) * kr.transpose())
                   .cwiseProduct(unfold(o.indicator(), k));
    return alpha * nuclear_norm(factors.mode(k)) + 0.5 * r.squaredNorm();
}

SubproblemResult solve_subproblem(const FactorSet& factors, int k, const Tensor3& y,
                                  const ObservationMask& o, double alpha,
                                  const SubproblemOptions& opts) {
    check_mode(k);
    check_problem(factors, y, o);
    if (!(alpha >= 0.0)) throw ArgumentError("alpha must be nonnegative");
    if (opts.max_inner < 1 || !(opts.inner_tol > 0.0))
        throw ArgumentError("max_inner and inner_tol must be positive");
    const detail::Observations obs = detail::gather_observations(y, o);
    BlockProblem p{obs.mode[k - 1], kr_complement(factors, k),
                   safe_step(factors, k, opts.step_safety), alpha};
    return p.run(factors.mode(k), opts);
}

FactorSet initialize(const Tensor3& y, const ObservationMask& o, Index L, std::uint64_t seed,
                     int sweeps, double ridge) {
    if (L < 1) throw ArgumentError("L must be positive");
    if (o.dims() != y.dims()) throw ArgumentError("mask and data extents differ");
    if (o.observed_count() == 0) throw ArgumentError("no observed entries to initialize from");

    double sum = 0.0;
    for (Index n = 0; n < y.size(); ++n)
        if (o.observed(n)) sum += y[n];
    const double mean = sum / static_cast<double>(o.observed_count());
    Tensor3 filled = y;
    for (Index n = 0; n < y.size(); ++n)
        if (!o.observed(n)) filled[n] = mean;

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    FactorSet f;
    for (int k = 0; k < 3; ++k) {
        f.b[k].resize(y.dims()[k], L);
        for (Index c = 0; c < L; ++c)
            for (Index r = 0; r < y.dims()[k]; ++r) f.b[k](r, c) = normal(gen);
    }

    const std::array<Matrix, 3> unfolded{unfold(filled, 1), unfold(filled, 2), unfold(filled, 3)};
    for (int s = 0; s < sweeps; ++s) {
        for (int k = 1; k <= 3; ++k) {
            Matrix rhs = unfolded[k - 1] * kr_complement(f, k);  // I_k x L
            Matrix gram = gram_hadamard(f, k);
            gram.diagonal().array() += ridge;
            f.mode(k) = gram.ldlt().solve(rhs.transpose()).transpose();
            if (!f.mode(k).allFinite())
                throw NumericalError("ALS initialization produced non-finite factors", s + 1);
        }
    }
    balance_columns(f);
    return f;
}

TuckerModel extract_tucker(const FactorSet& factors, double threshold_ratio) {
    if (!(threshold_ratio > 0.0 && threshold_ratio < 1.0))
        throw ArgumentError("threshold_ratio must lie in (0, 1)");
    factors.validate();
    TuckerModel model;
    FactorSet core_factors;
    for (int k = 0; k < 3; ++k) {
        SvdResult svd = thin_svd(factors.b[k]);
        if (svd.s.size() == 0 || svd.s(0) == 0.0)
            throw DegenerateError("factor matrix " + std::to_string(k + 1) +
                                  " is zero; no rank can be extracted");
        const Index r = count_above_ratio(svd.s, threshold_ratio);
        model.rank[k] = r;
        model.u[k] = svd.u.leftCols(r);
        core_factors.b[k] = svd.s.head(r).asDiagonal() * svd.vt.topRows(r);
    }
    model.core = cpd_reconstruct(core_factors);
    return model;
}

SolveResult solve(const Tensor3& y, const ObservationMask& o, const SolverConfig& cfg) {
    cfg.validate();
    if (o.dims() != y.dims()) throw ArgumentError("mask and data extents differ");
    if (o.observed_count() == 0) throw ArgumentError("mask has no observed entries");
    for (Index n = 0; n < y.size(); ++n)
        if (o.observed(n) && !std::isfinite(y[n]))
            throw ArgumentError("observed data contains non-finite values");

    const auto start = Clock::now();
    auto seconds = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    SolveResult result;
    SolveReport& report = result.report;
    FactorSet f = initialize(y, o, cfg.L, cfg.seed, cfg.als_sweeps, cfg.als_ridge);
    const detail::Observations obs = detail::gather_observations(y, o);
    const SubproblemOptions opts{cfg.max_inner, cfg.inner_tol, cfg.step_safety, true};

    double obj = full_objective(f, obs, cfg.alpha);
    Tensor3 x_prev = cpd_reconstruct(f);
    for (int outer = 1; outer <= cfg.max_outer; ++outer) {
        for (int k = 1; k <= 3; ++k) {
            Matrix candidate;
            if (gram_hadamard(f, k).cwiseAbs().maxCoeff() == 0.0) {
                // Smooth term is constant in B_k; the block minimizer is zero.
                candidate = Matrix::Zero(f.mode(k).rows(), f.mode(k).cols());
            } else {
                BlockProblem p{obs.mode[k - 1], kr_complement(f, k),
                               safe_step(f, k, cfg.step_safety), cfg.alpha};
                SubproblemResult sub = p.run(f.mode(k), opts);
                report.inner_iters_total += sub.iterations;
                candidate = std::move(sub.b);
            }
            Matrix previous = std::move(f.mode(k));
            f.mode(k) = std::move(candidate);
            const double next = full_objective(f, obs, cfg.alpha);
            if (next <= obj) {
                obj = next;
            } else {
                f.mode(k) = std::move(previous);
            }
            report.objective_trace.push_back(obj);
            report.elapsed.push_back(seconds());
        }
        report.outer_iters = outer;
        Tensor3 x = cpd_reconstruct(f);
        const double change = (x.vec() - x_prev.vec()).norm() / std::max(x_prev.norm(), kEps);
        report.change_trace.push_back(change);
        x_prev = std::move(x);
        if (change < cfg.outer_tol) {
            report.converged = true;
            break;
        }
    }

    result.model = extract_tucker(f, cfg.rank_threshold_ratio);
    report.estimated_rank = result.model.rank;
    result.factors = std::move(f);
    report.wall_time = seconds();
    return result;
}

}  // namespace lrfmtc
