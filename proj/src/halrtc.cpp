// SPDX-License-Identifier: MIT
#include "lrfmtc/halrtc.hpp"

#include "lrfmtc/errors.hpp"
#include "lrfmtc/linalg.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace lrfmtc {

void HalrtcConfig::validate() const {
    double sum = 0.0;
    for (double a : alphas) {
        if (!(a >= 0.0)) throw ArgumentError("HaLRTC weights must be nonnegative");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("HaLRTC weights must sum to 1");
    if (!(rho > 0.0) || !(gamma > 0.0)) throw ArgumentError("rho and gamma must be positive");
    if (!(rho_growth >= 1.0) || !(rho_max >= rho))
        throw ArgumentError("rho schedule must be nondecreasing");
    if (max_iters < 1 || !(tol > 0.0)) throw ArgumentError("max_iters and tol must be positive");
    if (!(rank_threshold_ratio > 0.0 && rank_threshold_ratio < 1.0))
        throw ArgumentError("rank_threshold_ratio must lie in (0, 1)");
}

Tensor3 halrtc_m_update(const Tensor3& x, const Tensor3& dual, int mode, double alpha,
                        double rho) {
    check_mode(mode);
    if (x.dims() != dual.dims()) throw ArgumentError("halrtc_m_update: extents differ");
    Matrix arg = unfold(x, mode) + unfold(dual, mode) / rho;
    return fold(svt(arg, alpha / rho), mode, x.dims());
}

Tensor3 halrtc_x_update(const Tensor3& observed, const ObservationMask& o,
                        const std::array<Tensor3, 3>& m, const std::array<Tensor3, 3>& dual,
                        double rho, double gamma) {
    const Dims& d = observed.dims();
    if (o.dims() != d) throw ArgumentError("halrtc_x_update: mask extents differ");
    for (int i = 0; i < 3; ++i)
        if (m[i].dims() != d || dual[i].dims() != d)
            throw ArgumentError("halrtc_x_update: auxiliary extents differ");
    const double n = 3.0;
    Tensor3 x(d);
    for (Index e = 0; e < x.size(); ++e) {
        double acc = 0.0;
        if (o.observed(e)) {
            for (int i = 0; i < 3; ++i) acc += rho * m[i][e] - dual[i][e];
            x[e] = (gamma * observed[e] + acc) / (rho * n + gamma);
        } else {
            for (int i = 0; i < 3; ++i) acc += m[i][e] - dual[i][e] / rho;
            x[e] = acc / n;
        }
    }
    return x;
}

RankTriple thresholded_nrank(const Tensor3& x, double ratio) {
    RankTriple r{};
    for (int k = 1; k <= 3; ++k) {
        Matrix xk = unfold(x, k);
        // Singular values of a wide unfolding from its small Gram matrix.
        Eigen::SelfAdjointEigenSolver<Matrix> eig(xk * xk.transpose(), Eigen::EigenvaluesOnly);
        Vector s = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        r[k - 1] = count_above_ratio(s, ratio);
    }
    return r;
}

HalrtcResult halrtc_solve(const Tensor3& y, const ObservationMask& o, const HalrtcConfig& cfg) {
    cfg.validate();
    if (o.dims() != y.dims()) throw ArgumentError("mask and data extents differ");
    if (o.observed_count() == 0) throw ArgumentError("mask has no observed entries");

    const auto start = std::chrono::steady_clock::now();
    double sum = 0.0;
    for (Index n = 0; n < y.size(); ++n)
        if (o.observed(n)) sum += y[n];
    const double mean = sum / static_cast<double>(o.observed_count());

    Tensor3 x = y;
    for (Index n = 0; n < y.size(); ++n)
        if (!o.observed(n)) x[n] = mean;
    std::array<Tensor3, 3> m{x, x, x};
    std::array<Tensor3, 3> dual{Tensor3(y.dims()), Tensor3(y.dims()), Tensor3(y.dims())};

    HalrtcResult result;
    SolveReport& report = result.report;
    double rho = cfg.rho;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        for (int i = 0; i < 3; ++i) m[i] = halrtc_m_update(x, dual[i], i + 1, cfg.alphas[i], rho);
        Tensor3 x_next = halrtc_x_update(y, o, m, dual, rho, cfg.gamma);
        if (!x_next.all_finite()) throw NumericalError("HaLRTC iterate became non-finite", it);
        for (int i = 0; i < 3; ++i) dual[i].vec() -= rho * (m[i].vec() - x_next.vec());

        const double change = (x_next.vec() - x.vec()).norm() /
                              std::max(x.norm(), std::numeric_limits<double>::epsilon());
        report.change_trace.push_back(change);
        x = std::move(x_next);
        report.outer_iters = it;
        rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
        if (change < cfg.tol) {
            report.converged = true;
            break;
        }
    }
    report.estimated_rank = thresholded_nrank(x, cfg.rank_threshold_ratio);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.estimate = std::move(x);
    return result;
}

}  // namespace lrfmtc
