// SPDX-License-Identifier: MIT
#include "lrfmtc/linalg.hpp"

#include "lrfmtc/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace lrfmtc {

SvdResult thin_svd(const Matrix& m) {
    if (m.size() == 0) throw ArgumentError("thin_svd: empty matrix");
    if (!m.allFinite()) throw ArgumentError("thin_svd: non-finite input");

    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalError("thin_svd: SVD did not converge on a " + std::to_string(m.rows()) +
                                 "x" + std::to_string(m.cols()) + " input",
                             0);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV().transpose()};
}

Matrix svt(const Matrix& m, double threshold, Vector& shrunk) {
    if (!(threshold >= 0.0))
        throw ArgumentError("svt: threshold must be nonnegative, got " + std::to_string(threshold));
    SvdResult svd = thin_svd(m);
    shrunk = (svd.s.array() - threshold).max(0.0).matrix();
    Index keep = 0;
    while (keep < shrunk.size() && shrunk(keep) > 0.0) ++keep;
    if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
    return svd.u.leftCols(keep) * shrunk.head(keep).asDiagonal() * svd.vt.topRows(keep);
}

Matrix svt(const Matrix& m, double threshold) {
    Vector unused;
    return svt(m, threshold, unused);
}

Matrix svt_wide(const Matrix& m, double threshold, Vector& shrunk) {
    if (!(threshold >= 0.0))
        throw ArgumentError("svt: threshold must be nonnegative, got " + std::to_string(threshold));
    if (m.size() == 0) throw ArgumentError("svt: empty matrix");
    if (!m.allFinite()) throw ArgumentError("svt: non-finite input");
    if (m.rows() > m.cols()) return svt(m, threshold, shrunk);

    Matrix gram(m.rows(), m.rows());
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(m);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram.selfadjointView<Eigen::Lower>());
    if (eig.info() != Eigen::Success) throw NumericalError("svt_wide: eigensolver failed", 0);

    // Eigenvalues come out ascending; report singular values descending.
    const Index r = m.rows();
    shrunk.resize(r);
    Vector weight(r);
    Index keep = 0;
    for (Index i = 0; i < r; ++i) {
        const double s = std::sqrt(std::max(eig.eigenvalues()(r - 1 - i), 0.0));
        shrunk(i) = std::max(s - threshold, 0.0);
        weight(r - 1 - i) = shrunk(i) > 0.0 ? shrunk(i) / s : 0.0;
        keep += shrunk(i) > 0.0;
    }
    if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
    const auto u = eig.eigenvectors().rightCols(keep);
    return u * (weight.tail(keep).asDiagonal() * (u.transpose() * m));
}

double nuclear_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if (!m.allFinite()) throw ArgumentError("nuclear_norm: non-finite input");
    return Eigen::BDCSVD<Matrix>(m).singularValues().sum();
}

Matrix gram_hadamard(const FactorSet& factors, int skip) {
    check_mode(skip);
    factors.validate();
    Matrix out = Matrix::Ones(factors.width(), factors.width());
    for (int h = 3; h >= 1; --h) {
        if (h == skip) continue;
        const Matrix& b = factors.mode(h);
        out.array() *= (b.transpose() * b).array();
    }
    return out;
}

double max_eig_sym(const Matrix& m, const PowerIterationOptions& opts) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw ArgumentError("max_eig_sym: expected a nonempty square matrix");
    if (!m.allFinite()) throw ArgumentError("max_eig_sym: non-finite input");
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > opts.symmetry_tol * scale)
        throw ArgumentError("max_eig_sym: input is not symmetric");

    const Index n = m.rows();
    Matrix a = 0.5 * (m + m.transpose());
    if (n == 1) return a(0, 0);

    // Power iteration finds the eigenvalue of largest magnitude, which is the
    // largest one only when the spectrum is nonnegative. PSD inputs (the usual
    // case) are detected from the inertia of a pivoted LDLT and left unshifted,
    // since any shift pulls the eigenvalue ratio toward 1 and costs accuracy.
    // Otherwise shift by the Gershgorin lower bound.
    double shift = 0.0;
    const Eigen::LDLT<Matrix> ldlt(a);
    const double tiny = 1e-13 * a.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -tiny).any()) {
        for (Index i = 0; i < n; ++i) {
            double lower = a(i, i) - (a.row(i).cwiseAbs().sum() - std::abs(a(i, i)));
            shift = std::max(shift, -lower);
        }
        a.diagonal().array() += shift;
    }

    Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
    std::mt19937_64 gen(0x5eed);
    std::normal_distribution<double> normal;
    bool restarted = false;
    double rq = 0.0;
    for (int it = 1; it <= opts.max_iters; ++it) {
        Vector w = a * v;
        double wn = w.norm();
        if (wn == 0.0 || !std::isfinite(wn)) {
            if (wn == 0.0 && a.cwiseAbs().maxCoeff() == 0.0) return -shift;  // zero matrix
            if (restarted) throw NumericalError("max_eig_sym: power iteration stagnated", it, rq - shift);
            for (Index i = 0; i < n; ++i) v(i) = normal(gen);
            v.normalize();
            restarted = true;
            continue;
        }
        double next = v.dot(w);
        v = w / wn;
        if (it > 1 && std::abs(next - rq) <= opts.rel_tol * std::abs(next)) return next - shift;
        rq = next;
    }
    throw NumericalError("max_eig_sym: no convergence after " + std::to_string(opts.max_iters) +
                             " iterations",
                         opts.max_iters, rq - shift);
}

Index count_above_ratio(const Vector& s, double ratio) {
    if (s.size() == 0) return 0;
    const double cut = ratio * s.maxCoeff() * s.maxCoeff();
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i) r += s(i) * s(i) > cut;
    return r;
}

}  // namespace lrfmtc
