// SPDX-License-Identifier: MIT
#include "lrfmtc/metrics.hpp"

#include "lrfmtc/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace lrfmtc {

namespace {

void check_pair(const Tensor3& a, const Tensor3& b) {
    if (a.dims() != b.dims()) throw ArgumentError("metric inputs have different extents");
    if (a.size() == 0) throw ArgumentError("metric inputs are empty");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(size));
    const double c = 0.5 * (size - 1);
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - c;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Valid-mode separable filtering of a rows x cols column-major slice.
Matrix filter_valid(const Eigen::Ref<const Matrix>& img, const std::vector<double>& w) {
    const Index n = static_cast<Index>(w.size());
    const Index out_r = img.rows() - n + 1;
    const Index out_c = img.cols() - n + 1;
    Matrix tmp(out_r, img.cols());
    for (Index c = 0; c < img.cols(); ++c)
        for (Index r = 0; r < out_r; ++r) {
            double acc = 0.0;
            for (Index t = 0; t < n; ++t) acc += w[t] * img(r + t, c);
            tmp(r, c) = acc;
        }
    Matrix out(out_r, out_c);
    for (Index c = 0; c < out_c; ++c)
        for (Index r = 0; r < out_r; ++r) {
            double acc = 0.0;
            for (Index t = 0; t < n; ++t) acc += w[t] * tmp(r, c + t);
            out(r, c) = acc;
        }
    return out;
}

}  // namespace

double rse(const Tensor3& truth, const Tensor3& estimate) {
    check_pair(truth, estimate);
    const double denom = truth.norm();
    if (denom == 0.0) throw ArgumentError("rse: truth tensor is zero");
    return (truth.vec() - estimate.vec()).norm() / denom;
}

double psnr(const Tensor3& truth, const Tensor3& estimate, double peak) {
    check_pair(truth, estimate);
    if (!(peak > 0.0)) throw ArgumentError("psnr: peak must be positive");
    const double mse = (truth.vec() - estimate.vec()).squaredNorm() / static_cast<double>(truth.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor3& truth, const Tensor3& estimate, double peak, const SsimOptions& opts) {
    check_pair(truth, estimate);
    if (!(peak > 0.0)) throw ArgumentError("ssim: peak must be positive");
    const Dims& d = truth.dims();
    if (d[0] < opts.window || d[1] < opts.window)
        throw ArgumentError("ssim: frontal slices must be at least " + std::to_string(opts.window) +
                            "x" + std::to_string(opts.window));

    const auto w = gaussian_kernel(opts.window, opts.sigma);
    const double c1 = (opts.k1 * peak) * (opts.k1 * peak);
    const double c2 = (opts.k2 * peak) * (opts.k2 * peak);
    const Index slice = d[0] * d[1];

    double total = 0.0;
    for (Index k = 0; k < d[2]; ++k) {
        Eigen::Map<const Matrix> x(truth.data().data() + k * slice, d[0], d[1]);
        Eigen::Map<const Matrix> y(estimate.data().data() + k * slice, d[0], d[1]);
        const Matrix mx = filter_valid(x, w);
        const Matrix my = filter_valid(y, w);
        const Matrix sxx = filter_valid(x.cwiseProduct(x), w) - mx.cwiseProduct(mx);
        const Matrix syy = filter_valid(y.cwiseProduct(y), w) - my.cwiseProduct(my);
        const Matrix sxy = filter_valid(x.cwiseProduct(y), w) - mx.cwiseProduct(my);
        const auto num = (2.0 * mx.array() * my.array() + c1) * (2.0 * sxy.array() + c2);
        const auto den = (mx.array().square() + my.array().square() + c1) *
                         (sxx.array() + syy.array() + c2);
        total += (num / den).mean();
    }
    return total / static_cast<double>(d[2]);
}

}  // namespace lrfmtc
