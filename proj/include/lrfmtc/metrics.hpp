// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/tensor.hpp"

namespace lrfmtc {

/// ||truth - estimate||_F / ||truth||_F
[[nodiscard]] double rse(const Tensor3& truth, const Tensor3& estimate);

/// 10 log10(peak^2 / MSE); +infinity when the tensors are identical.
[[nodiscard]] double psnr(const Tensor3& truth, const Tensor3& estimate, double peak);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// Mean single-scale SSIM over all valid 11x11 Gaussian windows of every
/// frontal slice (i1 x i2 for fixed i3), averaged over slices.
[[nodiscard]] double ssim(const Tensor3& truth, const Tensor3& estimate, double peak,
                          const SsimOptions& opts = {});

}  // namespace lrfmtc
