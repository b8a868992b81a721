# SPDX-License-Identifier: MIT
"""Low-rank tensor completion with automatic Tucker rank estimation."""

from ._core import (
    ArgumentError,
    DegenerateError,
    FormatError,
    NumericalError,
    __version__,
    apply_noise,
    cpd_reconstruct,
    fold,
    generate_tucker,
    halrtc_solve,
    khatri_rao,
    load_tensor,
    make_mask,
    psnr,
    rse,
    save_tensor,
    solve,
    ssim,
    svt,
    thin_svd,
    tucker_reconstruct,
    unfold,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
