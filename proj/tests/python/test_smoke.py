# SPDX-License-Identifier: MIT
import numpy as np
import pytest

import lrfmtc


def test_unfold_fold_roundtrip():
    x = np.arange(24, dtype=float).reshape((2, 3, 4), order="F")
    for mode in (1, 2, 3):
        m = lrfmtc.unfold(x, mode)
        assert m.shape == (x.shape[mode - 1], x.size // x.shape[mode - 1])
        np.testing.assert_array_equal(lrfmtc.fold(m, mode, x.shape), x)
    # Mode-1 unfolding is the Fortran reshape.
    np.testing.assert_array_equal(lrfmtc.unfold(x, 1), x.reshape((2, 12), order="F"))


def test_cpd_reconstruct_matches_einsum():
    rng = np.random.default_rng(1)
    b = [rng.standard_normal((n, 3)) for n in (4, 5, 6)]
    want = np.einsum("il,jl,kl->ijk", *b)
    np.testing.assert_allclose(lrfmtc.cpd_reconstruct(*b), want, rtol=1e-12, atol=1e-12)


def test_svt_shrinks_singular_values():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((6, 4))
    s = np.linalg.svd(a, compute_uv=False)
    got = np.linalg.svd(lrfmtc.svt(a, 0.5), compute_uv=False)
    np.testing.assert_allclose(got, np.maximum(s - 0.5, 0.0), atol=1e-12)


def test_generated_tensor_completes_with_rank_estimate():
    x, core, factors = lrfmtc.generate_tucker((15, 15, 15), (2, 2, 2), seed=3)
    assert core.shape == (2, 2, 2)
    np.testing.assert_allclose(lrfmtc.tucker_reconstruct(core, *factors), x, atol=1e-10)
    mask = lrfmtc.make_mask(x.shape, 0.5, seed=4)
    assert mask.sum() == np.ceil(0.5 * x.size)
    out = lrfmtc.solve(x * mask, mask, alpha=0.3, L=10, max_outer=60, seed=5)
    assert tuple(out["report"]["estimated_rank"]) == (2, 2, 2)
    assert lrfmtc.rse(x, out["estimate"]) < 0.05
    trace = out["report"]["objective_trace"]
    assert all(b <= a + 1e-10 for a, b in zip(trace, trace[1:]))


def test_halrtc_runs():
    x, _, _ = lrfmtc.generate_tucker((10, 10, 10), (2, 2, 2), seed=6)
    mask = lrfmtc.make_mask(x.shape, 0.6, seed=7)
    out = lrfmtc.halrtc_solve(x * mask, mask, max_iters=50)
    assert out["estimate"].shape == x.shape
    assert np.isfinite(lrfmtc.rse(x, out["estimate"]))


def test_tensor_file_roundtrip(tmp_path):
    x = np.random.default_rng(8).standard_normal((3, 4, 5))
    path = str(tmp_path / "x.dt3")
    lrfmtc.save_tensor(path, x)
    np.testing.assert_array_equal(lrfmtc.load_tensor(path), x)
    (tmp_path / "bad.dt3").write_bytes(b"nope")
    with pytest.raises(lrfmtc.FormatError):
        lrfmtc.load_tensor(str(tmp_path / "bad.dt3"))


def test_bad_arguments_raise():
    with pytest.raises(lrfmtc.ArgumentError):
        lrfmtc.unfold(np.zeros((2, 2, 2)), 4)
    with pytest.raises(lrfmtc.ArgumentError):
        lrfmtc.solve(np.zeros((2, 2, 2)), np.ones((2, 2, 2)), bogus=1)
    with pytest.raises(ValueError):
        lrfmtc.unfold(np.zeros((2, 2)), 1)
