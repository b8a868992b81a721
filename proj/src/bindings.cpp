// SPDX-License-Identifier: MIT
// Python bindings. Tensors cross the boundary as Fortran-ordered float64
// arrays, which match the in-memory layout of Tensor3.

#include "lrfmtc/errors.hpp"
#include "lrfmtc/experiments.hpp"
#include "lrfmtc/io.hpp"
#include "lrfmtc/linalg.hpp"
#include "lrfmtc/metrics.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace lrfmtc;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

Tensor3 to_tensor(const FArray& a) {
    if (a.ndim() != 3) throw ArgumentError("expected a 3-D array, got " + std::to_string(a.ndim()) + "-D");
    const Dims d{a.shape(0), a.shape(1), a.shape(2)};
    return Tensor3(d, std::vector<double>(a.data(), a.data() + a.size()));
}

FArray from_tensor(const Tensor3& t) {
    const auto& d = t.dims();
    FArray out({d[0], d[1], d[2]});
    std::copy(t.values().begin(), t.values().end(), out.mutable_data());
    return out;
}

ObservationMask to_mask(const FArray& a) { return ObservationMask(to_tensor(a)); }

Dims to_dims(const std::array<Index, 3>& d) { return d; }

SolverConfig solver_config(const py::kwargs& kw) {
    SolverConfig c;
    for (auto [k, v] : kw) {
        const auto key = k.cast<std::string>();
        if (key == "alpha") c.alpha = v.cast<double>();
        else if (key == "L") c.L = v.cast<Index>();
        else if (key == "max_outer") c.max_outer = v.cast<int>();
        else if (key == "max_inner") c.max_inner = v.cast<int>();
        else if (key == "inner_tol") c.inner_tol = v.cast<double>();
        else if (key == "outer_tol") c.outer_tol = v.cast<double>();
        else if (key == "rank_threshold_ratio") c.rank_threshold_ratio = v.cast<double>();
        else if (key == "step_safety") c.step_safety = v.cast<double>();
        else if (key == "seed") c.seed = v.cast<std::uint64_t>();
        else if (key == "als_sweeps") c.als_sweeps = v.cast<int>();
        else if (key == "als_ridge") c.als_ridge = v.cast<double>();
        else throw ArgumentError("solve: unknown option '" + key + "'");
    }
    c.validate();
    return c;
}

HalrtcConfig halrtc_config(const py::kwargs& kw) {
    HalrtcConfig c;
    for (auto [k, v] : kw) {
        const auto key = k.cast<std::string>();
        if (key == "alphas") c.alphas = v.cast<std::array<double, 3>>();
        else if (key == "rho") c.rho = v.cast<double>();
        else if (key == "rho_growth") c.rho_growth = v.cast<double>();
        else if (key == "rho_max") c.rho_max = v.cast<double>();
        else if (key == "gamma") c.gamma = v.cast<double>();
        else if (key == "max_iters") c.max_iters = v.cast<int>();
        else if (key == "tol") c.tol = v.cast<double>();
        else if (key == "rank_threshold_ratio") c.rank_threshold_ratio = v.cast<double>();
        else throw ArgumentError("halrtc_solve: unknown option '" + key + "'");
    }
    c.validate();
    return c;
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["objective_trace"] = r.objective_trace;
    d["change_trace"] = r.change_trace;
    d["outer_iters"] = r.outer_iters;
    d["inner_iters"] = r.inner_iters_total;
    d["converged"] = r.converged;
    d["estimated_rank"] = r.estimated_rank;
    d["wall_time"] = r.wall_time;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Low-rank tensor completion with automatic Tucker rank estimation";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);

    m.def("unfold", [](const FArray& t, int mode) { return unfold(to_tensor(t), mode); },
          py::arg("tensor"), py::arg("mode"));
    m.def("fold", [](const Matrix& mat, int mode, std::array<Index, 3> dims) {
        return from_tensor(fold(mat, mode, to_dims(dims)));
    }, py::arg("matrix"), py::arg("mode"), py::arg("dims"));
    m.def("khatri_rao", &khatri_rao, py::arg("a"), py::arg("b"));
    m.def("cpd_reconstruct", [](const Matrix& b1, const Matrix& b2, const Matrix& b3) {
        FactorSet f;
        f.b = {b1, b2, b3};
        f.validate();
        return from_tensor(cpd_reconstruct(f));
    }, py::arg("b1"), py::arg("b2"), py::arg("b3"));
    m.def("tucker_reconstruct", [](const FArray& core, const Matrix& a1, const Matrix& a2, const Matrix& a3) {
        return from_tensor(tucker_reconstruct(to_tensor(core), a1, a2, a3));
    }, py::arg("core"), py::arg("a1"), py::arg("a2"), py::arg("a3"));
    m.def("thin_svd", [](const Matrix& a) {
        SvdResult s = thin_svd(a);
        return py::make_tuple(s.u, s.s, s.vt);
    }, py::arg("matrix"));
    m.def("svt", [](const Matrix& a, double t) { return svt(a, t); }, py::arg("matrix"), py::arg("threshold"));

    m.def("solve", [](const FArray& y, const FArray& mask, const py::kwargs& kw) {
        const SolverConfig cfg = solver_config(kw);
        const Tensor3 yt = to_tensor(y);
        const ObservationMask o = to_mask(mask);
        SolveResult r;
        {
            py::gil_scoped_release release;
            r = solve(yt, o, cfg);
        }
        py::dict out;
        out["estimate"] = from_tensor(cpd_reconstruct(r.factors));
        out["core"] = from_tensor(r.model.core);
        out["factors"] = py::make_tuple(r.model.u[0], r.model.u[1], r.model.u[2]);
        out["cpd_factors"] = py::make_tuple(r.factors.b[0], r.factors.b[1], r.factors.b[2]);
        out["report"] = report_dict(r.report);
        return out;
    }, py::arg("y"), py::arg("mask"),
       "Complete y observed on mask. Keyword options: alpha, L, max_outer, max_inner, inner_tol,\n"
       "outer_tol, rank_threshold_ratio, step_safety, seed, als_sweeps, als_ridge.");

    m.def("halrtc_solve", [](const FArray& y, const FArray& mask, const py::kwargs& kw) {
        const HalrtcConfig cfg = halrtc_config(kw);
        const Tensor3 yt = to_tensor(y);
        const ObservationMask o = to_mask(mask);
        HalrtcResult r;
        {
            py::gil_scoped_release release;
            r = halrtc_solve(yt, o, cfg);
        }
        py::dict out;
        out["estimate"] = from_tensor(r.estimate);
        out["report"] = report_dict(r.report);
        return out;
    }, py::arg("y"), py::arg("mask"));

    m.def("generate_tucker", [](std::array<Index, 3> dims, RankTriple rank, std::uint64_t seed,
                                bool orthogonalize, bool unit_variance) {
        SyntheticSpec s;
        s.dims = dims;
        s.rank = rank;
        s.seed = seed;
        s.orthogonalize = orthogonalize;
        s.unit_variance = unit_variance;
        auto [x, model] = generate_tucker(s);
        return py::make_tuple(from_tensor(x), from_tensor(model.core),
                              py::make_tuple(model.u[0], model.u[1], model.u[2]));
    }, py::arg("dims"), py::arg("rank"), py::arg("seed") = 0, py::arg("orthogonalize") = true,
       py::arg("unit_variance") = true);

    m.def("make_mask", [](std::array<Index, 3> dims, double sr, const std::string& kind, Index l,
                          std::uint64_t seed, int block_mode) {
        MaskSpec s;
        s.kind = parse_mask_kind(kind);
        s.sampling_ratio = sr;
        s.l = l;
        s.seed = seed;
        s.block_mode = block_mode;
        return from_tensor(make_mask(dims, s).indicator());
    }, py::arg("dims"), py::arg("sampling_ratio"), py::arg("kind") = "random", py::arg("l") = 4,
       py::arg("seed") = 0, py::arg("block_mode") = 0);

    m.def("apply_noise", [](const FArray& x, const std::string& kind, double snr_db, double scale,
                            std::uint64_t seed) {
        NoiseSpec s;
        if (kind == "gaussian") s.kind = NoiseKind::gaussian_snr;
        else if (kind == "poisson") s.kind = NoiseKind::poisson;
        else if (kind == "none") s.kind = NoiseKind::none;
        else throw ArgumentError("apply_noise: kind must be gaussian, poisson or none, got '" + kind + "'");
        s.snr_db = snr_db;
        s.scale = scale;
        return from_tensor(apply_noise(to_tensor(x), s, seed));
    }, py::arg("x"), py::arg("kind") = "gaussian", py::arg("snr_db") = 20.0, py::arg("scale") = 100.0,
       py::arg("seed") = 0);

    m.def("rse", [](const FArray& a, const FArray& b) { return rse(to_tensor(a), to_tensor(b)); },
          py::arg("truth"), py::arg("estimate"));
    m.def("psnr", [](const FArray& a, const FArray& b, double peak) {
        return psnr(to_tensor(a), to_tensor(b), peak);
    }, py::arg("truth"), py::arg("estimate"), py::arg("peak"));
    m.def("ssim", [](const FArray& a, const FArray& b, double peak) {
        return ssim(to_tensor(a), to_tensor(b), peak);
    }, py::arg("truth"), py::arg("estimate"), py::arg("peak"));

    m.def("save_tensor", [](const std::string& path, const FArray& t) { save_tensor(path, to_tensor(t)); },
          py::arg("path"), py::arg("tensor"));
    m.def("load_tensor", [](const std::string& path) { return from_tensor(load_tensor(path)); },
          py::arg("path"));

    m.attr("__version__") = LRFMTC_VERSION;
}
