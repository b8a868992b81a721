// SPDX-License-Identifier: MIT
#include "lrfmtc/cli.hpp"

#include "lrfmtc/errors.hpp"
#include "lrfmtc/io.hpp"
#include "lrfmtc/metrics.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace lrfmtc {

namespace {

constexpr const char* kArtifactVersion = LRFMTC_VERSION;

// "out/x.dt3" + "core" -> "out/x.core.dt3"
std::string sibling(const std::string& path, const std::string& tag, const std::string& ext = ".dt3") {
    std::filesystem::path p(path);
    const std::string stem = p.has_extension() ? p.stem().string() : p.filename().string();
    return (p.parent_path() / (stem + "." + tag + ext)).string();
}

std::string triple_csv(const RankTriple& r) {
    return std::to_string(r[0]) + "," + std::to_string(r[1]) + "," + std::to_string(r[2]);
}

void save_model(const std::string& out, const TuckerModel& model) {
    save_tensor(sibling(out, "core"), model.core);
    for (int k = 0; k < 3; ++k) save_matrix(sibling(out, "u" + std::to_string(k + 1)), model.u[k]);
}

struct GenerateArgs {
    std::string dims = "50,50,50";
    std::string rank = "2,2,2";
    std::uint64_t seed = 0;
    bool raw_factors = false;
    bool raw_scale = false;
    std::string out;
};

struct MaskArgs {
    std::string dims = "50,50,50";
    double sr = 0.2;
    std::string kind = "random";
    Index l = 4;
    int block_mode = 0;
    std::uint64_t seed = 0;
    std::string out;
};

struct NoiseArgs {
    std::string input;
    std::string kind = "gaussian";
    double snr = 20.0;
    double scale = 100.0;
    std::uint64_t seed = 0;
    std::string out;
};

struct CompleteArgs {
    std::optional<std::string> method;
    std::string input;
    std::string mask;
    std::string config;
    std::optional<double> alpha;
    std::optional<Index> L;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_outer;
    std::string out = "completed.dt3";
    std::string report;
};

struct EvaluateArgs {
    std::string truth;
    std::string estimate;
    std::optional<double> peak;
    std::string out;
};

struct SweepArgs {
    std::string grid;
    int trials = 10;
    int threads = 0;
    std::string out = "sweep.csv";
};

int run_generate(const GenerateArgs& a, std::ostream& out) {
    SyntheticSpec spec;
    spec.dims = parse_triple(a.dims);
    spec.rank = parse_triple(a.rank);
    spec.seed = a.seed;
    spec.orthogonalize = !a.raw_factors;
    spec.unit_variance = !a.raw_scale;
    auto [tensor, model] = generate_tucker(spec);
    save_tensor(a.out, tensor);
    save_model(a.out, model);
    Manifest m{{"artifact_version", kArtifactVersion},
               {"command", "generate"},
               {"dims", a.dims},
               {"rank", a.rank},
               {"seed", std::to_string(a.seed)},
               {"orthogonalize", spec.orthogonalize ? "1" : "0"},
               {"unit_variance", spec.unit_variance ? "1" : "0"}};
    write_file_atomic(sibling(a.out, "manifest", ".txt"), serialize_manifest(m));
    out << "wrote " << a.out << "\n";
    return kExitOk;
}

int run_mask(const MaskArgs& a, std::ostream& out) {
    MaskSpec spec;
    spec.kind = parse_mask_kind(a.kind);
    spec.sampling_ratio = a.sr;
    spec.l = a.l;
    spec.block_mode = a.block_mode;
    spec.seed = a.seed;
    const ObservationMask mask = make_mask(parse_triple(a.dims), spec);
    save_tensor(a.out, mask.indicator());
    out << "wrote " << a.out << " (" << mask.observed_count() << " observed)\n";
    return kExitOk;
}

int run_noise(const NoiseArgs& a, std::ostream& out) {
    NoiseSpec spec;
    if (a.kind == "gaussian")
        spec.kind = NoiseKind::gaussian_snr;
    else if (a.kind == "poisson")
        spec.kind = NoiseKind::poisson;
    else if (a.kind == "none")
        spec.kind = NoiseKind::none;
    else
        throw ArgumentError("unknown noise kind '" + a.kind + "'");
    spec.snr_db = a.snr;
    spec.scale = a.scale;
    save_tensor(a.out, apply_noise(load_tensor(a.input), spec, a.seed));
    out << "wrote " << a.out << "\n";
    return kExitOk;
}

int run_complete(const CompleteArgs& a, std::ostream& out) {
    Manifest cfg;
    if (!a.config.empty()) cfg = read_manifest(a.config);
    Method method = Method::lrfmtc;
    if (a.method)
        method = parse_method(*a.method);
    else if (auto it = cfg.find("method"); it != cfg.end())
        method = parse_method(it->second);

    SolverConfig solver;
    HalrtcConfig halrtc;
    load(cfg, solver);
    load(cfg, halrtc);
    if (a.alpha) solver.alpha = *a.alpha;
    if (a.L) solver.L = *a.L;
    if (a.seed) solver.seed = *a.seed;
    if (a.max_outer) solver.max_outer = *a.max_outer;

    const Tensor3 y = load_tensor(a.input);
    const ObservationMask mask = a.mask.empty() ? ObservationMask::full(y.dims())
                                                : ObservationMask(load_tensor(a.mask));
    if (mask.dims() != y.dims()) throw ArgumentError("mask and input extents differ");

    Tensor3 estimate;
    TuckerModel model;
    SolveReport report;
    if (method == Method::lrfmtc) {
        SolveResult r = solve(y, mask, solver);
        model = std::move(r.model);
        estimate = model.reconstruct();
        report = std::move(r.report);
    } else {
        HalrtcResult r = halrtc_solve(y, mask, halrtc);
        estimate = std::move(r.estimate);
        report = std::move(r.report);
        // The baseline has no factor model; dump its truncated HOSVD instead.
        model.rank = report.estimated_rank;
        std::array<Matrix, 3> u;
        for (int k = 0; k < 3; ++k) {
            const Matrix unf = unfold(estimate, k + 1);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(unf * unf.transpose());
            u[k] = eig.eigenvectors().rightCols(report.estimated_rank[k]).rowwise().reverse();
        }
        Tensor3 core = estimate;
        for (int k = 0; k < 3; ++k) core = mode_product(core, u[k].transpose(), k + 1);
        model.core = std::move(core);
        for (int k = 0; k < 3; ++k) model.u[k] = std::move(u[k]);
    }

    save_tensor(a.out, estimate);
    save_model(a.out, model);
    const std::string report_path = a.report.empty() ? sibling(a.out, "report", ".csv") : a.report;
    write_file_atomic(report_path, report_csv(report));
    const std::string summary =
        "method,est_rank1,est_rank2,est_rank3,outer_iters,inner_iters,converged,wall_time\n" +
        to_string(method) + "," + triple_csv(report.estimated_rank) + "," +
        std::to_string(report.outer_iters) + "," + std::to_string(report.inner_iters_total) + "," +
        (report.converged ? "1" : "0") + "," + format_double(report.wall_time) + "\n";
    write_file_atomic(sibling(a.out, "summary", ".csv"), summary);

    Manifest m = cfg;
    store(m, solver);
    store(m, halrtc);
    m["artifact_version"] = kArtifactVersion;
    m["command"] = "complete";
    m["method"] = to_string(method);
    m["input"] = a.input;
    m["mask"] = a.mask;
    write_file_atomic(sibling(a.out, "manifest", ".txt"), serialize_manifest(m));

    out << summary;
    return kExitOk;
}

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const Tensor3 truth = load_tensor(a.truth);
    const Tensor3 est = load_tensor(a.estimate);
    if (truth.dims() != est.dims()) throw ArgumentError("truth and estimate extents differ");
    const double peak = a.peak ? *a.peak : truth.vec().cwiseAbs().maxCoeff();
    double s = std::numeric_limits<double>::quiet_NaN();
    try {
        s = ssim(truth, est, peak);
    } catch (const ArgumentError&) {
        // slices smaller than the SSIM window
    }
    const std::string csv = "rse,psnr,ssim\n" + format_double(rse(truth, est)) + "," +
                            format_double(psnr(truth, est, peak)) + "," + format_double(s) + "\n";
    out << csv;
    if (!a.out.empty()) write_file_atomic(a.out, csv);
    return kExitOk;
}

int run_sweep_cmd(const SweepArgs& a, std::ostream& out) {
    if (a.trials < 1) throw ArgumentError("--trials must be positive");
    const SweepGrid grid = parse_grid(read_manifest(a.grid));
    const SweepTable table = run_sweep(grid, a.trials, a.threads);
    write_file_atomic(a.out, sweep_csv(table));
    write_file_atomic(sibling(a.out, "trials", ".csv"), trials_csv(table));
    out << sweep_csv(table);
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-rank factor matrix tensor completion"};
    app.set_version_flag("--version", std::string(kArtifactVersion));
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Synthetic Tucker tensor and its ground-truth model");
    g->add_option("--dims", gen.dims, "I1,I2,I3")->capture_default_str();
    g->add_option("--rank", gen.rank, "R1,R2,R3")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_flag("--raw-factors", gen.raw_factors, "Skip orthonormalizing the factors");
    g->add_flag("--raw-scale", gen.raw_scale, "Skip the unit-variance rescaling");
    g->add_option("-o,--output", gen.out)->required();

    MaskArgs mk;
    auto* m = app.add_subcommand("mask", "Observation mask");
    m->add_option("--dims", mk.dims)->capture_default_str();
    m->add_option("--sr", mk.sr, "Sampling ratio")->capture_default_str();
    m->add_option("--kind", mk.kind, "random | block")->capture_default_str();
    m->add_option("--l", mk.l, "Run length of block missingness")->capture_default_str();
    m->add_option("--block-mode", mk.block_mode, "0: random fiber mode per run, else 1..3");
    m->add_option("--seed", mk.seed)->capture_default_str();
    m->add_option("-o,--output", mk.out)->required();

    NoiseArgs nz;
    auto* n = app.add_subcommand("noise", "Add noise to a tensor");
    n->add_option("--input", nz.input)->required();
    n->add_option("--kind", nz.kind, "gaussian | poisson | none")->capture_default_str();
    n->add_option("--snr", nz.snr, "Target SNR in dB (gaussian)")->capture_default_str();
    n->add_option("--scale", nz.scale, "Counts per unit intensity (poisson)")->capture_default_str();
    n->add_option("--seed", nz.seed)->capture_default_str();
    n->add_option("-o,--output", nz.out)->required();

    CompleteArgs cp;
    auto* c = app.add_subcommand("complete", "Complete a partially observed tensor");
    c->add_option("--method", cp.method, "lrfmtc | halrtc (default: manifest value or lrfmtc)");
    c->add_option("--input", cp.input)->required();
    c->add_option("--mask", cp.mask, "Mask TensorFile (default: fully observed)");
    c->add_option("--config", cp.config, "Run manifest to reload");
    c->add_option("--alpha", cp.alpha);
    c->add_option("--L", cp.L);
    c->add_option("--seed", cp.seed);
    c->add_option("--max-outer", cp.max_outer);
    c->add_option("-o,--output", cp.out)->capture_default_str();
    c->add_option("--report", cp.report, "SolveReport CSV (default: <output>.report.csv)");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "RSE, PSNR and SSIM of an estimate");
    e->add_option("--truth", ev.truth)->required();
    e->add_option("--estimate", ev.estimate)->required();
    e->add_option("--peak", ev.peak, "PSNR/SSIM peak (default: max |truth|)");
    e->add_option("-o,--output", ev.out, "Also write the CSV here");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Cartesian experiment sweep");
    s->add_option("--grid", sw.grid)->required();
    s->add_option("--trials", sw.trials)->capture_default_str();
    s->add_option("--threads", sw.threads, "0: LRFMTC_THREADS or 1");
    s->add_option("-o,--output", sw.out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) {
            app.exit(ex, out, err);
            return kExitOk;
        }
        err << "error: " << ex.what() << "\n";
        return kExitArgument;
    }

    try {
        if (g->parsed()) return run_generate(gen, out);
        if (m->parsed()) return run_mask(mk, out);
        if (n->parsed()) return run_noise(nz, out);
        if (c->parsed()) return run_complete(cp, out);
        if (e->parsed()) return run_evaluate(ev, out);
        if (s->parsed()) return run_sweep_cmd(sw, out);
    } catch (const FormatError& ex) {
        err << "format error: " << ex.what() << "\n";
        return kExitFormat;
    } catch (const ArgumentError& ex) {
        err << "argument error: " << ex.what() << "\n";
        return kExitArgument;
    } catch (const NumericalError& ex) {
        err << "numerical error: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const DegenerateError& ex) {
        err << "numerical error: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitInternal;
    }
    return kExitArgument;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace lrfmtc
