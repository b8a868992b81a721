// SPDX-License-Identifier: MIT
#include "lrfmtc/experiments.hpp"

#include "lrfmtc/errors.hpp"
#include "lrfmtc/metrics.hpp"
#include "lrfmtc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace lrfmtc {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) m(r, c) = normal(gen);
    return m;
}

// Index of a uniformly chosen element in [0, n).
Index uniform_index(std::mt19937_64& gen, Index n) {
    return std::uniform_int_distribution<Index>(0, n - 1)(gen);
}

ObservationMask random_mask(const Dims& dims, const MaskSpec& spec) {
    const Index total = dims[0] * dims[1] * dims[2];
    const Index keep = target_observed(total, spec.sampling_ratio);
    std::vector<Index> perm(static_cast<std::size_t>(total));
    for (Index n = 0; n < total; ++n) perm[n] = n;
    std::mt19937_64 gen(spec.seed);
    // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
    for (Index n = 0; n < keep; ++n) std::swap(perm[n], perm[n + uniform_index(gen, total - n)]);
    Tensor3 ind(dims);
    for (Index n = 0; n < keep; ++n) ind[perm[n]] = 1.0;
    return ObservationMask::unchecked(std::move(ind));
}

ObservationMask block_mask(const Dims& dims, const MaskSpec& spec) {
    const Index total = dims[0] * dims[1] * dims[2];
    const Index target_missing = total - target_observed(total, spec.sampling_ratio);
    Tensor3 ind(dims, 1.0);
    std::mt19937_64 gen(spec.seed);
    const std::array<Index, 3> stride{1, dims[0], dims[0] * dims[1]};

    Index missing = 0;
    // Strict phase keeps each run isolated along its fiber; once candidates
    // keep failing, runs may touch existing holes.
    const Index strict_budget = 50 * total + 1000;
    Index attempts = 0;
    while (missing < target_missing) {
        const int mode = spec.block_mode ? spec.block_mode - 1 : static_cast<int>(uniform_index(gen, 3));
        const Index extent = dims[mode];
        const Index len = std::min(spec.l, extent);
        std::array<Index, 3> idx{uniform_index(gen, dims[0]), uniform_index(gen, dims[1]),
                                 uniform_index(gen, dims[2])};
        idx[mode] = uniform_index(gen, extent - len + 1);
        const Index base = idx[0] + dims[0] * (idx[1] + dims[1] * idx[2]);
        const Index s = stride[mode];
        const bool strict = attempts++ < strict_budget;

        bool ok = true;
        Index fresh = 0;
        const Index lo = idx[mode] > 0 ? -1 : 0;
        const Index hi = idx[mode] + len < extent ? len : len - 1;
        for (Index t = lo; t <= hi; ++t) {
            const bool inside = t >= 0 && t < len;
            const bool observed = ind[base + t * s] == 1.0;
            if (inside) fresh += observed;
            if (strict && !observed) ok = false;
        }
        if (!ok || fresh == 0) continue;
        for (Index t = 0; t < len && missing < target_missing; ++t) {
            double& v = ind[base + t * s];
            if (v == 1.0) {
                v = 0.0;
                ++missing;
            }
        }
    }
    return ObservationMask::unchecked(std::move(ind));
}

void accumulate(SweepCell& cell, const TrialRecord& r) { cell.records.push_back(r); }

}  // namespace

void SyntheticSpec::validate() const {
    for (int k = 0; k < 3; ++k) {
        if (dims[k] < 1) throw ArgumentError("extents must be positive");
        if (rank[k] < 1 || rank[k] > dims[k])
            throw ArgumentError("rank " + std::to_string(rank[k]) + " infeasible for extent " +
                                std::to_string(dims[k]));
    }
    for (int k = 0; k < 3; ++k) {
        const Index others = rank[(k + 1) % 3] * rank[(k + 2) % 3];
        if (rank[k] > others)
            throw ArgumentError("rank triple infeasible: R" + std::to_string(k + 1) +
                                " exceeds the product of the other two");
    }
}

std::pair<Tensor3, TuckerModel> generate_tucker(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> normal;
    Tensor3 core(Dims{spec.rank[0], spec.rank[1], spec.rank[2]});
    for (Index n = 0; n < core.size(); ++n) core[n] = normal(gen);

    TuckerModel model;
    model.rank = spec.rank;
    std::array<Matrix, 3> r_factors;
    for (int k = 0; k < 3; ++k) {
        Matrix a = gaussian_matrix(spec.dims[k], spec.rank[k], gen);
        Eigen::HouseholderQR<Matrix> qr(a);
        model.u[k] = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
        if (spec.orthogonalize) {
            r_factors[k] = Matrix::Identity(a.cols(), a.cols());
        } else {
            r_factors[k] = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
        }
    }
    model.core = tucker_reconstruct(core, r_factors[0], r_factors[1], r_factors[2]);
    Tensor3 x = model.reconstruct();
    if (spec.unit_variance) {
        const double mean = x.vec().mean();
        const double sd = std::sqrt((x.vec().array() - mean).square().mean());
        if (sd > 0.0) {
            model.core.vec() /= sd;
            x.vec() /= sd;
        }
    }
    return {std::move(x), std::move(model)};
}

Tensor3 apply_noise(const Tensor3& x, const NoiseSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case NoiseKind::none: return x;
        case NoiseKind::gaussian_snr: {
            if (std::isnan(spec.snr_db)) throw ArgumentError("gaussian noise needs an SNR in dB");
            if (std::isinf(spec.snr_db) && spec.snr_db > 0) return x;
            const double mean = x.vec().mean();
            const double var = (x.vec().array() - mean).square().mean();
            const double sd = std::sqrt(var * std::pow(10.0, -spec.snr_db / 10.0));
            std::mt19937_64 gen(seed);
            std::normal_distribution<double> normal(0.0, sd);
            Tensor3 y = x;
            for (Index n = 0; n < y.size(); ++n) y[n] += normal(gen);
            return y;
        }
        case NoiseKind::poisson: {
            if (!(spec.scale > 0.0)) throw ArgumentError("poisson scale must be positive");
            const double lo = x.vec().minCoeff();
            std::mt19937_64 gen(seed);
            Tensor3 y = x;
            for (Index n = 0; n < y.size(); ++n) {
                const double rate = spec.scale * (x[n] - lo);
                const double draw = rate > 0.0 ? static_cast<double>(
                                                     std::poisson_distribution<long long>(rate)(gen))
                                               : 0.0;
                y[n] = draw / spec.scale + lo;
            }
            return y;
        }
    }
    throw ArgumentError("unknown noise kind");
}

Index target_observed(Index total, double sampling_ratio) {
    const double want = sampling_ratio * static_cast<double>(total);
    // Guard against products like 0.2 * 125000 landing a hair above an integer.
    const double rounded = std::round(want);
    const Index n = std::abs(want - rounded) < 1e-9 * std::max(1.0, want)
                        ? static_cast<Index>(rounded)
                        : static_cast<Index>(std::ceil(want));
    return std::clamp<Index>(n, 1, total);
}

ObservationMask make_mask(const Dims& dims, const MaskSpec& spec) {
    for (Index d : dims)
        if (d < 1) throw ArgumentError("mask extents must be positive");
    if (!(spec.sampling_ratio > 0.0 && spec.sampling_ratio <= 1.0))
        throw ArgumentError("sampling ratio must lie in (0, 1], got " +
                            std::to_string(spec.sampling_ratio));
    if (spec.l < 1) throw ArgumentError("block length must be positive");
    if (spec.block_mode < 0 || spec.block_mode > 3) throw ArgumentError("block_mode must be 0..3");
    return spec.kind == MaskKind::random ? random_mask(dims, spec) : block_mask(dims, spec);
}

std::string to_string(Method m) { return m == Method::lrfmtc ? "lrfmtc" : "halrtc"; }

Method parse_method(const std::string& s) {
    if (s == "lrfmtc") return Method::lrfmtc;
    if (s == "halrtc") return Method::halrtc;
    throw ArgumentError("unknown method '" + s + "' (expected lrfmtc or halrtc)");
}

std::string to_string(MaskKind k) { return k == MaskKind::random ? "random" : "block"; }

MaskKind parse_mask_kind(const std::string& s) {
    if (s == "random") return MaskKind::random;
    if (s == "block" || s == "block_ltuple") return MaskKind::block_ltuple;
    throw ArgumentError("unknown mask kind '" + s + "' (expected random or block)");
}

TrialSeeds trial_seeds(std::uint64_t root, int trial) {
    const std::uint64_t t = derive_seed(root, "trial", static_cast<std::uint64_t>(trial));
    return {t, derive_seed(t, "data"), derive_seed(t, "mask"), derive_seed(t, "noise"),
            derive_seed(t, "init")};
}

TrialRecord run_trial(const TrialSpec& spec, Method method) {
    const TrialSeeds seeds = trial_seeds(spec.root_seed, spec.trial);
    TrialRecord rec;
    rec.method = method;
    rec.trial = spec.trial;
    rec.trial_seed = seeds.trial;

    Tensor3 truth;
    try {
        truth = generate_tucker({spec.dims, spec.rank, seeds.data, spec.orthogonalize, spec.unit_variance}).first;
        const ObservationMask mask =
            make_mask(spec.dims, {spec.mask, spec.sampling_ratio, spec.l, seeds.mask, 0});
        NoiseSpec noise;
        if (std::isfinite(spec.snr_db)) {
            noise.kind = NoiseKind::gaussian_snr;
            noise.snr_db = spec.snr_db;
        }
        const Tensor3 y = apply_noise(truth, noise, seeds.noise);

        if (method == Method::lrfmtc) {
            SolverConfig cfg = spec.solver;
            cfg.seed = seeds.init;
            const auto start = std::chrono::steady_clock::now();
            try {
                SolveResult res = solve(y, mask, cfg);
                rec.rse = rse(truth, cpd_reconstruct(res.factors));
                rec.estimated_rank = res.report.estimated_rank;
                rec.wall_time = res.report.wall_time;
                rec.iterations = res.report.outer_iters;
                rec.converged = res.report.converged;
            } catch (const DegenerateError& e) {
                // Every factor shrank to zero: the estimate is the zero tensor.
                rec.status = "collapsed";
                rec.message = e.what();
                rec.rse = 1.0;
                rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
        } else {
            HalrtcResult res = halrtc_solve(y, mask, spec.halrtc);
            rec.rse = rse(truth, res.estimate);
            rec.estimated_rank = res.report.estimated_rank;
            rec.wall_time = res.report.wall_time;
            rec.iterations = res.report.outer_iters;
            rec.converged = res.report.converged;
        }
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.message = e.what();
        rec.rse = std::numeric_limits<double>::quiet_NaN();
    }
    return rec;
}

void SweepGrid::validate() const {
    if (ranks.empty() || sampling_ratios.empty() || snr_db.empty() || Ls.empty() ||
        alphas.empty() || methods.empty())
        throw ArgumentError("sweep grid has an empty axis");
}

void aggregate(SweepCell& cell) {
    cell.trials = static_cast<int>(cell.records.size());
    cell.failed = 0;
    double sum = 0.0, sum_wall = 0.0;
    std::array<double, 3> rank_sum{};
    int n = 0;
    for (const auto& r : cell.records) {
        if (r.status == "failed") {
            ++cell.failed;
            continue;
        }
        ++n;
        sum += r.rse;
        sum_wall += r.wall_time;
        for (int k = 0; k < 3; ++k) rank_sum[k] += static_cast<double>(r.estimated_rank[k]);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (n == 0) {
        cell.mean_rse = cell.std_rse = cell.mean_wall_time = nan;
        cell.mean_rank = {nan, nan, nan};
        return;
    }
    cell.mean_rse = sum / n;
    cell.mean_wall_time = sum_wall / n;
    for (int k = 0; k < 3; ++k) cell.mean_rank[k] = rank_sum[k] / n;
    double ss = 0.0;
    for (const auto& r : cell.records)
        if (r.status != "failed") ss += (r.rse - cell.mean_rse) * (r.rse - cell.mean_rse);
    cell.std_rse = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

SweepTable run_sweep(const SweepGrid& grid, int trials, int threads) {
    grid.validate();
    if (trials < 1) throw ArgumentError("trials must be positive");
    if (threads <= 0) {
        threads = 1;
        if (const char* env = std::getenv("LRFMTC_THREADS")) threads = std::max(1, std::atoi(env));
    }

    SweepTable table;
    std::vector<TrialSpec> jobs;
    std::vector<std::pair<std::size_t, Method>> job_cell;
    for (const auto& rank : grid.ranks)
        for (double sr : grid.sampling_ratios)
            for (double snr : grid.snr_db)
                for (Index L : grid.Ls)
                    for (double alpha : grid.alphas)
                        for (Method method : grid.methods) {
                            SweepCell cell;
                            cell.rank = rank;
                            cell.sampling_ratio = sr;
                            cell.snr_db = snr;
                            cell.L = L;
                            cell.alpha = alpha;
                            cell.method = method;
                            table.cells.push_back(std::move(cell));
                            for (int t = 0; t < trials; ++t) {
                                TrialSpec spec;
                                spec.dims = grid.dims;
                                spec.rank = rank;
                                spec.sampling_ratio = sr;
                                spec.snr_db = snr;
                                spec.mask = grid.mask;
                                spec.l = grid.l;
                                spec.solver = grid.solver;
                                spec.solver.L = L;
                                spec.solver.alpha = alpha;
                                spec.halrtc = grid.halrtc;
                                spec.root_seed = grid.root_seed;
                                spec.trial = t;
                                jobs.push_back(spec);
                                job_cell.emplace_back(table.cells.size() - 1, method);
                            }
                        }

    std::vector<TrialRecord> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++)
            results[j] = run_trial(jobs[j], job_cell[j].second);
    };
    const int n_workers = std::min<int>(threads, static_cast<int>(jobs.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // Reduction in job order, independent of completion order.
    for (std::size_t j = 0; j < jobs.size(); ++j) accumulate(table.cells[job_cell[j].first], results[j]);
    for (auto& cell : table.cells) aggregate(cell);
    return table;
}

}  // namespace lrfmtc
