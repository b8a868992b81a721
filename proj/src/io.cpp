// SPDX-License-Identifier: MIT
#include "lrfmtc/io.hpp"

#include "lrfmtc/errors.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace lrfmtc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "TensorFile I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T get(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw ArgumentError("not an integer: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw ArgumentError("not an unsigned integer: '" + s + "'");
    return v;
}

std::string triple_str(const std::array<Index, 3>& t) {
    return std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]);
}

template <class F>
void if_present(const Manifest& m, const std::string& key, F&& f) {
    if (auto it = m.find(key); it != m.end()) {
        try {
            f(it->second);
        } catch (const ArgumentError& e) {
            throw ArgumentError("manifest key '" + key + "': " + e.what());
        }
    }
}

}  // namespace

RankTriple parse_triple(const std::string& s) {
    auto parts = split(s, ',');
    if (parts.size() != 3) throw ArgumentError("expected three comma-separated integers: '" + s + "'");
    return {parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2])};
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

double parse_double(const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "inf" || s == "+inf" || s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* begin = s.data();
    if (!s.empty() && s[0] == '+') ++begin;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || p != end || s.empty()) throw ArgumentError("not a number: '" + s + "'");
    return v;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ArgumentError("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw ArgumentError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ArgumentError("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
    }
}

void save_tensor(const std::string& path, const Tensor3& t) {
    std::string out;
    out.reserve(kTensorHeaderBytes + 8 * static_cast<std::size_t>(t.size()));
    out.append(kTensorMagic, 4);
    put<std::uint32_t>(out, kTensorVersion);
    for (Index d : t.dims()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    out.append(reinterpret_cast<const char*>(t.data().data()), 8 * static_cast<std::size_t>(t.size()));
    write_file_atomic(path, out);
}

Tensor3 load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    const std::uint64_t file_size = std::filesystem::file_size(path);

    char header[kTensorHeaderBytes];
    in.read(header, 4);
    if (in.gcount() != 4 || std::memcmp(header, kTensorMagic, 4) != 0)
        throw FormatError("bad magic in '" + path + "': expected bytes 44 54 33 00 (\"DT3\\0\")", 0);
    in.read(header + 4, kTensorHeaderBytes - 4);
    if (static_cast<std::uint64_t>(in.gcount()) != kTensorHeaderBytes - 4)
        throw FormatError("truncated header in '" + path + "'", 4 + static_cast<std::uint64_t>(in.gcount()));
    const auto version = get<std::uint32_t>(header + 4);
    if (version != kTensorVersion)
        throw FormatError("unsupported version " + std::to_string(version) + " in '" + path +
                              "', expected 1",
                          4);

    Dims dims{};
    std::uint64_t count = 1;
    for (int k = 0; k < 3; ++k) {
        const auto d = get<std::uint64_t>(header + 8 + 8 * k);
        if (d == 0) throw FormatError("zero extent in '" + path + "'", 8 + 8 * static_cast<std::uint64_t>(k));
        if (d > std::numeric_limits<std::uint64_t>::max() / 8 / count)
            throw FormatError("extents overflow in '" + path + "'", 8 + 8 * static_cast<std::uint64_t>(k));
        count *= d;
        dims[k] = static_cast<Index>(d);
    }
    const std::uint64_t payload = file_size - kTensorHeaderBytes;
    if (payload != 8 * count)
        throw FormatError("payload of '" + path + "' is " + std::to_string(payload) +
                              " bytes, extents require " + std::to_string(8 * count),
                          kTensorHeaderBytes);

    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(8 * count));
    if (static_cast<std::uint64_t>(in.gcount()) != 8 * count)
        throw FormatError("truncated payload in '" + path + "'",
                          kTensorHeaderBytes + static_cast<std::uint64_t>(in.gcount()));
    return Tensor3(dims, std::move(data));
}

void save_matrix(const std::string& path, const Matrix& m) {
    save_tensor(path, Tensor3(Dims{m.rows(), m.cols(), 1},
                              std::vector<double>(m.data(), m.data() + m.size())));
}

Matrix load_matrix(const std::string& path) {
    Tensor3 t = load_tensor(path);
    if (t.dims()[2] != 1)
        throw FormatError("'" + path + "' holds a tensor, not a matrix (third extent " +
                              std::to_string(t.dims()[2]) + ")",
                          24);
    return Eigen::Map<const Matrix>(t.data().data(), t.dims()[0], t.dims()[1]);
}

CsvImport import_csv(const std::string& path, const Dims& dims, bool allow_missing) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    Tensor3 t(dims);
    Tensor3 seen(dims);
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto f = split(s, ',');
        if (f.size() != 4) throw FormatError("line " + std::to_string(lineno) + ": expected i1,i2,i3,value", lineno);
        std::array<Index, 3> idx{};
        double v = 0.0;
        try {
            for (int k = 0; k < 3; ++k) idx[k] = parse_int(f[k]) - 1;
            v = parse_double(f[3]);
        } catch (const ArgumentError& e) {
            // A non-numeric first line is treated as a header.
            if (lineno == 1) continue;
            throw FormatError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        if (!std::isfinite(v))
            throw FormatError("line " + std::to_string(lineno) + ": non-finite value", lineno);
        for (int k = 0; k < 3; ++k)
            if (idx[k] < 0 || idx[k] >= dims[k])
                throw FormatError("line " + std::to_string(lineno) + ": index " +
                                      std::to_string(idx[k] + 1) + " out of range 1.." +
                                      std::to_string(dims[k]),
                                  lineno);
        if (seen(idx[0], idx[1], idx[2]) != 0.0)
            throw FormatError("line " + std::to_string(lineno) + ": duplicate cell (" +
                                  std::to_string(idx[0] + 1) + "," + std::to_string(idx[1] + 1) +
                                  "," + std::to_string(idx[2] + 1) + ")",
                              lineno);
        seen(idx[0], idx[1], idx[2]) = 1.0;
        t(idx[0], idx[1], idx[2]) = v;
    }
    CsvImport result{std::move(t), std::nullopt};
    Index present = 0;
    for (Index n = 0; n < seen.size(); ++n) present += seen[n] != 0.0;
    if (present < seen.size()) {
        if (!allow_missing)
            throw FormatError("'" + path + "' covers " + std::to_string(present) + " of " +
                                  std::to_string(seen.size()) + " cells",
                              lineno);
        result.mask = ObservationMask(std::move(seen));
    }
    return result;
}

std::string serialize_manifest(const Manifest& m) {
    std::string out;
    for (const auto& [k, v] : m) out += k + "=" + v + "\n";
    return out;
}

Manifest parse_manifest(const std::string& text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw FormatError("manifest line " + std::to_string(lineno) + ": expected key=value", lineno);
        m[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    return m;
}

Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

void store(Manifest& m, const SolverConfig& c) {
    m["alpha"] = format_double(c.alpha);
    m["L"] = std::to_string(c.L);
    m["max_outer"] = std::to_string(c.max_outer);
    m["max_inner"] = std::to_string(c.max_inner);
    m["inner_tol"] = format_double(c.inner_tol);
    m["outer_tol"] = format_double(c.outer_tol);
    m["rank_threshold_ratio"] = format_double(c.rank_threshold_ratio);
    m["step_safety"] = format_double(c.step_safety);
    m["seed"] = std::to_string(c.seed);
    m["als_sweeps"] = std::to_string(c.als_sweeps);
    m["als_ridge"] = format_double(c.als_ridge);
}

void store(Manifest& m, const HalrtcConfig& c) {
    m["halrtc.alphas"] = format_double(c.alphas[0]) + "," + format_double(c.alphas[1]) + "," +
                         format_double(c.alphas[2]);
    m["halrtc.rho"] = format_double(c.rho);
    m["halrtc.rho_growth"] = format_double(c.rho_growth);
    m["halrtc.rho_max"] = format_double(c.rho_max);
    m["halrtc.gamma"] = format_double(c.gamma);
    m["halrtc.max_iters"] = std::to_string(c.max_iters);
    m["halrtc.tol"] = format_double(c.tol);
    m["halrtc.rank_threshold_ratio"] = format_double(c.rank_threshold_ratio);
}

void load(const Manifest& m, SolverConfig& c) {
    if_present(m, "alpha", [&](const std::string& v) { c.alpha = parse_double(v); });
    if_present(m, "L", [&](const std::string& v) { c.L = parse_int(v); });
    if_present(m, "max_outer", [&](const std::string& v) { c.max_outer = static_cast<int>(parse_int(v)); });
    if_present(m, "max_inner", [&](const std::string& v) { c.max_inner = static_cast<int>(parse_int(v)); });
    if_present(m, "inner_tol", [&](const std::string& v) { c.inner_tol = parse_double(v); });
    if_present(m, "outer_tol", [&](const std::string& v) { c.outer_tol = parse_double(v); });
    if_present(m, "rank_threshold_ratio", [&](const std::string& v) { c.rank_threshold_ratio = parse_double(v); });
    if_present(m, "step_safety", [&](const std::string& v) { c.step_safety = parse_double(v); });
    if_present(m, "seed", [&](const std::string& v) { c.seed = parse_u64(v); });
    if_present(m, "als_sweeps", [&](const std::string& v) { c.als_sweeps = static_cast<int>(parse_int(v)); });
    if_present(m, "als_ridge", [&](const std::string& v) { c.als_ridge = parse_double(v); });
}

void load(const Manifest& m, HalrtcConfig& c) {
    if_present(m, "halrtc.alphas", [&](const std::string& v) {
        auto parts = split(v, ',');
        if (parts.size() != 3) throw ArgumentError("expected three weights");
        for (int i = 0; i < 3; ++i) c.alphas[i] = parse_double(parts[i]);
    });
    if_present(m, "halrtc.rho", [&](const std::string& v) { c.rho = parse_double(v); });
    if_present(m, "halrtc.rho_growth", [&](const std::string& v) { c.rho_growth = parse_double(v); });
    if_present(m, "halrtc.rho_max", [&](const std::string& v) { c.rho_max = parse_double(v); });
    if_present(m, "halrtc.gamma", [&](const std::string& v) { c.gamma = parse_double(v); });
    if_present(m, "halrtc.max_iters", [&](const std::string& v) { c.max_iters = static_cast<int>(parse_int(v)); });
    if_present(m, "halrtc.tol", [&](const std::string& v) { c.tol = parse_double(v); });
    if_present(m, "halrtc.rank_threshold_ratio", [&](const std::string& v) { c.rank_threshold_ratio = parse_double(v); });
}

SweepGrid parse_grid(const Manifest& m) {
    SweepGrid g;
    load(m, g.solver);
    load(m, g.halrtc);
    auto list = [](const std::string& v) { return split(v, ';'); };
    if_present(m, "dims", [&](const std::string& v) { g.dims = parse_triple(v); });
    if_present(m, "ranks", [&](const std::string& v) {
        g.ranks.clear();
        for (const auto& s : list(v)) g.ranks.push_back(parse_triple(s));
    });
    if_present(m, "sampling_ratios", [&](const std::string& v) {
        g.sampling_ratios.clear();
        for (const auto& s : list(v)) g.sampling_ratios.push_back(parse_double(s));
    });
    if_present(m, "snr_db", [&](const std::string& v) {
        g.snr_db.clear();
        for (const auto& s : list(v)) g.snr_db.push_back(parse_double(s));
    });
    if_present(m, "Ls", [&](const std::string& v) {
        g.Ls.clear();
        for (const auto& s : list(v)) g.Ls.push_back(parse_int(s));
    });
    if_present(m, "alphas", [&](const std::string& v) {
        g.alphas.clear();
        for (const auto& s : list(v)) g.alphas.push_back(parse_double(s));
    });
    if_present(m, "methods", [&](const std::string& v) {
        g.methods.clear();
        for (const auto& s : list(v)) g.methods.push_back(parse_method(s));
    });
    if_present(m, "mask", [&](const std::string& v) { g.mask = parse_mask_kind(v); });
    if_present(m, "l", [&](const std::string& v) { g.l = parse_int(v); });
    if_present(m, "root_seed", [&](const std::string& v) { g.root_seed = parse_u64(v); });
    // A plain "alpha"/"L" key (as in run manifests) applies when no list is given.
    if (!m.count("alphas") && m.count("alpha")) g.alphas = {g.solver.alpha};
    if (!m.count("Ls") && m.count("L")) g.Ls = {g.solver.L};
    g.validate();
    return g;
}

std::string report_csv(const SolveReport& r) {
    std::string out = "iteration,objective,elapsed\n";
    if (!r.objective_trace.empty()) {
        for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
            out += std::to_string(i + 1) + "," + format_double(r.objective_trace[i]) + "," +
                   format_double(i < r.elapsed.size() ? r.elapsed[i] : 0.0) + "\n";
    } else {
        for (std::size_t i = 0; i < r.change_trace.size(); ++i)
            out += std::to_string(i + 1) + "," + format_double(r.change_trace[i]) + "," +
                   format_double(i < r.elapsed.size() ? r.elapsed[i] : 0.0) + "\n";
    }
    return out;
}

std::string sweep_csv(const SweepTable& t) {
    std::string out =
        "rank1,rank2,rank3,sampling_ratio,snr_db,L,alpha,method,trials,failed,mean_rank1,mean_rank2,"
        "mean_rank3,mean_rse,std_rse,mean_wall_time\n";
    for (const auto& c : t.cells) {
        out += triple_str(c.rank) + "," + format_double(c.sampling_ratio) + "," +
               format_double(c.snr_db) + "," + std::to_string(c.L) + "," + format_double(c.alpha) +
               "," + to_string(c.method) + "," + std::to_string(c.trials) + "," +
               std::to_string(c.failed) + "," + format_double(c.mean_rank[0]) + "," +
               format_double(c.mean_rank[1]) + "," + format_double(c.mean_rank[2]) + "," +
               format_double(c.mean_rse) + "," + format_double(c.std_rse) + "," +
               format_double(c.mean_wall_time) + "\n";
    }
    return out;
}

std::string trials_csv(const SweepTable& t) {
    std::string out =
        "rank1,rank2,rank3,sampling_ratio,snr_db,L,alpha,method,trial,trial_seed,status,est_rank1,"
        "est_rank2,est_rank3,rse,wall_time,iterations,converged\n";
    for (const auto& c : t.cells)
        for (const auto& r : c.records)
            out += triple_str(c.rank) + "," + format_double(c.sampling_ratio) + "," +
                   format_double(c.snr_db) + "," + std::to_string(c.L) + "," +
                   format_double(c.alpha) + "," + to_string(r.method) + "," +
                   std::to_string(r.trial) + "," + std::to_string(r.trial_seed) + "," + r.status +
                   "," + triple_str(r.estimated_rank) + "," + format_double(r.rse) + "," +
                   format_double(r.wall_time) + "," + std::to_string(r.iterations) + "," +
                   (r.converged ? "1" : "0") + "\n";
    return out;
}

}  // namespace lrfmtc
