// SPDX-License-Identifier: MIT
#pragma once

#include "lrfmtc/experiments.hpp"

#include <map>
#include <optional>
#include <string>

namespace lrfmtc {

// TensorFile layout (little endian):
//   bytes 0..3   magic "DT3\0"
//   bytes 4..7   uint32 version = 1
//   bytes 8..31  uint64 I1, I2, I3
//   bytes 32..   I1*I2*I3 float64 values, first index fastest
inline constexpr char kTensorMagic[4] = {'D', 'T', '3', '\0'};
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint64_t kTensorHeaderBytes = 32;

void save_tensor(const std::string& path, const Tensor3& t);
[[nodiscard]] Tensor3 load_tensor(const std::string& path);

/// Matrices share the container with a third extent of 1.
void save_matrix(const std::string& path, const Matrix& m);
[[nodiscard]] Matrix load_matrix(const std::string& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

struct CsvImport {
    Tensor3 tensor;
    std::optional<ObservationMask> mask;  // set when missing cells were allowed
};

/// Reads rows "i1,i2,i3,value" with 1-based indices. Missing cells are an
/// error unless `allow_missing`, in which case they are zero-filled and a
/// mask of the present cells is returned.
[[nodiscard]] CsvImport import_csv(const std::string& path, const Dims& dims,
                                   bool allow_missing = false);

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] double parse_double(const std::string& s);
/// "a,b,c" with integer fields.
[[nodiscard]] RankTriple parse_triple(const std::string& s);

// ---------------------------------------------------------------------------
// Run manifests: flat key=value text.
// ---------------------------------------------------------------------------

using Manifest = std::map<std::string, std::string>;

[[nodiscard]] std::string serialize_manifest(const Manifest& m);
[[nodiscard]] Manifest parse_manifest(const std::string& text);
[[nodiscard]] Manifest read_manifest(const std::string& path);

void store(Manifest& m, const SolverConfig& cfg);
void store(Manifest& m, const HalrtcConfig& cfg);
/// Overwrites the fields present in the manifest; unknown keys are ignored.
void load(const Manifest& m, SolverConfig& cfg);
void load(const Manifest& m, HalrtcConfig& cfg);

/// Sweep grid files use the same syntax with ';'-separated lists, e.g.
///   ranks=2,2,2;4,4,4
///   sampling_ratios=0.2
///   snr_db=20;inf
///   methods=lrfmtc;halrtc
[[nodiscard]] SweepGrid parse_grid(const Manifest& m);

// ---------------------------------------------------------------------------
// CSV reports
// ---------------------------------------------------------------------------

/// iteration,objective,elapsed (one row per subproblem solve; HaLRTC rows
/// carry the relative change instead of an objective).
[[nodiscard]] std::string report_csv(const SolveReport& report);
/// Aggregated sweep rows.
[[nodiscard]] std::string sweep_csv(const SweepTable& table);
/// One row per trial.
[[nodiscard]] std::string trials_csv(const SweepTable& table);

}  // namespace lrfmtc
