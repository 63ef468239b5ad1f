#pragma once

#include <cstdint>
#include <string>

#include "cdgcn/metrics.hpp"
#include "cdgcn/trainer.hpp"

namespace cdgcn::pipeline {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolName = "cdgcn";
inline constexpr const char* kToolVersion = "0.1.0";

// One run = one directory. Every command writes a manifest.json with the
// resolved options, input digests and output names, so a run can be
// reproduced exactly from its manifest.

struct GenOptions {
  std::size_t stations = 20;
  std::size_t features = 5;
  std::size_t time_steps = 168;
  double noise_sd = 0.02;
  double smoothness = 1.0;
  std::uint64_t seed = 0;
  std::string out_dir;
};

/// Writes stations.csv, readings.csv (complete), truth.csv and manifest.json.
void run_gen(const GenOptions& opt);

struct MaskOptions {
  std::string in_dir;
  std::string out_dir;
  double ratio = 0.5;
  std::uint64_t seed = 0;
};

/// Blanks cells of a complete readings file at the requested ratio; writes
/// readings.csv, hidden_mask.csv, stations.csv, truth.csv and manifest.json.
void run_mask(const MaskOptions& opt);

struct RecoverOptions {
  std::string in_dir;
  std::string out_dir;
  TrainConfig cfg;
};

/// Full pipeline: load, split, normalize, build graph, train, recover.
/// Writes recovered.csv, checkpoint.txt, history.csv, report.json and
/// manifest.json.
RecoveryReport run_recover(const RecoverOptions& opt);

struct EvalOptions {
  std::string recovered_path;
  std::string truth_path;
  std::string mask_path;  // required for scope hidden
  MetricScope scope = MetricScope::whole;
};

/// Standalone metric computation; returns the report as serialized JSON.
std::string run_eval(const EvalOptions& opt);

struct AblateOptions {
  std::string in_dir;
  std::string out_dir;
  TrainConfig cfg;
};

/// Runs the four ablation arms; writes ablation.json and manifest.json.
/// Returns a plain-text comparison table.
std::string run_ablate(const AblateOptions& opt);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::string& path);

/// Serialized report.json content for a recovery report.
std::string report_json(const RecoveryReport& report);

}  // namespace cdgcn::pipeline
