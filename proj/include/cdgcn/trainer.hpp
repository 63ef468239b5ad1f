#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cdgcn/dataset.hpp"
#include "cdgcn/graph.hpp"
#include "cdgcn/model.hpp"
#include "cdgcn/tensor.hpp"

namespace cdgcn {

struct TrainConfig {
  double learning_rate = 0.1;
  double momentum = 0.95;  // heavy-ball coefficient; 0 is plain descent
  double weight_decay = 1e-3;
  std::size_t bandwidth = 168;  // may exceed T; rows then average min(b,t)
  double lambda = 0.15;
  double delta = 1.0;
  std::size_t max_epochs = 2000;
  std::size_t patience = 500;  // epochs without validation improvement
  std::uint64_t seed = 0;
  double omega = 0.1;
  double theta = 200.0;
  AdjacencyMode adjacency = AdjacencyMode::gaussian;
  FillPolicy fill = FillPolicy::train_mean;
  std::size_t layers = 1;
  std::size_t hidden_width = 0;   // required when layers == 2
  bool physical_metrics = false;  // report metrics in raw units instead of
                                  // normalized space
};

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  double val_rmse = 0.0;  // NaN when the validation mask is empty
  double grad_norm = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_rmse = 0.0;
};

struct ScopeMetrics {
  double rse = 0.0;
  double rmse = 0.0;
};

struct RecoveryReport {
  std::optional<ScopeMetrics> hidden;  // vs ground truth, hidden entries
  std::optional<ScopeMetrics> test;    // raw model output vs held-out
                                       // observed entries
  std::optional<ScopeMetrics> whole;   // recovered tensor vs ground truth
  double missing_ratio = 0.0;
  TrainConfig config;
  double wall_seconds = 0.0;
};

/// Thrown when the training objective stops being finite.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(std::size_t epoch, double learning_rate);
  std::size_t epoch() const { return epoch_; }
  double learning_rate() const { return learning_rate_; }

 private:
  std::size_t epoch_;
  double learning_rate_;
};

/// Full-batch gradient descent with heavy-ball momentum and validation-based
/// early stopping. Returns the parameters of the best validation epoch.
/// The dataset must be split, normalized and built over the graph's stations.
/// When the validation mask is empty the train objective drives early
/// stopping instead.
std::pair<ModelParams, TrainHistory> train(const MaskedDataset& ds,
                                           const StationGraph& graph,
                                           const TrainConfig& cfg);

struct RecoveryResult {
  Tensor3 recovered;  // raw units; observed entries pass through unchanged
  RecoveryReport report;
};

/// One forward pass; observed entries are passed through, everything else is
/// filled from the model output. Metrics are computed in normalized space
/// unless cfg.physical_metrics is set; scopes without the data they need
/// (e.g. hidden without ground truth) are left absent.
RecoveryResult recover(const MaskedDataset& ds, const StationGraph& graph,
                       const ModelParams& params, const TrainConfig& cfg);

struct PipelineRun {
  ModelParams params;
  TrainHistory history;
  RecoveryResult result;
};

/// train + recover, with report.wall_seconds covering both.
PipelineRun train_and_recover(const MaskedDataset& ds,
                              const StationGraph& graph,
                              const TrainConfig& cfg);

struct AblationArm {
  std::string name;
  bool no_regularization = false;
  bool sym_norm_adjacency = false;
  RecoveryReport report;
};

/// Runs train + recover for every combination of the two ablation switches
/// (regularization off, symmetric-normalized adjacency), sharing the seed.
std::vector<AblationArm> ablate(const MaskedDataset& ds,
                                const std::vector<Station>& stations,
                                const TrainConfig& cfg);

}  // namespace cdgcn
