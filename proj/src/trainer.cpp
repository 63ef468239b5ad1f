#include "cdgcn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>

#include "cdgcn/kernels.hpp"
#include "cdgcn/metrics.hpp"
#include "cdgcn/objective.hpp"
#include "cdgcn/rng.hpp"

namespace cdgcn {

namespace {

void check_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning rate must be > 0");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw std::invalid_argument("train: momentum must be in [0, 1)");
  }
  if (cfg.weight_decay < 0.0) {
    throw std::invalid_argument("train: weight decay must be >= 0");
  }
  if (cfg.bandwidth == 0) {
    throw std::invalid_argument("train: bandwidth must be >= 1");
  }
  if (cfg.lambda < 0.0) {
    throw std::invalid_argument("train: lambda must be >= 0");
  }
  if (!(cfg.delta > 0.0)) {
    throw std::invalid_argument("train: delta must be > 0");
  }
  if (cfg.max_epochs == 0) {
    throw std::invalid_argument("train: max epochs must be >= 1");
  }
  if (cfg.layers != 1 && cfg.layers != 2) {
    throw std::invalid_argument("train: layers must be 1 or 2");
  }
  if (cfg.layers == 2 && cfg.hidden_width == 0) {
    throw std::invalid_argument("train: hidden width required for 2 layers");
  }
}

void check_dataset(const MaskedDataset& ds, const StationGraph& graph) {
  if (!ds.split || !ds.normalized) {
    throw std::invalid_argument(
        "train: dataset must be split and normalized first");
  }
  if (graph.node_count() != ds.stations()) {
    throw std::invalid_argument("train: graph has " +
                                std::to_string(graph.node_count()) +
                                " stations, dataset has " +
                                std::to_string(ds.stations()));
  }
}

ModelParams make_params(const TrainConfig& cfg, std::size_t features,
                        std::size_t time_steps) {
  const std::uint64_t init_seed = seed_stream(cfg.seed, 2);
  if (cfg.layers == 2) {
    return init_params_two_layer(features, cfg.hidden_width, time_steps,
                                 init_seed);
  }
  return init_params(features, features, time_steps, init_seed);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

}  // namespace

divergence_error::divergence_error(std::size_t epoch, double learning_rate)
    : std::runtime_error("training diverged at epoch " +
                         std::to_string(epoch) +
                         " (objective not finite, learning rate " +
                         std::to_string(learning_rate) + ")"),
      epoch_(epoch),
      learning_rate_(learning_rate) {}

std::pair<ModelParams, TrainHistory> train(const MaskedDataset& ds,
                                           const StationGraph& graph,
                                           const TrainConfig& cfg) {
  check_config(cfg);
  check_dataset(ds, graph);

  const std::size_t t_steps = ds.time_steps();
  const MixingMatrix m = MixingMatrix::banded_mean(t_steps, cfg.bandwidth);
  const Tensor3 a = adjacency_tensor(graph.adjacency, t_steps);
  const Tensor3 w_in = impute_initial(ds, cfg.fill);

  ForwardWorkspace ws;
  ws.prime(a, w_in, m);

  ModelParams params = make_params(cfg, ds.features(), t_steps);
  const ObjectiveConfig ocfg{cfg.delta, cfg.lambda, cfg.weight_decay};
  const bool have_val = ds.val.count() > 0;

  TrainHistory history;
  ModelParams best_params = params;
  double best_metric = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::vector<Tensor3> velocity;
  for (const Tensor3& u : params.weights) {
    velocity.emplace_back(u.rows(), u.cols(), u.depth());
  }

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const ForwardCache cache = ws.run(params);
    ObjectiveResult res =
        objective(cache.output(), ds.signal, ds.train, ocfg, params);
    if (!std::isfinite(res.value)) {
      throw divergence_error(epoch, cfg.learning_rate);
    }

    std::vector<Tensor3> grads = backward(cache, res.dpred, params, m);
    for (std::size_t l = 0; l < res.dparams.size(); ++l) {
      grads[l].add_scaled(res.dparams[l], 1.0);
    }
    double grad_sq = 0.0;
    for (const Tensor3& g : grads) {
      grad_sq += kernels::ops().sum_sq(g.data(), g.size());
    }

    const double val_rmse =
        have_val ? rmse(cache.output(), ds.signal, ds.val)
                 : std::numeric_limits<double>::quiet_NaN();
    const double metric = have_val ? val_rmse : res.value;
    history.epochs.push_back(
        {epoch, res.value, val_rmse, std::sqrt(grad_sq)});

    if (metric < best_metric) {
      best_metric = metric;
      history.best_epoch = epoch;
      best_params = params;
      stale = 0;
    } else {
      ++stale;
      if (stale > cfg.patience) break;
    }

    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      velocity[l].scale(cfg.momentum);
      velocity[l].add_scaled(grads[l], 1.0);
      params.weights[l].add_scaled(velocity[l], -cfg.learning_rate);
    }
  }
  history.best_val_rmse = best_metric;
  return {std::move(best_params), std::move(history)};
}

RecoveryResult recover(const MaskedDataset& ds, const StationGraph& graph,
                       const ModelParams& params, const TrainConfig& cfg) {
  check_config(cfg);
  check_dataset(ds, graph);

  const std::size_t t_steps = ds.time_steps();
  const MixingMatrix m = MixingMatrix::banded_mean(t_steps, cfg.bandwidth);
  const Tensor3 a = adjacency_tensor(graph.adjacency, t_steps);
  const Tensor3 w_in = impute_initial(ds, cfg.fill);

  const ForwardCache cache = forward(a, w_in, params, m);
  const Tensor3& h = cache.output();

  // observed values always win; the model only fills the gaps
  Tensor3 out_norm = h;
  for (std::size_t t = 0; t < t_steps; ++t) {
    for (std::size_t f = 0; f < ds.features(); ++f) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        if (ds.observed(i, f, t)) out_norm(i, f, t) = ds.signal(i, f, t);
      }
    }
  }

  RecoveryResult rr;
  rr.report.config = cfg;
  rr.report.missing_ratio = static_cast<double>(ds.hidden.count()) /
                            static_cast<double>(ds.hidden.size());

  const Scaler& sc = *ds.scaler;
  std::optional<Tensor3> truth_cmp;
  if (ds.ground_truth) {
    truth_cmp = cfg.physical_metrics ? *ds.ground_truth
                                     : normalize_with(*ds.ground_truth, sc);
  }
  const Tensor3 h_cmp = cfg.physical_metrics ? denormalize(h, sc) : h;
  const Tensor3 out_cmp =
      cfg.physical_metrics ? denormalize(out_norm, sc) : out_norm;
  const Tensor3 signal_cmp =
      cfg.physical_metrics ? denormalize(ds.signal, sc) : ds.signal;

  if (truth_cmp && ds.hidden.count() > 0) {
    rr.report.hidden = ScopeMetrics{rse(out_cmp, *truth_cmp, ds.hidden),
                                    rmse(out_cmp, *truth_cmp, ds.hidden)};
  }
  if (ds.test.count() > 0) {
    // the pass-through tensor is trivially exact on observed entries, so the
    // generalization check compares the raw model output
    rr.report.test = ScopeMetrics{rse(h_cmp, signal_cmp, ds.test),
                                  rmse(h_cmp, signal_cmp, ds.test)};
  }
  if (truth_cmp) {
    const Mask whole_mask(ds.stations(), ds.features(), t_steps, true);
    rr.report.whole = ScopeMetrics{rse(out_cmp, *truth_cmp, whole_mask),
                                   rmse(out_cmp, *truth_cmp, whole_mask)};
  }
  rr.recovered = denormalize(out_norm, sc);
  for (std::size_t t = 0; t < t_steps; ++t) {
    for (std::size_t f = 0; f < ds.features(); ++f) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        if (ds.observed(i, f, t)) rr.recovered(i, f, t) = ds.raw_signal(i, f, t);
      }
    }
  }
  return rr;
}

PipelineRun train_and_recover(const MaskedDataset& ds,
                              const StationGraph& graph,
                              const TrainConfig& cfg) {
  const double start = now_seconds();
  PipelineRun run;
  std::tie(run.params, run.history) = train(ds, graph, cfg);
  run.result = recover(ds, graph, run.params, cfg);
  run.result.report.wall_seconds = now_seconds() - start;
  return run;
}

std::vector<AblationArm> ablate(const MaskedDataset& ds,
                                const std::vector<Station>& stations,
                                const TrainConfig& cfg) {
  std::vector<AblationArm> arms;
  const struct {
    const char* name;
    bool no_reg;
    bool sym_norm;
  } combos[] = {
      {"full", false, false},
      {"no_reg", true, false},
      {"sym_norm", false, true},
      {"no_reg_sym_norm", true, true},
  };
  for (const auto& combo : combos) {
    TrainConfig arm_cfg = cfg;
    if (combo.no_reg) arm_cfg.lambda = 0.0;
    arm_cfg.adjacency = combo.sym_norm ? AdjacencyMode::sym_normalized
                                       : AdjacencyMode::gaussian;
    const StationGraph graph = build_station_graph(
        stations, arm_cfg.theta, arm_cfg.omega, arm_cfg.adjacency);
    PipelineRun run = train_and_recover(ds, graph, arm_cfg);
    arms.push_back({combo.name, combo.no_reg, combo.sym_norm,
                    std::move(run.result.report)});
  }
  return arms;
}

}  // namespace cdgcn
