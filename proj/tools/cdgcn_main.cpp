// cdgcn: batch pipeline for recovering missing entries in station/feature/
// time sensor tensors with a mixing-matrix tensor graph convolution.
//
// Subcommands: gen | mask | recover | eval | ablate
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cdgcn/kernels.hpp"
#include "cdgcn/pipeline.hpp"
#include "cdgcn/trainer.hpp"

namespace {

using cdgcn::TrainConfig;

struct TrainFlagStrings {
  std::string adjacency = "gaussian";
  std::string fill = "mean";
  std::string metric_space = "normalized";
};

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, TrainFlagStrings& s) {
  cmd->add_option("--lr", cfg.learning_rate, "Learning rate")
      ->capture_default_str();
  cmd->add_option("--momentum", cfg.momentum,
                  "Heavy-ball momentum in [0, 1); 0 is plain descent")
      ->capture_default_str();
  cmd->add_option("--weight-decay", cfg.weight_decay, "L2 coefficient on U")
      ->capture_default_str();
  cmd->add_option("--bandwidth", cfg.bandwidth,
                  "Mixing matrix bandwidth (time steps averaged per row)")
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.lambda, "Temporal smoothness strength")
      ->capture_default_str();
  cmd->add_option("--delta", cfg.delta, "Huber threshold")
      ->capture_default_str();
  cmd->add_option("--max-epochs", cfg.max_epochs, "Epoch budget")
      ->capture_default_str();
  cmd->add_option("--patience", cfg.patience,
                  "Epochs without validation improvement before stopping")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Run seed (split + init)")
      ->capture_default_str();
  cmd->add_option("--omega", cfg.omega, "Similarity threshold")
      ->capture_default_str();
  cmd->add_option("--theta", cfg.theta, "Gaussian kernel width, km")
      ->capture_default_str();
  cmd->add_option("--adjacency", s.adjacency, "gaussian | sym-norm")
      ->capture_default_str();
  cmd->add_option("--fill", s.fill, "Input fill policy: mean | zero")
      ->capture_default_str();
  cmd->add_option("--layers", cfg.layers, "1 or 2")->capture_default_str();
  cmd->add_option("--hidden-width", cfg.hidden_width,
                  "Hidden width for the 2-layer variant")
      ->capture_default_str();
  cmd->add_option("--metric-space", s.metric_space,
                  "normalized | physical")
      ->capture_default_str();
}

void resolve_train_flags(const TrainFlagStrings& s, TrainConfig& cfg) {
  if (s.adjacency == "gaussian") {
    cfg.adjacency = cdgcn::AdjacencyMode::gaussian;
  } else if (s.adjacency == "sym-norm") {
    cfg.adjacency = cdgcn::AdjacencyMode::sym_normalized;
  } else {
    throw std::invalid_argument("--adjacency must be gaussian or sym-norm");
  }
  if (s.fill == "mean") {
    cfg.fill = cdgcn::FillPolicy::train_mean;
  } else if (s.fill == "zero") {
    cfg.fill = cdgcn::FillPolicy::zero;
  } else {
    throw std::invalid_argument("--fill must be mean or zero");
  }
  if (s.metric_space == "normalized") {
    cfg.physical_metrics = false;
  } else if (s.metric_space == "physical") {
    cfg.physical_metrics = true;
  } else {
    throw std::invalid_argument("--metric-space must be normalized or physical");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal sensor signal recovery"};
  app.set_version_flag("--version",
                       std::string(cdgcn::pipeline::kToolName) + " " +
                           cdgcn::pipeline::kToolVersion);
  app.require_subcommand(1);

  cdgcn::pipeline::GenOptions gen_opt;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic benchmark");
  gen->add_option("--n", gen_opt.stations, "Stations")->capture_default_str();
  gen->add_option("--f", gen_opt.features, "Features")->capture_default_str();
  gen->add_option("--t", gen_opt.time_steps, "Time steps")
      ->capture_default_str();
  gen->add_option("--noise-sd", gen_opt.noise_sd, "White noise level")
      ->capture_default_str();
  gen->add_option("--smoothness", gen_opt.smoothness,
                  "Temporal drift slowness (> 0)")
      ->capture_default_str();
  gen->add_option("--seed", gen_opt.seed, "Generator seed")
      ->capture_default_str();
  gen->add_option("--out", gen_opt.out_dir, "Output directory")->required();

  cdgcn::pipeline::MaskOptions mask_opt;
  CLI::App* mask = app.add_subcommand("mask", "Blank cells at a missing ratio");
  mask->add_option("--in", mask_opt.in_dir, "Input directory")->required();
  mask->add_option("--out", mask_opt.out_dir, "Output directory")->required();
  mask->add_option("--ratio", mask_opt.ratio, "Missing ratio in [0, 1)")
      ->required();
  mask->add_option("--seed", mask_opt.seed, "Mask seed")
      ->capture_default_str();

  cdgcn::pipeline::RecoverOptions rec_opt;
  TrainFlagStrings rec_flags;
  CLI::App* rec = app.add_subcommand("recover", "Train and fill the gaps");
  rec->add_option("--in", rec_opt.in_dir, "Input directory")->required();
  rec->add_option("--out", rec_opt.out_dir, "Output directory")->required();
  add_train_flags(rec, rec_opt.cfg, rec_flags);

  cdgcn::pipeline::EvalOptions eval_opt;
  std::string eval_scope = "whole";
  CLI::App* eval = app.add_subcommand("eval", "Standalone metric computation");
  eval->add_option("--recovered", eval_opt.recovered_path, "Recovered CSV")
      ->required();
  eval->add_option("--truth", eval_opt.truth_path, "Ground truth CSV")
      ->required();
  eval->add_option("--mask", eval_opt.mask_path,
                   "Hidden mask CSV (required for --scope hidden)");
  eval->add_option("--scope", eval_scope, "hidden | whole")
      ->capture_default_str();

  cdgcn::pipeline::AblateOptions abl_opt;
  TrainFlagStrings abl_flags;
  CLI::App* abl = app.add_subcommand("ablate", "Run the ablation arms");
  abl->add_option("--in", abl_opt.in_dir, "Input directory")->required();
  abl->add_option("--out", abl_opt.out_dir, "Output directory")->required();
  add_train_flags(abl, abl_opt.cfg, abl_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      cdgcn::pipeline::run_gen(gen_opt);
      std::printf("wrote %s/{stations,readings,truth}.csv\n",
                  gen_opt.out_dir.c_str());
    } else if (mask->parsed()) {
      cdgcn::pipeline::run_mask(mask_opt);
      std::printf("wrote %s/readings.csv with ratio %g\n",
                  mask_opt.out_dir.c_str(), mask_opt.ratio);
    } else if (rec->parsed()) {
      resolve_train_flags(rec_flags, rec_opt.cfg);
      const cdgcn::RecoveryReport report =
          cdgcn::pipeline::run_recover(rec_opt);
      std::printf("kernels: %s\n",
                  std::string(cdgcn::kernels::backend_name()).c_str());
      if (report.hidden) {
        std::printf("hidden  rse %.6f  rmse %.6f\n", report.hidden->rse,
                    report.hidden->rmse);
      }
      if (report.test) {
        std::printf("test    rse %.6f  rmse %.6f\n", report.test->rse,
                    report.test->rmse);
      }
      if (report.whole) {
        std::printf("whole   rse %.6f  rmse %.6f\n", report.whole->rse,
                    report.whole->rmse);
      }
      std::printf("report: %s/report.json (%.1fs)\n", rec_opt.out_dir.c_str(),
                  report.wall_seconds);
    } else if (eval->parsed()) {
      if (eval_scope == "hidden") {
        eval_opt.scope = cdgcn::MetricScope::hidden;
      } else if (eval_scope == "whole") {
        eval_opt.scope = cdgcn::MetricScope::whole;
      } else {
        throw std::invalid_argument("--scope must be hidden or whole");
      }
      std::fputs(cdgcn::pipeline::run_eval(eval_opt).c_str(), stdout);
    } else if (abl->parsed()) {
      resolve_train_flags(abl_flags, abl_opt.cfg);
      std::fputs(cdgcn::pipeline::run_ablate(abl_opt).c_str(), stdout);
      std::printf("details: %s/ablation.json\n", abl_opt.out_dir.c_str());
    }
  } catch (const cdgcn::divergence_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
