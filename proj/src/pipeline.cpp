#include "cdgcn/pipeline.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cdgcn/csv_io.hpp"
#include "cdgcn/dataset.hpp"
#include "cdgcn/rng.hpp"

namespace cdgcn::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for writing");
  }
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

ordered_json config_json(const TrainConfig& cfg) {
  ordered_json j;
  j["learning_rate"] = cfg.learning_rate;
  j["momentum"] = cfg.momentum;
  j["weight_decay"] = cfg.weight_decay;
  j["bandwidth"] = cfg.bandwidth;
  j["lambda"] = cfg.lambda;
  j["delta"] = cfg.delta;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["seed"] = cfg.seed;
  j["omega"] = cfg.omega;
  j["theta"] = cfg.theta;
  j["adjacency"] =
      cfg.adjacency == AdjacencyMode::gaussian ? "gaussian" : "sym-norm";
  j["fill"] = cfg.fill == FillPolicy::train_mean ? "mean" : "zero";
  j["layers"] = cfg.layers;
  j["hidden_width"] = cfg.hidden_width;
  j["metric_space"] = cfg.physical_metrics ? "physical" : "normalized";
  return j;
}

ordered_json scope_json(const std::optional<ScopeMetrics>& m) {
  if (!m) return nullptr;
  ordered_json j;
  j["rse"] = m->rse;
  j["rmse"] = m->rmse;
  return j;
}

ordered_json report_obj(const RecoveryReport& report) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  ordered_json scopes;
  scopes["hidden"] = scope_json(report.hidden);
  scopes["test"] = scope_json(report.test);
  scopes["whole"] = scope_json(report.whole);
  j["scopes"] = scopes;
  j["config"] = config_json(report.config);
  ordered_json seeds;
  seeds["run"] = report.config.seed;
  seeds["split"] = seed_stream(report.config.seed, 1);
  seeds["init"] = seed_stream(report.config.seed, 2);
  j["seeds"] = seeds;
  j["missing_ratio"] = report.missing_ratio;
  j["wall_seconds"] = report.wall_seconds;
  return j;
}

void write_manifest(const fs::path& out_dir, const char* command,
                    ordered_json options,
                    const std::vector<fs::path>& inputs,
                    const std::vector<std::string>& outputs) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["command"] = command;
  j["options"] = std::move(options);
  ordered_json in;
  for (const fs::path& p : inputs) {
    in[p.filename().string()] = file_digest(p.string());
  }
  j["inputs"] = in;
  j["outputs"] = outputs;
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
}

struct LoadedRun {
  std::vector<Station> stations;
  std::vector<std::string> feature_names;
  MaskedDataset ds;
  bool have_truth = false;
};

LoadedRun load_run_inputs(const fs::path& in_dir, std::uint64_t seed) {
  LoadedRun run;
  run.stations = load_stations((in_dir / "stations.csv").string());
  ReadingsData readings =
      load_readings((in_dir / "readings.csv").string(), run.stations);
  run.feature_names = readings.feature_names;

  std::optional<Tensor3> truth;
  const fs::path truth_path = in_dir / "truth.csv";
  if (fs::exists(truth_path)) {
    ReadingsData t = load_readings(truth_path.string(), run.stations);
    if (t.observed.count() != t.observed.size()) {
      throw std::runtime_error(truth_path.string() + ": has missing cells");
    }
    if (!t.values.same_dims(readings.values)) {
      throw std::runtime_error(truth_path.string() +
                               ": dims do not match readings.csv");
    }
    truth = std::move(t.values);
    run.have_truth = true;
  }

  run.ds = make_masked_dataset(std::move(readings.values),
                               std::move(readings.observed), std::move(truth));
  split_observed(run.ds, 0.6, 0.2, 0.2, seed_stream(seed, 1));
  normalize(run.ds);
  return run;
}

std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%-12.6f", v);
  return buf;
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for digest");
  std::uint64_t h = 1469598103934665603ULL;
  char buf[8192];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    const std::streamsize n = f.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!f) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

std::string report_json(const RecoveryReport& report) {
  return report_obj(report).dump(2) + "\n";
}

void run_gen(const GenOptions& opt) {
  if (opt.stations == 0 || opt.features == 0 || opt.time_steps == 0) {
    throw std::invalid_argument("gen: n, f and t must all be >= 1");
  }
  SyntheticSpec spec;
  spec.stations = opt.stations;
  spec.features = opt.features;
  spec.time_steps = opt.time_steps;
  spec.noise_sd = opt.noise_sd;
  spec.smoothness = opt.smoothness;
  spec.seed = opt.seed;
  SyntheticData data = generate_synthetic(spec);

  const fs::path out(opt.out_dir);
  fs::create_directories(out);
  write_stations_csv((out / "stations.csv").string(), data.stations);
  write_readings_csv((out / "readings.csv").string(), data.stations,
                     data.feature_names, data.truth);
  write_readings_csv((out / "truth.csv").string(), data.stations,
                     data.feature_names, data.truth);

  ordered_json options;
  options["n"] = opt.stations;
  options["f"] = opt.features;
  options["t"] = opt.time_steps;
  options["noise_sd"] = opt.noise_sd;
  options["smoothness"] = opt.smoothness;
  options["seed"] = opt.seed;
  write_manifest(out, "gen", std::move(options), {},
                 {"stations.csv", "readings.csv", "truth.csv"});
}

void run_mask(const MaskOptions& opt) {
  if (!(opt.ratio >= 0.0 && opt.ratio < 1.0)) {
    throw std::invalid_argument("mask: ratio must be in [0, 1)");
  }
  const fs::path in(opt.in_dir);
  const fs::path out(opt.out_dir);
  const auto stations = load_stations((in / "stations.csv").string());
  ReadingsData readings =
      load_readings((in / "readings.csv").string(), stations);
  if (readings.observed.count() != readings.observed.size()) {
    throw std::runtime_error(
        "mask: input readings.csv already contains missing cells");
  }

  MaskedDataset ds = apply_missing(readings.values, opt.ratio, opt.seed);

  fs::create_directories(out);
  const auto ids = station_ids_of(stations);
  write_readings_csv((out / "readings.csv").string(), stations,
                     readings.feature_names, ds.signal, &ds.observed);
  write_mask_csv((out / "hidden_mask.csv").string(), ids,
                 readings.feature_names, ds.hidden);
  fs::copy_file(in / "stations.csv", out / "stations.csv",
                fs::copy_options::overwrite_existing);
  if (fs::exists(in / "truth.csv")) {
    fs::copy_file(in / "truth.csv", out / "truth.csv",
                  fs::copy_options::overwrite_existing);
  } else {
    write_readings_csv((out / "truth.csv").string(), stations,
                       readings.feature_names, readings.values);
  }

  ordered_json options;
  options["ratio"] = opt.ratio;
  options["seed"] = opt.seed;
  write_manifest(
      out, "mask", std::move(options),
      {in / "stations.csv", in / "readings.csv"},
      {"readings.csv", "hidden_mask.csv", "stations.csv", "truth.csv"});
}

RecoveryReport run_recover(const RecoverOptions& opt) {
  const fs::path in(opt.in_dir);
  const fs::path out(opt.out_dir);
  LoadedRun run = load_run_inputs(in, opt.cfg.seed);
  const StationGraph graph = build_station_graph(
      run.stations, opt.cfg.theta, opt.cfg.omega, opt.cfg.adjacency);

  PipelineRun result = train_and_recover(run.ds, graph, opt.cfg);

  fs::create_directories(out);
  write_readings_csv((out / "recovered.csv").string(), run.stations,
                     run.feature_names, result.result.recovered);
  save_checkpoint((out / "checkpoint.txt").string(), result.params,
                  opt.cfg.seed);

  std::string hist = "epoch,objective,val_rmse,grad_norm\n";
  for (const EpochRecord& e : result.history.epochs) {
    hist += std::to_string(e.epoch);
    hist += ',';
    hist += format_double(e.objective);
    hist += ',';
    if (!std::isnan(e.val_rmse)) hist += format_double(e.val_rmse);
    hist += ',';
    hist += format_double(e.grad_norm);
    hist += '\n';
  }
  write_text(out / "history.csv", hist);
  write_text(out / "report.json", report_json(result.result.report));

  std::vector<fs::path> inputs = {in / "stations.csv", in / "readings.csv"};
  if (run.have_truth) inputs.push_back(in / "truth.csv");
  write_manifest(out, "recover", config_json(opt.cfg), inputs,
                 {"recovered.csv", "checkpoint.txt", "history.csv",
                  "report.json"});
  return result.result.report;
}

std::string run_eval(const EvalOptions& opt) {
  StandaloneReadings recovered = load_readings_standalone(opt.recovered_path);
  StandaloneReadings truth = load_readings_standalone(opt.truth_path);
  if (!recovered.data.values.same_dims(truth.data.values) ||
      recovered.station_ids != truth.station_ids ||
      recovered.data.feature_names != truth.data.feature_names) {
    throw std::invalid_argument(
        "eval: recovered and truth files do not describe the same tensor");
  }
  if (truth.data.observed.count() != truth.data.observed.size()) {
    throw std::invalid_argument("eval: truth file has missing cells");
  }

  Mask scope_mask;
  const char* scope_name = nullptr;
  switch (opt.scope) {
    case MetricScope::hidden:
      if (opt.mask_path.empty()) {
        throw std::invalid_argument("eval: --scope hidden requires --mask");
      }
      scope_mask =
          load_mask_csv(opt.mask_path, truth.station_ids,
                        truth.data.feature_names, truth.data.values.depth());
      scope_name = "hidden";
      break;
    case MetricScope::test:
      throw std::invalid_argument(
          "eval: scope 'test' is only available inside recover reports");
    case MetricScope::whole:
      scope_mask = Mask(truth.data.values.rows(), truth.data.values.cols(),
                        truth.data.values.depth(), true);
      scope_name = "whole";
      break;
  }
  if (recovered.data.observed.count() != recovered.data.observed.size()) {
    throw std::invalid_argument("eval: recovered file has missing cells");
  }

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["scope"] = scope_name;
  j["rse"] = rse(recovered.data.values, truth.data.values, scope_mask);
  j["rmse"] = rmse(recovered.data.values, truth.data.values, scope_mask);
  return j.dump(2) + "\n";
}

std::string run_ablate(const AblateOptions& opt) {
  const fs::path in(opt.in_dir);
  const fs::path out(opt.out_dir);
  LoadedRun run = load_run_inputs(in, opt.cfg.seed);

  const std::vector<AblationArm> arms = ablate(run.ds, run.stations, opt.cfg);

  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  ordered_json arr = ordered_json::array();
  for (const AblationArm& arm : arms) {
    ordered_json a;
    a["name"] = arm.name;
    a["no_regularization"] = arm.no_regularization;
    a["sym_norm_adjacency"] = arm.sym_norm_adjacency;
    a["report"] = report_obj(arm.report);
    arr.push_back(std::move(a));
  }
  j["arms"] = arr;

  fs::create_directories(out);
  write_text(out / "ablation.json", j.dump(2) + "\n");
  std::vector<fs::path> inputs = {in / "stations.csv", in / "readings.csv"};
  if (run.have_truth) inputs.push_back(in / "truth.csv");
  write_manifest(out, "ablate", config_json(opt.cfg), inputs,
                 {"ablation.json"});

  std::string table =
      "arm              hidden_rmse hidden_rse  test_rmse   whole_rmse\n";
  for (const AblationArm& arm : arms) {
    char name[20];
    std::snprintf(name, sizeof name, "%-16s ", arm.name.c_str());
    table += name;
    table += arm.report.hidden ? format_cell(arm.report.hidden->rmse)
                               : std::string("n/a         ");
    table += arm.report.hidden ? format_cell(arm.report.hidden->rse)
                               : std::string("n/a         ");
    table += arm.report.test ? format_cell(arm.report.test->rmse)
                             : std::string("n/a         ");
    table += arm.report.whole ? format_cell(arm.report.whole->rmse)
                              : std::string("n/a         ");
    table += '\n';
  }
  return table;
}

}  // namespace cdgcn::pipeline
