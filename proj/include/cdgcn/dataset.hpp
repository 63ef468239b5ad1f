#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdgcn/graph.hpp"
#include "cdgcn/mask.hpp"
#include "cdgcn/tensor.hpp"

namespace cdgcn {

/// Per-feature min-max statistics, fitted on train-observed entries only.
struct Scaler {
  std::vector<double> min_v, max_v;

  std::size_t features() const { return min_v.size(); }
  double normalize(std::size_t f, double x) const {
    return (x - min_v[f]) / (max_v[f] - min_v[f]);
  }
  double denormalize(std::size_t f, double x) const {
    return min_v[f] + x * (max_v[f] - min_v[f]);
  }
};

/// A signal tensor with its observation structure.
///
/// observed and hidden partition the entries; train/val/test partition
/// observed. Pipeline order: apply_missing (or make_masked_dataset) ->
/// split_observed -> normalize -> impute_initial.
struct MaskedDataset {
  Tensor3 signal;      // (N, F, T); values at observed entries, 0 elsewhere;
                       // normalized in place once `normalized` is set
  Tensor3 raw_signal;  // untouched copy in original units, so recovery can
                       // pass observed values through bit-exactly
  Mask observed;
  Mask hidden;     // recovery targets
  Mask train, val, test;
  std::optional<Tensor3> ground_truth;  // raw units, never normalized
  std::optional<Scaler> scaler;
  bool split = false;
  bool normalized = false;

  std::size_t stations() const { return signal.rows(); }
  std::size_t features() const { return signal.cols(); }
  std::size_t time_steps() const { return signal.depth(); }
};

enum class FillPolicy { train_mean, zero };

/// Wrap an observed signal (hidden = complement of observed).
MaskedDataset make_masked_dataset(Tensor3 signal, Mask observed,
                                  std::optional<Tensor3> ground_truth);

/// Hide round(p * N*F*T) entries of a fully observed tensor, sampled
/// uniformly without replacement. Deterministic per seed. Requires p in [0,1).
MaskedDataset apply_missing(const Tensor3& ground_truth, double ratio,
                            std::uint64_t seed);

/// Partition the observed entries into train/val/test uniformly at random.
/// Fractions must be nonnegative and sum to 1 (within 1e-9).
void split_observed(MaskedDataset& ds, double f_train, double f_val,
                    double f_test, std::uint64_t seed);

/// Min-max scale each feature to [0,1] using train-observed statistics.
/// Throws for features that are constant over the train set.
void normalize(MaskedDataset& ds);

Tensor3 denormalize(const Tensor3& t, const Scaler& scaler);
Tensor3 normalize_with(const Tensor3& t, const Scaler& scaler);

/// Model input: train-observed entries keep their (normalized) value, every
/// other entry is filled per policy (per-feature train mean, or zero).
Tensor3 impute_initial(const MaskedDataset& ds,
                       FillPolicy policy = FillPolicy::train_mean);

/// Per-feature mean of normalized train-observed values.
std::vector<double> train_feature_means(const MaskedDataset& ds);

struct SyntheticSpec {
  std::size_t stations = 20;
  std::size_t features = 3;
  std::size_t time_steps = 168;
  double lat_lo = 41.5, lat_hi = 48.5;    // station box, decimal degrees
  double lon_lo = -92.5, lon_hi = -76.5;
  double smoothness = 1.0;  // > 0; larger means slower temporal drift
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<Station> stations;
  std::vector<std::string> feature_names;  // f1..fF
  Tensor3 truth;                           // (N, F, T), fully observed
};

/// Smooth synthetic benchmark field: per feature, a baseline plus three
/// slowly travelling Gaussian bumps over the station box, plus optional
/// white noise. Deterministic per seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace cdgcn
