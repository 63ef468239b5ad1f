#include "cdgcn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cdgcn/rng.hpp"

namespace cdgcn {

MaskedDataset make_masked_dataset(Tensor3 signal, Mask observed,
                                  std::optional<Tensor3> ground_truth) {
  if (!observed.same_dims(signal)) {
    throw std::invalid_argument(
        "make_masked_dataset: mask dims do not match signal");
  }
  if (ground_truth && !ground_truth->same_dims(signal)) {
    throw std::invalid_argument(
        "make_masked_dataset: ground truth dims do not match signal");
  }
  MaskedDataset ds;
  ds.hidden = Mask(observed.rows, observed.cols, observed.depth);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ds.hidden.v[i] = observed.v[i] ? 0 : 1;
  }
  ds.signal = std::move(signal);
  ds.raw_signal = ds.signal;
  ds.observed = std::move(observed);
  ds.ground_truth = std::move(ground_truth);
  return ds;
}

MaskedDataset apply_missing(const Tensor3& ground_truth, double ratio,
                            std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("apply_missing: ratio " +
                                std::to_string(ratio) +
                                " outside [0, 1)");
  }
  if (!ground_truth.all_finite()) {
    throw std::invalid_argument("apply_missing: ground truth has non-finite entries");
  }
  const std::size_t n = ground_truth.size();
  const auto n_hidden = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_hidden; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(order[i], order[j]);
  }

  MaskedDataset ds;
  ds.observed = Mask(ground_truth.rows(), ground_truth.cols(),
                     ground_truth.depth(), true);
  ds.hidden = Mask(ground_truth.rows(), ground_truth.cols(),
                   ground_truth.depth(), false);
  ds.signal = ground_truth;
  for (std::size_t i = 0; i < n_hidden; ++i) {
    ds.observed.v[order[i]] = 0;
    ds.hidden.v[order[i]] = 1;
    ds.signal.data()[order[i]] = 0.0;
  }
  ds.raw_signal = ds.signal;
  ds.ground_truth = ground_truth;
  return ds;
}

void split_observed(MaskedDataset& ds, double f_train, double f_val,
                    double f_test, std::uint64_t seed) {
  if (f_train < 0.0 || f_val < 0.0 || f_test < 0.0 ||
      std::fabs(f_train + f_val + f_test - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "split_observed: fractions must be nonnegative and sum to 1");
  }
  std::vector<std::size_t> idx;
  idx.reserve(ds.observed.count());
  for (std::size_t i = 0; i < ds.observed.size(); ++i) {
    if (ds.observed.v[i]) idx.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(idx);

  const std::size_t n = idx.size();
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(f_train * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(f_val * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  ds.train = Mask(ds.observed.rows, ds.observed.cols, ds.observed.depth);
  ds.val = Mask(ds.observed.rows, ds.observed.cols, ds.observed.depth);
  ds.test = Mask(ds.observed.rows, ds.observed.cols, ds.observed.depth);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      ds.train.v[idx[i]] = 1;
    } else if (i < n_train + n_val) {
      ds.val.v[idx[i]] = 1;
    } else {
      ds.test.v[idx[i]] = 1;
    }
  }
  ds.split = true;
}

void normalize(MaskedDataset& ds) {
  if (!ds.split) {
    throw std::invalid_argument("normalize: dataset must be split first");
  }
  if (ds.normalized) {
    throw std::invalid_argument("normalize: dataset already normalized");
  }
  const std::size_t n_f = ds.features();
  Scaler sc;
  sc.min_v.assign(n_f, 0.0);
  sc.max_v.assign(n_f, 0.0);
  for (std::size_t f = 0; f < n_f; ++f) {
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (std::size_t t = 0; t < ds.time_steps(); ++t) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        if (!ds.train(i, f, t)) continue;
        const double x = ds.signal(i, f, t);
        if (!any) {
          lo = hi = x;
          any = true;
        } else {
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
      }
    }
    if (!any) {
      throw std::invalid_argument("normalize: feature " + std::to_string(f) +
                                  " has no train-observed entries");
    }
    if (!(hi > lo)) {
      throw std::invalid_argument("normalize: feature " + std::to_string(f) +
                                  " is constant over the train set");
    }
    sc.min_v[f] = lo;
    sc.max_v[f] = hi;
  }

  for (std::size_t t = 0; t < ds.time_steps(); ++t) {
    for (std::size_t f = 0; f < n_f; ++f) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        ds.signal(i, f, t) =
            ds.observed(i, f, t) ? sc.normalize(f, ds.signal(i, f, t)) : 0.0;
      }
    }
  }
  ds.scaler = std::move(sc);
  ds.normalized = true;
}

Tensor3 denormalize(const Tensor3& t, const Scaler& scaler) {
  if (t.cols() != scaler.features()) {
    throw std::invalid_argument("denormalize: feature count mismatch");
  }
  Tensor3 out = t;
  for (std::size_t k = 0; k < t.depth(); ++k) {
    for (std::size_t f = 0; f < t.cols(); ++f) {
      for (std::size_t i = 0; i < t.rows(); ++i) {
        out(i, f, k) = scaler.denormalize(f, t(i, f, k));
      }
    }
  }
  return out;
}

Tensor3 normalize_with(const Tensor3& t, const Scaler& scaler) {
  if (t.cols() != scaler.features()) {
    throw std::invalid_argument("normalize_with: feature count mismatch");
  }
  Tensor3 out = t;
  for (std::size_t k = 0; k < t.depth(); ++k) {
    for (std::size_t f = 0; f < t.cols(); ++f) {
      for (std::size_t i = 0; i < t.rows(); ++i) {
        out(i, f, k) = scaler.normalize(f, t(i, f, k));
      }
    }
  }
  return out;
}

std::vector<double> train_feature_means(const MaskedDataset& ds) {
  if (!ds.normalized) {
    throw std::invalid_argument("train_feature_means: dataset not normalized");
  }
  std::vector<double> sum(ds.features(), 0.0);
  std::vector<std::size_t> cnt(ds.features(), 0);
  for (std::size_t t = 0; t < ds.time_steps(); ++t) {
    for (std::size_t f = 0; f < ds.features(); ++f) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        if (ds.train(i, f, t)) {
          sum[f] += ds.signal(i, f, t);
          ++cnt[f];
        }
      }
    }
  }
  for (std::size_t f = 0; f < ds.features(); ++f) {
    sum[f] /= static_cast<double>(cnt[f]);
  }
  return sum;
}

Tensor3 impute_initial(const MaskedDataset& ds, FillPolicy policy) {
  if (!ds.normalized) {
    throw std::invalid_argument("impute_initial: dataset not normalized");
  }
  std::vector<double> fill(ds.features(), 0.0);
  if (policy == FillPolicy::train_mean) fill = train_feature_means(ds);

  Tensor3 w(ds.stations(), ds.features(), ds.time_steps());
  for (std::size_t t = 0; t < ds.time_steps(); ++t) {
    for (std::size_t f = 0; f < ds.features(); ++f) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        w(i, f, t) = ds.train(i, f, t) ? ds.signal(i, f, t) : fill[f];
      }
    }
  }
  return w;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.stations == 0 || spec.features == 0 || spec.time_steps == 0) {
    throw std::invalid_argument("generate_synthetic: dims must be >= 1");
  }
  if (!(spec.smoothness > 0.0)) {
    throw std::invalid_argument("generate_synthetic: smoothness must be > 0");
  }
  if (spec.noise_sd < 0.0) {
    throw std::invalid_argument("generate_synthetic: noise_sd must be >= 0");
  }
  Rng rng(spec.seed);

  SyntheticData out;
  out.stations.reserve(spec.stations);
  for (std::size_t i = 0; i < spec.stations; ++i) {
    Station s;
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
    s.id = buf;
    s.lat_deg = rng.uniform(spec.lat_lo, spec.lat_hi);
    s.lon_deg = rng.uniform(spec.lon_lo, spec.lon_hi);
    out.stations.push_back(std::move(s));
  }
  for (std::size_t f = 0; f < spec.features; ++f) {
    out.feature_names.push_back("f" + std::to_string(f + 1));
  }

  struct Bump {
    double lat0, lon0;      // anchor of the travelling center
    double width_km;
    double amp;
    double drift_cycles;    // center revolutions over the whole series
    double drift_phase;
    double amp_cycles;      // amplitude modulation rate
    double amp_phase;
  };
  constexpr std::size_t kBumps = 3;
  const double lat_span = spec.lat_hi - spec.lat_lo;
  const double lon_span = spec.lon_hi - spec.lon_lo;
  constexpr double two_pi = 6.283185307179586476925286766559;

  out.truth = Tensor3(spec.stations, spec.features, spec.time_steps);
  for (std::size_t f = 0; f < spec.features; ++f) {
    const double base = rng.uniform(0.25, 0.45);
    Bump bumps[kBumps];
    for (std::size_t bi = 0; bi < kBumps; ++bi) {
      Bump& b = bumps[bi];
      b.lat0 = rng.uniform(spec.lat_lo, spec.lat_hi);
      b.lon0 = rng.uniform(spec.lon_lo, spec.lon_hi);
      // one narrow, tall bump per feature gives each distribution a thin
      // upper tail, like a localized weather front passing single stations
      b.width_km = bi == 0 ? rng.uniform(100.0, 150.0)
                           : rng.uniform(180.0, 360.0);
      b.amp = bi == 0 ? rng.uniform(0.4, 0.55) : rng.uniform(0.3, 0.6);
      b.drift_cycles = rng.uniform(0.6, 1.4) / spec.smoothness;
      b.drift_phase = rng.uniform(0.0, two_pi);
      b.amp_cycles = rng.uniform(0.5, 1.0) / spec.smoothness;
      b.amp_phase = rng.uniform(0.0, two_pi);
    }
    for (std::size_t t = 0; t < spec.time_steps; ++t) {
      const double tau =
          static_cast<double>(t) / static_cast<double>(spec.time_steps);
      for (const Bump& b : bumps) {
        const double ang = two_pi * b.drift_cycles * tau + b.drift_phase;
        Station center;
        center.id = "c";
        center.lat_deg = std::clamp(b.lat0 + 0.12 * lat_span * std::sin(ang),
                                    -90.0, 90.0);
        center.lon_deg = std::clamp(b.lon0 + 0.12 * lon_span * std::cos(ang),
                                    -180.0, 180.0);
        const double amp =
            b.amp * (0.75 + 0.25 * std::sin(two_pi * b.amp_cycles * tau +
                                            b.amp_phase));
        for (std::size_t i = 0; i < spec.stations; ++i) {
          const double d = haversine_distance(out.stations[i], center);
          out.truth(i, f, t) +=
              amp * std::exp(-d * d / (2.0 * b.width_km * b.width_km));
        }
      }
      for (std::size_t i = 0; i < spec.stations; ++i) {
        out.truth(i, f, t) += base;
      }
    }
  }
  if (spec.noise_sd > 0.0) {
    double* p = out.truth.data();
    for (std::size_t i = 0; i < out.truth.size(); ++i) {
      p[i] += spec.noise_sd * rng.normal();
    }
  }
  return out;
}

}  // namespace cdgcn
