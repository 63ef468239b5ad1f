#include "cdgcn/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "cdgcn/kernels.hpp"

namespace cdgcn {

double rse(const Tensor3& recovered, const Tensor3& origin, const Mask& mask) {
  if (!recovered.same_dims(origin) || !mask.same_dims(origin)) {
    throw std::invalid_argument("rse: shape mismatch");
  }
  const double den = kernels::ops().masked_sq_sum(origin.data(), mask.data(),
                                                  origin.size());
  if (den == 0.0) {
    throw std::invalid_argument("rse: origin has zero norm on the mask");
  }
  const double num = kernels::ops().masked_sq_diff_sum(
      recovered.data(), origin.data(), mask.data(), origin.size());
  return std::sqrt(num / den);
}

double rmse(const Tensor3& recovered, const Tensor3& origin,
            const Mask& mask) {
  if (!recovered.same_dims(origin) || !mask.same_dims(origin)) {
    throw std::invalid_argument("rmse: shape mismatch");
  }
  const std::size_t count = mask.count();
  if (count == 0) throw std::invalid_argument("rmse: empty mask");
  const double num = kernels::ops().masked_sq_diff_sum(
      recovered.data(), origin.data(), mask.data(), origin.size());
  return std::sqrt(num / static_cast<double>(count));
}

Tensor3 baseline_mean(const MaskedDataset& ds) {
  const std::vector<double> means = train_feature_means(ds);
  Tensor3 out = ds.signal;
  for (std::size_t t = 0; t < ds.time_steps(); ++t) {
    for (std::size_t f = 0; f < ds.features(); ++f) {
      for (std::size_t i = 0; i < ds.stations(); ++i) {
        if (!ds.observed(i, f, t)) out(i, f, t) = means[f];
      }
    }
  }
  return out;
}

Tensor3 baseline_locf(const MaskedDataset& ds) {
  const std::vector<double> means = train_feature_means(ds);
  Tensor3 out = ds.signal;
  for (std::size_t f = 0; f < ds.features(); ++f) {
    for (std::size_t i = 0; i < ds.stations(); ++i) {
      std::size_t first_obs = ds.time_steps();
      for (std::size_t t = 0; t < ds.time_steps(); ++t) {
        if (ds.observed(i, f, t)) {
          first_obs = t;
          break;
        }
      }
      if (first_obs == ds.time_steps()) {
        for (std::size_t t = 0; t < ds.time_steps(); ++t) {
          out(i, f, t) = means[f];
        }
        continue;
      }
      double last = ds.signal(i, f, first_obs);
      for (std::size_t t = 0; t < ds.time_steps(); ++t) {
        if (ds.observed(i, f, t)) {
          last = ds.signal(i, f, t);
        } else {
          out(i, f, t) = last;  // backfills t < first_obs as well
        }
      }
    }
  }
  return out;
}

}  // namespace cdgcn
