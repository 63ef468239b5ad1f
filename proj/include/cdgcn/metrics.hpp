#pragma once

#include "cdgcn/dataset.hpp"
#include "cdgcn/mask.hpp"
#include "cdgcn/tensor.hpp"

namespace cdgcn {

enum class MetricScope { hidden, test, whole };

/// Relative squared error restricted to the mask:
/// ||recovered - origin||_F / ||origin||_F. Throws when the origin has zero
/// norm on the mask.
double rse(const Tensor3& recovered, const Tensor3& origin, const Mask& mask);

/// Root mean squared residual over the masked entries.
double rmse(const Tensor3& recovered, const Tensor3& origin, const Mask& mask);

/// Observed entries pass through; every non-observed entry gets the
/// per-feature train-observed mean. Operates in the dataset's current
/// (normalized) space.
Tensor3 baseline_mean(const MaskedDataset& ds);

/// Last observation carried forward per (station, feature) tube; a leading
/// gap is backfilled with the first observation, a fully unobserved tube
/// falls back to the feature train mean.
Tensor3 baseline_locf(const MaskedDataset& ds);

}  // namespace cdgcn
