#pragma once

#include <vector>

#include "cdgcn/mask.hpp"
#include "cdgcn/model.hpp"
#include "cdgcn/tensor.hpp"

namespace cdgcn {

struct ObjectiveConfig {
  double delta = 1.0;         // Huber threshold, normalized signal units
  double lambda = 0.15;       // temporal smoothness strength
  double weight_decay = 1e-3; // L2 coefficient on the parameter tensors
};

struct LossResult {
  double value = 0.0;
  Tensor3 grad;  // with respect to the prediction tensor
};

/// Mean Huber loss over the masked entries. Gradient is zero outside the
/// mask; per masked entry it is r/|mask| in the quadratic regime and
/// delta*sign(r)/|mask| in the linear regime, r = pred - target.
LossResult huber_loss(const Tensor3& pred, const Tensor3& target,
                      const Mask& mask, double delta);

/// lambda * mean absolute one-step temporal difference of pred,
/// lambda / ((T-1)*N*F) * sum |pred_t - pred_{t-1}|. Zero by convention for
/// T = 1. Subgradient uses sign(0) = 0.
LossResult smoothness_penalty(const Tensor3& pred, double lambda);

struct ObjectiveResult {
  double value = 0.0;
  Tensor3 dpred;
  /// 2 * weight_decay * U per layer; empty when weight_decay == 0.
  std::vector<Tensor3> dparams;
};

/// huber + smoothness + weight_decay * sum_l ||U_l||_F^2.
/// With lambda == 0 or weight_decay == 0 the corresponding term is skipped
/// entirely, so the remaining sum is bitwise unchanged.
ObjectiveResult objective(const Tensor3& pred, const Tensor3& target,
                          const Mask& train_mask, const ObjectiveConfig& cfg,
                          const ModelParams& params);

}  // namespace cdgcn
