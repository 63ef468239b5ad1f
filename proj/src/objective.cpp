#include "cdgcn/objective.hpp"

#include <stdexcept>

#include "cdgcn/kernels.hpp"

namespace cdgcn {

LossResult huber_loss(const Tensor3& pred, const Tensor3& target,
                      const Mask& mask, double delta) {
  if (!pred.same_dims(target) || !mask.same_dims(pred)) {
    throw std::invalid_argument("huber_loss: shape mismatch");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("huber_loss: delta must be > 0");
  }
  const std::size_t count = mask.count();
  if (count == 0) throw std::invalid_argument("huber_loss: empty mask");

  LossResult out;
  out.grad = Tensor3(pred.rows(), pred.cols(), pred.depth());
  const double sum = kernels::ops().huber_masked(
      pred.data(), target.data(), mask.data(), delta, out.grad.data(),
      pred.size());
  const double inv = 1.0 / static_cast<double>(count);
  out.value = sum * inv;
  out.grad.scale(inv);
  return out;
}

LossResult smoothness_penalty(const Tensor3& pred, double lambda) {
  if (lambda < 0.0) {
    throw std::invalid_argument("smoothness_penalty: lambda must be >= 0");
  }
  LossResult out;
  out.grad = Tensor3(pred.rows(), pred.cols(), pred.depth());
  const std::size_t depth = pred.depth();
  if (lambda == 0.0 || depth < 2) return out;

  const std::size_t ss = pred.slice_size();
  const double coef =
      lambda / (static_cast<double>(depth - 1) * static_cast<double>(ss));
  double sum = 0.0;
  for (std::size_t t = 1; t < depth; ++t) {
    sum += kernels::ops().abs_diff_sum(pred.slice(t), pred.slice(t - 1), ss);
    const double* prev = pred.slice(t - 1);
    const double* cur = pred.slice(t);
    double* gprev = out.grad.slice(t - 1);
    double* gcur = out.grad.slice(t);
    for (std::size_t i = 0; i < ss; ++i) {
      const double d = cur[i] - prev[i];
      const double s = d > 0.0 ? coef : (d < 0.0 ? -coef : 0.0);
      gcur[i] += s;
      gprev[i] -= s;
    }
  }
  out.value = coef * sum;
  return out;
}

ObjectiveResult objective(const Tensor3& pred, const Tensor3& target,
                          const Mask& train_mask, const ObjectiveConfig& cfg,
                          const ModelParams& params) {
  if (cfg.weight_decay < 0.0) {
    throw std::invalid_argument("objective: weight_decay must be >= 0");
  }
  LossResult huber = huber_loss(pred, target, train_mask, cfg.delta);

  ObjectiveResult out;
  out.value = huber.value;
  out.dpred = std::move(huber.grad);

  if (cfg.lambda > 0.0 && pred.depth() >= 2) {
    LossResult smooth = smoothness_penalty(pred, cfg.lambda);
    out.value += smooth.value;
    out.dpred.add_scaled(smooth.grad, 1.0);
  }
  if (cfg.weight_decay > 0.0) {
    for (const Tensor3& u : params.weights) {
      out.value +=
          cfg.weight_decay * kernels::ops().sum_sq(u.data(), u.size());
      Tensor3 g = u;
      g.scale(2.0 * cfg.weight_decay);
      out.dparams.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace cdgcn
