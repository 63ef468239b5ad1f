#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdgcn/mixing.hpp"
#include "cdgcn/tensor.hpp"

namespace cdgcn {

enum class Activation { relu, identity };

/// Learnable parameters of the tensor graph convolution.
/// Layer l holds a (f_in, f_out, T) tensor; the single-layer default has one
/// (F, F, T) tensor with a ReLU output.
struct ModelParams {
  std::vector<Tensor3> weights;
  std::vector<Activation> activations;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t time_steps() const {
    return weights.empty() ? 0 : weights[0].depth();
  }
};

/// Single ReLU layer, (f_in, f_out, T), Glorot-uniform entries
/// in [-sqrt(6/(f_in+f_out)), +sqrt(6/(f_in+f_out))].
ModelParams init_params(std::size_t f_in, std::size_t f_out,
                        std::size_t time_steps, std::uint64_t seed);

/// Two layers: (F, hidden, T) with ReLU, then (hidden, F, T) with identity
/// output.
ModelParams init_params_two_layer(std::size_t features, std::size_t hidden,
                                  std::size_t time_steps, std::uint64_t seed);

/// Transformed-domain intermediates of one layer, kept for backprop.
struct LayerCache {
  Tensor3 input_hat;  // layer input x3 M
  Tensor3 g1;         // A_hat facewise input_hat
  Tensor3 u_hat;      // U x3 M
  Tensor3 g2;         // g1 facewise u_hat (the convolution in hat space)
  Tensor3 z;          // g2 x3 M^-1, pre-activation
  Tensor3 h;          // activation(z)
};

struct ForwardCache {
  Tensor3 a_hat;
  std::vector<LayerCache> layers;

  const Tensor3& output() const { return layers.back().h; }
};

/// H = act((A * X) * U) per layer, with * the M-product. Association is
/// left to right; consecutive products share one hat-space round trip since
/// (A*X) x3 M equals A_hat facewise X_hat.
ForwardCache forward(const Tensor3& adjacency, const Tensor3& signal,
                     const ModelParams& params, const MixingMatrix& m);

/// Reuses the signal-independent hat tensors (A_hat, first-layer input_hat
/// and g1) across repeated forward passes with changing parameters.
class ForwardWorkspace {
 public:
  void prime(const Tensor3& adjacency, const Tensor3& signal,
             const MixingMatrix& m);
  ForwardCache run(const ModelParams& params) const;
  bool primed() const { return primed_; }

 private:
  const MixingMatrix* m_ = nullptr;
  Tensor3 a_hat_, input_hat_, g1_;
  bool primed_ = false;
};

/// Gradient of a scalar loss with respect to each layer's parameter tensor,
/// given dL/dH for the final output. Exact reverse-mode chain:
/// activation gate -> x3 M^-T -> facewise adjoints -> x3 M^T.
std::vector<Tensor3> backward(const ForwardCache& cache, const Tensor3& dl_dh,
                              const ModelParams& params,
                              const MixingMatrix& m);

/// Text checkpoint: dims, seed, layer config and row-major entries.
/// Format documented in the README; stable across versions.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     std::uint64_t seed);

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace cdgcn
