#include "cdgcn/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cdgcn/csv_io.hpp"
#include "cdgcn/kernels.hpp"
#include "cdgcn/rng.hpp"

namespace cdgcn {

namespace {

Tensor3 glorot_uniform(std::size_t f_in, std::size_t f_out,
                       std::size_t time_steps, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(f_in + f_out));
  Tensor3 u(f_in, f_out, time_steps);
  double* p = u.data();
  for (std::size_t i = 0; i < u.size(); ++i) {
    p[i] = rng.uniform(-bound, bound);
  }
  return u;
}

// C (m x p) += A^T B, with A stored (k x m) and B (k x p), both column-major.
void gemm_tn(double* c, const double* a, const double* b, std::size_t m,
             std::size_t k, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      c[j * m + i] += kernels::ops().dot(a + i * k, b + j * k, k);
    }
  }
}

// C (m x p) += A B^T, with A stored (m x k) and B (p x k), both column-major.
void gemm_nt(double* c, const double* a, const double* b, std::size_t m,
             std::size_t k, std::size_t p) {
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      kernels::ops().axpy(c + j * m, b[r * p + j], a + r * m, m);
    }
  }
}

void apply_activation(Activation act, const Tensor3& z, Tensor3& h) {
  h = Tensor3(z.rows(), z.cols(), z.depth());
  if (act == Activation::relu) {
    kernels::ops().relu(h.data(), z.data(), z.size());
  } else {
    h = z;
  }
}

void check_params(const ModelParams& params, std::size_t f_in0,
                  std::size_t time_steps, const MixingMatrix& m) {
  if (params.weights.empty()) {
    throw std::invalid_argument("forward: model has no layers");
  }
  if (params.weights.size() != params.activations.size()) {
    throw std::invalid_argument("forward: layer/activation count mismatch");
  }
  if (m.dim() != time_steps) {
    throw std::invalid_argument("forward: mixing matrix size " +
                                std::to_string(m.dim()) +
                                " does not match tensor depth " +
                                std::to_string(time_steps));
  }
  std::size_t f = f_in0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Tensor3& u = params.weights[l];
    if (u.rows() != f || u.depth() != time_steps) {
      throw std::invalid_argument(
          "forward: layer " + std::to_string(l) + " expects input width " +
          std::to_string(u.rows()) + ", got " + std::to_string(f));
    }
    f = u.cols();
  }
}

LayerCache run_layer(const Tensor3& a_hat, Tensor3 input_hat,
                     const Tensor3& u, Activation act,
                     const MixingMatrix& m) {
  LayerCache lc;
  lc.input_hat = std::move(input_hat);
  lc.g1 = facewise_product(a_hat, lc.input_hat);
  lc.u_hat = m_transform(u, m);
  lc.g2 = facewise_product(lc.g1, lc.u_hat);
  lc.z = m_transform_inverse(lc.g2, m);
  apply_activation(act, lc.z, lc.h);
  return lc;
}

std::string activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw std::runtime_error("unknown activation '" + s + "'");
}

}  // namespace

ModelParams init_params(std::size_t f_in, std::size_t f_out,
                        std::size_t time_steps, std::uint64_t seed) {
  if (f_in == 0 || f_out == 0 || time_steps == 0) {
    throw std::invalid_argument("init_params: dims must be >= 1");
  }
  Rng rng(seed);
  ModelParams p;
  p.weights.push_back(glorot_uniform(f_in, f_out, time_steps, rng));
  p.activations.push_back(Activation::relu);
  return p;
}

ModelParams init_params_two_layer(std::size_t features, std::size_t hidden,
                                  std::size_t time_steps, std::uint64_t seed) {
  if (features == 0 || hidden == 0 || time_steps == 0) {
    throw std::invalid_argument("init_params_two_layer: dims must be >= 1");
  }
  Rng rng(seed);
  ModelParams p;
  p.weights.push_back(glorot_uniform(features, hidden, time_steps, rng));
  p.activations.push_back(Activation::relu);
  p.weights.push_back(glorot_uniform(hidden, features, time_steps, rng));
  p.activations.push_back(Activation::identity);
  return p;
}

ForwardCache forward(const Tensor3& adjacency, const Tensor3& signal,
                     const ModelParams& params, const MixingMatrix& m) {
  ForwardWorkspace ws;
  ws.prime(adjacency, signal, m);
  return ws.run(params);
}

void ForwardWorkspace::prime(const Tensor3& adjacency, const Tensor3& signal,
                             const MixingMatrix& m) {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("forward: adjacency tensor is not square");
  }
  if (adjacency.rows() != signal.rows() ||
      adjacency.depth() != signal.depth()) {
    throw std::invalid_argument("forward: adjacency dims (" +
                                std::to_string(adjacency.rows()) + "," +
                                std::to_string(adjacency.cols()) + "," +
                                std::to_string(adjacency.depth()) +
                                ") do not match signal (" +
                                std::to_string(signal.rows()) + "," +
                                std::to_string(signal.cols()) + "," +
                                std::to_string(signal.depth()) + ")");
  }
  if (m.dim() != signal.depth()) {
    throw std::invalid_argument("forward: mixing matrix size " +
                                std::to_string(m.dim()) +
                                " does not match tensor depth " +
                                std::to_string(signal.depth()));
  }
  m_ = &m;
  a_hat_ = m_transform(adjacency, m);
  input_hat_ = m_transform(signal, m);
  g1_ = facewise_product(a_hat_, input_hat_);
  primed_ = true;
}

ForwardCache ForwardWorkspace::run(const ModelParams& params) const {
  if (!primed_) throw std::logic_error("ForwardWorkspace::run before prime");
  check_params(params, input_hat_.cols(), input_hat_.depth(), *m_);

  ForwardCache cache;
  cache.a_hat = a_hat_;
  cache.layers.reserve(params.weights.size());

  // first layer reuses the primed hat tensors
  {
    LayerCache lc;
    lc.input_hat = input_hat_;
    lc.g1 = g1_;
    lc.u_hat = m_transform(params.weights[0], *m_);
    lc.g2 = facewise_product(lc.g1, lc.u_hat);
    lc.z = m_transform_inverse(lc.g2, *m_);
    apply_activation(params.activations[0], lc.z, lc.h);
    cache.layers.push_back(std::move(lc));
  }
  for (std::size_t l = 1; l < params.weights.size(); ++l) {
    cache.layers.push_back(run_layer(
        a_hat_, m_transform(cache.layers[l - 1].h, *m_), params.weights[l],
        params.activations[l], *m_));
  }
  return cache;
}

std::vector<Tensor3> backward(const ForwardCache& cache, const Tensor3& dl_dh,
                              const ModelParams& params,
                              const MixingMatrix& m) {
  if (cache.layers.size() != params.weights.size()) {
    throw std::invalid_argument(
        "backward: cache does not match model layer count");
  }
  if (!dl_dh.same_dims(cache.output())) {
    throw std::invalid_argument(
        "backward: dL/dH dims do not match model output");
  }
  const std::size_t n_nodes = cache.a_hat.rows();
  const std::size_t depth = dl_dh.depth();

  std::vector<Tensor3> grads(params.weights.size());
  Tensor3 dh = dl_dh;
  for (std::size_t li = params.weights.size(); li-- > 0;) {
    const LayerCache& lc = cache.layers[li];
    const std::size_t f_in = params.weights[li].rows();
    const std::size_t f_out = params.weights[li].cols();

    if (params.activations[li] == Activation::relu) {
      kernels::ops().relu_gate(dh.data(), lc.z.data(), dh.size());
    }
    const Tensor3 dg2 = m_transform_inverse_transpose(dh, m);

    Tensor3 du_hat(f_in, f_out, depth);
    for (std::size_t k = 0; k < depth; ++k) {
      gemm_tn(du_hat.slice(k), lc.g1.slice(k), dg2.slice(k), f_in, n_nodes,
              f_out);
    }
    grads[li] = m_transform_transpose(du_hat, m);

    if (li > 0) {
      Tensor3 dg1(n_nodes, f_in, depth);
      Tensor3 dx_hat(n_nodes, f_in, depth);
      for (std::size_t k = 0; k < depth; ++k) {
        gemm_nt(dg1.slice(k), dg2.slice(k), lc.u_hat.slice(k), n_nodes, f_out,
                f_in);
        gemm_tn(dx_hat.slice(k), cache.a_hat.slice(k), dg1.slice(k), n_nodes,
                n_nodes, f_in);
      }
      dh = m_transform_transpose(dx_hat, m);
    }
  }
  return grads;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     std::uint64_t seed) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << "cdgcn-checkpoint 1\n";
  f << "seed " << seed << '\n';
  f << "layers " << params.weights.size() << '\n';
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Tensor3& u = params.weights[l];
    f << "layer " << l << ' ' << activation_name(params.activations[l]) << ' '
      << u.rows() << ' ' << u.cols() << ' ' << u.depth() << '\n';
    for (std::size_t k = 0; k < u.depth(); ++k) {
      for (std::size_t i = 0; i < u.rows(); ++i) {
        for (std::size_t j = 0; j < u.cols(); ++j) {
          if (j) f << ' ';
          f << format_double(u(i, j, k));
        }
        f << '\n';
      }
    }
  }
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::string word;
  int version = 0;
  f >> word >> version;
  if (word != "cdgcn-checkpoint" || version != 1) {
    throw std::runtime_error(path + ": not a version-1 checkpoint");
  }
  Checkpoint cp;
  std::size_t n_layers = 0;
  f >> word >> cp.seed;
  if (word != "seed") throw std::runtime_error(path + ": expected 'seed'");
  f >> word >> n_layers;
  if (word != "layers") throw std::runtime_error(path + ": expected 'layers'");
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::size_t index = 0, rows = 0, cols = 0, depth = 0;
    std::string act;
    f >> word >> index >> act >> rows >> cols >> depth;
    if (!f || word != "layer" || index != l) {
      throw std::runtime_error(path + ": malformed layer header");
    }
    Tensor3 u(rows, cols, depth);
    for (std::size_t k = 0; k < depth; ++k) {
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          if (!(f >> u(i, j, k))) {
            throw std::runtime_error(path + ": truncated layer " +
                                     std::to_string(l));
          }
        }
      }
    }
    cp.params.weights.push_back(std::move(u));
    cp.params.activations.push_back(activation_from(act));
  }
  return cp;
}

}  // namespace cdgcn
