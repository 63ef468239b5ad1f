#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "cdgcn/model.hpp"
#include "test_util.hpp"

using namespace cdgcn;

namespace {

Tensor3 identity_slices(std::size_t n, std::size_t depth) {
  Tensor3 t(n, n, depth);
  for (std::size_t k = 0; k < depth; ++k) {
    for (std::size_t i = 0; i < n; ++i) t(i, i, k) = 1.0;
  }
  return t;
}

// scalar probe: sum(g .* H(U)); its U-gradient is backward(cache, g)
double probe(const Tensor3& g, const Tensor3& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.data()[i] * h.data()[i];
  return s;
}

}  // namespace

TEST_CASE("init_params is seeded, bounded and shaped") {
  const ModelParams a = init_params(5, 5, 24, 7);
  const ModelParams b = init_params(5, 5, 24, 7);
  REQUIRE(a.weights.size() == 1);
  CHECK(a.weights[0].rows() == 5);
  CHECK(a.weights[0].cols() == 5);
  CHECK(a.weights[0].depth() == 24);
  CHECK(testutil::max_abs_diff(a.weights[0], b.weights[0]) == 0.0);

  const double bound = std::sqrt(6.0 / 10.0);
  for (std::size_t i = 0; i < a.weights[0].size(); ++i) {
    CHECK(std::fabs(a.weights[0].data()[i]) <= bound);
  }
  const ModelParams c = init_params(5, 5, 24, 8);
  CHECK(testutil::max_abs_diff(a.weights[0], c.weights[0]) > 0.0);
}

TEST_CASE("forward with neutral elements returns the input") {
  const std::size_t n = 3, f = 3, t = 4;
  const Tensor3 a = identity_slices(n, t);
  ModelParams params;
  params.weights.push_back(identity_slices(f, t));
  params.activations.push_back(Activation::relu);
  const auto m = MixingMatrix::identity(t);

  const Tensor3 w = testutil::seeded_tensor(n, f, t, 5, 0.1, 1.0);
  const ForwardCache cache = forward(a, w, params, m);
  CHECK(testutil::max_abs_diff(cache.output(), w) == 0.0);

  Tensor3 with_negative = w;
  with_negative(1, 2, 2) = -0.5;
  const ForwardCache clamped = forward(a, with_negative, params, m);
  CHECK(clamped.output()(1, 2, 2) == 0.0);
  CHECK(clamped.output()(0, 0, 0) == with_negative(0, 0, 0));
}

TEST_CASE("forward equals composing the tensor primitives") {
  const std::size_t n = 3, f = 2, t = 4;
  const auto m = MixingMatrix::banded_mean(t, 2);
  const Tensor3 a = testutil::seeded_tensor(n, n, t, 11, 0.0, 1.0);
  const Tensor3 w = testutil::seeded_tensor(n, f, t, 12);
  ModelParams params = init_params(f, f, t, 13);

  const Tensor3 step = m_product(m_product(a, w, m), params.weights[0], m);
  Tensor3 expected(step.rows(), step.cols(), step.depth());
  for (std::size_t i = 0; i < step.size(); ++i) {
    expected.data()[i] = step.data()[i] > 0.0 ? step.data()[i] : 0.0;
  }
  const ForwardCache cache = forward(a, w, params, m);
  CHECK(testutil::max_abs_diff(cache.output(), expected) <= 1e-12);
}

TEST_CASE("forward workspace matches the one-shot forward bitwise") {
  const std::size_t n = 4, f = 3, t = 6;
  const auto m = MixingMatrix::banded_mean(t, 3);
  const Tensor3 a = testutil::seeded_tensor(n, n, t, 21, 0.0, 1.0);
  const Tensor3 w = testutil::seeded_tensor(n, f, t, 22);
  const ModelParams params = init_params(f, f, t, 23);

  ForwardWorkspace ws;
  ws.prime(a, w, m);
  const ForwardCache via_ws = ws.run(params);
  const ForwardCache direct = forward(a, w, params, m);
  CHECK(testutil::max_abs_diff(via_ws.output(), direct.output()) == 0.0);
}

TEST_CASE("forward rejects shape mismatches") {
  const auto m = MixingMatrix::banded_mean(4, 2);
  const Tensor3 a = testutil::seeded_tensor(3, 3, 4, 31);
  const Tensor3 w = testutil::seeded_tensor(2, 2, 4, 32);  // wrong N
  const ModelParams params = init_params(2, 2, 4, 33);
  CHECK_THROWS_AS(forward(a, w, params, m), std::invalid_argument);

  const Tensor3 w2 = testutil::seeded_tensor(3, 3, 4, 34);
  const ModelParams bad = init_params(2, 2, 4, 35);  // wrong F
  CHECK_THROWS_AS(forward(a, w2, bad, m), std::invalid_argument);
}

TEST_CASE("backward of a zero upstream gradient is zero") {
  const std::size_t n = 3, f = 2, t = 4;
  const auto m = MixingMatrix::banded_mean(t, 2);
  const Tensor3 a = testutil::seeded_tensor(n, n, t, 41, 0.0, 1.0);
  const Tensor3 w = testutil::seeded_tensor(n, f, t, 42);
  const ModelParams params = init_params(f, f, t, 43);
  const ForwardCache cache = forward(a, w, params, m);
  const auto grads = backward(cache, Tensor3(n, f, t), params, m);
  REQUIRE(grads.size() == 1);
  CHECK(frobenius_norm(grads[0]) == 0.0);
}

TEST_CASE("backward matches central finite differences") {
  struct Instance {
    std::size_t t, b;
    std::uint64_t seed;
  };
  const Instance instances[] = {
      {1, 1, 1}, {4, 1, 2}, {4, 2, 3}, {4, 4, 4}, {8, 1, 5},
      {8, 2, 6}, {8, 8, 7}, {1, 1, 8}, {4, 2, 9}, {8, 2, 10},
  };
  const std::size_t n = 3, f = 2;
  const double h = 1e-5;

  for (const Instance& inst : instances) {
    const auto m = MixingMatrix::banded_mean(inst.t, inst.b);
    const Tensor3 a =
        testutil::seeded_tensor(n, n, inst.t, 100 + inst.seed, 0.0, 1.0);
    const Tensor3 w = testutil::seeded_tensor(n, f, inst.t, 200 + inst.seed);
    ModelParams params = init_params(f, f, inst.t, 300 + inst.seed);
    const Tensor3 g =
        testutil::seeded_tensor(n, f, inst.t, 400 + inst.seed);

    // keep the probe away from the ReLU kink
    const ForwardCache probe_cache = forward(a, w, params, m);
    for (std::size_t i = 0; i < probe_cache.layers[0].z.size(); ++i) {
      if (std::fabs(probe_cache.layers[0].z.data()[i]) <= 1e-3) {
        params.weights[0].data()[0] += 0.05;  // nudge and recheck below
        break;
      }
    }
    const ForwardCache cache = forward(a, w, params, m);
    bool near_kink = false;
    for (std::size_t i = 0; i < cache.layers[0].z.size(); ++i) {
      near_kink |= std::fabs(cache.layers[0].z.data()[i]) <= 1e-3;
    }
    if (near_kink) continue;  // deterministic skip; other seeds cover it

    const auto grads = backward(cache, g, params, m);

    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.weights[0].size(); ++i) {
      double& u = params.weights[0].data()[i];
      const double orig = u;
      u = orig + h;
      const double fp = probe(g, forward(a, w, params, m).output());
      u = orig - h;
      const double fm = probe(g, forward(a, w, params, m).output());
      u = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      max_rel = std::max(max_rel,
                         testutil::rel_err(grads[0].data()[i], numeric));
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("degenerate single-slice gradient reduces to W^T (gated G)") {
  const std::size_t n = 3, f = 2;
  const auto m = MixingMatrix::identity(1);
  const Tensor3 a = identity_slices(n, 1);
  const Tensor3 w = testutil::seeded_tensor(n, f, 1, 51);
  const ModelParams params = init_params(f, f, 1, 52);
  const Tensor3 g = testutil::seeded_tensor(n, f, 1, 53);

  const ForwardCache cache = forward(a, w, params, m);
  const auto grads = backward(cache, g, params, m);

  // by hand: dU = W^T (g .* [z > 0]) on the single slice
  Tensor3 gated = g;
  for (std::size_t i = 0; i < gated.size(); ++i) {
    if (!(cache.layers[0].z.data()[i] > 0.0)) gated.data()[i] = 0.0;
  }
  Tensor3 expected(f, f, 1);
  for (std::size_t r = 0; r < f; ++r) {
    for (std::size_t c = 0; c < f; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w(i, r, 0) * gated(i, c, 0);
      expected(r, c, 0) = s;
    }
  }
  CHECK(testutil::max_abs_diff(grads[0], expected) <= 1e-13);
}

TEST_CASE("two-layer forward and backward agree with finite differences") {
  const std::size_t n = 3, f = 2, hidden = 4, t = 4;
  const auto m = MixingMatrix::banded_mean(t, 2);
  const Tensor3 a = testutil::seeded_tensor(n, n, t, 61, 0.0, 1.0);
  const Tensor3 w = testutil::seeded_tensor(n, f, t, 62);
  ModelParams params = init_params_two_layer(f, hidden, t, 63);
  REQUIRE(params.weights.size() == 2);
  const Tensor3 g = testutil::seeded_tensor(n, f, t, 64);

  const ForwardCache cache = forward(a, w, params, m);
  CHECK(cache.output().cols() == f);
  bool near_kink = false;
  for (std::size_t i = 0; i < cache.layers[0].z.size(); ++i) {
    near_kink |= std::fabs(cache.layers[0].z.data()[i]) <= 1e-3;
  }
  if (near_kink) return;

  const auto grads = backward(cache, g, params, m);
  const double h = 1e-5;
  for (std::size_t layer = 0; layer < 2; ++layer) {
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.weights[layer].size(); ++i) {
      double& u = params.weights[layer].data()[i];
      const double orig = u;
      u = orig + h;
      const double fp = probe(g, forward(a, w, params, m).output());
      u = orig - h;
      const double fm = probe(g, forward(a, w, params, m).output());
      u = orig;
      max_rel = std::max(
          max_rel,
          testutil::rel_err(grads[layer].data()[i], (fp - fm) / (2.0 * h)));
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("relu output is nonnegative") {
  const std::size_t n = 4, f = 3, t = 6;
  const auto m = MixingMatrix::banded_mean(t, 3);
  const Tensor3 a = testutil::seeded_tensor(n, n, t, 71, 0.0, 1.0);
  const Tensor3 w = testutil::seeded_tensor(n, f, t, 72);
  const ModelParams params = init_params(f, f, t, 73);
  const ForwardCache cache = forward(a, w, params, m);
  for (std::size_t i = 0; i < cache.output().size(); ++i) {
    CHECK(cache.output().data()[i] >= 0.0);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = testutil::scratch_dir("ckpt");
  const ModelParams params = init_params_two_layer(3, 5, 7, 99);
  save_checkpoint((dir / "c.txt").string(), params, 99);
  const Checkpoint cp = load_checkpoint((dir / "c.txt").string());
  CHECK(cp.seed == 99);
  REQUIRE(cp.params.weights.size() == 2);
  CHECK(cp.params.activations[0] == Activation::relu);
  CHECK(cp.params.activations[1] == Activation::identity);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(testutil::max_abs_diff(cp.params.weights[l], params.weights[l]) ==
          0.0);
  }
  CHECK_THROWS(load_checkpoint((dir / "missing.txt").string()));
  std::filesystem::remove_all(dir);
}
