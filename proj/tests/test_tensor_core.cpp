#include <doctest.h>

#include <cmath>

#include "gradient_cases.hpp"
#include "morphoguard/layers.hpp"
#include "morphoguard/optim.hpp"
#include "morphoguard/tensor.hpp"

using namespace morphoguard;
using namespace morphoguard::nn;

namespace {

void fill_uniform(Tensor& t, Rng& rng, float scale = 1.0f) {
  std::uniform_real_distribution<float> u(-scale, scale);
  for (auto& v : t.data) v = u(rng);
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor t(2, 3, 1.5f);
  CHECK(t.size() == 6);
  t(1, 2) = -2.0f;
  CHECK(t.row(1)[2] == -2.0f);
  CHECK_THROWS_AS(require_shape(t, 3, 2, "t"), ConfigError);
  require_finite(t, "t");
  t(0, 0) = std::nanf("");
  CHECK_THROWS_AS(require_finite(t, "t"), RuntimeFailure);

  ParameterStore store;
  auto& p = store.add("w", 2, 2);
  store.add("buf", 1, 2, false);
  CHECK(store.find("w") == &p);
  CHECK(store.find("missing") == nullptr);
  CHECK(store.trainable().size() == 1);
  CHECK(store.all().size() == 2);
  CHECK(store.trainable_count() == 4);
}

TEST_CASE("layer spec validation") {
  CHECK_NOTHROW(LayerSpec{LayerKind::affine, 3, 4}.validate());
  CHECK_THROWS_AS((LayerSpec{LayerKind::affine, 0, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((LayerSpec{LayerKind::residual_block, 4, 5}.validate()), ConfigError);
}

TEST_CASE("affine examples") {
  ParameterStore store;
  auto a = Affine::create(store, "a", 2, 2);
  a.w->value.data = {1, 0, 0, 1};
  Tensor x(1, 2), y;
  x.data = {1, 2};
  a.forward(x, y);
  CHECK(y.data == std::vector<real>{1, 2});
  a.b->value.data = {3, 4};
  a.forward(x, y);
  CHECK(y.data == std::vector<real>{4, 6});
}

TEST_CASE("matmul wrappers agree with a naive product") {
  Rng rng(1);
  Tensor x(5, 7), w(7, 3), y, dx;
  fill_uniform(x, rng);
  fill_uniform(w, rng);
  matmul(x, w, y);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 7; ++k) acc += static_cast<double>(x(i, k)) * w(k, j);
      CHECK(std::abs(y(i, j) - acc) < 1e-5);
    }
  Tensor g(7, 3);
  matmul_tn_acc(x, y, g);
  matmul_tn_acc(x, y, g);
  matmul_nt(y, w, dx);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int r = 0; r < 5; ++r) acc += static_cast<double>(x(r, i)) * y(r, j);
      CHECK(std::abs(g(i, j) - 2 * acc) < 1e-4);
    }
  for (int r = 0; r < 5; ++r)
    for (int i = 0; i < 7; ++i) {
      double acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += static_cast<double>(y(r, j)) * w(i, j);
      CHECK(std::abs(dx(r, i) - acc) < 1e-5);
    }
}

TEST_CASE("affine gradient check in single precision") {
  const auto res = mgtest::grad::affine_case(1e-2);
  MESSAGE("affine max rel err " << res.max_rel_error << " at " << res.worst_entry);
  CHECK(res.max_rel_error < 1e-3);
}

TEST_CASE("relu forward") {
  Tensor x(1, 3), y;
  x.data = {-1, 0, 2};
  relu_forward(x, y);
  CHECK(y.data == std::vector<real>{0, 0, 2});
}

TEST_CASE("layer norm of a constant row is zero") {
  ParameterStore store;
  auto ln = LayerNorm::create(store, "ln", 12);
  Tensor x(1, 12, 4.0f), y;
  LayerNorm::Cache cache;
  ln.forward(x, y, cache);
  for (real v : y.data) CHECK(v == 0.0f);

  Rng rng(5);
  Tensor z(6, 12);
  fill_uniform(z, rng, 3.0f);
  ln.forward(z, y, cache);
  for (int r = 0; r < y.rows; ++r) {
    double mean = 0.0, sq = 0.0;
    for (int c = 0; c < y.cols; ++c) mean += y(r, c);
    mean /= y.cols;
    for (int c = 0; c < y.cols; ++c) sq += (y(r, c) - mean) * (y(r, c) - mean);
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(sq / y.cols - 1.0) < 1e-4);
  }
}

TEST_CASE("identity-init residual stacks are exact identities") {
  ParameterStore store;
  Rng rng(7);
  std::vector<ResidualBlock> blocks;
  for (int k = 0; k < 24; ++k) blocks.push_back(ResidualBlock::create(store, "b" + std::to_string(k), 16, Modulation::none, rng));
  Tensor x(5, 16);
  fill_uniform(x, rng, 3.0f);
  Tensor cur = x, next;
  ResidualBlock::Cache cache;
  for (const auto& b : blocks) {
    b.forward(cur, next, cache);
    cur = next;
  }
  CHECK(cur == x);

  // A zero modulation leaves a FiLM block equal to the unconditioned one.
  ParameterStore s2;
  Rng r1(8), r2(8);
  const auto plain = ResidualBlock::create(s2, "p", 16, Modulation::none, r1, false);
  const auto film = ResidualBlock::create(s2, "f", 16, Modulation::film, r2, false);
  film.fc2.w->value = plain.fc2.w->value;
  Tensor zero_mod(5, 32), yp, yf;
  plain.forward(x, yp, cache);
  film.forward(x, yf, cache, &zero_mod);
  CHECK(yp == yf);
}

TEST_CASE("gradient checker detects a corrupted backward") {
  CHECK(mgtest::grad::mutation_case(1e-3).max_rel_error > 0.1);
}

TEST_CASE("adam update examples") {
  Parameter p("p", 1, 1);
  p.value.data = {1.0f};
  std::vector<Parameter*> params{&p};
  adam_step(params, 0.1f);
  CHECK(p.value.data[0] == 1.0f);

  Parameter q("q", 1, 1);
  q.value.data = {1.0f};
  q.grad.data = {1.0f};
  std::vector<Parameter*> qs{&q};
  adam_step(qs, 0.1f);
  // m̂ = 1, v̂ = 1 after bias correction, so the step is lr / (1 + eps).
  CHECK(q.value.data[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(q.grad.data[0] == 0.0f);

  Parameter a("a", 1, 3), b("b", 1, 3);
  a.value.data = b.value.data = {0.5f, -0.2f, 0.1f};
  std::vector<Parameter*> pa{&a}, pb{&b};
  for (int s = 0; s < 2; ++s) {
    a.grad.data = b.grad.data = {0.3f, -0.1f, 0.7f};
    adam_step(pa, 0.01f);
    adam_step(pb, 0.01f);
  }
  CHECK(a.value == b.value);

  Parameter frozen("f", 1, 1, false);
  frozen.value.data = {2.0f};
  frozen.grad.data = {1.0f};
  std::vector<Parameter*> pf{&frozen};
  adam_step(pf, 0.1f);
  CHECK(frozen.value.data[0] == 2.0f);

  CHECK(cosine_lr(1e-3, 1e-5, 0, 100) == doctest::Approx(1e-3));
  CHECK(cosine_lr(1e-3, 1e-5, 100, 100) == doctest::Approx(1e-5));
  CHECK(cosine_lr(1e-3, 1e-5, 50, 100) == doctest::Approx(0.5 * (1e-3 + 1e-5)));
}

TEST_CASE("kaiming uniform bound") {
  Tensor w(50, 40);
  Rng rng(1);
  init_kaiming_uniform(w, rng, std::sqrt(2.0));
  const double bound = std::sqrt(2.0) * std::sqrt(3.0 / 50.0);
  double mx = 0.0;
  for (float v : w.data) mx = std::max(mx, static_cast<double>(std::abs(v)));
  CHECK(mx <= bound);
  CHECK(mx > 0.9 * bound);
}
