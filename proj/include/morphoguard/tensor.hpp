#pragma once

// Dense row-major float32 matrices and trainable parameters. The batch axis is
// always the row axis.

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphoguard/common.hpp"

namespace morphoguard::nn {

struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<real> data;

  Tensor() = default;
  Tensor(int r, int c, real fill = 0.0f);

  std::size_t size() const { return data.size(); }
  real* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const real* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  real& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  real operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  /// Reshape, reusing capacity. Contents are unspecified unless `fill` is used.
  void resize(int r, int c);
  void fill(real v);
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Tensor& o) const = default;
};

/// Throws RuntimeFailure naming `what` if any entry is NaN or infinite.
void require_finite(const Tensor& t, std::string_view what);
/// Throws ConfigError on a shape mismatch.
void require_shape(const Tensor& t, int rows, int cols, std::string_view what);

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
  long step = 0;
  bool trainable = true;

  Parameter(std::string n, int rows, int cols, bool train = true);
  void zero_grad() { grad.fill(0.0f); }
};

/// Owns parameters at stable addresses, in registration order.
class ParameterStore {
 public:
  Parameter& add(std::string name, int rows, int cols, bool trainable = true);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::vector<Parameter*> trainable();
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t trainable_count() const;

 private:
  std::deque<Parameter> params_;
};

// Thin wrappers over the active kernel set.

/// y = x·W (+ beta·y).
void matmul(const Tensor& x, const Tensor& w, Tensor& y, real beta = 0.0f);
/// out += xᵀ·dy.
void matmul_tn_acc(const Tensor& x, const Tensor& dy, Tensor& out);
/// dx = dy·Wᵀ (+ beta·dx).
void matmul_nt(const Tensor& dy, const Tensor& w, Tensor& dx, real beta = 0.0f);

}  // namespace morphoguard::nn
