#include "morphoguard/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::nn {

Tensor::Tensor(int r, int c, real fill) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
  if (r < 0 || c < 0) throw ConfigError("negative tensor shape");
}

void Tensor::resize(int r, int c) {
  rows = r;
  cols = c;
  data.resize(static_cast<std::size_t>(r) * c);
}

void Tensor::fill(real v) { std::fill(data.begin(), data.end(), v); }

void require_finite(const Tensor& t, std::string_view what) {
  if (!simd::active().all_finite(t.data.data(), t.size()))
    throw RuntimeFailure("non-finite values in " + std::string(what));
}

void require_shape(const Tensor& t, int rows, int cols, std::string_view what) {
  if (t.rows == rows && t.cols == cols) return;
  std::ostringstream os;
  os << what << ": expected " << rows << "x" << cols << ", got " << t.rows << "x" << t.cols;
  throw ConfigError(os.str());
}

Parameter::Parameter(std::string n, int rows, int cols, bool train)
    : name(std::move(n)), value(rows, cols), grad(rows, cols), trainable(train) {
  if (trainable) {
    m = Tensor(rows, cols);
    v = Tensor(rows, cols);
  }
}

Parameter& ParameterStore::add(std::string name, int rows, int cols, bool trainable) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter '" + name + "'");
  return params_.emplace_back(std::move(name), rows, cols, trainable);
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<Parameter*> ParameterStore::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (p.trainable) out.push_back(&p);
  return out;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_)
    if (p.trainable) n += p.value.size();
  return n;
}

void matmul(const Tensor& x, const Tensor& w, Tensor& y, real beta) {
  if (x.cols != w.rows) throw ConfigError("matmul: inner dimensions differ");
  if (beta == 0.0f) y.resize(x.rows, w.cols);
  else require_shape(y, x.rows, w.cols, "matmul output");
  simd::active().gemm(false, false, x.rows, w.cols, x.cols, 1.0f, x.data.data(), x.cols, w.data.data(), w.cols, beta,
                      y.data.data(), y.cols);
}

void matmul_tn_acc(const Tensor& x, const Tensor& dy, Tensor& out) {
  if (x.rows != dy.rows) throw ConfigError("matmul_tn: batch dimensions differ");
  require_shape(out, x.cols, dy.cols, "matmul_tn output");
  simd::active().gemm(true, false, x.cols, dy.cols, x.rows, 1.0f, x.data.data(), x.cols, dy.data.data(), dy.cols,
                      1.0f, out.data.data(), out.cols);
}

void matmul_nt(const Tensor& dy, const Tensor& w, Tensor& dx, real beta) {
  if (dy.cols != w.cols) throw ConfigError("matmul_nt: inner dimensions differ");
  if (beta == 0.0f) dx.resize(dy.rows, w.rows);
  else require_shape(dx, dy.rows, w.rows, "matmul_nt output");
  simd::active().gemm(false, true, dy.rows, w.rows, dy.cols, 1.0f, dy.data.data(), dy.cols, w.data.data(), w.cols,
                      beta, dx.data.data(), dx.cols);
}

}  // namespace morphoguard::nn
