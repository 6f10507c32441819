#include "morphoguard/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::model {

namespace {

const double kReluGain = std::sqrt(2.0);

void add_into(Tensor& dst, const Tensor& src) {
  simd::active().axpy(1.0f, src.data.data(), dst.data.data(), dst.size());
}

void fill_buffer(nn::Parameter* p, const std::vector<float>& values, const char* what) {
  if (values.size() != p->value.size()) {
    std::ostringstream os;
    os << "normalization " << what << ": expected " << p->value.size() << " values, got " << values.size();
    throw ConfigError(os.str());
  }
  for (float v : values)
    if (!std::isfinite(v)) throw ConfigError(std::string("normalization ") + what + " is not finite");
  p->value.data.assign(values.begin(), values.end());
}

}  // namespace

void MorphoGuardNet::Stack::forward(const Tensor& x, Cache& c) const {
  c.in.resize(layers.size());
  c.pre.resize(layers.size());
  if (layers.empty()) {
    c.out = x;
    return;
  }
  c.in[0] = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].forward(c.in[i], c.pre[i]);
    nn::relu_forward(c.pre[i], i + 1 < layers.size() ? c.in[i + 1] : c.out);
  }
}

void MorphoGuardNet::Stack::backward(const Cache& c, const Tensor& dout, Tensor* dx) const {
  if (layers.empty()) {
    if (dx != nullptr) *dx = dout;
    return;
  }
  Tensor grad = dout;
  Tensor dpre;
  for (std::size_t i = layers.size(); i-- > 0;) {
    nn::relu_backward(c.pre[i], grad, dpre);
    if (i == 0) {
      layers[i].backward(c.in[i], dpre, dx);
    } else {
      layers[i].backward(c.in[i], dpre, &grad);
    }
  }
}

MorphoGuardNet::Stack MorphoGuardNet::make_stack(const std::string& prefix, int in, const std::vector<int>& widths,
                                                 Rng& rng) {
  Stack s;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    s.layers.push_back(nn::Affine::create(store_, prefix + ".l" + std::to_string(i), in, widths[i]));
    nn::init_kaiming_uniform(s.layers.back().w->value, rng, kReluGain);
    in = widths[i];
  }
  return s;
}

MorphoGuardNet::MorphoGuardNet(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng = make_rng(config_.seed, "init");
  const int in = config_.input_dim;
  const int f = config_.feature_width();
  const auto fusion = config_.fusion;

  if (fusion == FusionMethod::input_concat) {
    enc0_ = make_stack("enc", 2 * in, config_.encoder_widths, rng);
  } else {
    enc0_ = make_stack("enc0", in, config_.encoder_widths, rng);
    encg_ = make_stack("encg", in, config_.encoder_widths, rng);
  }

  switch (fusion) {
    case FusionMethod::concat:
      cat_proj_ = nn::Affine::create(store_, "fuse.concat", 2 * f, f);
      nn::init_kaiming_uniform(cat_proj_.w->value, rng, 1.0);
      break;
    case FusionMethod::outer_product: {
      const int r = config_.outer_rank;
      outer0_ = nn::Affine::create(store_, "fuse.outer0", f, r);
      outerg_ = nn::Affine::create(store_, "fuse.outerg", f, r);
      outer_proj_ = nn::Affine::create(store_, "fuse.outer", r * r, f);
      nn::init_kaiming_uniform(outer0_.w->value, rng, 1.0);
      nn::init_kaiming_uniform(outerg_.w->value, rng, 1.0);
      nn::init_kaiming_uniform(outer_proj_.w->value, rng, 1.0);
      break;
    }
    case FusionMethod::parallel_branch:
      for (int k = 0; k < config_.layers; ++k)
        film_.push_back(nn::Affine::create(store_, "fuse.film" + std::to_string(k), f, 2 * config_.width));
      break;
    case FusionMethod::adaptive_norm: ada_ = nn::Affine::create(store_, "fuse.ada", f, 2 * config_.width); break;
    default: break;
  }

  if (config_.backbone == BackboneKind::residual) {
    const auto mod = fusion == FusionMethod::parallel_branch ? nn::Modulation::film
                     : fusion == FusionMethod::adaptive_norm ? nn::Modulation::adaptive
                                                             : nn::Modulation::none;
    for (int k = 0; k < config_.layers; ++k)
      blocks_.push_back(nn::ResidualBlock::create(store_, "block" + std::to_string(k), config_.width, mod, rng));
  } else {
    mlp_ = make_stack("mlp", f, config_.mlp_widths, rng);
  }

  const int t = config_.trunk_width();
  cmd_head_ = nn::Affine::create(store_, "head.cmd", t, config_.output_dim);
  noise_head_ = nn::Affine::create(store_, "head.noise", t, 2 * in);
  nn::init_kaiming_uniform(cmd_head_.w->value, rng, 1.0);
  nn::init_kaiming_uniform(noise_head_.w->value, rng, 1.0);

  m0_mean_ = &store_.add("norm.m0_mean", 1, in, false);
  m0_scale_ = &store_.add("norm.m0_scale", 1, in, false);
  dm_scale_ = &store_.add("norm.dm_scale", 1, in, false);
  dq_scale_ = &store_.add("norm.dq_scale", 1, config_.output_dim, false);
  eps_scale_ = &store_.add("norm.eps_scale", 1, 1, false);
  m0_scale_->value.fill(1.0f);
  dm_scale_->value.fill(1.0f);
  dq_scale_->value.fill(1.0f);
  eps_scale_->value.fill(static_cast<real>(std::max(config_.noise_sigma, 1e-3)));
}

std::unique_ptr<MorphoGuardNet> MorphoGuardNet::clone() const {
  auto copy = std::make_unique<MorphoGuardNet>(config_);
  auto dst = copy->tensors();
  auto src = tensors();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i]->value = src[i]->value;
    dst[i]->m = src[i]->m;
    dst[i]->v = src[i]->v;
    dst[i]->step = src[i]->step;
  }
  return copy;
}

void MorphoGuardNet::set_loss_weights(double lambda_m, double lambda_g) {
  config_.lambda_m = lambda_m;
  config_.lambda_g = lambda_g;
  config_.validate();
}

void MorphoGuardNet::set_normalization(const Normalization& n) {
  fill_buffer(m0_mean_, n.m0_mean, "m0_mean");
  fill_buffer(m0_scale_, n.m0_scale, "m0_scale");
  fill_buffer(dm_scale_, n.dm_scale, "dm_scale");
  fill_buffer(dq_scale_, n.dq_scale, "dq_scale");
  for (const auto* p : {m0_scale_, dm_scale_, dq_scale_})
    for (real v : p->value.data)
      if (!(v > 0.0f)) throw ConfigError("normalization scales must be positive");
}

Normalization MorphoGuardNet::normalization() const {
  const auto copy = [](const nn::Parameter* p) { return std::vector<float>(p->value.data.begin(), p->value.data.end()); };
  return {copy(m0_mean_), copy(m0_scale_), copy(dm_scale_), copy(dq_scale_)};
}

void MorphoGuardNet::zero_grad() {
  for (auto* p : store_.trainable()) p->zero_grad();
}

void MorphoGuardNet::normalize_inputs(const Tensor& m0, const Tensor& dm) {
  const int in = config_.input_dim;
  nn::require_shape(m0, m0.rows, in, "m0 batch");
  nn::require_shape(dm, m0.rows, in, "dm batch");
  a_.resize(m0.rows, in);
  g_.resize(dm.rows, in);
  const real* mean = m0_mean_->value.data.data();
  const real* s0 = m0_scale_->value.data.data();
  const real* sg = dm_scale_->value.data.data();
  for (int r = 0; r < m0.rows; ++r) {
    const real* x = m0.row(r);
    const real* d = dm.row(r);
    real* ar = a_.row(r);
    real* gr = g_.row(r);
    for (int c = 0; c < in; ++c) {
      ar[c] = (x[c] - mean[c]) / s0[c];
      gr[c] = d[c] / sg[c];
    }
  }
}

std::pair<Tensor, Tensor> MorphoGuardNet::encode(const Tensor& m0, const Tensor& dm) {
  normalize_inputs(m0, dm);
  if (config_.fusion == FusionMethod::input_concat) {
    const int in = config_.input_dim;
    cat_in_.resize(a_.rows, 2 * in);
    for (int r = 0; r < a_.rows; ++r) {
      std::copy_n(a_.row(r), in, cat_in_.row(r));
      std::copy_n(g_.row(r), in, cat_in_.row(r) + in);
    }
    enc0_.forward(cat_in_, enc0_cache_);
    return {enc0_cache_.out, Tensor{}};
  }
  enc0_.forward(a_, enc0_cache_);
  encg_.forward(g_, encg_cache_);
  return {enc0_cache_.out, encg_cache_.out};
}

Tensor MorphoGuardNet::fuse(const Tensor& z0, const Tensor& zg) {
  const int f = config_.feature_width();
  mods_.clear();
  switch (config_.fusion) {
    case FusionMethod::input_concat: return z0;
    case FusionMethod::additive: {
      nn::require_shape(zg, z0.rows, z0.cols, "motion features");
      Tensor out = z0;
      add_into(out, zg);
      return out;
    }
    case FusionMethod::concat: {
      fusion_in_.resize(z0.rows, 2 * f);
      for (int r = 0; r < z0.rows; ++r) {
        std::copy_n(z0.row(r), f, fusion_in_.row(r));
        std::copy_n(zg.row(r), f, fusion_in_.row(r) + f);
      }
      Tensor out;
      cat_proj_.forward(fusion_in_, out);
      return out;
    }
    case FusionMethod::outer_product: {
      const int k = config_.outer_rank;
      outer0_.forward(z0, p0_);
      outerg_.forward(zg, pg_);
      outer_.resize(z0.rows, k * k);
      for (int r = 0; r < z0.rows; ++r) {
        const real* u = p0_.row(r);
        const real* v = pg_.row(r);
        real* o = outer_.row(r);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) o[i * k + j] = u[i] * v[j];
      }
      Tensor out;
      outer_proj_.forward(outer_, out);
      return out;
    }
    case FusionMethod::parallel_branch:
      mods_.resize(film_.size());
      for (std::size_t k = 0; k < film_.size(); ++k) film_[k].forward(zg, mods_[k]);
      return z0;
    case FusionMethod::adaptive_norm:
      mods_.resize(1);
      ada_.forward(zg, mods_[0]);
      return z0;
  }
  return z0;
}

void MorphoGuardNet::run_backbone(const Tensor& fused) {
  if (config_.backbone == BackboneKind::mlp) {
    mlp_.forward(fused, mlp_cache_);
    trunk_ = mlp_cache_.out;
    return;
  }
  block_in_.resize(blocks_.size());
  block_cache_.resize(blocks_.size());
  const Tensor* cur = &fused;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    block_in_[k] = *cur;
    const Tensor* mod = nullptr;
    if (config_.fusion == FusionMethod::parallel_branch) mod = &mods_[k];
    if (config_.fusion == FusionMethod::adaptive_norm) mod = &mods_[0];
    Tensor& out = k + 1 < blocks_.size() ? block_in_[k + 1] : trunk_;
    blocks_[k].forward(block_in_[k], out, block_cache_[k], mod);
    cur = &out;
  }
}

ForwardOutput MorphoGuardNet::forward(const Tensor& m0, const Tensor& dm, NoiseMode mode, Rng* rng) {
  const int in = config_.input_dim;
  const int batch = m0.rows;
  ForwardOutput out;
  out.eps_true = Tensor(batch, 2 * in);
  const double sigma = mode == NoiseMode::train ? config_.noise_sigma : 0.0;

  const Tensor* x0 = &m0;
  const Tensor* xg = &dm;
  Tensor m0n, dmn;
  if (sigma > 0.0) {
    if (rng == nullptr) throw ConfigError("train-mode forward with noise needs a generator");
    nn::require_shape(m0, batch, in, "m0 batch");
    nn::require_shape(dm, batch, in, "dm batch");
    m0n = m0;
    dmn = dm;
    std::normal_distribution<double> noise(0.0, sigma);
    for (int r = 0; r < batch; ++r) {
      real* e = out.eps_true.row(r);
      for (int c = 0; c < 2 * in; ++c) e[c] = static_cast<real>(noise(*rng));
      real* a = m0n.row(r);
      real* g = dmn.row(r);
      for (int c = 0; c < in; ++c) {
        a[c] += e[c];
        g[c] += e[in + c];
      }
    }
    x0 = &m0n;
    xg = &dmn;
  }

  auto [z0, zg] = encode(*x0, *xg);
  const Tensor fused = fuse(z0, zg);
  run_backbone(fused);

  cmd_head_.forward(trunk_, out.dq);
  const real* s = dq_scale_->value.data.data();
  for (int r = 0; r < batch; ++r) {
    real* d = out.dq.row(r);
    for (int c = 0; c < config_.output_dim; ++c) d[c] *= s[c];
  }
  noise_head_.forward(trunk_, out.eps_pred);
  const real es = eps_scale_->value.data[0];
  for (auto& v : out.eps_pred.data) v *= es;
  return out;
}

Tensor MorphoGuardNet::predict(const Tensor& m0, const Tensor& dm) {
  return forward(m0, dm, NoiseMode::eval).dq;
}

void MorphoGuardNet::backward(const Tensor& d_dq, const Tensor* d_eps) {
  const int batch = trunk_.rows;
  nn::require_shape(d_dq, batch, config_.output_dim, "dq gradient");
  Tensor grad = d_dq;
  const real* s = dq_scale_->value.data.data();
  for (int r = 0; r < batch; ++r) {
    real* g = grad.row(r);
    for (int c = 0; c < config_.output_dim; ++c) g[c] *= s[c];
  }
  Tensor dtrunk;
  cmd_head_.backward(trunk_, grad, &dtrunk);
  if (d_eps != nullptr) {
    nn::require_shape(*d_eps, batch, 2 * config_.input_dim, "noise gradient");
    Tensor ge = *d_eps;
    const real es = eps_scale_->value.data[0];
    for (auto& v : ge.data) v *= es;
    Tensor dt2;
    noise_head_.backward(trunk_, ge, &dt2);
    add_into(dtrunk, dt2);
  }

  // Backbone.
  std::vector<Tensor> dmods(mods_.size());
  for (std::size_t k = 0; k < mods_.size(); ++k) dmods[k] = Tensor(mods_[k].rows, mods_[k].cols);
  Tensor dfused;
  if (config_.backbone == BackboneKind::mlp) {
    mlp_.backward(mlp_cache_, dtrunk, &dfused);
  } else {
    Tensor cur = std::move(dtrunk);
    Tensor dx;
    for (std::size_t k = blocks_.size(); k-- > 0;) {
      const Tensor* mod = nullptr;
      Tensor* dmod = nullptr;
      if (config_.fusion == FusionMethod::parallel_branch) {
        mod = &mods_[k];
        dmod = &dmods[k];
      } else if (config_.fusion == FusionMethod::adaptive_norm) {
        mod = &mods_[0];
        dmod = &dmods[0];
      }
      blocks_[k].backward(block_in_[k], block_cache_[k], cur, dx, mod, dmod);
      std::swap(cur, dx);
    }
    dfused = std::move(cur);
  }

  // Fusion.
  const int f = config_.feature_width();
  Tensor dz0, dzg;
  switch (config_.fusion) {
    case FusionMethod::input_concat: enc0_.backward(enc0_cache_, dfused, nullptr); return;
    case FusionMethod::additive:
      dz0 = dfused;
      dzg = std::move(dfused);
      break;
    case FusionMethod::concat: {
      Tensor dcat;
      cat_proj_.backward(fusion_in_, dfused, &dcat);
      dz0.resize(batch, f);
      dzg.resize(batch, f);
      for (int r = 0; r < batch; ++r) {
        std::copy_n(dcat.row(r), f, dz0.row(r));
        std::copy_n(dcat.row(r) + f, f, dzg.row(r));
      }
      break;
    }
    case FusionMethod::outer_product: {
      const int k = config_.outer_rank;
      Tensor douter;
      outer_proj_.backward(outer_, dfused, &douter);
      Tensor dp0(batch, k), dpg(batch, k);
      for (int r = 0; r < batch; ++r) {
        const real* u = p0_.row(r);
        const real* v = pg_.row(r);
        const real* d = douter.row(r);
        real* du = dp0.row(r);
        real* dv = dpg.row(r);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            du[i] += d[i * k + j] * v[j];
            dv[j] += d[i * k + j] * u[i];
          }
      }
      outer0_.backward(enc0_cache_.out, dp0, &dz0);
      outerg_.backward(encg_cache_.out, dpg, &dzg);
      break;
    }
    case FusionMethod::parallel_branch: {
      dz0 = std::move(dfused);
      dzg = Tensor(batch, f);
      Tensor tmp;
      for (std::size_t k = 0; k < film_.size(); ++k) {
        film_[k].backward(encg_cache_.out, dmods[k], &tmp);
        add_into(dzg, tmp);
      }
      break;
    }
    case FusionMethod::adaptive_norm:
      dz0 = std::move(dfused);
      ada_.backward(encg_cache_.out, dmods[0], &dzg);
      break;
  }
  enc0_.backward(enc0_cache_, dz0, nullptr);
  encg_.backward(encg_cache_, dzg, nullptr);
}

}  // namespace morphoguard::model
