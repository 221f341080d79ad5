// udac/layers.cc

// Copyright 2026  UDAC Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "udac/layers.h"

#include <cmath>

#include "udac/error.h"

namespace udac {

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kLinear: return "Linear";
    case LayerKind::kBatchNorm: return "BatchNorm";
    case LayerKind::kRelu: return "ReLU";
    case LayerKind::kLogSoftmax: return "LogSoftmax";
    case LayerKind::kGrl: return "GRL";
  }
  return "?";
}

void Layer::require_cache(const char *who) {
  if (!has_cache_) {
    throw Error(std::string(who) +
                ": backward called without a pending forward");
  }
}

void Layer::consume_cache() { has_cache_ = false; }

void Layer::arm_cache(Mode mode) {
  has_cache_ = true;
  cached_mode_ = mode;
}

// ---------------------------------------------------------------- Linear

LinearLayer::LinearLayer(int64_t n_in, int64_t n_out)
    : weight_(n_in, n_out),
      bias_(1, n_out),
      weight_grad_(n_in, n_out),
      bias_grad_(1, n_out) {}

LinearLayer::LinearLayer(int64_t n_in, int64_t n_out, Rng &rng,
                         double init_std)
    : LinearLayer(n_in, n_out) {
  const double std =
      init_std > 0.0 ? init_std : std::sqrt(2.0 / static_cast<double>(n_in));
  for (double &w : weight_.data()) w = std * rng.normal();
  // biases stay zero
}

Tensor LinearLayer::forward(const Tensor &x, Mode mode) {
  if (x.cols() != weight_.rows()) {
    throw ShapeError("Linear forward: input cols " + std::to_string(x.cols()) +
                     " != weight input dim " + std::to_string(weight_.rows()));
  }
  input_ = x;
  arm_cache(mode);
  Tensor y = matmul(x, weight_);
  const double *b = bias_.row(0);
  for (int64_t i = 0; i < y.rows(); i++) {
    double *yrow = y.row(i);
    for (int64_t j = 0; j < y.cols(); j++) yrow[j] += b[j];
  }
  return y;
}

Tensor LinearLayer::backward(const Tensor &upstream) {
  require_cache("Linear");
  if (upstream.cols() != weight_.cols() || upstream.rows() != input_.rows()) {
    throw ShapeError("Linear backward: upstream " + upstream.shape_str() +
                     " does not match forward batch " + input_.shape_str() +
                     " -> n_out " + std::to_string(weight_.cols()));
  }
  consume_cache();
  add_inplace(weight_grad_, matmul_tn(input_, upstream));
  double *bg = bias_grad_.row(0);
  for (int64_t i = 0; i < upstream.rows(); i++) {
    const double *urow = upstream.row(i);
    for (int64_t j = 0; j < upstream.cols(); j++) bg[j] += urow[j];
  }
  return matmul_nt(upstream, weight_);
}

// ------------------------------------------------------------- BatchNorm

BatchNormLayer::BatchNormLayer(int64_t n, double eps, double momentum)
    : scale_(1, n),
      shift_(1, n),
      scale_grad_(1, n),
      shift_grad_(1, n),
      running_mean_(1, n),
      running_var_(1, n),
      eps_(eps),
      momentum_(momentum) {
  scale_.fill(1.0);
  running_var_.fill(1.0);
}

Tensor BatchNormLayer::forward(const Tensor &x, Mode mode) {
  const int64_t n = scale_.cols();
  if (x.cols() != n) {
    throw ShapeError("BatchNorm forward: input cols " +
                     std::to_string(x.cols()) + " != normalized dim " +
                     std::to_string(n));
  }
  const int64_t B = x.rows();
  Tensor y(B, n);
  if (mode == Mode::kTrain) {
    if (B < 2) {
      throw Error("BatchNorm: train mode needs a batch of >= 2 rows, got " +
                  std::to_string(B));
    }
    Tensor mean(1, n), var(1, n);
    double *mp = mean.row(0), *vp = var.row(0);
    for (int64_t i = 0; i < B; i++) {
      const double *xr = x.row(i);
      for (int64_t j = 0; j < n; j++) mp[j] += xr[j];
    }
    for (int64_t j = 0; j < n; j++) mp[j] /= static_cast<double>(B);
    for (int64_t i = 0; i < B; i++) {
      const double *xr = x.row(i);
      for (int64_t j = 0; j < n; j++) {
        const double d = xr[j] - mp[j];
        vp[j] += d * d;
      }
    }
    for (int64_t j = 0; j < n; j++) vp[j] /= static_cast<double>(B);

    xhat_ = Tensor(B, n);
    inv_std_ = Tensor(1, n);
    double *ip = inv_std_.row(0);
    for (int64_t j = 0; j < n; j++) ip[j] = 1.0 / std::sqrt(vp[j] + eps_);
    const double *g = scale_.row(0), *b = shift_.row(0);
    for (int64_t i = 0; i < B; i++) {
      const double *xr = x.row(i);
      double *hr = xhat_.row(i);
      double *yr = y.row(i);
      for (int64_t j = 0; j < n; j++) {
        hr[j] = (xr[j] - mp[j]) * ip[j];
        yr[j] = g[j] * hr[j] + b[j];
      }
    }
    if (!freeze_running_stats_) {
      double *rm = running_mean_.row(0), *rv = running_var_.row(0);
      for (int64_t j = 0; j < n; j++) {
        rm[j] = (1.0 - momentum_) * rm[j] + momentum_ * mp[j];
        rv[j] = (1.0 - momentum_) * rv[j] + momentum_ * vp[j];
      }
    }
  } else {
    const double *rm = running_mean_.row(0), *rv = running_var_.row(0);
    const double *g = scale_.row(0), *b = shift_.row(0);
    inv_std_ = Tensor(1, n);
    double *ip = inv_std_.row(0);
    for (int64_t j = 0; j < n; j++) ip[j] = 1.0 / std::sqrt(rv[j] + eps_);
    for (int64_t i = 0; i < B; i++) {
      const double *xr = x.row(i);
      double *yr = y.row(i);
      for (int64_t j = 0; j < n; j++) {
        yr[j] = g[j] * (xr[j] - rm[j]) * ip[j] + b[j];
      }
    }
    xhat_ = Tensor();  // infer backward does not need xhat
  }
  arm_cache(mode);
  return y;
}

Tensor BatchNormLayer::backward(const Tensor &upstream) {
  require_cache("BatchNorm");
  const int64_t n = scale_.cols();
  const int64_t B = upstream.rows();
  if (upstream.cols() != n) {
    throw ShapeError("BatchNorm backward: upstream cols " +
                     std::to_string(upstream.cols()) + " != dim " +
                     std::to_string(n));
  }
  const Mode mode = cached_mode();
  consume_cache();
  Tensor dx(B, n);
  const double *g = scale_.row(0);
  const double *ip = inv_std_.row(0);
  if (mode == Mode::kInfer) {
    // Running statistics are constants: a pure affine map per column.
    for (int64_t i = 0; i < B; i++) {
      const double *ur = upstream.row(i);
      double *dr = dx.row(i);
      for (int64_t j = 0; j < n; j++) dr[j] = ur[j] * g[j] * ip[j];
    }
    return dx;
  }
  // Train mode: account for the batch mean/variance depending on x.
  // dx = (scale*inv/B) * (B*u - sum(u) - xhat * sum(u*xhat))
  Tensor sum_u(1, n), sum_uh(1, n);
  double *su = sum_u.row(0), *sh = sum_uh.row(0);
  for (int64_t i = 0; i < B; i++) {
    const double *ur = upstream.row(i);
    const double *hr = xhat_.row(i);
    for (int64_t j = 0; j < n; j++) {
      su[j] += ur[j];
      sh[j] += ur[j] * hr[j];
    }
  }
  double *sg = scale_grad_.row(0), *bg = shift_grad_.row(0);
  for (int64_t j = 0; j < n; j++) {
    sg[j] += sh[j];
    bg[j] += su[j];
  }
  const double invB = 1.0 / static_cast<double>(B);
  for (int64_t i = 0; i < B; i++) {
    const double *ur = upstream.row(i);
    const double *hr = xhat_.row(i);
    double *dr = dx.row(i);
    for (int64_t j = 0; j < n; j++) {
      dr[j] = g[j] * ip[j] * invB *
              (static_cast<double>(B) * ur[j] - su[j] - hr[j] * sh[j]);
    }
  }
  return dx;
}

// ------------------------------------------------------------------ ReLU

Tensor ReluLayer::forward(const Tensor &x, Mode mode) {
  if (x.cols() != dim_) {
    throw ShapeError("ReLU forward: input cols " + std::to_string(x.cols()) +
                     " != dim " + std::to_string(dim_));
  }
  input_ = x;
  arm_cache(mode);
  Tensor y = x;
  for (double &v : y.data()) {
    if (v < 0.0) v = 0.0;
  }
  return y;
}

Tensor ReluLayer::backward(const Tensor &upstream) {
  require_cache("ReLU");
  if (!upstream.same_shape(input_)) {
    throw ShapeError("ReLU backward: upstream " + upstream.shape_str() +
                     " != forward input " + input_.shape_str());
  }
  consume_cache();
  Tensor dx = upstream;
  const double *xp = input_.data().data();
  double *dp = dx.data().data();
  const int64_t sz = dx.size();
  for (int64_t i = 0; i < sz; i++) {
    if (xp[i] <= 0.0) dp[i] = 0.0;
  }
  return dx;
}

// ------------------------------------------------------------ LogSoftmax

Tensor LogSoftmaxLayer::forward(const Tensor &x, Mode mode) {
  if (x.cols() != dim_) {
    throw ShapeError("LogSoftmax forward: input cols " +
                     std::to_string(x.cols()) + " != dim " +
                     std::to_string(dim_));
  }
  const int64_t B = x.rows(), n = x.cols();
  Tensor y(B, n);
  for (int64_t i = 0; i < B; i++) {
    const double *xr = x.row(i);
    double *yr = y.row(i);
    double m = xr[0];
    for (int64_t j = 1; j < n; j++) m = std::max(m, xr[j]);
    double s = 0.0;
    for (int64_t j = 0; j < n; j++) s += std::exp(xr[j] - m);
    const double lse = m + std::log(s);
    for (int64_t j = 0; j < n; j++) yr[j] = xr[j] - lse;
  }
  output_ = y;
  arm_cache(mode);
  return y;
}

Tensor LogSoftmaxLayer::backward(const Tensor &upstream) {
  require_cache("LogSoftmax");
  if (!upstream.same_shape(output_)) {
    throw ShapeError("LogSoftmax backward: upstream " + upstream.shape_str() +
                     " != forward output " + output_.shape_str());
  }
  consume_cache();
  const int64_t B = upstream.rows(), n = upstream.cols();
  Tensor dx(B, n);
  for (int64_t i = 0; i < B; i++) {
    const double *ur = upstream.row(i);
    const double *yr = output_.row(i);
    double *dr = dx.row(i);
    double usum = 0.0;
    for (int64_t j = 0; j < n; j++) usum += ur[j];
    for (int64_t j = 0; j < n; j++) dr[j] = ur[j] - std::exp(yr[j]) * usum;
  }
  return dx;
}

// ------------------------------------------------------------------- GRL

void GrlLayer::set_alpha(double alpha) {
  if (alpha < 0.0) {
    throw ConfigError("GRL: alpha must be >= 0, got " + std::to_string(alpha));
  }
  alpha_ = alpha;
}

Tensor GrlLayer::forward(const Tensor &x, Mode mode) {
  if (x.cols() != dim_) {
    throw ShapeError("GRL forward: input cols " + std::to_string(x.cols()) +
                     " != dim " + std::to_string(dim_));
  }
  arm_cache(mode);
  return x;  // identity, bitwise
}

Tensor GrlLayer::backward(const Tensor &upstream) {
  require_cache("GRL");
  consume_cache();
  Tensor dx = upstream;
  scale_inplace(dx, -alpha_);
  return dx;
}

// ------------------------------------------------------------ LayerStack

void LayerStack::append(std::unique_ptr<Layer> layer) {
  if (!layers_.empty() &&
      layers_.back()->output_dim() != layer->input_dim()) {
    throw ShapeError("LayerStack " + name_ + ": layer " +
                     std::to_string(layers_.size()) + " input dim " +
                     std::to_string(layer->input_dim()) +
                     " != previous output dim " +
                     std::to_string(layers_.back()->output_dim()));
  }
  layers_.push_back(std::move(layer));
}

Tensor LayerStack::forward(const Tensor &x, Mode mode) {
  Tensor h = x;
  for (auto &layer : layers_) h = layer->forward(h, mode);
  pending_forward_ = true;
  pending_mode_ = mode;
  return h;
}

Tensor LayerStack::backward(const Tensor &upstream) {
  if (!pending_forward_) {
    throw Error("LayerStack " + name_ +
                ": backward without a pending forward");
  }
  pending_forward_ = false;
  Tensor g = upstream;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

int64_t LayerStack::input_dim() const {
  return layers_.empty() ? 0 : layers_.front()->input_dim();
}

int64_t LayerStack::output_dim() const {
  return layers_.empty() ? 0 : layers_.back()->output_dim();
}

void LayerStack::zero_grads() {
  for (auto &layer : layers_) layer->zero_grads();
}

int64_t LayerStack::param_count() const {
  int64_t count = 0;
  for (const auto &layer : layers_) {
    for (Tensor *p : const_cast<Layer &>(*layer).params()) count += p->size();
  }
  return count;
}

std::vector<LayerStack::ParamRef> LayerStack::param_refs() {
  std::vector<ParamRef> refs;
  for (size_t i = 0; i < layers_.size(); i++) {
    auto ps = layers_[i]->params();
    auto gs = layers_[i]->grads();
    auto names = layers_[i]->param_names();
    for (size_t k = 0; k < ps.size(); k++) {
      refs.push_back({ps[k], gs[k],
                      name_ + "/" + std::to_string(i) + "/" + names[k]});
    }
  }
  return refs;
}

void LayerStack::set_freeze_running_stats(bool freeze) {
  for (auto &layer : layers_) {
    if (auto *bn = dynamic_cast<BatchNormLayer *>(layer.get())) {
      bn->set_freeze_running_stats(freeze);
    }
  }
}

}  // namespace udac
