// udac/layers.h

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

#ifndef UDAC_LAYERS_H_
#define UDAC_LAYERS_H_

#include <memory>
#include <string>
#include <vector>

#include "udac/rng.h"
#include "udac/tensor.h"

namespace udac {

enum class LayerKind { kLinear, kBatchNorm, kRelu, kLogSoftmax, kGrl };

enum class Mode { kTrain, kInfer };

std::string layer_kind_name(LayerKind kind);

// A differentiable layer with an explicit forward/backward pair.  forward()
// caches whatever backward() needs; backward() accumulates parameter
// gradients (+=) and returns the gradient w.r.t. the layer input.  Calling
// backward() without a preceding forward(), or twice in a row, is an error:
// the cache is consumed exactly once, which rules out stale-gradient bugs.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual int64_t input_dim() const = 0;
  virtual int64_t output_dim() const = 0;

  virtual Tensor forward(const Tensor &x, Mode mode) = 0;
  virtual Tensor backward(const Tensor &upstream) = 0;

  // Parameter tensors and their gradient twins, in matching order.
  virtual std::vector<Tensor *> params() { return {}; }
  virtual std::vector<Tensor *> grads() { return {}; }
  virtual std::vector<std::string> param_names() const { return {}; }

  void zero_grads() {
    for (Tensor *g : grads()) g->set_zero();
  }

 protected:
  void require_cache(const char *who);
  void consume_cache();
  void arm_cache(Mode mode);
  Mode cached_mode() const { return cached_mode_; }

 private:
  bool has_cache_ = false;
  Mode cached_mode_ = Mode::kTrain;
};

// y = x W + b, W: n_in x n_out, b: 1 x n_out broadcast per row.
class LinearLayer : public Layer {
 public:
  // init_std <= 0 selects He-style sqrt(2 / n_in).
  LinearLayer(int64_t n_in, int64_t n_out, Rng &rng, double init_std = -1.0);
  // Uninitialized-parameter constructor for deserialization.
  LinearLayer(int64_t n_in, int64_t n_out);

  LayerKind kind() const override { return LayerKind::kLinear; }
  int64_t input_dim() const override { return weight_.rows(); }
  int64_t output_dim() const override { return weight_.cols(); }

  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;

  std::vector<Tensor *> params() override { return {&weight_, &bias_}; }
  std::vector<Tensor *> grads() override { return {&weight_grad_, &bias_grad_}; }
  std::vector<std::string> param_names() const override {
    return {"weight", "bias"};
  }

  Tensor &weight() { return weight_; }
  Tensor &bias() { return bias_; }

 private:
  Tensor weight_, bias_;
  Tensor weight_grad_, bias_grad_;
  Tensor input_;  // cached forward input
};

// Per-column batch normalization with learned scale/shift and running
// statistics for inference.  Train mode requires a batch of at least two
// rows; variances are biased (1/B) throughout.
class BatchNormLayer : public Layer {
 public:
  explicit BatchNormLayer(int64_t n, double eps = 1e-5, double momentum = 0.1);

  LayerKind kind() const override { return LayerKind::kBatchNorm; }
  int64_t input_dim() const override { return scale_.cols(); }
  int64_t output_dim() const override { return scale_.cols(); }

  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;

  std::vector<Tensor *> params() override { return {&scale_, &shift_}; }
  std::vector<Tensor *> grads() override { return {&scale_grad_, &shift_grad_}; }
  std::vector<std::string> param_names() const override {
    return {"scale", "shift"};
  }

  Tensor &running_mean() { return running_mean_; }
  Tensor &running_var() { return running_var_; }
  const Tensor &running_mean() const { return running_mean_; }
  const Tensor &running_var() const { return running_var_; }
  double eps() const { return eps_; }

  // Gradient checking repeats forwards; freezing stops the EMA drift.
  void set_freeze_running_stats(bool freeze) { freeze_running_stats_ = freeze; }

 private:
  Tensor scale_, shift_;
  Tensor scale_grad_, shift_grad_;
  Tensor running_mean_, running_var_;
  double eps_;
  double momentum_;
  bool freeze_running_stats_ = false;
  // forward cache
  Tensor xhat_, inv_std_;
};

class ReluLayer : public Layer {
 public:
  explicit ReluLayer(int64_t n) : dim_(n) {}

  LayerKind kind() const override { return LayerKind::kRelu; }
  int64_t input_dim() const override { return dim_; }
  int64_t output_dim() const override { return dim_; }

  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;

 private:
  int64_t dim_;
  Tensor input_;
};

// Row-wise log-softmax with max subtraction; each output row satisfies
// logsumexp(row) = 0.
class LogSoftmaxLayer : public Layer {
 public:
  explicit LogSoftmaxLayer(int64_t n) : dim_(n) {}

  LayerKind kind() const override { return LayerKind::kLogSoftmax; }
  int64_t input_dim() const override { return dim_; }
  int64_t output_dim() const override { return dim_; }

  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;

 private:
  int64_t dim_;
  Tensor output_;
};

// Gradient reversal: identity forward, -alpha * upstream backward.
// No parameters.
class GrlLayer : public Layer {
 public:
  explicit GrlLayer(int64_t n, double alpha = 0.0) : dim_(n), alpha_(alpha) {}

  LayerKind kind() const override { return LayerKind::kGrl; }
  int64_t input_dim() const override { return dim_; }
  int64_t output_dim() const override { return dim_; }

  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;

  double alpha() const { return alpha_; }
  void set_alpha(double alpha);

 private:
  int64_t dim_;
  double alpha_;
};

// Ordered layer pipeline.  Owns its layers; forward() validates the
// dim chain, backward() walks it in reverse.  Single-writer: one stack
// instance must not be mutated from two threads.
class LayerStack {
 public:
  LayerStack() = default;
  explicit LayerStack(std::string name) : name_(std::move(name)) {}

  LayerStack(LayerStack &&) = default;
  LayerStack &operator=(LayerStack &&) = default;
  LayerStack(const LayerStack &) = delete;
  LayerStack &operator=(const LayerStack &) = delete;

  void append(std::unique_ptr<Layer> layer);

  Tensor forward(const Tensor &x, Mode mode);
  // Requires a pending forward in the same mode; consumes it.
  Tensor backward(const Tensor &upstream);
  // Discards a pending forward, e.g. after probe-only evaluations.
  void invalidate_forward() { pending_forward_ = false; }

  const std::string &name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  bool empty() const { return layers_.empty(); }
  size_t layer_count() const { return layers_.size(); }
  Layer &layer(size_t i) { return *layers_[i]; }
  const Layer &layer(size_t i) const { return *layers_[i]; }

  int64_t input_dim() const;
  int64_t output_dim() const;

  void zero_grads();
  int64_t param_count() const;

  // Flattened parameter/gradient views, names prefixed "<stack>/<i>/<name>".
  struct ParamRef {
    Tensor *param;
    Tensor *grad;
    std::string name;
  };
  std::vector<ParamRef> param_refs();

  void set_freeze_running_stats(bool freeze);

 private:
  std::string name_;
  std::vector<std::unique_ptr<Layer>> layers_;
  bool pending_forward_ = false;
  Mode pending_mode_ = Mode::kTrain;
};

}  // namespace udac

#endif  // UDAC_LAYERS_H_
