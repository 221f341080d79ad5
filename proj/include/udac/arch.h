// udac/arch.h

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

#ifndef UDAC_ARCH_H_
#define UDAC_ARCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "udac/layers.h"
#include "udac/tensor.h"

namespace udac {

// DNN: source-only baseline (feature extractor + senone head).
// MT:  multi-task twin of GRL without the reversal layer.
// GRL: domain-adversarial model with a gradient reversal layer.
// DSN: domain separation network with private/shared encoders, a shared
//      decoder and adversarial domain head on the shared code.
enum class Variant { kDnn, kMt, kGrl, kDsn };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string &name);

struct ArchConfig {
  Variant variant = Variant::kGrl;
  int64_t input_dim = 1320;
  int64_t senone_count = 3080;
  int64_t domain_count = 2;
  std::vector<int64_t> feat_hidden = {1024, 1024, 1024, 1024, 1024, 1024};
  std::vector<int64_t> senone_head_hidden = {1024, 1024};
  std::vector<int64_t> domain_head_hidden = {256};
  std::vector<int64_t> private_hidden = {512, 512, 512, 512};
  std::vector<int64_t> decoder_hidden = {1024, 1024, 1024};
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  // Shared/private code width: the last feature (shared-encoder) width.
  int64_t code_dim() const { return feat_hidden.back(); }

  void validate() const;  // throws ConfigError
  bool has_domain_head() const { return variant != Variant::kDnn; }
};

// Everything one mixed forward pass produces.  Row counts follow the
// src/tgt partition handed to ModelBundle::forward.  DSN-only fields stay
// empty for the other variants.
struct ForwardOutputs {
  Tensor senone_logprobs;   // source rows only
  Tensor domain_logprobs;   // all rows (variants with a domain head)
  Tensor shared_src, shared_tgt;           // f_c^s, f_c^t (DSN)
  Tensor private_src_code, private_tgt_code;  // f_p^s, f_p^t (DSN)
  Tensor recon_src, recon_tgt;             // xhat^s, xhat^t (DSN)
};

// Gradients w.r.t. the forward outputs, already weighted by the loss
// composition.  Empty tensors mean "no contribution".
struct OutputGrads {
  Tensor d_senone_logprobs;
  Tensor d_domain_logprobs;
  Tensor d_shared_src, d_shared_tgt;
  Tensor d_private_src_code, d_private_tgt_code;
  Tensor d_recon_src, d_recon_tgt;
};

// One assembled network.  Which stacks exist depends on the variant:
//   DNN/MT/GRL: feature_extractor (G_f), senone_head (G_y),
//               domain_head (G_d, not for DNN), grl (GRL only).
//   DSN: private_src/private_tgt (E_p), shared (E_c), decoder (D),
//        senone_head (G), domain_head (Z), grl.
// Single-writer during training; const use from several threads is fine
// at inference once running statistics are frozen.
class ModelBundle {
 public:
  static ModelBundle build(const ArchConfig &cfg, uint64_t seed);

  const ArchConfig &config() const { return cfg_; }
  Variant variant() const { return cfg_.variant; }

  // Mixed forward over source rows (labeled domain) and target rows.
  // tgt may be empty; for the DNN variant it must be.  alpha drives the
  // GRL; inference ignores it (identity forward).
  ForwardOutputs forward(const Tensor &src, const Tensor &tgt, double alpha,
                         Mode mode);

  // Reverse pass matching the latest forward().  Accumulates parameter
  // gradients across all stacks touched by the forward.
  void backward(const OutputGrads &grads);

  // Inference helpers (infer mode, running statistics).
  Tensor infer_senone_logprobs(const Tensor &x);
  Tensor infer_domain_logprobs(const Tensor &x);
  // Feature-extractor output (shared-encoder output for DSN).
  Tensor infer_embeddings(const Tensor &x);

  void zero_grads();
  void set_grl_alpha(double alpha);
  int64_t param_count() const;

  std::vector<LayerStack::ParamRef> param_refs();
  // The stacks this variant owns, in checkpoint order.
  std::vector<LayerStack *> stacks();
  std::vector<const LayerStack *> stacks() const;

  LayerStack feature_extractor;  // G_f (DNN/MT/GRL)
  LayerStack shared;             // E_c (DSN)
  LayerStack private_src;        // E_p^s (DSN)
  LayerStack private_tgt;        // E_p^t (DSN)
  LayerStack decoder;            // D (DSN)
  LayerStack senone_head;        // G_y / G
  LayerStack domain_head;        // G_d / Z
  LayerStack grl;                // single GRL layer (GRL/DSN)

  // Loads replace cfg_ wholesale (checkpoint reader).
  void set_config(const ArchConfig &cfg) { cfg_ = cfg; }

 private:
  ArchConfig cfg_;
  // Row partition of the pending forward.
  int64_t fwd_src_rows_ = 0;
  int64_t fwd_tgt_rows_ = 0;
};

}  // namespace udac

#endif  // UDAC_ARCH_H_
