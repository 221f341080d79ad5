// udac/losses.h

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

#ifndef UDAC_LOSSES_H_
#define UDAC_LOSSES_H_

#include <cstdint>
#include <vector>

#include "udac/tensor.h"

namespace udac {

enum class ReconKind { kMse, kSimse };

// Weights of the composite adaptation loss
//   L = L_class + beta * L_sim + gamma * L_diff + delta * L_recon.
struct LossWeights {
  double beta = 0.25;
  double gamma = 0.075;
  double delta = 0.1;
  ReconKind recon_kind = ReconKind::kMse;
  // When true, the difference and reconstruction terms use raw sums over
  // frames instead of the default per-frame normalization.
  bool raw_sums = false;
};

// Per-step record of every loss term.  Values are the unweighted term
// values; weighted_total applies the composition above with inactive terms
// contributing zero.
struct LossBreakdown {
  double l_class = 0.0;
  double l_sim = 0.0;
  double l_diff = 0.0;
  double l_recon = 0.0;
  double weighted_total = 0.0;
  bool class_active = false;
  bool sim_active = false;
  bool diff_active = false;
  bool recon_active = false;
};

struct ScalarWithGrad {
  double value = 0.0;
  Tensor grad;
};

// Mean negative log-likelihood of the labeled class per row, with gradient
// w.r.t. the log-probabilities.  Labels must lie in [0, cols).
ScalarWithGrad nll_loss(const Tensor &logprobs,
                        const std::vector<int32_t> &labels);

// Domain adversarial similarity loss: plain two-class NLL over the domain
// log-probabilities.  The adversarial effect comes from GRL placement, not
// from this function.
ScalarWithGrad domain_similarity_loss(const Tensor &domain_logprobs,
                                      const std::vector<int32_t> &domain_labels);

struct DifferenceLossResult {
  double value = 0.0;
  Tensor grad_shared_src, grad_private_src;
  Tensor grad_shared_tgt, grad_private_tgt;
};

// Soft subspace orthogonality between shared and private codes:
//   ||Fc_s^T Fp_s||_F^2 + ||Fc_t^T Fp_t||_F^2,
// divided by the total row count unless raw_sums.  Matrices carry frames
// as rows; all four must share the code dimension.
DifferenceLossResult difference_loss(const Tensor &shared_src,
                                     const Tensor &private_src,
                                     const Tensor &shared_tgt,
                                     const Tensor &private_tgt,
                                     bool raw_sums = false);

// Reconstruction MSE: sum_i ||x_i - xhat_i||^2 over all frames, divided by
// the frame count unless raw_sums.  Gradient is w.r.t. xhat.
ScalarWithGrad recon_mse(const Tensor &x, const Tensor &xhat,
                         bool raw_sums = false);

// Scale-invariant MSE: per frame (1/k)||r||^2 - (1/k^2)(r . 1)^2 with
// r = x - xhat, averaged over frames.  Computed in centered form, so a
// constant offset on the residual leaves the value exactly unchanged.
ScalarWithGrad recon_simse(const Tensor &x, const Tensor &xhat);

// Composite of Eq-style weights; sim contributes zero (value and gradient
// are the caller's to zero) when inactive.
LossBreakdown compose_dsn_loss(double l_class, double l_sim, double l_diff,
                               double l_recon, const LossWeights &weights,
                               bool sim_active);

}  // namespace udac

#endif  // UDAC_LOSSES_H_
