// udac/losses.cc

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

#include "udac/losses.h"

#include <cmath>
#include <string>

#include "udac/error.h"

namespace udac {

ScalarWithGrad nll_loss(const Tensor &logprobs,
                        const std::vector<int32_t> &labels) {
  const int64_t B = logprobs.rows(), C = logprobs.cols();
  if (static_cast<int64_t>(labels.size()) != B) {
    throw ShapeError("nll_loss: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(B) + " rows");
  }
  ScalarWithGrad out;
  out.grad = Tensor(B, C);
  double sum = 0.0;
  const double invB = 1.0 / static_cast<double>(B);
  for (int64_t i = 0; i < B; i++) {
    const int32_t y = labels[i];
    if (y < 0 || y >= C) {
      throw Error("nll_loss: label " + std::to_string(y) + " at row " +
                  std::to_string(i) + " outside [0, " + std::to_string(C) +
                  ")");
    }
    sum -= logprobs(i, y);
    out.grad(i, y) = -invB;
  }
  out.value = sum * invB;
  return out;
}

ScalarWithGrad domain_similarity_loss(
    const Tensor &domain_logprobs, const std::vector<int32_t> &domain_labels) {
  if (domain_logprobs.cols() != 2) {
    throw ShapeError("domain_similarity_loss: expected 2 domain classes, got " +
                     std::to_string(domain_logprobs.cols()));
  }
  return nll_loss(domain_logprobs, domain_labels);
}

namespace {

void check_code_pair(const Tensor &shared, const Tensor &priv,
                     const char *domain) {
  if (shared.rows() != priv.rows()) {
    throw ShapeError(std::string("difference_loss: ") + domain +
                     " row counts differ, shared " + shared.shape_str() +
                     " vs private " + priv.shape_str());
  }
  if (!shared.empty() && !priv.empty() && shared.cols() != priv.cols()) {
    throw ShapeError(std::string("difference_loss: ") + domain +
                     " code dims differ, shared " + shared.shape_str() +
                     " vs private " + priv.shape_str());
  }
}

// Accumulates ||Fc^T Fp||_F^2 and the gradients scaled later by the caller.
double diff_term(const Tensor &fc, const Tensor &fp, Tensor *grad_fc,
                 Tensor *grad_fp) {
  *grad_fc = Tensor(fc.rows(), fc.cols());
  *grad_fp = Tensor(fp.rows(), fp.cols());
  if (fc.rows() == 0) return 0.0;
  const Tensor m = matmul_tn(fc, fp);  // (Dc x Dp)
  // d||M||^2/dFc = 2 Fp M^T, d||M||^2/dFp = 2 Fc M.
  *grad_fc = matmul_nt(fp, m);
  scale_inplace(*grad_fc, 2.0);
  *grad_fp = matmul(fc, m);
  scale_inplace(*grad_fp, 2.0);
  return sum_squares(m);
}

}  // namespace

DifferenceLossResult difference_loss(const Tensor &shared_src,
                                     const Tensor &private_src,
                                     const Tensor &shared_tgt,
                                     const Tensor &private_tgt,
                                     bool raw_sums) {
  check_code_pair(shared_src, private_src, "source");
  check_code_pair(shared_tgt, private_tgt, "target");
  DifferenceLossResult out;
  const double v_src = diff_term(shared_src, private_src, &out.grad_shared_src,
                                 &out.grad_private_src);
  const double v_tgt = diff_term(shared_tgt, private_tgt, &out.grad_shared_tgt,
                                 &out.grad_private_tgt);
  const int64_t total_rows = shared_src.rows() + shared_tgt.rows();
  const double norm =
      raw_sums || total_rows == 0 ? 1.0 : 1.0 / static_cast<double>(total_rows);
  out.value = (v_src + v_tgt) * norm;
  scale_inplace(out.grad_shared_src, norm);
  scale_inplace(out.grad_private_src, norm);
  scale_inplace(out.grad_shared_tgt, norm);
  scale_inplace(out.grad_private_tgt, norm);
  return out;
}

ScalarWithGrad recon_mse(const Tensor &x, const Tensor &xhat, bool raw_sums) {
  if (!x.same_shape(xhat)) {
    throw ShapeError("recon_mse: shapes differ, " + x.shape_str() + " vs " +
                     xhat.shape_str());
  }
  ScalarWithGrad out;
  out.grad = Tensor(x.rows(), x.cols());
  const int64_t n = x.rows();
  const double norm = raw_sums || n == 0 ? 1.0 : 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (int64_t i = 0; i < x.size(); i++) {
    const double r = x.data()[i] - xhat.data()[i];
    sum += r * r;
    out.grad.data()[i] = -2.0 * r * norm;
  }
  out.value = sum * norm;
  return out;
}

ScalarWithGrad recon_simse(const Tensor &x, const Tensor &xhat) {
  if (!x.same_shape(xhat)) {
    throw ShapeError("recon_simse: shapes differ, " + x.shape_str() + " vs " +
                     xhat.shape_str());
  }
  ScalarWithGrad out;
  out.grad = Tensor(x.rows(), x.cols());
  const int64_t n = x.rows(), k = x.cols();
  if (n == 0) return out;
  const double invk = 1.0 / static_cast<double>(k);
  const double invn = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (int64_t i = 0; i < n; i++) {
    const double *xr = x.row(i);
    const double *hr = xhat.row(i);
    double *gr = out.grad.row(i);
    double rsum = 0.0;
    for (int64_t j = 0; j < k; j++) rsum += xr[j] - hr[j];
    const double rmean = rsum * invk;
    double centered_sq = 0.0;
    for (int64_t j = 0; j < k; j++) {
      const double rc = (xr[j] - hr[j]) - rmean;
      centered_sq += rc * rc;
      // d/dxhat of (1/k) sum (r - rmean)^2 is -(2/k)(r - rmean); the mean
      // component cancels because sum(r - rmean) = 0.
      gr[j] = -2.0 * invk * rc * invn;
    }
    total += centered_sq * invk;
  }
  out.value = total * invn;
  return out;
}

LossBreakdown compose_dsn_loss(double l_class, double l_sim, double l_diff,
                               double l_recon, const LossWeights &weights,
                               bool sim_active) {
  LossBreakdown b;
  b.l_class = l_class;
  b.l_sim = l_sim;
  b.l_diff = l_diff;
  b.l_recon = l_recon;
  b.class_active = true;
  b.sim_active = sim_active;
  b.diff_active = weights.gamma != 0.0;
  b.recon_active = weights.delta != 0.0;
  b.weighted_total = l_class + (sim_active ? weights.beta * l_sim : 0.0) +
                     weights.gamma * l_diff + weights.delta * l_recon;
  return b;
}

}  // namespace udac
