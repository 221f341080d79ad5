// udac/gradcheck.cc

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

#include "udac/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "udac/error.h"

namespace udac {

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

double relative_error(double analytic, double numeric, double abs_tol) {
  if (std::fabs(analytic - numeric) <= abs_tol) return 0.0;
  return relative_error(analytic, numeric);
}

namespace {

double eval_loss(LayerStack &stack, const ScalarLoss &loss, const Tensor &x,
                 Mode mode) {
  Tensor out = stack.forward(x, mode);
  Tensor unused(out.rows(), out.cols());
  const double v = loss(out, &unused);
  if (!std::isfinite(v)) {
    throw NumericError("gradient_check: non-finite loss value");
  }
  return v;
}

}  // namespace

double gradient_check(LayerStack &stack, const ScalarLoss &loss,
                      const Tensor &x, const GradCheckOptions &opts) {
  stack.set_freeze_running_stats(true);
  stack.zero_grads();

  // Analytic pass.
  Tensor out = stack.forward(x, opts.mode);
  Tensor loss_grad(out.rows(), out.cols());
  const double value = loss(out, &loss_grad);
  if (!std::isfinite(value)) {
    throw NumericError("gradient_check: non-finite loss value");
  }
  Tensor input_grad = stack.backward(loss_grad);

  const double eps = opts.epsilon;
  const double abs_tol = opts.noise_floor * std::max(1.0, std::fabs(value));
  double max_err = 0.0;

  for (auto &ref : stack.param_refs()) {
    Tensor &p = *ref.param;
    const Tensor &g = *ref.grad;
    for (int64_t i = 0; i < p.size(); i++) {
      const double saved = p.data()[i];
      p.data()[i] = saved + eps;
      const double plus = eval_loss(stack, loss, x, opts.mode);
      p.data()[i] = saved - eps;
      const double minus = eval_loss(stack, loss, x, opts.mode);
      p.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      max_err =
          std::max(max_err, relative_error(g.data()[i], numeric, abs_tol));
    }
  }

  if (opts.check_input) {
    Tensor xp = x;
    for (int64_t i = 0; i < xp.size(); i++) {
      const double saved = xp.data()[i];
      xp.data()[i] = saved + eps;
      const double plus = eval_loss(stack, loss, xp, opts.mode);
      xp.data()[i] = saved - eps;
      const double minus = eval_loss(stack, loss, xp, opts.mode);
      xp.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      max_err = std::max(
          max_err, relative_error(input_grad.data()[i], numeric, abs_tol));
    }
  }

  stack.invalidate_forward();
  stack.set_freeze_running_stats(false);
  return max_err;
}

}  // namespace udac
