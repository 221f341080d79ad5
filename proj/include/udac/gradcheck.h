// udac/gradcheck.h

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

#ifndef UDAC_GRADCHECK_H_
#define UDAC_GRADCHECK_H_

#include <functional>

#include "udac/layers.h"
#include "udac/tensor.h"

namespace udac {

// A scalar loss over the stack output: returns the value and fills *grad
// with d(loss)/d(output).
using ScalarLoss =
    std::function<double(const Tensor &output, Tensor *grad)>;

struct GradCheckOptions {
  double epsilon = 1e-6;  // central-difference step
  Mode mode = Mode::kTrain;
  bool check_input = true;
  // Central differences of a loss L carry cancellation noise of order
  // |L| * machine-eps / epsilon.  Disagreements below
  // noise_floor * max(1, |L|) count as exact agreement; directions whose
  // true gradient is zero (a bias feeding batch norm) would otherwise
  // report pure noise.
  double noise_floor = 2e-9;
};

// Compares the stack's analytic gradients against central finite
// differences of loss(stack(x)) for every parameter entry and (optionally)
// every input entry.  Returns the max relative error
//   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// Running statistics of batch-norm layers are frozen for the duration.
// Assumes the stack computes a plain function of its inputs: a GRL with
// alpha != 0 deliberately reports something other than the true gradient,
// so it must be checked through its own exact law instead.
double gradient_check(LayerStack &stack, const ScalarLoss &loss,
                      const Tensor &x, const GradCheckOptions &opts = {});

// Relative error of one analytic/numeric pair, as used above.
double relative_error(double analytic, double numeric);
// Same, but zero when the pair agrees within the absolute tolerance.
double relative_error(double analytic, double numeric, double abs_tol);

}  // namespace udac

#endif  // UDAC_GRADCHECK_H_
