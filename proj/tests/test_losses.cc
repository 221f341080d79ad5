// tests/test_losses.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "udac/error.h"
#include "udac/layers.h"
#include "udac/losses.h"
#include "udac/rng.h"
#include "test_util.h"

using namespace udac;
using test::random_labels;
using test::random_tensor;

namespace {

// Central finite differences of a scalar function of one tensor argument.
double fd_check(const Tensor &grad, Tensor x,
                const std::function<double(const Tensor &)> &f,
                double eps = 1e-6) {
  double max_err = 0.0;
  for (int64_t i = 0; i < x.size(); i++) {
    const double saved = x.data()[i];
    x.data()[i] = saved + eps;
    const double plus = f(x);
    x.data()[i] = saved - eps;
    const double minus = f(x);
    x.data()[i] = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double denom =
        std::max({std::fabs(grad.data()[i]), std::fabs(numeric), 1e-8});
    max_err = std::max(max_err, std::fabs(grad.data()[i] - numeric) / denom);
  }
  return max_err;
}

Tensor log_softmax_rows(const Tensor &x) {
  LogSoftmaxLayer ls(x.cols());
  return ls.forward(x, Mode::kInfer);
}

}  // namespace

TEST_CASE("nll uniform logprobs give ln C") {
  Tensor logprobs(3, 4);
  logprobs.fill(-std::log(4.0));
  auto out = nll_loss(logprobs, {0, 2, 3});
  CHECK(out.value == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("nll of a confident correct row is near zero") {
  Tensor x(1, 3);
  x(0, 0) = 30.0;
  auto out = nll_loss(log_softmax_rows(x), {0});
  CHECK(out.value < 1e-12);
  CHECK(out.value >= 0.0);
}

TEST_CASE("nll rejects out-of-range labels naming the row") {
  Tensor logprobs(2, 3);
  CHECK_THROWS_WITH_AS(nll_loss(logprobs, {0, 5}),
                       doctest::Contains("row 1"), Error);
}

TEST_CASE("nll gradient matches finite differences on a random 8x5 batch") {
  Rng rng(5);
  const Tensor logprobs = log_softmax_rows(random_tensor(8, 5, rng, 2.0));
  const auto labels = random_labels(8, 5, rng);
  const auto out = nll_loss(logprobs, labels);
  const double err = fd_check(out.grad, logprobs, [&](const Tensor &t) {
    return nll_loss(t, labels).value;
  });
  CHECK(err < 1e-7);
}

TEST_CASE("domain similarity loss is chance-level ln 2 when confused") {
  Tensor logprobs(6, 2);
  logprobs.fill(-std::log(2.0));
  auto out = domain_similarity_loss(logprobs, {0, 0, 0, 1, 1, 1});
  CHECK(out.value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("domain similarity loss vanishes for perfect separation") {
  Tensor logits(4, 2);
  for (int i = 0; i < 2; i++) logits(i, 0) = 40.0;
  for (int i = 2; i < 4; i++) logits(i, 1) = 40.0;
  auto out = domain_similarity_loss(log_softmax_rows(logits), {0, 0, 1, 1});
  CHECK(out.value < 1e-12);
}

TEST_CASE("constant prediction on a balanced batch is minimized at p=0.5") {
  // value(p) = -(ln p + ln(1-p))/2 scanned over p
  auto value_at = [](double p) {
    Tensor lp(2, 2);
    lp(0, 0) = std::log(p);
    lp(0, 1) = std::log(1.0 - p);
    lp(1, 0) = std::log(p);
    lp(1, 1) = std::log(1.0 - p);
    return domain_similarity_loss(lp, {0, 1}).value;
  };
  const double at_half = value_at(0.5);
  CHECK(at_half == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  for (double p = 0.05; p < 1.0; p += 0.05) {
    const double expected = -(std::log(p) + std::log(1.0 - p)) / 2.0;
    CHECK(value_at(p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(value_at(p) >= at_half - 1e-12);
  }
}

TEST_CASE("difference loss is zero on disjoint-support codes") {
  // Shared codes live in rows 0-1, private codes in row 2, so every
  // column of Fc is orthogonal to every column of Fp.
  Tensor fc(3, 4), fp(3, 4);
  fc(0, 0) = 1.0;
  fc(1, 1) = 2.0;
  fp(2, 2) = 3.0;
  fp(2, 3) = 4.0;
  auto out = difference_loss(fc, fp, Tensor(0, 4), Tensor(0, 4));
  CHECK(out.value == 0.0);
}

TEST_CASE("difference loss identity example") {
  // Fc = Fp = I2 and no target rows: ||I||_F^2 = 2 (raw sums).
  Tensor f(2, 2);
  f(0, 0) = 1.0;
  f(1, 1) = 1.0;
  auto raw = difference_loss(f, f, Tensor(0, 2), Tensor(0, 2), true);
  CHECK(raw.value == doctest::Approx(2.0).epsilon(1e-15));
  // Normalized mode divides by the two source rows.
  auto norm = difference_loss(f, f, Tensor(0, 2), Tensor(0, 2), false);
  CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("difference loss gradients match finite differences on 6x4 codes") {
  Rng rng(17);
  const Tensor fc_s = random_tensor(6, 4, rng);
  const Tensor fp_s = random_tensor(6, 4, rng);
  const Tensor fc_t = random_tensor(5, 4, rng);
  const Tensor fp_t = random_tensor(5, 4, rng);
  auto out = difference_loss(fc_s, fp_s, fc_t, fp_t);

  auto value = [&](const Tensor &a, const Tensor &b, const Tensor &c,
                   const Tensor &d) {
    return difference_loss(a, b, c, d).value;
  };
  CHECK(fd_check(out.grad_shared_src, fc_s, [&](const Tensor &t) {
          return value(t, fp_s, fc_t, fp_t);
        }) < 1e-6);
  CHECK(fd_check(out.grad_private_src, fp_s, [&](const Tensor &t) {
          return value(fc_s, t, fc_t, fp_t);
        }) < 1e-6);
  CHECK(fd_check(out.grad_shared_tgt, fc_t, [&](const Tensor &t) {
          return value(fc_s, fp_s, t, fp_t);
        }) < 1e-6);
  CHECK(fd_check(out.grad_private_tgt, fp_t, [&](const Tensor &t) {
          return value(fc_s, fp_s, fc_t, t);
        }) < 1e-6);
}

TEST_CASE("difference loss is invariant under row permutation within a domain") {
  Rng rng(23);
  Tensor fc = random_tensor(7, 3, rng);
  Tensor fp = random_tensor(7, 3, rng);
  auto base = difference_loss(fc, fp, Tensor(0, 3), Tensor(0, 3));
  std::vector<int64_t> perm = {3, 1, 4, 0, 6, 2, 5};
  Tensor fc_p(7, 3), fp_p(7, 3);
  for (int64_t i = 0; i < 7; i++) {
    for (int64_t j = 0; j < 3; j++) {
      fc_p(i, j) = fc(perm[static_cast<size_t>(i)], j);
      fp_p(i, j) = fp(perm[static_cast<size_t>(i)], j);
    }
  }
  auto permuted = difference_loss(fc_p, fp_p, Tensor(0, 3), Tensor(0, 3));
  CHECK(permuted.value == doctest::Approx(base.value).epsilon(1e-12));
}

TEST_CASE("difference loss rejects mismatched shapes") {
  CHECK_THROWS_AS(
      difference_loss(Tensor(3, 4), Tensor(2, 4), Tensor(0, 4), Tensor(0, 4)),
      ShapeError);
  CHECK_THROWS_AS(
      difference_loss(Tensor(3, 4), Tensor(3, 5), Tensor(0, 4), Tensor(0, 4)),
      ShapeError);
}

TEST_CASE("recon mse basics") {
  Tensor x(1, 2), xhat(1, 2);
  x(0, 0) = 1.0;
  x(0, 1) = 2.0;
  auto out = recon_mse(x, xhat);
  CHECK(out.value == doctest::Approx(5.0).epsilon(1e-15));  // 1 + 4
  auto zero = recon_mse(x, x);
  CHECK(zero.value == 0.0);
}

TEST_CASE("recon mse normalizes by total frame count") {
  Tensor x(4, 2), xhat(4, 2);
  for (int64_t i = 0; i < 4; i++) x(i, 0) = 2.0;
  CHECK(recon_mse(x, xhat).value == doctest::Approx(4.0));        // 16/4
  CHECK(recon_mse(x, xhat, true).value == doctest::Approx(16.0));  // raw
}

TEST_CASE("recon mse gradient matches finite differences") {
  Rng rng(29);
  const Tensor x = random_tensor(5, 3, rng);
  const Tensor xhat = random_tensor(5, 3, rng);
  auto out = recon_mse(x, xhat);
  CHECK(fd_check(out.grad, xhat, [&](const Tensor &t) {
          return recon_mse(x, t).value;
        }) < 1e-8);
}

TEST_CASE("simse basics") {
  Tensor x(1, 2), xhat(1, 2);
  x(0, 0) = 1.0;
  x(0, 1) = -1.0;
  // residual [1, -1]: (1/2)*2 - (1/4)*0 = 1
  CHECK(recon_simse(x, xhat).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(recon_simse(x, x).value == 0.0);
}

TEST_CASE("simse ignores pure offsets in the residual") {
  Tensor x(1, 3), xhat(1, 3);
  for (int64_t j = 0; j < 3; j++) xhat(0, j) = 7.25;  // residual = -c * 1
  CHECK(recon_simse(x, xhat).value == 0.0);
}

TEST_CASE("simse offset invariance is bitwise on dyadic inputs") {
  // Integer-valued tensors and integer offsets keep every intermediate
  // exactly representable, so the centered form must agree bit for bit.
  Rng rng(31);
  for (int trial = 0; trial < 200; trial++) {
    const int64_t n = 1 + rng.randint(4);
    // power-of-two dims keep the residual mean exactly representable
    const int64_t k = int64_t{1} << (1 + rng.randint(3));
    Tensor x(n, k), xhat(n, k);
    for (double &v : x.data()) v = static_cast<double>(rng.randint(17)) - 8.0;
    for (double &v : xhat.data()) v = static_cast<double>(rng.randint(17)) - 8.0;
    const double c = static_cast<double>(rng.randint(9)) - 4.0;
    Tensor shifted = xhat;
    for (double &v : shifted.data()) v += c;
    const double base = recon_simse(x, xhat).value;
    const double moved = recon_simse(x, shifted).value;
    REQUIRE(base == moved);
  }
}

TEST_CASE("simse offset invariance within 1e-12 on arbitrary reals") {
  Rng rng(37);
  for (int trial = 0; trial < 100; trial++) {
    Tensor x = random_tensor(3, 5, rng, 2.0);
    Tensor xhat = random_tensor(3, 5, rng, 2.0);
    const double c = 3.0 * rng.normal();
    Tensor shifted = xhat;
    for (double &v : shifted.data()) v += c;
    const double base = recon_simse(x, xhat).value;
    const double moved = recon_simse(x, shifted).value;
    REQUIRE(std::fabs(base - moved) <= 1e-12 * std::max(1.0, base));
  }
}

TEST_CASE("simse per frame never exceeds mse per frame over k") {
  Rng rng(41);
  for (int trial = 0; trial < 100; trial++) {
    const int64_t k = 2 + rng.randint(6);
    Tensor x = random_tensor(1, k, rng, 3.0);
    Tensor xhat = random_tensor(1, k, rng, 3.0);
    const double simse = recon_simse(x, xhat).value;
    const double mse = recon_mse(x, xhat).value;  // ||r||^2 per frame
    CHECK(simse <= mse / static_cast<double>(k) + 1e-12);
    CHECK(simse >= 0.0);
  }
}

TEST_CASE("simse gradient matches finite differences") {
  Rng rng(43);
  const Tensor x = random_tensor(4, 5, rng);
  const Tensor xhat = random_tensor(4, 5, rng);
  auto out = recon_simse(x, xhat);
  CHECK(fd_check(out.grad, xhat, [&](const Tensor &t) {
          return recon_simse(x, t).value;
        }) < 1e-6);
}

TEST_CASE("dsn composition follows the weighted sum") {
  LossWeights w;  // defaults beta 0.25, gamma 0.075, delta 0.1
  auto b = compose_dsn_loss(1.0, 0.5, 0.2, 0.3, w, true);
  CHECK(b.weighted_total == doctest::Approx(1.17).epsilon(1e-15));
  CHECK(b.sim_active);

  auto inactive = compose_dsn_loss(1.0, 0.5, 0.2, 0.3, w, false);
  CHECK(inactive.weighted_total == doctest::Approx(1.0 + 0.075 * 0.2 + 0.1 * 0.3));
  CHECK_FALSE(inactive.sim_active);

  LossWeights zero{0.0, 0.0, 0.0};
  auto pure = compose_dsn_loss(0.7, 9.0, 9.0, 9.0, zero, true);
  CHECK(pure.weighted_total == doctest::Approx(0.7));
}

TEST_CASE("dsn composition is linear in each term") {
  Rng rng(47);
  LossWeights w;
  for (int trial = 0; trial < 50; trial++) {
    const double c = std::fabs(rng.normal()), s = std::fabs(rng.normal());
    const double d = std::fabs(rng.normal()), r = std::fabs(rng.normal());
    const double scale = 1.0 + std::fabs(rng.normal());
    const auto base = compose_dsn_loss(c, s, d, r, w, true);
    // coefficient of each slot recovered by scaling that slot alone
    const auto dc = compose_dsn_loss(c * scale, s, d, r, w, true);
    CHECK(dc.weighted_total - base.weighted_total ==
          doctest::Approx(c * (scale - 1.0)).epsilon(1e-9));
    const auto ds = compose_dsn_loss(c, s * scale, d, r, w, true);
    CHECK(ds.weighted_total - base.weighted_total ==
          doctest::Approx(w.beta * s * (scale - 1.0)).epsilon(1e-9));
    const auto dd = compose_dsn_loss(c, s, d * scale, r, w, true);
    CHECK(dd.weighted_total - base.weighted_total ==
          doctest::Approx(w.gamma * d * (scale - 1.0)).epsilon(1e-9));
    const auto dr = compose_dsn_loss(c, s, d, r * scale, w, true);
    CHECK(dr.weighted_total - base.weighted_total ==
          doctest::Approx(w.delta * r * (scale - 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("loss terms are nonnegative on random inputs") {
  Rng rng(53);
  for (int trial = 0; trial < 50; trial++) {
    Tensor logits = random_tensor(6, 4, rng, 2.0);
    const auto labels = random_labels(6, 4, rng);
    CHECK(nll_loss(log_softmax_rows(logits), labels).value >= 0.0);

    Tensor fc = random_tensor(5, 3, rng), fp = random_tensor(5, 3, rng);
    CHECK(difference_loss(fc, fp, Tensor(0, 3), Tensor(0, 3)).value >= 0.0);

    Tensor x = random_tensor(4, 3, rng), xh = random_tensor(4, 3, rng);
    CHECK(recon_mse(x, xh).value >= 0.0);
    CHECK(recon_simse(x, xh).value >= 0.0);
  }
}
