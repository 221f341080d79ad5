// udac/trainer.cc

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

#include "udac/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "udac/error.h"
#include "udac/evaluate.h"
#include "udac/checkpoint.h"
#include "udac/gradcheck.h"

namespace udac {

void TrainConfig::validate() const {
  if (batch < 1) throw ConfigError("train: batch < 1");
  if (lr0 <= 0.0) throw ConfigError("train: lr0 must be > 0");
  if (lr_decay <= 0.0 || lr_decay > 1.0) {
    throw ConfigError("train: lr_decay must lie in (0, 1]");
  }
  if (lr_decay_steps < 1) throw ConfigError("train: lr_decay_steps < 1");
  if (epochs < 1) throw ConfigError("train: epochs < 1");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("train: momentum must lie in [0, 1)");
  }
  if (grl_gamma_ramp <= 0.0) throw ConfigError("train: grl_gamma_ramp <= 0");
  if (sim_activation_step < 0) throw ConfigError("train: sim_activation_step < 0");
  if (weights.beta < 0.0 || weights.gamma < 0.0 || weights.delta < 0.0) {
    throw ConfigError("train: loss weights must be >= 0");
  }
}

double lr_at(const TrainConfig &cfg, int64_t step) {
  if (step < 0) throw ConfigError("lr_at: negative step");
  const int64_t k = step / cfg.lr_decay_steps;
  return cfg.lr0 * std::pow(cfg.lr_decay, static_cast<double>(k));
}

double alpha_at(const TrainConfig &cfg, double progress) {
  if (progress < 0.0 || progress > 1.0) {
    std::cerr << "warning: alpha_at progress " << progress
              << " outside [0, 1], clamping\n";
    progress = std::min(1.0, std::max(0.0, progress));
  }
  if (progress == 0.0) return 0.0;
  return 2.0 / (1.0 + std::exp(-cfg.grl_gamma_ramp * progress)) - 1.0;
}

// ----------------------------------------------------------------- SGD

SgdMomentum::SgdMomentum(ModelBundle &model) {
  for (auto &ref : model.param_refs()) {
    velocities_.emplace_back(ref.param->rows(), ref.param->cols());
  }
}

void SgdMomentum::step(ModelBundle &model, double lr, double momentum,
                       double grad_clip_norm) {
  auto refs = model.param_refs();
  if (refs.size() != velocities_.size()) {
    throw Error("optimizer state does not match model parameters");
  }
  double clip_scale = 1.0;
  if (grad_clip_norm > 0.0) {
    double sq = 0.0;
    for (auto &ref : refs) sq += sum_squares(*ref.grad);
    const double norm = std::sqrt(sq);
    if (norm > grad_clip_norm) clip_scale = grad_clip_norm / norm;
  }
  for (size_t i = 0; i < refs.size(); i++) {
    const Tensor &g = *refs[i].grad;
    if (!all_finite(g)) {
      throw NumericError("non-finite gradient in " + refs[i].name);
    }
    Tensor &v = velocities_[i];
    Tensor &p = *refs[i].param;
    double *vp = v.data().data();
    double *pp = p.data().data();
    const double *gp = g.data().data();
    const int64_t n = v.size();
    for (int64_t k = 0; k < n; k++) {
      vp[k] = momentum * vp[k] + clip_scale * gp[k];
      pp[k] -= lr * vp[k];
    }
  }
  step_count_++;
}

// --------------------------------------------------------- loss assembly

namespace {

std::vector<int32_t> domain_labels(int64_t src_rows, int64_t tgt_rows) {
  std::vector<int32_t> labels(static_cast<size_t>(src_rows + tgt_rows), 0);
  for (int64_t i = src_rows; i < src_rows + tgt_rows; i++) {
    labels[static_cast<size_t>(i)] = 1;
  }
  return labels;
}

struct StepComputation {
  LossBreakdown breakdown;
  OutputGrads grads;
};

// Forward + loss terms + weighted output grads for one batch; backward is
// the caller's move so gradient checking can reuse this.
StepComputation compute_step(ModelBundle &model, const MixedBatch &batch,
                             double alpha, bool sim_active,
                             const TrainConfig &cfg) {
  StepComputation sc;
  const Variant variant = model.variant();
  const bool is_dnn = variant == Variant::kDnn;
  static const Tensor kEmpty;
  const Tensor &x_tgt = is_dnn ? kEmpty : batch.x_tgt;

  ForwardOutputs fwd = model.forward(batch.x_src, x_tgt, alpha, Mode::kTrain);

  // Senone classification on source rows only.
  ScalarWithGrad cls = nll_loss(fwd.senone_logprobs, batch.y_src);
  sc.grads.d_senone_logprobs = std::move(cls.grad);

  if (is_dnn) {
    sc.breakdown = compose_dsn_loss(cls.value, 0.0, 0.0, 0.0,
                                    LossWeights{0.0, 0.0, 0.0}, false);
    return sc;
  }

  if (variant == Variant::kMt || variant == Variant::kGrl) {
    const auto dl = domain_labels(batch.x_src.rows(), x_tgt.rows());
    ScalarWithGrad sim = domain_similarity_loss(fwd.domain_logprobs, dl);
    const double w = cfg.domain_loss_weight;
    if (w != 0.0) {
      scale_inplace(sim.grad, w);
      sc.grads.d_domain_logprobs = std::move(sim.grad);
    }
    sc.breakdown = compose_dsn_loss(cls.value, sim.value, 0.0, 0.0,
                                    LossWeights{w, 0.0, 0.0}, true);
    return sc;
  }

  // DSN: Eq.-style composite.
  const LossWeights &w = cfg.weights;
  double l_sim = 0.0, l_diff = 0.0, l_recon = 0.0;
  if (sim_active && w.beta > 0.0) {
    const auto dl = domain_labels(batch.x_src.rows(), x_tgt.rows());
    ScalarWithGrad sim = domain_similarity_loss(fwd.domain_logprobs, dl);
    l_sim = sim.value;
    scale_inplace(sim.grad, w.beta);
    sc.grads.d_domain_logprobs = std::move(sim.grad);
  }
  if (w.gamma > 0.0) {
    DifferenceLossResult diff =
        difference_loss(fwd.shared_src, fwd.private_src_code, fwd.shared_tgt,
                        fwd.private_tgt_code, w.raw_sums);
    l_diff = diff.value;
    scale_inplace(diff.grad_shared_src, w.gamma);
    scale_inplace(diff.grad_private_src, w.gamma);
    scale_inplace(diff.grad_shared_tgt, w.gamma);
    scale_inplace(diff.grad_private_tgt, w.gamma);
    sc.grads.d_shared_src = std::move(diff.grad_shared_src);
    sc.grads.d_private_src_code = std::move(diff.grad_private_src);
    sc.grads.d_shared_tgt = std::move(diff.grad_shared_tgt);
    sc.grads.d_private_tgt_code = std::move(diff.grad_private_tgt);
  }
  if (w.delta > 0.0) {
    const Tensor x_all = vstack(batch.x_src, x_tgt);
    const Tensor xhat_all = vstack(fwd.recon_src, fwd.recon_tgt);
    ScalarWithGrad rec = w.recon_kind == ReconKind::kMse
                             ? recon_mse(x_all, xhat_all, w.raw_sums)
                             : recon_simse(x_all, xhat_all);
    l_recon = rec.value;
    scale_inplace(rec.grad, w.delta);
    sc.grads.d_recon_src = slice_rows(rec.grad, 0, batch.x_src.rows());
    sc.grads.d_recon_tgt =
        slice_rows(rec.grad, batch.x_src.rows(), rec.grad.rows());
  }
  sc.breakdown = compose_dsn_loss(cls.value, l_sim, l_diff, l_recon, w,
                                  sim_active && w.beta > 0.0);
  return sc;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunHistory::write_steps_csv(const std::string &path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "step,lr,alpha,l_class,l_sim,l_diff,l_recon,total,sim_active\n";
  for (const auto &row : steps) {
    os << row.step << ',' << fmt_g17(row.lr) << ',' << fmt_g17(row.alpha)
       << ',' << fmt_g17(row.losses.l_class) << ',' << fmt_g17(row.losses.l_sim)
       << ',' << fmt_g17(row.losses.l_diff) << ','
       << fmt_g17(row.losses.l_recon) << ','
       << fmt_g17(row.losses.weighted_total) << ','
       << (row.losses.sim_active ? 1 : 0) << '\n';
  }
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

void RunHistory::write_epochs_csv(const std::string &path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "epoch,senone_acc_src,senone_acc_tgt,domain_acc_src,domain_acc_tgt\n";
  for (const auto &row : epochs) {
    os << row.epoch << ',' << fmt_g17(row.senone_acc_src) << ','
       << fmt_g17(row.senone_acc_tgt) << ',' << fmt_g17(row.domain_acc_src)
       << ',' << fmt_g17(row.domain_acc_tgt) << '\n';
  }
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

TrainResult train(ModelBundle &model, const LabeledFrameCorpus &src,
                  const FrameCorpus *tgt, const TrainConfig &cfg,
                  const TrainOptions &opts) {
  cfg.validate();
  const Variant variant = model.variant();
  const bool is_dnn = variant == Variant::kDnn;
  if (!is_dnn && (tgt == nullptr || tgt->total_frames() == 0)) {
    throw Error("variant " + variant_name(variant) +
                " requires target-domain frames");
  }
  src.validate(model.config().senone_count);

  namespace fs = std::filesystem;
  if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);

  // Batch geometry is constant across epochs, so the step total is known
  // up front (the alpha ramp needs it).
  int64_t steps_per_epoch;
  if (is_dnn) {
    steps_per_epoch = SourceBatcher(src, cfg.batch, Rng::mix(cfg.seed, 0))
                          .num_batches();
  } else {
    steps_per_epoch =
        BalancedBatcher(src, *tgt, cfg.batch, Rng::mix(cfg.seed, 0))
            .num_batches();
  }
  const int64_t total_steps = steps_per_epoch * cfg.epochs;

  TrainResult result;
  result.total_steps = total_steps;
  SgdMomentum sgd(model);
  int64_t step = 0;
  bool diverged = false;

  for (int64_t epoch = 0; epoch < cfg.epochs && !diverged; epoch++) {
    const uint64_t epoch_seed = Rng::mix(cfg.seed, static_cast<uint64_t>(epoch));
    std::optional<SourceBatcher> src_batcher;
    std::optional<BalancedBatcher> mixed_batcher;
    if (is_dnn) {
      src_batcher.emplace(src, cfg.batch, epoch_seed);
    } else {
      mixed_batcher.emplace(src, *tgt, cfg.batch, epoch_seed);
    }

    for (int64_t i = 0; i < steps_per_epoch; i++, step++) {
      const double lr = lr_at(cfg, step);
      bool sim_active = false;
      double alpha = 0.0;
      if (variant == Variant::kGrl) {
        sim_active = true;
        const double p = total_steps > 0
                             ? static_cast<double>(step) /
                                   static_cast<double>(total_steps)
                             : 0.0;
        alpha = alpha_at(cfg, p);
      } else if (variant == Variant::kMt) {
        sim_active = true;
      } else if (variant == Variant::kDsn) {
        sim_active = step >= cfg.sim_activation_step;
        if (sim_active && total_steps > cfg.sim_activation_step) {
          const double p =
              static_cast<double>(step - cfg.sim_activation_step) /
              static_cast<double>(total_steps - cfg.sim_activation_step);
          alpha = alpha_at(cfg, p);
        }
      }

      const MixedBatch batch =
          is_dnn ? src_batcher->batch(i) : mixed_batcher->batch(i);
      model.zero_grads();
      StepComputation sc;
      try {
        sc = compute_step(model, batch, alpha, sim_active, cfg);
        if (!std::isfinite(sc.breakdown.weighted_total)) {
          throw NumericError("total loss is non-finite at step " +
                             std::to_string(step));
        }
        model.backward(sc.grads);
        sgd.step(model, lr, cfg.momentum, cfg.grad_clip_norm);
      } catch (const NumericError &e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        diverged = true;
        break;
      }
      if (opts.record_steps) {
        result.history.steps.push_back({step, lr, alpha, sc.breakdown});
      }
    }

    if (diverged) break;

    EpochRecord rec;
    rec.epoch = epoch;
    if (opts.eval.source_eval != nullptr) {
      rec.senone_acc_src = senone_accuracy(model, *opts.eval.source_eval);
    }
    if (opts.eval.target_eval != nullptr) {
      rec.senone_acc_tgt = senone_accuracy(model, *opts.eval.target_eval);
    }
    if (model.config().has_domain_head() && opts.eval.source_eval != nullptr &&
        opts.eval.target_eval != nullptr) {
      const DomainAccuracy da =
          domain_accuracy(model, opts.eval.source_eval->frames,
                          opts.eval.target_eval->frames);
      rec.domain_acc_src = da.source;
      rec.domain_acc_tgt = da.target;
    }
    if (opts.eval.source_eval != nullptr || opts.eval.target_eval != nullptr) {
      result.history.epochs.push_back(rec);
    }

    if (!opts.out_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_epoch_%04lld.udac",
                    static_cast<long long>(epoch + 1));
      save_checkpoint(model, (fs::path(opts.out_dir) / name).string());
    }
  }

  result.status = diverged ? TrainStatus::kDiverged : TrainStatus::kConverged;
  if (!diverged && !opts.out_dir.empty()) {
    save_checkpoint(model,
                    (fs::path(opts.out_dir) / "checkpoint_final.udac").string());
  }
  return result;
}

// ---------------------------------------------------- model grad check

double model_gradient_check(ModelBundle &model, const Tensor &src,
                            const std::vector<int32_t> &y_src,
                            const Tensor &tgt, double alpha,
                            const LossWeights &weights, bool sim_active,
                            double domain_loss_weight, double epsilon) {
  const Variant variant = model.variant();
  for (LayerStack *s : model.stacks()) s->set_freeze_running_stats(true);

  TrainConfig cfg;
  cfg.weights = weights;
  cfg.domain_loss_weight = domain_loss_weight;

  MixedBatch batch;
  batch.x_src = src;
  batch.y_src = y_src;
  batch.x_tgt = tgt;

  // Analytic pass at the exact training objective.
  model.zero_grads();
  StepComputation sc = compute_step(model, batch, alpha, sim_active, cfg);
  model.backward(sc.grads);

  std::vector<Tensor> analytic;
  auto refs = model.param_refs();
  analytic.reserve(refs.size());
  for (auto &ref : refs) analytic.push_back(*ref.grad);

  // The GRL multiplies the domain-loss gradient by -alpha for everything
  // upstream of it, so those parameter groups are measured against the
  // objective with the domain term rescaled accordingly.
  const LayerStack *pre_grl = nullptr;
  double sim_weight = 0.0;
  if (variant == Variant::kMt) {
    sim_weight = domain_loss_weight;
  } else if (variant == Variant::kGrl) {
    sim_weight = domain_loss_weight;
    pre_grl = &model.feature_extractor;
  } else if (variant == Variant::kDsn) {
    sim_weight = sim_active ? weights.beta : 0.0;
    pre_grl = &model.shared;
  }

  static const Tensor kEmpty;
  auto probe = [&](double sim_coeff) {
    ForwardOutputs fwd = model.forward(
        batch.x_src, variant == Variant::kDnn ? kEmpty : batch.x_tgt, alpha,
        Mode::kTrain);
    double value = nll_loss(fwd.senone_logprobs, batch.y_src).value;
    if (variant != Variant::kDnn && sim_coeff != 0.0) {
      const auto dl = domain_labels(batch.x_src.rows(), batch.x_tgt.rows());
      value += sim_coeff *
               domain_similarity_loss(fwd.domain_logprobs, dl).value;
    }
    if (variant == Variant::kDsn) {
      if (weights.gamma > 0.0) {
        value += weights.gamma *
                 difference_loss(fwd.shared_src, fwd.private_src_code,
                                 fwd.shared_tgt, fwd.private_tgt_code,
                                 weights.raw_sums)
                     .value;
      }
      if (weights.delta > 0.0) {
        const Tensor x_all = vstack(batch.x_src, batch.x_tgt);
        const Tensor xhat_all = vstack(fwd.recon_src, fwd.recon_tgt);
        value += weights.delta *
                 (weights.recon_kind == ReconKind::kMse
                      ? recon_mse(x_all, xhat_all, weights.raw_sums).value
                      : recon_simse(x_all, xhat_all).value);
      }
    }
    return value;
  };

  double max_err = 0.0;
  for (size_t r = 0; r < refs.size(); r++) {
    // Group membership: name prefix of the stack upstream of the GRL.
    bool upstream_of_grl = false;
    if (pre_grl != nullptr) {
      const std::string &prefix = pre_grl->name();
      upstream_of_grl = refs[r].name.compare(0, prefix.size(), prefix) == 0 &&
                        refs[r].name.size() > prefix.size() &&
                        refs[r].name[prefix.size()] == '/';
    }
    const double coeff = upstream_of_grl ? -alpha * sim_weight : sim_weight;
    const double abs_tol = 2e-9 * std::max(1.0, std::fabs(probe(coeff)));
    Tensor &p = *refs[r].param;
    for (int64_t i = 0; i < p.size(); i++) {
      const double saved = p.data()[i];
      p.data()[i] = saved + epsilon;
      const double plus = probe(coeff);
      p.data()[i] = saved - epsilon;
      const double minus = probe(coeff);
      p.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      max_err = std::max(
          max_err, relative_error(analytic[r].data()[i], numeric, abs_tol));
    }
  }

  for (LayerStack *s : model.stacks()) {
    s->invalidate_forward();
    s->set_freeze_running_stats(false);
  }
  return max_err;
}

}  // namespace udac
