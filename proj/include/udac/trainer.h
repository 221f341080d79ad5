// udac/trainer.h

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

#ifndef UDAC_TRAINER_H_
#define UDAC_TRAINER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "udac/arch.h"
#include "udac/corpus.h"
#include "udac/losses.h"

namespace udac {

struct TrainConfig {
  int64_t batch = 32;
  double lr0 = 0.01;
  double lr_decay = 0.95;
  int64_t lr_decay_steps = 20000;
  int64_t epochs = 20;
  double momentum = 0.9;
  double grl_gamma_ramp = 10.0;       // steepness of the logistic alpha ramp
  int64_t sim_activation_step = 10000;  // DSN similarity loss starts here
  LossWeights weights;
  double domain_loss_weight = 1.0;  // MT/GRL domain-loss scaling
  double grad_clip_norm = 0.0;      // 0 disables clipping
  uint64_t seed = 0;

  void validate() const;
};

// lr0 * decay^floor(step / decay_steps); the decay applies starting at the
// boundary step itself.
double lr_at(const TrainConfig &cfg, int64_t step);

// Logistic ramp alpha(p) = 2 / (1 + exp(-ramp * p)) - 1 over training
// progress p in [0, 1]; alpha(0) = 0 exactly, monotone nondecreasing.
// p outside [0, 1] is clamped (with a warning to stderr).
double alpha_at(const TrainConfig &cfg, double progress);

// Classical momentum: v <- momentum * v + g; p <- p - lr * v.
class SgdMomentum {
 public:
  explicit SgdMomentum(ModelBundle &model);

  // Throws NumericError naming the offending tensor on non-finite grads.
  void step(ModelBundle &model, double lr, double momentum,
            double grad_clip_norm = 0.0);

  int64_t step_count() const { return step_count_; }
  const std::vector<Tensor> &velocities() const { return velocities_; }

 private:
  std::vector<Tensor> velocities_;
  int64_t step_count_ = 0;
};

struct StepRecord {
  int64_t step = 0;
  double lr = 0.0;
  double alpha = 0.0;
  LossBreakdown losses;
};

struct EpochRecord {
  int64_t epoch = 0;
  double senone_acc_src = -1.0;
  double senone_acc_tgt = -1.0;
  double domain_acc_src = -1.0;
  double domain_acc_tgt = -1.0;
};

enum class TrainStatus { kConverged, kDiverged };

struct RunHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  // CSV schema: step,lr,alpha,l_class,l_sim,l_diff,l_recon,total,sim_active
  void write_steps_csv(const std::string &path) const;
  void write_epochs_csv(const std::string &path) const;
};

struct TrainResult {
  TrainStatus status = TrainStatus::kConverged;
  RunHistory history;
  int64_t total_steps = 0;
};

// Optional held-out corpora measured after every epoch.
struct EvalSets {
  const LabeledFrameCorpus *source_eval = nullptr;
  const LabeledFrameCorpus *target_eval = nullptr;
};

struct TrainOptions {
  // When nonempty, checkpoint_epoch_<n>.udac and checkpoint_final.udac are
  // written under this directory.
  std::string out_dir;
  EvalSets eval;
  bool record_steps = true;  // keep per-step rows in memory
};

// Full optimization loop.  tgt is required for MT/GRL/DSN and must be
// null for the DNN baseline.  Deterministic under cfg.seed.
TrainResult train(ModelBundle &model, const LabeledFrameCorpus &src,
                  const FrameCorpus *tgt, const TrainConfig &cfg,
                  const TrainOptions &opts = {});

// Per-parameter-group gradient verification of a whole model at the
// composite training objective.  Groups upstream of the GRL are checked
// against the objective with the domain term's sign flipped by -alpha,
// which is exactly what the reversal layer implements.  Returns the max
// relative error over all parameters.
double model_gradient_check(ModelBundle &model, const Tensor &src,
                            const std::vector<int32_t> &y_src,
                            const Tensor &tgt, double alpha,
                            const LossWeights &weights, bool sim_active,
                            double domain_loss_weight = 1.0,
                            double epsilon = 1e-6);

}  // namespace udac

#endif  // UDAC_TRAINER_H_
