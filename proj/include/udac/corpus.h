// udac/corpus.h

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

#ifndef UDAC_CORPUS_H_
#define UDAC_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "udac/archive.h"
#include "udac/tensor.h"

namespace udac {

enum class Domain : int32_t { kSource = 0, kTarget = 1 };

// Feature frames grouped by utterance, without labels.  Handing the
// trainer a target corpus of this type is what guarantees no target
// senone label can ever reach it.
struct FrameCorpus {
  Domain domain = Domain::kSource;
  std::vector<ArchiveUtterance> utterances;
  int64_t dim = 0;

  int64_t total_frames() const;
  // Flattened (utterance, t) view in corpus order.
  struct FrameRef {
    int32_t utt;
    int32_t t;
  };
  std::vector<FrameRef> frame_index() const;
  const double *frame(const FrameRef &ref) const {
    return utterances[ref.utt].frames.row(ref.t);
  }
  void validate() const;
};

// A corpus plus per-utterance senone labels (label count = frame count).
struct LabeledFrameCorpus {
  FrameCorpus frames;
  std::vector<std::vector<int32_t>> labels;  // parallel to utterances

  int32_t label(const FrameCorpus::FrameRef &ref) const {
    return labels[ref.utt][ref.t];
  }
  void validate(int64_t senone_count) const;
};

FrameCorpus corpus_from_archive(const FeatureArchive &archive, Domain domain);
LabeledFrameCorpus labeled_corpus_from_archive(const FeatureArchive &archive,
                                               const AlignmentMap &ali,
                                               Domain domain,
                                               int64_t senone_count);
FeatureArchive corpus_to_archive(const FrameCorpus &corpus, FeatureStage stage,
                                 uint32_t config_digest);
AlignmentMap labels_to_alignments(const LabeledFrameCorpus &corpus);

// Synthetic two-domain benchmark: class-conditional Gaussian frames in the
// source domain; target frames drawn from the same class structure and
// pushed through an affine shift (rotation + offset) plus a per-class mean
// drift.  Utterances are blocks with geometric senone runs, mimicking
// HMM alignments.
struct SynthSpec {
  int64_t senone_count = 8;
  int64_t feature_dim = 20;
  int64_t source_frames = 60000;
  int64_t target_frames = 20000;
  int64_t eval_frames = 8000;  // held-out, per domain
  double class_mean_scale = 3.0;
  double class_sigma = 1.0;
  double rotation_angle = 0.3;  // radians per rotation plane
  double shift_offset = 0.2;    // |b| of the affine shift
  double class_drift = 0.5;     // per-class mean drift magnitude
  std::vector<double> priors;   // empty = uniform; must sum to 1
  int64_t min_utt_frames = 200;
  int64_t max_utt_frames = 600;
  double senone_run_mean = 8.0;  // geometric run length
  uint64_t seed = 1;

  void validate() const;
  std::string canonical_string() const;
};

struct SynthOutputs {
  LabeledFrameCorpus source;       // labeled training source
  FrameCorpus target_train;        // unlabeled adaptation data
  LabeledFrameCorpus target_eval;  // labels for measurement only
  LabeledFrameCorpus source_eval;  // held-out source for measurement
};

// Pure function of the spec: same spec, same corpora, bit for bit.
SynthOutputs generate_synthetic(const SynthSpec &spec);

// One training batch: equal source/target halves for adaptation variants.
struct MixedBatch {
  Tensor x_src;
  std::vector<int32_t> y_src;
  Tensor x_tgt;
};

// Emits floor(2*max(Ns,Nt)/batch) batches per epoch, each holding batch/2
// frames per domain.  Both streams are seeded shuffles without
// replacement; the smaller stream reshuffles and restarts so the two
// domains contribute equal totals.
class BalancedBatcher {
 public:
  BalancedBatcher(const LabeledFrameCorpus &src, const FrameCorpus &tgt,
                  int64_t batch, uint64_t epoch_seed);

  int64_t num_batches() const { return num_batches_; }
  MixedBatch batch(int64_t index) const;

 private:
  const LabeledFrameCorpus &src_;
  const FrameCorpus &tgt_;
  int64_t half_;
  int64_t num_batches_;
  std::vector<FrameCorpus::FrameRef> src_order_;
  std::vector<FrameCorpus::FrameRef> tgt_order_;
};

// Source-only batcher for the baseline DNN: floor(Ns/batch) batches.
class SourceBatcher {
 public:
  SourceBatcher(const LabeledFrameCorpus &src, int64_t batch,
                uint64_t epoch_seed);
  int64_t num_batches() const { return num_batches_; }
  MixedBatch batch(int64_t index) const;

 private:
  const LabeledFrameCorpus &src_;
  int64_t batch_size_;
  int64_t num_batches_;
  std::vector<FrameCorpus::FrameRef> order_;
};

// Frames per hour at the front-end's 10 ms hop.
inline constexpr int64_t kFramesPerHour = 360000;

// Seeded utterance-level selection until the cumulative frame count
// reaches hours * 360000; utterances are never split.
FrameCorpus subset_by_hours(const FrameCorpus &corpus, double hours,
                            uint64_t seed);
// Same selection rule with the budget given as a fraction of the corpus.
FrameCorpus subset_by_fraction(const FrameCorpus &corpus, double fraction,
                               uint64_t seed);

}  // namespace udac

#endif  // UDAC_CORPUS_H_
