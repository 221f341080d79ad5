// udac/evaluate.h

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

#ifndef UDAC_EVALUATE_H_
#define UDAC_EVALUATE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "udac/arch.h"
#include "udac/corpus.h"

namespace udac {

// Senone frame priors from source alignments.  Zero-count senones are
// floored at half a frame before normalization so the log-prior is finite.
struct SenonePrior {
  std::vector<double> counts;
  std::vector<double> log_prior;

  static SenonePrior from_labels(const LabeledFrameCorpus &corpus,
                                 int64_t senone_count);
  static SenonePrior from_alignments(const AlignmentMap &ali,
                                     int64_t senone_count);
  static SenonePrior from_counts(std::vector<double> counts);
};

// Fraction of frames whose argmax senone log-prob matches the alignment
// label; ties break toward the lowest index.
double senone_accuracy(ModelBundle &model, const LabeledFrameCorpus &corpus);

struct DomainAccuracy {
  double source = 0.0;  // fraction of source frames classified as source
  double target = 0.0;  // fraction of target frames classified as target
  int64_t source_frames = 0;
  int64_t target_frames = 0;
};

// Frame-level domain accuracy per corpus (models with a domain head only).
DomainAccuracy domain_accuracy(ModelBundle &model, const FrameCorpus &src_eval,
                               const FrameCorpus &tgt_eval);

// Senone log-softmax minus log-prior, per frame.
Tensor pseudo_loglik(ModelBundle &model, const Tensor &frames,
                     const SenonePrior &prior);

// Pseudo-log-likelihoods for a whole corpus as a stage-tagged archive.
FeatureArchive pseudo_loglik_archive(ModelBundle &model,
                                     const FrameCorpus &corpus,
                                     const SenonePrior &prior);

struct EvalReport {
  double senone_acc_source = -1.0;
  double senone_acc_target = -1.0;
  DomainAccuracy domain;
  bool has_domain = false;
  int64_t frames_source = 0;
  int64_t frames_target = 0;

  std::string to_text() const;
  std::string to_csv() const;
};

EvalReport evaluate_model(ModelBundle &model, const LabeledFrameCorpus &src_eval,
                          const LabeledFrameCorpus &tgt_eval);

// Principal components of a row sample via Jacobi eigendecomposition of
// the covariance.
struct Pca {
  std::vector<double> eigenvalues;  // descending
  Tensor components;                // n_components x D
  std::vector<double> mean;

  Tensor project(const Tensor &rows) const;
};

Pca pca_fit(const Tensor &rows, int64_t n_components);

// Feature-extractor (shared-encoder for DSN) outputs with domain/senone
// tags and a 2-D PCA projection.
struct EmbeddingTable {
  Tensor embeddings;             // N x D
  Tensor projection;             // N x 2
  std::vector<int32_t> domains;  // 0 source, 1 target
  std::vector<int32_t> senones;
  std::vector<double> eigenvalues;
};

EmbeddingTable export_embeddings(ModelBundle &model,
                                 const LabeledFrameCorpus &src,
                                 const LabeledFrameCorpus &tgt,
                                 std::optional<int32_t> senone_filter);

// CSV columns: domain,senone,dim0..dimD-1,pc1,pc2
void write_embedding_csv(const EmbeddingTable &table, const std::string &path);

}  // namespace udac

#endif  // UDAC_EVALUATE_H_
