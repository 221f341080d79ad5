// udac/corpus.cc

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

#include "udac/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "udac/error.h"
#include "udac/rng.h"

namespace udac {

int64_t FrameCorpus::total_frames() const {
  int64_t total = 0;
  for (const auto &utt : utterances) total += utt.frames.rows();
  return total;
}

std::vector<FrameCorpus::FrameRef> FrameCorpus::frame_index() const {
  std::vector<FrameRef> index;
  index.reserve(static_cast<size_t>(total_frames()));
  for (size_t u = 0; u < utterances.size(); u++) {
    const int64_t t_count = utterances[u].frames.rows();
    for (int64_t t = 0; t < t_count; t++) {
      index.push_back({static_cast<int32_t>(u), static_cast<int32_t>(t)});
    }
  }
  return index;
}

void FrameCorpus::validate() const {
  for (const auto &utt : utterances) {
    if (utt.frames.cols() != dim) {
      throw ShapeError("corpus: utterance '" + utt.id + "' has dim " +
                       std::to_string(utt.frames.cols()) + ", corpus dim is " +
                       std::to_string(dim));
    }
    if (utt.frames.rows() < 1) {
      throw Error("corpus: utterance '" + utt.id + "' is empty");
    }
  }
}

void LabeledFrameCorpus::validate(int64_t senone_count) const {
  frames.validate();
  if (labels.size() != frames.utterances.size()) {
    throw Error("labeled corpus: " + std::to_string(labels.size()) +
                " label rows for " + std::to_string(frames.utterances.size()) +
                " utterances");
  }
  for (size_t u = 0; u < labels.size(); u++) {
    if (static_cast<int64_t>(labels[u].size()) !=
        frames.utterances[u].frames.rows()) {
      throw Error("labeled corpus: utterance '" + frames.utterances[u].id +
                  "' has " + std::to_string(labels[u].size()) + " labels for " +
                  std::to_string(frames.utterances[u].frames.rows()) +
                  " frames");
    }
    for (int32_t s : labels[u]) {
      if (s < 0 || s >= senone_count) {
        throw Error("labeled corpus: senone " + std::to_string(s) + " in '" +
                    frames.utterances[u].id + "' outside [0, " +
                    std::to_string(senone_count) + ")");
      }
    }
  }
}

FrameCorpus corpus_from_archive(const FeatureArchive &archive, Domain domain) {
  FrameCorpus corpus;
  corpus.domain = domain;
  corpus.dim = archive.dim;
  corpus.utterances = archive.utterances;
  corpus.validate();
  return corpus;
}

LabeledFrameCorpus labeled_corpus_from_archive(const FeatureArchive &archive,
                                               const AlignmentMap &ali,
                                               Domain domain,
                                               int64_t senone_count) {
  validate_alignments(archive, ali, senone_count);
  LabeledFrameCorpus corpus;
  corpus.frames = corpus_from_archive(archive, domain);
  corpus.labels.reserve(archive.utterances.size());
  for (const auto &utt : archive.utterances) {
    corpus.labels.push_back(ali.at(utt.id));
  }
  return corpus;
}

FeatureArchive corpus_to_archive(const FrameCorpus &corpus, FeatureStage stage,
                                 uint32_t config_digest) {
  FeatureArchive archive;
  archive.stage = stage;
  archive.dim = corpus.dim;
  archive.config_digest = config_digest;
  archive.utterances = corpus.utterances;
  return archive;
}

AlignmentMap labels_to_alignments(const LabeledFrameCorpus &corpus) {
  AlignmentMap ali;
  for (size_t u = 0; u < corpus.frames.utterances.size(); u++) {
    ali[corpus.frames.utterances[u].id] = corpus.labels[u];
  }
  return ali;
}

// ---------------------------------------------------------------- synth

void SynthSpec::validate() const {
  if (senone_count < 2) throw ConfigError("synth: senone_count < 2");
  if (feature_dim < 2) throw ConfigError("synth: feature_dim < 2");
  if (source_frames < 1 || target_frames < 1 || eval_frames < 1) {
    throw ConfigError("synth: frame budgets must be >= 1");
  }
  if (class_sigma <= 0.0) {
    throw ConfigError("synth: class_sigma must be > 0 (degenerate covariance)");
  }
  if (min_utt_frames < 1 || max_utt_frames < min_utt_frames) {
    throw ConfigError("synth: bad utterance length range");
  }
  if (senone_run_mean < 1.0) throw ConfigError("synth: senone_run_mean < 1");
  if (!priors.empty()) {
    if (static_cast<int64_t>(priors.size()) != senone_count) {
      throw ConfigError("synth: priors size != senone_count");
    }
    double sum = 0.0;
    for (double p : priors) {
      if (p < 0.0) throw ConfigError("synth: negative prior");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
      throw ConfigError("synth: priors sum to " + std::to_string(sum) +
                        ", expected 1");
    }
  }
}

std::string SynthSpec::canonical_string() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "senones=%lld dim=%lld src=%lld tgt=%lld eval=%lld "
                "mean_scale=%g sigma=%g rot=%g offset=%g drift=%g "
                "utt=[%lld,%lld] run_mean=%g seed=%llu",
                static_cast<long long>(senone_count),
                static_cast<long long>(feature_dim),
                static_cast<long long>(source_frames),
                static_cast<long long>(target_frames),
                static_cast<long long>(eval_frames), class_mean_scale,
                class_sigma, rotation_angle, shift_offset, class_drift,
                static_cast<long long>(min_utt_frames),
                static_cast<long long>(max_utt_frames), senone_run_mean,
                static_cast<unsigned long long>(seed));
  return buf;
}

namespace {

// Orthonormal basis from the QR factorization (modified Gram-Schmidt) of a
// seeded Gaussian matrix.
Tensor random_orthonormal(int64_t d, Rng &rng) {
  Tensor q(d, d);
  for (double &v : q.data()) v = rng.normal();
  for (int64_t j = 0; j < d; j++) {
    for (int64_t k = 0; k < j; k++) {
      double dot = 0.0;
      for (int64_t i = 0; i < d; i++) dot += q(i, j) * q(i, k);
      for (int64_t i = 0; i < d; i++) q(i, j) -= dot * q(i, k);
    }
    double norm = 0.0;
    for (int64_t i = 0; i < d; i++) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw NumericError("synth: degenerate rotation basis");
    for (int64_t i = 0; i < d; i++) q(i, j) /= norm;
  }
  return q;
}

std::vector<double> unit_vector(int64_t d, Rng &rng) {
  std::vector<double> v(d);
  double norm = 0.0;
  for (double &x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double &x : v) x /= norm;
  return v;
}

int64_t sample_class(const std::vector<double> &priors, Rng &rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t c = 0; c < priors.size(); c++) {
    acc += priors[c];
    if (u < acc) return static_cast<int64_t>(c);
  }
  return static_cast<int64_t>(priors.size()) - 1;
}

// Geometric run length on {1, 2, ...} with the given mean.
int64_t sample_run_length(double mean, Rng &rng) {
  const double p = 1.0 / mean;
  double u = rng.uniform();
  while (u == 0.0) u = rng.uniform();
  const double len = std::ceil(std::log(u) / std::log(1.0 - p));
  return std::max<int64_t>(1, static_cast<int64_t>(len));
}

}  // namespace

SynthOutputs generate_synthetic(const SynthSpec &spec) {
  spec.validate();
  const int64_t d = spec.feature_dim;
  Rng rng(spec.seed);

  std::vector<double> priors = spec.priors;
  if (priors.empty()) {
    priors.assign(static_cast<size_t>(spec.senone_count),
                  1.0 / static_cast<double>(spec.senone_count));
  }

  // Class means on a seeded random sphere.
  std::vector<std::vector<double>> means;
  for (int64_t c = 0; c < spec.senone_count; c++) {
    auto mu = unit_vector(d, rng);
    for (double &x : mu) x *= spec.class_mean_scale;
    means.push_back(std::move(mu));
  }

  // Shift matrix A = Q R Q^T: rotation by rotation_angle in each disjoint
  // plane spanned by consecutive columns of a seeded orthonormal basis.
  // Angle 0 yields the identity; A is always invertible.
  Tensor rot(d, d);
  if (spec.rotation_angle == 0.0) {
    for (int64_t i = 0; i < d; i++) rot(i, i) = 1.0;
  } else {
    const Tensor q = random_orthonormal(d, rng);
    Tensor r(d, d);
    for (int64_t i = 0; i < d; i++) r(i, i) = 1.0;
    const double c = std::cos(spec.rotation_angle);
    const double s = std::sin(spec.rotation_angle);
    for (int64_t p = 0; p + 1 < d; p += 2) {
      r(p, p) = c;
      r(p, p + 1) = -s;
      r(p + 1, p) = s;
      r(p + 1, p + 1) = c;
    }
    Tensor qt(d, d);
    for (int64_t i = 0; i < d; i++) {
      for (int64_t j = 0; j < d; j++) qt(i, j) = q(j, i);
    }
    rot = matmul(matmul(q, r), qt);
  }

  std::vector<double> offset = unit_vector(d, rng);
  for (double &x : offset) x *= spec.shift_offset;

  std::vector<std::vector<double>> drifts;
  for (int64_t c = 0; c < spec.senone_count; c++) {
    auto v = unit_vector(d, rng);
    for (double &x : v) x *= spec.class_drift;
    drifts.push_back(std::move(v));
  }

  // Emits one corpus worth of utterances; target domain applies the shift.
  auto make_corpus = [&](int64_t budget, Domain domain, const char *tag)
      -> LabeledFrameCorpus {
    LabeledFrameCorpus corpus;
    corpus.frames.domain = domain;
    corpus.frames.dim = d;
    int64_t remaining = budget;
    int64_t utt_no = 0;
    std::vector<double> raw(d);
    while (remaining > 0) {
      const int64_t span = spec.max_utt_frames - spec.min_utt_frames;
      int64_t len = spec.min_utt_frames + (span > 0 ? rng.randint(span + 1) : 0);
      len = std::min(len, remaining);
      ArchiveUtterance utt;
      char id[64];
      std::snprintf(id, sizeof id, "%s_%06lld", tag,
                    static_cast<long long>(utt_no++));
      utt.id = id;
      utt.frames = Tensor(len, d);
      std::vector<int32_t> labels(static_cast<size_t>(len));
      int64_t t = 0;
      while (t < len) {
        const int64_t cls = sample_class(priors, rng);
        const int64_t run = std::min(sample_run_length(spec.senone_run_mean, rng),
                                     len - t);
        for (int64_t i = 0; i < run; i++, t++) {
          labels[static_cast<size_t>(t)] = static_cast<int32_t>(cls);
          for (int64_t j = 0; j < d; j++) {
            raw[j] = means[cls][j] + spec.class_sigma * rng.normal();
          }
          double *row = utt.frames.row(t);
          if (domain == Domain::kTarget) {
            for (int64_t j = 0; j < d; j++) {
              double acc = offset[j] + drifts[cls][j];
              const double *rrow = rot.row(j);
              for (int64_t k = 0; k < d; k++) acc += rrow[k] * raw[k];
              row[j] = acc;
            }
          } else {
            for (int64_t j = 0; j < d; j++) row[j] = raw[j];
          }
        }
      }
      remaining -= len;
      corpus.frames.utterances.push_back(std::move(utt));
      corpus.labels.push_back(std::move(labels));
    }
    return corpus;
  };

  SynthOutputs out;
  out.source = make_corpus(spec.source_frames, Domain::kSource, "src");
  {
    LabeledFrameCorpus tgt = make_corpus(spec.target_frames, Domain::kTarget,
                                         "tgt");
    out.target_train = std::move(tgt.frames);  // labels deliberately dropped
  }
  out.target_eval = make_corpus(spec.eval_frames, Domain::kTarget, "tgte");
  out.source_eval = make_corpus(spec.eval_frames, Domain::kSource, "srce");
  return out;
}

// -------------------------------------------------------------- batchers

BalancedBatcher::BalancedBatcher(const LabeledFrameCorpus &src,
                                 const FrameCorpus &tgt, int64_t batch,
                                 uint64_t epoch_seed)
    : src_(src), tgt_(tgt) {
  if (batch < 2 || batch % 2 != 0) {
    throw ConfigError("balanced batches need an even batch size >= 2, got " +
                      std::to_string(batch));
  }
  const int64_t ns = src.frames.total_frames();
  const int64_t nt = tgt.total_frames();
  if (ns == 0) throw Error("balanced batches: empty source corpus");
  if (nt == 0) throw Error("balanced batches: empty target corpus");
  half_ = batch / 2;
  num_batches_ = 2 * std::max(ns, nt) / batch;
  if (num_batches_ == 0) {
    throw Error("balanced batches: corpora smaller than half a batch");
  }

  const int64_t need = num_batches_ * half_;
  Rng src_rng(Rng::mix(epoch_seed, 0x5343u));  // distinct per-domain streams
  Rng tgt_rng(Rng::mix(epoch_seed, 0x5447u));
  auto fill_order = [need](std::vector<FrameCorpus::FrameRef> &order,
                           const std::vector<FrameCorpus::FrameRef> &index,
                           Rng &rng) {
    order.reserve(static_cast<size_t>(need));
    std::vector<FrameCorpus::FrameRef> cycle = index;
    while (static_cast<int64_t>(order.size()) < need) {
      rng.shuffle(cycle);
      const int64_t take = std::min<int64_t>(
          need - static_cast<int64_t>(order.size()),
          static_cast<int64_t>(cycle.size()));
      order.insert(order.end(), cycle.begin(), cycle.begin() + take);
    }
  };
  fill_order(src_order_, src.frames.frame_index(), src_rng);
  fill_order(tgt_order_, tgt.frame_index(), tgt_rng);
}

MixedBatch BalancedBatcher::batch(int64_t index) const {
  if (index < 0 || index >= num_batches_) {
    throw Error("batch index " + std::to_string(index) + " out of " +
                std::to_string(num_batches_));
  }
  MixedBatch b;
  b.x_src = Tensor(half_, src_.frames.dim);
  b.x_tgt = Tensor(half_, tgt_.dim);
  b.y_src.resize(static_cast<size_t>(half_));
  for (int64_t i = 0; i < half_; i++) {
    const auto &sref = src_order_[static_cast<size_t>(index * half_ + i)];
    const auto &tref = tgt_order_[static_cast<size_t>(index * half_ + i)];
    std::copy(src_.frames.frame(sref), src_.frames.frame(sref) + src_.frames.dim,
              b.x_src.row(i));
    b.y_src[static_cast<size_t>(i)] = src_.label(sref);
    std::copy(tgt_.frame(tref), tgt_.frame(tref) + tgt_.dim, b.x_tgt.row(i));
  }
  return b;
}

SourceBatcher::SourceBatcher(const LabeledFrameCorpus &src, int64_t batch,
                             uint64_t epoch_seed)
    : src_(src), batch_size_(batch) {
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  const int64_t ns = src.frames.total_frames();
  if (ns == 0) throw Error("source batches: empty corpus");
  num_batches_ = ns / batch;
  if (num_batches_ == 0) {
    throw Error("source batches: corpus smaller than one batch");
  }
  order_ = src.frames.frame_index();
  Rng rng(Rng::mix(epoch_seed, 0x5343u));
  rng.shuffle(order_);
}

MixedBatch SourceBatcher::batch(int64_t index) const {
  if (index < 0 || index >= num_batches_) {
    throw Error("batch index " + std::to_string(index) + " out of " +
                std::to_string(num_batches_));
  }
  MixedBatch b;
  b.x_src = Tensor(batch_size_, src_.frames.dim);
  b.y_src.resize(static_cast<size_t>(batch_size_));
  for (int64_t i = 0; i < batch_size_; i++) {
    const auto &ref = order_[static_cast<size_t>(index * batch_size_ + i)];
    std::copy(src_.frames.frame(ref), src_.frames.frame(ref) + src_.frames.dim,
              b.x_src.row(i));
    b.y_src[static_cast<size_t>(i)] = src_.label(ref);
  }
  return b;
}

// --------------------------------------------------------------- subsets

namespace {

FrameCorpus subset_by_frames(const FrameCorpus &corpus, int64_t target_frames,
                             uint64_t seed) {
  std::vector<size_t> order(corpus.utterances.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(Rng::mix(seed, 0x53425354u));
  rng.shuffle(order);
  FrameCorpus out;
  out.domain = corpus.domain;
  out.dim = corpus.dim;
  int64_t got = 0;
  for (size_t u : order) {
    if (got >= target_frames) break;
    out.utterances.push_back(corpus.utterances[u]);
    got += corpus.utterances[u].frames.rows();
  }
  return out;
}

}  // namespace

FrameCorpus subset_by_hours(const FrameCorpus &corpus, double hours,
                            uint64_t seed) {
  if (hours <= 0.0) throw ConfigError("subset_by_hours: hours must be > 0");
  const int64_t total = corpus.total_frames();
  const int64_t want = static_cast<int64_t>(
      std::llround(hours * static_cast<double>(kFramesPerHour)));
  if (want > total) {
    throw Error("subset_by_hours: requested " + std::to_string(want) +
                " frames (" + std::to_string(hours) + " h) but corpus has " +
                std::to_string(total));
  }
  return subset_by_frames(corpus, want, seed);
}

FrameCorpus subset_by_fraction(const FrameCorpus &corpus, double fraction,
                               uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ConfigError("subset_by_fraction: fraction must lie in (0, 1]");
  }
  const int64_t total = corpus.total_frames();
  const int64_t want = static_cast<int64_t>(
      std::llround(fraction * static_cast<double>(total)));
  return subset_by_frames(corpus, std::max<int64_t>(1, want), seed);
}

}  // namespace udac
