// tests/test_corpus.cc

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
#include <map>
#include <set>

#include "udac/corpus.h"
#include "udac/error.h"
#include "test_util.h"

using namespace udac;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.source_frames = 4000;
  spec.target_frames = 1500;
  spec.eval_frames = 1000;
  spec.seed = 5;
  return spec;
}

// Per-class sample means of a labeled corpus.
std::vector<std::vector<double>> class_means(const LabeledFrameCorpus &corpus,
                                             int64_t classes) {
  std::vector<std::vector<double>> sums(
      static_cast<size_t>(classes),
      std::vector<double>(static_cast<size_t>(corpus.frames.dim), 0.0));
  std::vector<int64_t> counts(static_cast<size_t>(classes), 0);
  for (size_t u = 0; u < corpus.frames.utterances.size(); u++) {
    const Tensor &x = corpus.frames.utterances[u].frames;
    for (int64_t t = 0; t < x.rows(); t++) {
      const auto c = static_cast<size_t>(corpus.labels[u][static_cast<size_t>(t)]);
      counts[c]++;
      for (int64_t j = 0; j < x.cols(); j++) {
        sums[c][static_cast<size_t>(j)] += x(t, j);
      }
    }
  }
  for (size_t c = 0; c < sums.size(); c++) {
    for (double &v : sums[c]) v /= std::max<int64_t>(1, counts[c]);
  }
  return sums;
}

}  // namespace

TEST_CASE("synthetic generation is a pure function of the spec") {
  const SynthSpec spec = small_spec();
  SynthOutputs a = generate_synthetic(spec);
  SynthOutputs b = generate_synthetic(spec);
  REQUIRE(a.source.frames.utterances.size() ==
          b.source.frames.utterances.size());
  for (size_t u = 0; u < a.source.frames.utterances.size(); u++) {
    REQUIRE(a.source.frames.utterances[u].frames.data() ==
            b.source.frames.utterances[u].frames.data());
  }
  REQUIRE(a.target_train.utterances.size() == b.target_train.utterances.size());
  for (size_t u = 0; u < a.target_train.utterances.size(); u++) {
    REQUIRE(a.target_train.utterances[u].frames.data() ==
            b.target_train.utterances[u].frames.data());
  }
  SynthSpec other = spec;
  other.seed = 6;
  SynthOutputs c = generate_synthetic(other);
  CHECK(a.source.frames.utterances[0].frames.data() !=
        c.source.frames.utterances[0].frames.data());
}

TEST_CASE("budgets and structure match the spec") {
  const SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);
  CHECK(out.source.frames.total_frames() == spec.source_frames);
  CHECK(out.target_train.total_frames() == spec.target_frames);
  CHECK(out.target_eval.frames.total_frames() == spec.eval_frames);
  CHECK(out.source_eval.frames.total_frames() == spec.eval_frames);
  CHECK(out.source.frames.domain == Domain::kSource);
  CHECK(out.target_train.domain == Domain::kTarget);
  out.source.validate(spec.senone_count);
  out.target_eval.validate(spec.senone_count);
  // utterance lengths stay inside the configured block range
  for (const auto &utt : out.source.frames.utterances) {
    CHECK(utt.frames.rows() <= spec.max_utt_frames);
  }
  // senone runs: labels change less often than iid sampling would
  int64_t changes = 0, total = 0;
  for (const auto &labels : out.source.labels) {
    for (size_t t = 1; t < labels.size(); t++) {
      changes += labels[t] != labels[t - 1] ? 1 : 0;
      total++;
    }
  }
  const double change_rate =
      static_cast<double>(changes) / static_cast<double>(total);
  CHECK(change_rate < 0.35);  // geometric runs with mean 8 => ~1/8 + mixing
  CHECK(change_rate > 0.05);
}

TEST_CASE("identity shift makes the domains indistinguishable") {
  SynthSpec spec = small_spec();
  spec.rotation_angle = 0.0;
  spec.shift_offset = 0.0;
  spec.class_drift = 0.0;
  SynthOutputs out = generate_synthetic(spec);
  // Per-class means of source vs target-eval agree within sampling noise.
  const auto src_means = class_means(out.source, spec.senone_count);
  const auto tgt_means = class_means(out.target_eval, spec.senone_count);
  for (int64_t c = 0; c < spec.senone_count; c++) {
    double dist = 0.0;
    for (int64_t j = 0; j < spec.feature_dim; j++) {
      const double d = src_means[static_cast<size_t>(c)][static_cast<size_t>(j)] -
                       tgt_means[static_cast<size_t>(c)][static_cast<size_t>(j)];
      dist += d * d;
    }
    CHECK(std::sqrt(dist) < 0.5);  // ~sigma/sqrt(n_c) scale
  }
}

TEST_CASE("gaussian density oracle sees the domain shift") {
  // Bayes-style quadratic classifier fit on the true source parameters:
  // argmax_c log N(x; mu_c, sigma^2 I).  Accuracy on the shifted target
  // drops against the source; that gap is what adaptation must close.
  SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);

  // Recover the source class means from data (they match the generative
  // means up to sampling noise, which is fine for the oracle).
  const auto means = class_means(out.source, spec.senone_count);
  auto classify = [&](const double *x) {
    int64_t best = 0;
    double best_score = -1e300;
    for (int64_t c = 0; c < spec.senone_count; c++) {
      double d2 = 0.0;
      for (int64_t j = 0; j < spec.feature_dim; j++) {
        const double d = x[j] - means[static_cast<size_t>(c)][static_cast<size_t>(j)];
        d2 += d * d;
      }
      const double score = -d2 / (2.0 * spec.class_sigma * spec.class_sigma);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    return best;
  };
  auto accuracy = [&](const LabeledFrameCorpus &corpus) {
    int64_t hit = 0, total = 0;
    for (size_t u = 0; u < corpus.frames.utterances.size(); u++) {
      const Tensor &x = corpus.frames.utterances[u].frames;
      for (int64_t t = 0; t < x.rows(); t++) {
        hit += classify(x.row(t)) == corpus.labels[u][static_cast<size_t>(t)];
        total++;
      }
    }
    return static_cast<double>(hit) / static_cast<double>(total);
  };
  const double on_source = accuracy(out.source_eval);
  const double on_target = accuracy(out.target_eval);
  CHECK(on_source > 0.9);
  CHECK(on_target < on_source - 0.05);
  MESSAGE("oracle gap: source ", on_source, " target ", on_target);
}

TEST_CASE("balanced batches hold exactly half source half target") {
  SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);
  BalancedBatcher batcher(out.source, out.target_train, 32, 99);
  REQUIRE(batcher.num_batches() == 2 * 4000 / 32);
  const MixedBatch b = batcher.batch(0);
  CHECK(b.x_src.rows() == 16);
  CHECK(b.x_tgt.rows() == 16);
  CHECK(b.y_src.size() == 16);
}

TEST_CASE("balanced batches: small target cycles, large source does not") {
  // 1000 source / 100 target frames, batch 20: 100 batches per epoch,
  // every target frame at least once, source frames at most once.
  SynthSpec spec;
  spec.source_frames = 1000;
  spec.target_frames = 100;
  spec.eval_frames = 50;
  spec.min_utt_frames = 10;
  spec.max_utt_frames = 30;
  spec.seed = 11;
  SynthOutputs out = generate_synthetic(spec);
  BalancedBatcher batcher(out.source, out.target_train, 20, 7);
  REQUIRE(batcher.num_batches() == 100);

  std::map<std::pair<int32_t, int32_t>, int64_t> src_seen, tgt_seen;
  for (int64_t i = 0; i < batcher.num_batches(); i++) {
    const MixedBatch b = batcher.batch(i);
    CHECK(b.x_src.rows() == 10);
    CHECK(b.x_tgt.rows() == 10);
  }
  // Count frame usage through the emitted index stream: rebuild by value
  // match is fragile, so re-derive from a second identical batcher pass.
  // Frame identity is recovered by exact row comparison against corpora.
  auto find_frame = [](const FrameCorpus &corpus, const double *row) {
    for (size_t u = 0; u < corpus.utterances.size(); u++) {
      const Tensor &x = corpus.utterances[u].frames;
      for (int64_t t = 0; t < x.rows(); t++) {
        if (std::memcmp(x.row(t), row, sizeof(double) * x.cols()) == 0) {
          return std::pair<int32_t, int32_t>(static_cast<int32_t>(u),
                                             static_cast<int32_t>(t));
        }
      }
    }
    throw Error("frame not found in corpus");
  };
  for (int64_t i = 0; i < batcher.num_batches(); i++) {
    const MixedBatch b = batcher.batch(i);
    for (int64_t r = 0; r < b.x_src.rows(); r++) {
      src_seen[find_frame(out.source.frames, b.x_src.row(r))]++;
    }
    for (int64_t r = 0; r < b.x_tgt.rows(); r++) {
      tgt_seen[find_frame(out.target_train, b.x_tgt.row(r))]++;
    }
  }
  CHECK(src_seen.size() == 1000);  // every source frame exactly once
  for (const auto &[ref, count] : src_seen) CHECK(count == 1);
  CHECK(tgt_seen.size() == 100);  // every target frame, cycled 10 times
  for (const auto &[ref, count] : tgt_seen) CHECK(count == 10);
}

TEST_CASE("balanced batches are deterministic per epoch seed") {
  SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);
  BalancedBatcher a(out.source, out.target_train, 16, 1234);
  BalancedBatcher b(out.source, out.target_train, 16, 1234);
  BalancedBatcher c(out.source, out.target_train, 16, 1235);
  const MixedBatch ba = a.batch(3), bb = b.batch(3), bc = c.batch(3);
  REQUIRE(ba.x_src.data() == bb.x_src.data());
  REQUIRE(ba.x_tgt.data() == bb.x_tgt.data());
  REQUIRE(ba.y_src == bb.y_src);
  CHECK(ba.x_src.data() != bc.x_src.data());
}

TEST_CASE("balanced batches reject bad inputs") {
  SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);
  CHECK_THROWS_AS(BalancedBatcher(out.source, out.target_train, 15, 1),
                  ConfigError);  // odd batch
  FrameCorpus empty;
  empty.dim = spec.feature_dim;
  CHECK_THROWS_AS(BalancedBatcher(out.source, empty, 16, 1), Error);
}

TEST_CASE("subset_by_hours selects whole utterances to the frame budget") {
  SynthSpec spec = small_spec();
  spec.source_frames = 90000;  // 0.25 h at 10 ms hop
  SynthOutputs out = generate_synthetic(spec);
  const FrameCorpus &corpus = out.source.frames;

  FrameCorpus half = subset_by_hours(corpus, 0.125, 3);
  const int64_t want = 45000;
  CHECK(half.total_frames() >= want);
  // overshoot bounded by one utterance
  CHECK(half.total_frames() < want + spec.max_utt_frames);

  // full duration returns everything
  const double full_hours =
      static_cast<double>(corpus.total_frames()) / kFramesPerHour;
  FrameCorpus all = subset_by_hours(corpus, full_hours, 3);
  CHECK(all.total_frames() == corpus.total_frames());

  CHECK_THROWS_AS(subset_by_hours(corpus, full_hours + 0.1, 3), Error);
}

TEST_CASE("subset_by_fraction tracks the requested share") {
  SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);
  const FrameCorpus &corpus = out.target_train;
  for (double frac : {0.1, 0.3, 0.5, 1.0}) {
    FrameCorpus sub = subset_by_fraction(corpus, frac, 7);
    const auto want = static_cast<int64_t>(frac * corpus.total_frames());
    CHECK(sub.total_frames() >= want);
    CHECK(sub.total_frames() <= want + spec.max_utt_frames);
  }
  CHECK_THROWS_AS(subset_by_fraction(corpus, 0.0, 7), ConfigError);
  CHECK_THROWS_AS(subset_by_fraction(corpus, 1.5, 7), ConfigError);
}

TEST_CASE("corpora round-trip through archives and alignments") {
  test::TempDir dir("corpus_rt");
  SynthSpec spec = small_spec();
  SynthOutputs out = generate_synthetic(spec);

  const uint32_t digest = 0x1234u;
  FeatureArchive archive =
      corpus_to_archive(out.source.frames, FeatureStage::kSynthetic, digest);
  AlignmentMap ali = labels_to_alignments(out.source);
  const std::string apath = dir.file("src.udaf");
  const std::string lpath = dir.file("src.ali");
  write_archive(archive, apath);
  write_alignments(ali, lpath);

  FeatureArchive back = read_archive(apath);
  AlignmentMap ali_back = read_alignments(lpath);
  LabeledFrameCorpus rt = labeled_corpus_from_archive(
      back, ali_back, Domain::kSource, spec.senone_count);
  REQUIRE(rt.frames.utterances.size() == out.source.frames.utterances.size());
  for (size_t u = 0; u < rt.frames.utterances.size(); u++) {
    REQUIRE(rt.frames.utterances[u].frames.data() ==
            out.source.frames.utterances[u].frames.data());
    REQUIRE(rt.labels[u] == out.source.labels[u]);
  }
}

TEST_CASE("degenerate specs are rejected") {
  SynthSpec spec = small_spec();
  spec.class_sigma = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = small_spec();
  spec.priors = {0.5, 0.5};  // wrong length for 8 senones
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = small_spec();
  spec.priors.assign(8, 0.2);  // sums to 1.6
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}
