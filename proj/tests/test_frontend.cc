// tests/test_frontend.cc

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
#include <cstring>

#include "udac/archive.h"
#include "udac/error.h"
#include "udac/frontend.h"
#include "udac/rng.h"
#include "test_util.h"

using namespace udac;

namespace {

Waveform tone(double freq_hz, double seconds, int rate = 8000,
              double amplitude = 8000.0) {
  Waveform wav;
  wav.sample_rate = rate;
  const int64_t n = static_cast<int64_t>(seconds * rate);
  wav.samples.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; i++) {
    wav.samples[static_cast<size_t>(i)] = static_cast<int16_t>(
        amplitude * std::sin(2.0 * 3.14159265358979323846 * freq_hz *
                             static_cast<double>(i) / rate));
  }
  return wav;
}

Waveform noise_wave(double seconds, uint64_t seed, int rate = 8000) {
  Waveform wav;
  wav.sample_rate = rate;
  Rng rng(seed);
  const int64_t n = static_cast<int64_t>(seconds * rate);
  wav.samples.resize(static_cast<size_t>(n));
  for (auto &s : wav.samples) {
    s = static_cast<int16_t>(2000.0 * rng.normal());
  }
  return wav;
}

}  // namespace

TEST_CASE("logmel frame count follows the hop formula") {
  FrontendConfig cfg;
  // 1 s at 8 kHz, 25 ms frames, 10 ms hop: 1 + (8000 - 200) / 80 = 98
  Waveform wav = noise_wave(1.0, 1);
  FeatureMatrix f = logmel(wav, cfg);
  CHECK(f.frames.rows() == 98);
  CHECK(f.frames.cols() == 40);
  CHECK(f.stage == FeatureStage::kRaw);
}

TEST_CASE("logmel rejects too-short waveforms and wrong rates") {
  FrontendConfig cfg;
  Waveform wav;
  wav.sample_rate = 8000;
  wav.samples.assign(150, 0);  // shorter than one 200-sample frame
  CHECK_THROWS_AS(logmel(wav, cfg), Error);
  Waveform wrong = noise_wave(0.5, 2, 16000);
  CHECK_THROWS_AS(logmel(wrong, cfg), ConfigError);
}

TEST_CASE("silence maps to the constant log floor") {
  FrontendConfig cfg;
  Waveform wav;
  wav.sample_rate = 8000;
  wav.samples.assign(8000, 0);
  FeatureMatrix f = logmel(wav, cfg);
  const double expected = std::log(cfg.log_floor);
  for (double v : f.frames.data()) {
    CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("a 1 kHz tone peaks in the mel bin bracketing 1 kHz") {
  FrontendConfig cfg;
  Waveform wav = tone(1000.0, 1.0);
  FeatureMatrix f = logmel(wav, cfg);
  // average the log energies over frames
  std::vector<double> avg(40, 0.0);
  for (int64_t t = 0; t < f.frames.rows(); t++) {
    for (int64_t j = 0; j < 40; j++) avg[static_cast<size_t>(j)] += f.frames(t, j);
  }
  int argmax = 0;
  for (int j = 1; j < 40; j++) {
    if (avg[static_cast<size_t>(j)] > avg[static_cast<size_t>(argmax)]) argmax = j;
  }
  // independent filterbank geometry: HTK mel edges over [low, nyquist]
  auto hz_to_mel = [](double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
  };
  auto mel_to_hz = [](double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  };
  const double lo = hz_to_mel(cfg.low_freq_hz), hi = hz_to_mel(4000.0);
  auto edge = [&](int i) {
    return mel_to_hz(lo + (hi - lo) * i / (cfg.mel_bins + 1));
  };
  // the winning triangle [edge(b), edge(b+2)] must bracket 1 kHz
  CHECK(edge(argmax) < 1000.0);
  CHECK(edge(argmax + 2) > 1000.0);
  // and the library reports matching centers
  const auto centers = mel_center_frequencies(cfg, 8000);
  CHECK(centers[static_cast<size_t>(argmax)] ==
        doctest::Approx(edge(argmax + 1)).epsilon(1e-9));
}

TEST_CASE("deltas vanish on constant input") {
  FrontendConfig cfg;
  FeatureMatrix f;
  f.stage = FeatureStage::kRaw;
  f.frames = Tensor(12, 40);
  for (int64_t t = 0; t < 12; t++) {
    for (int64_t j = 0; j < 40; j++) f.frames(t, j) = 3.25 + j;
  }
  FeatureMatrix d = add_deltas(f, cfg);
  CHECK(d.frames.cols() == 120);
  CHECK(d.stage == FeatureStage::kDeltas);
  for (int64_t t = 0; t < 12; t++) {
    for (int64_t j = 40; j < 120; j++) {
      CHECK(d.frames(t, j) == doctest::Approx(0.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("deltas of a linear ramp recover the slope in the interior") {
  FrontendConfig cfg;
  FeatureMatrix f;
  f.stage = FeatureStage::kRaw;
  f.frames = Tensor(20, 40);
  const double slope = 0.7;
  for (int64_t t = 0; t < 20; t++) {
    for (int64_t j = 0; j < 40; j++) {
      f.frames(t, j) = slope * static_cast<double>(t) + 0.1 * j;
    }
  }
  FeatureMatrix d = add_deltas(f, cfg);
  for (int64_t t = 2; t < 18; t++) {
    CHECK(d.frames(t, 40) == doctest::Approx(slope).epsilon(1e-12));
  }
  for (int64_t t = 4; t < 16; t++) {
    CHECK(d.frames(t, 80) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("deltas on a single frame are zero via edge replication") {
  FrontendConfig cfg;
  FeatureMatrix f;
  f.stage = FeatureStage::kRaw;
  f.frames = Tensor(1, 40);
  for (int64_t j = 0; j < 40; j++) f.frames(0, j) = static_cast<double>(j);
  FeatureMatrix d = add_deltas(f, cfg);
  CHECK(d.frames.rows() == 1);
  for (int64_t j = 40; j < 120; j++) CHECK(d.frames(0, j) == 0.0);
}

TEST_CASE("cmvn yields zero mean and unit variance per dim") {
  Rng rng(3);
  FeatureMatrix f;
  f.stage = FeatureStage::kDeltas;
  f.frames = Tensor(50, 120);
  for (double &v : f.frames.data()) v = 4.0 + 2.5 * rng.normal();
  FeatureMatrix n = cmvn(f);
  CHECK(n.stage == FeatureStage::kNormalized);
  for (int64_t j = 0; j < 120; j++) {
    double mean = 0.0;
    for (int64_t t = 0; t < 50; t++) mean += n.frames(t, j);
    mean /= 50.0;
    double var = 0.0;
    for (int64_t t = 0; t < 50; t++) {
      var += (n.frames(t, j) - mean) * (n.frames(t, j) - mean);
    }
    var /= 50.0;
    CHECK(std::fabs(mean) < 1e-10);
    CHECK(std::fabs(var - 1.0) < 1e-8);
  }
}

TEST_CASE("cmvn zeroes constant dims and is idempotent") {
  Rng rng(5);
  FeatureMatrix f;
  f.stage = FeatureStage::kDeltas;
  f.frames = Tensor(30, 120);
  for (double &v : f.frames.data()) v = rng.normal();
  for (int64_t t = 0; t < 30; t++) f.frames(t, 7) = -2.5;  // constant dim
  FeatureMatrix once = cmvn(f);
  for (int64_t t = 0; t < 30; t++) CHECK(once.frames(t, 7) == 0.0);
  FeatureMatrix twice = cmvn(once);
  for (int64_t i = 0; i < once.frames.size(); i++) {
    CHECK(std::fabs(twice.frames.data()[i] - once.frames.data()[i]) <= 1e-10);
  }
}

TEST_CASE("splice concatenates eleven neighbors with edge replication") {
  FrontendConfig cfg;
  FeatureMatrix f;
  f.stage = FeatureStage::kNormalized;
  f.frames = Tensor(25, 120);
  Rng rng(7);
  for (double &v : f.frames.data()) v = rng.normal();
  FeatureMatrix s = splice(f, cfg);
  CHECK(s.frames.cols() == 1320);
  CHECK(s.stage == FeatureStage::kSpliced);
  // interior frame: exact concatenation of neighbors
  const int64_t t = 12;
  for (int k = -5; k <= 5; k++) {
    for (int64_t j = 0; j < 120; j++) {
      REQUIRE(s.frames(t, (k + 5) * 120 + j) == f.frames(t + k, j));
    }
  }
  // left edge replicates frame 0
  for (int k = -5; k <= -1; k++) {
    for (int64_t j = 0; j < 120; j++) {
      REQUIRE(s.frames(0, (k + 5) * 120 + j) == f.frames(0, j));
    }
  }
}

TEST_CASE("splice of a single frame repeats it eleven times") {
  FrontendConfig cfg;
  FeatureMatrix f;
  f.stage = FeatureStage::kNormalized;
  f.frames = Tensor(1, 120);
  for (int64_t j = 0; j < 120; j++) f.frames(0, j) = 0.5 * j;
  FeatureMatrix s = splice(f, cfg);
  CHECK(s.frames.rows() == 1);
  for (int k = 0; k < 11; k++) {
    for (int64_t j = 0; j < 120; j++) {
      REQUIRE(s.frames(0, k * 120 + j) == f.frames(0, j));
    }
  }
}

TEST_CASE("full pipeline produces the 40 -> 120 -> 120 -> 1320 chain") {
  FrontendConfig cfg;
  Waveform wav = noise_wave(0.8, 11);
  FeatureMatrix raw = logmel(wav, cfg);
  CHECK(raw.frames.cols() == 40);
  FeatureMatrix d = add_deltas(raw, cfg);
  CHECK(d.frames.cols() == 120);
  FeatureMatrix n = cmvn(d);
  CHECK(n.frames.cols() == 120);
  FeatureMatrix s = splice(n, cfg);
  CHECK(s.frames.cols() == 1320);
  CHECK(s.frames.rows() == raw.frames.rows());
  // stage tags stop out-of-order application
  CHECK_THROWS_AS(add_deltas(d, cfg), Error);
  CHECK_THROWS_AS(splice(d, cfg), Error);
  CHECK(all_finite(s.frames));
}

TEST_CASE("featurization is deterministic") {
  FrontendConfig cfg;
  Waveform wav = noise_wave(0.6, 13);
  FeatureMatrix a = featurize(wav, cfg);
  FeatureMatrix b = featurize(wav, cfg);
  REQUIRE(a.frames.data() == b.frames.data());
}

TEST_CASE("downsampling halves the rate and keeps tones intact") {
  Waveform wav16 = tone(400.0, 1.0, 16000);
  Waveform wav8 = downsample_to_8k(wav16);
  CHECK(wav8.sample_rate == 8000);
  CHECK(wav8.samples.size() == wav16.samples.size() / 2);
  // a 400 Hz tone survives the low-pass: compare RMS before/after
  double rms_in = 0.0, rms_out = 0.0;
  for (auto s : wav16.samples) rms_in += static_cast<double>(s) * s;
  for (auto s : wav8.samples) rms_out += static_cast<double>(s) * s;
  rms_in = std::sqrt(rms_in / static_cast<double>(wav16.samples.size()));
  rms_out = std::sqrt(rms_out / static_cast<double>(wav8.samples.size()));
  CHECK(rms_out == doctest::Approx(rms_in).epsilon(0.05));
  // near-Nyquist content is strongly attenuated instead
  Waveform hi16 = tone(7600.0, 1.0, 16000);
  Waveform hi8 = downsample_to_8k(hi16);
  double hi_rms = 0.0;
  for (auto s : hi8.samples) hi_rms += static_cast<double>(s) * s;
  hi_rms = std::sqrt(hi_rms / static_cast<double>(hi8.samples.size()));
  CHECK(hi_rms < 0.05 * rms_in);
}

TEST_CASE("wav files round-trip") {
  test::TempDir dir("wav");
  Waveform wav = noise_wave(0.3, 17);
  const std::string path = dir.file("t.wav");
  write_wav(wav, path);
  Waveform back = read_wav(path);
  CHECK(back.sample_rate == wav.sample_rate);
  REQUIRE(back.samples == wav.samples);
}

TEST_CASE("feature archive round-trip is bit-exact") {
  test::TempDir dir("arch");
  Rng rng(19);
  FeatureArchive archive;
  archive.stage = FeatureStage::kSpliced;
  archive.dim = 24;
  archive.config_digest = 0xdeadbeef;
  for (int u = 0; u < 5; u++) {
    ArchiveUtterance utt;
    utt.id = "utt_" + std::to_string(u);
    utt.frames = test::random_tensor(3 + u, 24, rng);
    archive.utterances.push_back(std::move(utt));
  }
  const std::string p1 = dir.file("a.udaf");
  const std::string p2 = dir.file("b.udaf");
  write_archive(archive, p1);
  FeatureArchive back = read_archive(p1);
  write_archive(back, p2);
  CHECK(test::read_file_bytes(p1) == test::read_file_bytes(p2));
  CHECK(back.stage == archive.stage);
  CHECK(back.config_digest == archive.config_digest);
  REQUIRE(back.utterances.size() == archive.utterances.size());
  for (size_t u = 0; u < back.utterances.size(); u++) {
    REQUIRE(back.utterances[u].frames.data() ==
            archive.utterances[u].frames.data());
  }
}

TEST_CASE("alignments round-trip and validate against archives") {
  test::TempDir dir("ali");
  AlignmentMap ali;
  ali["utt_0"] = {0, 1, 2, 2, 1};
  ali["utt_1"] = {3, 3, 3};
  const std::string path = dir.file("t.ali");
  write_alignments(ali, path);
  AlignmentMap back = read_alignments(path);
  REQUIRE(back == ali);

  FeatureArchive archive;
  archive.stage = FeatureStage::kSynthetic;
  archive.dim = 4;
  ArchiveUtterance u0;
  u0.id = "utt_0";
  u0.frames = Tensor(5, 4);
  archive.utterances.push_back(u0);
  ArchiveUtterance u1;
  u1.id = "utt_1";
  u1.frames = Tensor(3, 4);
  archive.utterances.push_back(u1);
  CHECK_NOTHROW(validate_alignments(archive, ali, 8));

  SUBCASE("length mismatch is rejected with the utterance named") {
    archive.utterances[1].frames = Tensor(4, 4);
    CHECK_THROWS_WITH_AS(validate_alignments(archive, ali, 8),
                         doctest::Contains("utt_1"), IoError);
  }
  SUBCASE("missing utterance is rejected") {
    archive.utterances[1].id = "utt_9";
    CHECK_THROWS_AS(validate_alignments(archive, ali, 8), IoError);
  }
  SUBCASE("out-of-range senone is rejected") {
    CHECK_THROWS_AS(validate_alignments(archive, ali, 3), IoError);
  }
}

TEST_CASE("archive reader rejects garbage") {
  test::TempDir dir("bad");
  const std::string path = dir.file("bad.udaf");
  std::ofstream os(path, std::ios::binary);
  os << "this is not an archive at all";
  os.close();
  CHECK_THROWS_AS(read_archive(path), IoError);
}
