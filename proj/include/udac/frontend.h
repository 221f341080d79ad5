// udac/frontend.h

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

#ifndef UDAC_FRONTEND_H_
#define UDAC_FRONTEND_H_

#include <cstdint>
#include <string>
#include <vector>

#include "udac/tensor.h"

namespace udac {

// 16-bit PCM audio.  Featurization expects 8 kHz; 16 kHz input must be
// downsampled first.
struct Waveform {
  std::vector<int16_t> samples;
  int sample_rate = 8000;
};

// Processing stage of a feature matrix; the dim is implied for the audio
// pipeline stages.  kSynthetic marks archives whose frames bypass the
// audio front-end; kLogLik marks exported pseudo-log-likelihoods.
enum class FeatureStage : uint32_t {
  kRaw = 0,         // 40-dim log-mel
  kDeltas = 1,      // 120-dim static+delta+accel
  kNormalized = 2,  // 120-dim after per-utterance CMVN
  kSpliced = 3,     // 1320-dim with +-5 frame context
  kLogLik = 4,
  kSynthetic = 5,
};

std::string feature_stage_name(FeatureStage stage);

struct FeatureMatrix {
  Tensor frames;  // T x D
  FeatureStage stage = FeatureStage::kRaw;
};

struct FrontendConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int mel_bins = 40;
  double preemphasis = 0.97;
  double low_freq_hz = 20.0;
  double high_freq_hz = 0.0;  // 0 selects Nyquist
  double log_floor = 1e-10;
  int delta_window = 2;
  int splice_context = 5;

  int frame_samples(int sample_rate) const {
    return static_cast<int>(frame_ms * sample_rate / 1000.0 + 0.5);
  }
  int hop_samples(int sample_rate) const {
    return static_cast<int>(hop_ms * sample_rate / 1000.0 + 0.5);
  }
  // Canonical text form, hashed into archive headers.
  std::string canonical_string() const;
};

// 40-dim log-mel filterbank energies: Hamming window, pre-emphasis, HTK
// mel scale, natural log of (mel power + floor).
FeatureMatrix logmel(const Waveform &wav, const FrontendConfig &cfg);

// Appends delta and acceleration via the standard +-w regression filter
// with edge replication; output is [static | delta | accel].
FeatureMatrix add_deltas(const FeatureMatrix &f, const FrontendConfig &cfg);

// Per-utterance mean/variance normalization; zero-variance dims map to 0.
FeatureMatrix cmvn(const FeatureMatrix &f);

// Concatenates +-context frames with edge replication: D -> D*(2c+1).
FeatureMatrix splice(const FeatureMatrix &f, const FrontendConfig &cfg);

// Full chain logmel -> deltas -> cmvn -> splice.
FeatureMatrix featurize(const Waveform &wav, const FrontendConfig &cfg);

// Windowed-sinc low-pass then decimation by 2 (16 kHz -> 8 kHz).
Waveform downsample_to_8k(const Waveform &wav);

// Mel triangle center frequencies in Hz (geometry hook for verification).
std::vector<double> mel_center_frequencies(const FrontendConfig &cfg,
                                           int sample_rate);

// Minimal RIFF/WAVE PCM16 mono reader/writer.
Waveform read_wav(const std::string &path);
void write_wav(const Waveform &wav, const std::string &path);

}  // namespace udac

#endif  // UDAC_FRONTEND_H_
