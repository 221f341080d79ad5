// udac/frontend.cc

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

#include "udac/frontend.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "udac/error.h"

namespace udac {

namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 complex FFT, in place.  n must be a power of two.
void fft(std::vector<std::complex<double>> &a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; i++) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; k++) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Triangular mel filters over FFT bins; rows are filters.
std::vector<std::vector<double>> mel_filterbank(const FrontendConfig &cfg,
                                                int sample_rate, int nfft) {
  const double nyquist = sample_rate / 2.0;
  const double high = cfg.high_freq_hz > 0.0 ? cfg.high_freq_hz : nyquist;
  if (cfg.low_freq_hz < 0.0 || high <= cfg.low_freq_hz || high > nyquist) {
    throw ConfigError("mel filterbank: bad band [" +
                      std::to_string(cfg.low_freq_hz) + ", " +
                      std::to_string(high) + "] at rate " +
                      std::to_string(sample_rate));
  }
  const int bins = cfg.mel_bins;
  const double mel_lo = hz_to_mel(cfg.low_freq_hz);
  const double mel_hi = hz_to_mel(high);
  std::vector<double> edges(bins + 2);
  for (int i = 0; i < bins + 2; i++) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (bins + 1));
  }
  const int half = nfft / 2;
  std::vector<std::vector<double>> filters(bins,
                                           std::vector<double>(half + 1, 0.0));
  for (int b = 0; b < bins; b++) {
    const double left = edges[b], center = edges[b + 1], right = edges[b + 2];
    for (int k = 0; k <= half; k++) {
      const double f = static_cast<double>(k) * sample_rate / nfft;
      if (f <= left || f >= right) continue;
      filters[b][k] = f <= center ? (f - left) / (center - left)
                                  : (right - f) / (right - center);
    }
  }
  return filters;
}

}  // namespace

std::string FrontendConfig::canonical_string() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "frame_ms=%g hop_ms=%g mel_bins=%d preemph=%g low=%g high=%g "
                "floor=%g delta_w=%d splice=%d window=hamming",
                frame_ms, hop_ms, mel_bins, preemphasis, low_freq_hz,
                high_freq_hz, log_floor, delta_window, splice_context);
  return buf;
}

std::string feature_stage_name(FeatureStage stage) {
  switch (stage) {
    case FeatureStage::kRaw: return "raw";
    case FeatureStage::kDeltas: return "deltas";
    case FeatureStage::kNormalized: return "normalized";
    case FeatureStage::kSpliced: return "spliced";
    case FeatureStage::kLogLik: return "loglik";
    case FeatureStage::kSynthetic: return "synthetic";
  }
  return "?";
}

std::vector<double> mel_center_frequencies(const FrontendConfig &cfg,
                                           int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  const double high = cfg.high_freq_hz > 0.0 ? cfg.high_freq_hz : nyquist;
  const double mel_lo = hz_to_mel(cfg.low_freq_hz);
  const double mel_hi = hz_to_mel(high);
  std::vector<double> centers(cfg.mel_bins);
  for (int b = 0; b < cfg.mel_bins; b++) {
    centers[b] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * (b + 1) / (cfg.mel_bins + 1));
  }
  return centers;
}

FeatureMatrix logmel(const Waveform &wav, const FrontendConfig &cfg) {
  if (wav.sample_rate != 8000) {
    throw ConfigError("logmel expects 8 kHz input, got " +
                      std::to_string(wav.sample_rate) +
                      " Hz (downsample first)");
  }
  const int frame_len = cfg.frame_samples(wav.sample_rate);
  const int hop = cfg.hop_samples(wav.sample_rate);
  const int64_t n = static_cast<int64_t>(wav.samples.size());
  if (n < frame_len) {
    throw Error("logmel: waveform of " + std::to_string(n) +
                " samples is shorter than one " + std::to_string(frame_len) +
                "-sample frame");
  }
  const int64_t t_count = 1 + (n - frame_len) / hop;
  const int nfft = next_pow2(frame_len);
  const auto filters = mel_filterbank(cfg, wav.sample_rate, nfft);

  std::vector<double> window(frame_len);
  for (int i = 0; i < frame_len; i++) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (frame_len - 1));
  }

  FeatureMatrix out;
  out.stage = FeatureStage::kRaw;
  out.frames = Tensor(t_count, cfg.mel_bins);
  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> frame(frame_len);
  for (int64_t t = 0; t < t_count; t++) {
    const int64_t start = t * hop;
    for (int i = 0; i < frame_len; i++) {
      frame[i] = static_cast<double>(wav.samples[start + i]);
    }
    // Per-frame pre-emphasis; the first sample is scaled against itself.
    for (int i = frame_len - 1; i > 0; i--) {
      frame[i] -= cfg.preemphasis * frame[i - 1];
    }
    frame[0] -= cfg.preemphasis * frame[0];
    for (int i = 0; i < frame_len; i++) {
      buf[i] = std::complex<double>(frame[i] * window[i], 0.0);
    }
    std::fill(buf.begin() + frame_len, buf.end(), std::complex<double>(0.0));
    fft(buf);
    const int half = nfft / 2;
    std::vector<double> power(half + 1);
    for (int k = 0; k <= half; k++) power[k] = std::norm(buf[k]);
    double *row = out.frames.row(t);
    for (int b = 0; b < cfg.mel_bins; b++) {
      double acc = 0.0;
      const auto &filt = filters[b];
      for (int k = 0; k <= half; k++) acc += filt[k] * power[k];
      row[b] = std::log(acc + cfg.log_floor);
    }
  }
  return out;
}

FeatureMatrix add_deltas(const FeatureMatrix &f, const FrontendConfig &cfg) {
  if (f.stage != FeatureStage::kRaw) {
    throw Error("add_deltas: expected stage raw, got " +
                feature_stage_name(f.stage));
  }
  const int64_t t_count = f.frames.rows(), d = f.frames.cols();
  const int w = cfg.delta_window;
  double denom = 0.0;
  for (int i = 1; i <= w; i++) denom += 2.0 * i * i;

  auto clamp = [t_count](int64_t t) {
    return std::min(std::max(t, int64_t{0}), t_count - 1);
  };
  auto regress = [&](const Tensor &src, Tensor &dst) {
    for (int64_t t = 0; t < t_count; t++) {
      double *drow = dst.row(t);
      for (int i = 1; i <= w; i++) {
        const double *ahead = src.row(clamp(t + i));
        const double *behind = src.row(clamp(t - i));
        for (int64_t j = 0; j < d; j++) {
          drow[j] += i * (ahead[j] - behind[j]);
        }
      }
      for (int64_t j = 0; j < d; j++) drow[j] /= denom;
    }
  };

  Tensor delta(t_count, d), accel(t_count, d);
  regress(f.frames, delta);
  regress(delta, accel);

  FeatureMatrix out;
  out.stage = FeatureStage::kDeltas;
  out.frames = Tensor(t_count, 3 * d);
  for (int64_t t = 0; t < t_count; t++) {
    double *row = out.frames.row(t);
    std::copy(f.frames.row(t), f.frames.row(t) + d, row);
    std::copy(delta.row(t), delta.row(t) + d, row + d);
    std::copy(accel.row(t), accel.row(t) + d, row + 2 * d);
  }
  return out;
}

FeatureMatrix cmvn(const FeatureMatrix &f) {
  if (f.stage != FeatureStage::kDeltas && f.stage != FeatureStage::kNormalized) {
    throw Error("cmvn: expected stage deltas (or normalized), got " +
                feature_stage_name(f.stage));
  }
  const int64_t t_count = f.frames.rows(), d = f.frames.cols();
  if (t_count < 1) throw Error("cmvn: empty utterance");
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (int64_t t = 0; t < t_count; t++) {
    const double *row = f.frames.row(t);
    for (int64_t j = 0; j < d; j++) mean[j] += row[j];
  }
  for (int64_t j = 0; j < d; j++) mean[j] /= static_cast<double>(t_count);
  for (int64_t t = 0; t < t_count; t++) {
    const double *row = f.frames.row(t);
    for (int64_t j = 0; j < d; j++) {
      const double c = row[j] - mean[j];
      var[j] += c * c;
    }
  }
  for (int64_t j = 0; j < d; j++) var[j] /= static_cast<double>(t_count);

  FeatureMatrix out;
  out.stage = FeatureStage::kNormalized;
  out.frames = Tensor(t_count, d);
  for (int64_t j = 0; j < d; j++) {
    if (var[j] < 1e-20) {
      // zero-variance dim: all zeros
      for (int64_t t = 0; t < t_count; t++) out.frames(t, j) = 0.0;
    } else {
      const double inv = 1.0 / std::sqrt(var[j]);
      for (int64_t t = 0; t < t_count; t++) {
        out.frames(t, j) = (f.frames(t, j) - mean[j]) * inv;
      }
    }
  }
  return out;
}

FeatureMatrix splice(const FeatureMatrix &f, const FrontendConfig &cfg) {
  if (f.stage != FeatureStage::kNormalized) {
    throw Error("splice: expected stage normalized, got " +
                feature_stage_name(f.stage));
  }
  const int64_t t_count = f.frames.rows(), d = f.frames.cols();
  const int c = cfg.splice_context;
  FeatureMatrix out;
  out.stage = FeatureStage::kSpliced;
  out.frames = Tensor(t_count, d * (2 * c + 1));
  for (int64_t t = 0; t < t_count; t++) {
    double *row = out.frames.row(t);
    for (int k = -c; k <= c; k++) {
      const int64_t src = std::min(std::max(t + k, int64_t{0}), t_count - 1);
      std::copy(f.frames.row(src), f.frames.row(src) + d, row + (k + c) * d);
    }
  }
  return out;
}

FeatureMatrix featurize(const Waveform &wav, const FrontendConfig &cfg) {
  return splice(cmvn(add_deltas(logmel(wav, cfg), cfg)), cfg);
}

Waveform downsample_to_8k(const Waveform &wav) {
  if (wav.sample_rate == 8000) return wav;
  if (wav.sample_rate != 16000) {
    throw ConfigError("downsample_to_8k: unsupported rate " +
                      std::to_string(wav.sample_rate));
  }
  // 63-tap Hamming-windowed sinc, cutoff 3.6 kHz.
  const int taps = 63;
  const int half = taps / 2;
  const double cutoff = 3600.0 / 16000.0;  // normalized to input rate
  std::vector<double> h(taps);
  double gain = 0.0;
  for (int i = 0; i < taps; i++) {
    const int m = i - half;
    const double s = m == 0 ? 2.0 * cutoff
                            : std::sin(2.0 * kPi * cutoff * m) / (kPi * m);
    const double win = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (taps - 1));
    h[i] = s * win;
    gain += h[i];
  }
  for (double &v : h) v /= gain;

  Waveform out;
  out.sample_rate = 8000;
  const int64_t n = static_cast<int64_t>(wav.samples.size());
  out.samples.reserve(static_cast<size_t>(n / 2));
  for (int64_t i = 0; i < n; i += 2) {
    double acc = 0.0;
    for (int k = 0; k < taps; k++) {
      const int64_t idx = i + k - half;
      if (idx < 0 || idx >= n) continue;
      acc += h[k] * wav.samples[idx];
    }
    const double clamped = std::min(32767.0, std::max(-32768.0, acc));
    out.samples.push_back(static_cast<int16_t>(std::lrint(clamped)));
  }
  if (out.samples.empty()) throw Error("downsample_to_8k: empty waveform");
  return out;
}

}  // namespace udac
