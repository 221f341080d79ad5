// udac/config.cc

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

#include "udac/config.h"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "udac/error.h"

namespace udac {

namespace {

using nlohmann::json;

void reject_unknown(const json &j, const std::set<std::string> &known,
                    const std::string &where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (known.count(it.key()) == 0) {
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

template <typename T>
void get_if(const json &j, const char *key, T *out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

void get_widths(const json &j, const char *key, std::vector<int64_t> *out) {
  if (j.contains(key)) *out = j.at(key).get<std::vector<int64_t>>();
}

void parse_arch(const json &j, ArchConfig *cfg) {
  reject_unknown(j,
                 {"variant", "input_dim", "senone_count", "domain_count",
                  "feat_hidden", "senone_head_hidden", "domain_head_hidden",
                  "private_hidden", "decoder_hidden", "bn_eps", "bn_momentum"},
                 "arch");
  if (j.contains("variant")) {
    cfg->variant = variant_from_name(j.at("variant").get<std::string>());
  }
  get_if(j, "input_dim", &cfg->input_dim);
  get_if(j, "senone_count", &cfg->senone_count);
  get_if(j, "domain_count", &cfg->domain_count);
  get_widths(j, "feat_hidden", &cfg->feat_hidden);
  get_widths(j, "senone_head_hidden", &cfg->senone_head_hidden);
  get_widths(j, "domain_head_hidden", &cfg->domain_head_hidden);
  get_widths(j, "private_hidden", &cfg->private_hidden);
  get_widths(j, "decoder_hidden", &cfg->decoder_hidden);
  get_if(j, "bn_eps", &cfg->bn_eps);
  get_if(j, "bn_momentum", &cfg->bn_momentum);
}

void parse_train(const json &j, TrainConfig *cfg) {
  reject_unknown(j,
                 {"batch", "lr0", "lr_decay", "lr_decay_steps", "epochs",
                  "momentum", "grl_gamma_ramp", "sim_activation_step", "beta",
                  "gamma", "delta", "recon_kind", "raw_loss_sums",
                  "domain_loss_weight", "grad_clip_norm", "seed"},
                 "train");
  get_if(j, "batch", &cfg->batch);
  get_if(j, "lr0", &cfg->lr0);
  get_if(j, "lr_decay", &cfg->lr_decay);
  get_if(j, "lr_decay_steps", &cfg->lr_decay_steps);
  get_if(j, "epochs", &cfg->epochs);
  get_if(j, "momentum", &cfg->momentum);
  get_if(j, "grl_gamma_ramp", &cfg->grl_gamma_ramp);
  get_if(j, "sim_activation_step", &cfg->sim_activation_step);
  get_if(j, "beta", &cfg->weights.beta);
  get_if(j, "gamma", &cfg->weights.gamma);
  get_if(j, "delta", &cfg->weights.delta);
  if (j.contains("recon_kind")) {
    const std::string kind = j.at("recon_kind").get<std::string>();
    if (kind == "mse" || kind == "MSE") {
      cfg->weights.recon_kind = ReconKind::kMse;
    } else if (kind == "simse" || kind == "SIMSE") {
      cfg->weights.recon_kind = ReconKind::kSimse;
    } else {
      throw ConfigError("train.recon_kind: expected mse or simse, got '" +
                        kind + "'");
    }
  }
  get_if(j, "raw_loss_sums", &cfg->weights.raw_sums);
  get_if(j, "domain_loss_weight", &cfg->domain_loss_weight);
  get_if(j, "grad_clip_norm", &cfg->grad_clip_norm);
  get_if(j, "seed", &cfg->seed);
}

void parse_synth(const json &j, SynthSpec *spec) {
  reject_unknown(j,
                 {"senone_count", "feature_dim", "source_frames",
                  "target_frames", "eval_frames", "class_mean_scale",
                  "class_sigma", "rotation_angle", "shift_offset",
                  "class_drift", "priors", "min_utt_frames", "max_utt_frames",
                  "senone_run_mean", "seed"},
                 "synth");
  get_if(j, "senone_count", &spec->senone_count);
  get_if(j, "feature_dim", &spec->feature_dim);
  get_if(j, "source_frames", &spec->source_frames);
  get_if(j, "target_frames", &spec->target_frames);
  get_if(j, "eval_frames", &spec->eval_frames);
  get_if(j, "class_mean_scale", &spec->class_mean_scale);
  get_if(j, "class_sigma", &spec->class_sigma);
  get_if(j, "rotation_angle", &spec->rotation_angle);
  get_if(j, "shift_offset", &spec->shift_offset);
  get_if(j, "class_drift", &spec->class_drift);
  if (j.contains("priors")) {
    spec->priors = j.at("priors").get<std::vector<double>>();
  }
  get_if(j, "min_utt_frames", &spec->min_utt_frames);
  get_if(j, "max_utt_frames", &spec->max_utt_frames);
  get_if(j, "senone_run_mean", &spec->senone_run_mean);
  get_if(j, "seed", &spec->seed);
}

void parse_frontend(const json &j, FrontendConfig *cfg) {
  reject_unknown(j,
                 {"frame_ms", "hop_ms", "mel_bins", "preemphasis",
                  "low_freq_hz", "high_freq_hz", "log_floor", "delta_window",
                  "splice_context"},
                 "frontend");
  get_if(j, "frame_ms", &cfg->frame_ms);
  get_if(j, "hop_ms", &cfg->hop_ms);
  get_if(j, "mel_bins", &cfg->mel_bins);
  get_if(j, "preemphasis", &cfg->preemphasis);
  get_if(j, "low_freq_hz", &cfg->low_freq_hz);
  get_if(j, "high_freq_hz", &cfg->high_freq_hz);
  get_if(j, "log_floor", &cfg->log_floor);
  get_if(j, "delta_window", &cfg->delta_window);
  get_if(j, "splice_context", &cfg->splice_context);
}

json arch_to_json(const ArchConfig &cfg) {
  return json{{"variant", variant_name(cfg.variant)},
              {"input_dim", cfg.input_dim},
              {"senone_count", cfg.senone_count},
              {"domain_count", cfg.domain_count},
              {"feat_hidden", cfg.feat_hidden},
              {"senone_head_hidden", cfg.senone_head_hidden},
              {"domain_head_hidden", cfg.domain_head_hidden},
              {"private_hidden", cfg.private_hidden},
              {"decoder_hidden", cfg.decoder_hidden},
              {"bn_eps", cfg.bn_eps},
              {"bn_momentum", cfg.bn_momentum}};
}

json train_to_json(const TrainConfig &cfg) {
  return json{
      {"batch", cfg.batch},
      {"lr0", cfg.lr0},
      {"lr_decay", cfg.lr_decay},
      {"lr_decay_steps", cfg.lr_decay_steps},
      {"epochs", cfg.epochs},
      {"momentum", cfg.momentum},
      {"grl_gamma_ramp", cfg.grl_gamma_ramp},
      {"sim_activation_step", cfg.sim_activation_step},
      {"beta", cfg.weights.beta},
      {"gamma", cfg.weights.gamma},
      {"delta", cfg.weights.delta},
      {"recon_kind", cfg.weights.recon_kind == ReconKind::kMse ? "mse" : "simse"},
      {"raw_loss_sums", cfg.weights.raw_sums},
      {"domain_loss_weight", cfg.domain_loss_weight},
      {"grad_clip_norm", cfg.grad_clip_norm},
      {"seed", cfg.seed}};
}

json synth_to_json(const SynthSpec &spec) {
  json j{{"senone_count", spec.senone_count},
         {"feature_dim", spec.feature_dim},
         {"source_frames", spec.source_frames},
         {"target_frames", spec.target_frames},
         {"eval_frames", spec.eval_frames},
         {"class_mean_scale", spec.class_mean_scale},
         {"class_sigma", spec.class_sigma},
         {"rotation_angle", spec.rotation_angle},
         {"shift_offset", spec.shift_offset},
         {"class_drift", spec.class_drift},
         {"min_utt_frames", spec.min_utt_frames},
         {"max_utt_frames", spec.max_utt_frames},
         {"senone_run_mean", spec.senone_run_mean},
         {"seed", spec.seed}};
  if (!spec.priors.empty()) j["priors"] = spec.priors;
  return j;
}

json frontend_to_json(const FrontendConfig &cfg) {
  return json{{"frame_ms", cfg.frame_ms},
              {"hop_ms", cfg.hop_ms},
              {"mel_bins", cfg.mel_bins},
              {"preemphasis", cfg.preemphasis},
              {"low_freq_hz", cfg.low_freq_hz},
              {"high_freq_hz", cfg.high_freq_hz},
              {"log_floor", cfg.log_floor},
              {"delta_window", cfg.delta_window},
              {"splice_context", cfg.splice_context}};
}

}  // namespace

ToolConfig parse_config(const std::string &json_text,
                        const std::string &source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": expected a JSON object");
  reject_unknown(j, {"arch", "train", "synth", "frontend", "seed"}, source);
  ToolConfig cfg;
  try {
    if (j.contains("arch")) parse_arch(j.at("arch"), &cfg.arch);
    if (j.contains("train")) parse_train(j.at("train"), &cfg.train);
    if (j.contains("synth")) parse_synth(j.at("synth"), &cfg.synth);
    if (j.contains("frontend")) parse_frontend(j.at("frontend"), &cfg.frontend);
    if (j.contains("seed")) {
      cfg.seed = j.at("seed").get<uint64_t>();
      cfg.has_seed = true;
    }
  } catch (const json::exception &e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ToolConfig load_config(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return parse_config(text, path);
}

std::string config_to_json(const ToolConfig &cfg) {
  json j{{"arch", arch_to_json(cfg.arch)},
         {"train", train_to_json(cfg.train)},
         {"synth", synth_to_json(cfg.synth)},
         {"frontend", frontend_to_json(cfg.frontend)},
         {"seed", cfg.seed}};
  return j.dump(2);
}

void write_manifest(const std::string &out_dir, const std::string &command,
                    const ToolConfig &cfg, uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  json j{{"tool", kToolVersion},
         {"command", command},
         {"seed", seed},
         {"config", json::parse(config_to_json(cfg))}};
  const std::string path = (fs::path(out_dir) / "manifest.json").string();
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

}  // namespace udac
