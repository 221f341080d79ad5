// udac/config.h

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

#ifndef UDAC_CONFIG_H_
#define UDAC_CONFIG_H_

#include <string>

#include "udac/arch.h"
#include "udac/corpus.h"
#include "udac/frontend.h"
#include "udac/trainer.h"

namespace udac {

// JSON config file with optional sections "arch", "train", "synth",
// "frontend".  Absent sections and fields keep their defaults; unknown
// keys are rejected.
struct ToolConfig {
  ArchConfig arch;
  TrainConfig train;
  SynthSpec synth;
  FrontendConfig frontend;
  uint64_t seed = 0;
  bool has_seed = false;
};

ToolConfig load_config(const std::string &path);
ToolConfig parse_config(const std::string &json_text, const std::string &source);

// Fully-resolved config as JSON (manifest payload).
std::string config_to_json(const ToolConfig &cfg);

// Writes <out_dir>/manifest.json recording the tool version, subcommand,
// seed and the resolved config.
void write_manifest(const std::string &out_dir, const std::string &command,
                    const ToolConfig &cfg, uint64_t seed);

inline constexpr const char *kToolVersion = "udac 1.0.0";

}  // namespace udac

#endif  // UDAC_CONFIG_H_
