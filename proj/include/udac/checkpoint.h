// udac/checkpoint.h

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

#ifndef UDAC_CHECKPOINT_H_
#define UDAC_CHECKPOINT_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "udac/arch.h"

namespace udac {

// Checkpoint container, magic "UDAC":
//   magic, u32 version, ArchConfig, stacks in variant order
//   (per layer: kind tag, dims, parameters as LE f64, batch-norm running
//   stats), u32 CRC-32 trailer over everything before it.
// Round-trips are bit-exact.

inline constexpr char kCheckpointMagic[4] = {'U', 'D', 'A', 'C'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelBundle &model, const std::string &path);
void save_checkpoint(const ModelBundle &model, std::ostream &os);

ModelBundle load_checkpoint(const std::string &path);
ModelBundle load_checkpoint(std::istream &is, const std::string &source);

// Structural summary without materializing parameters: per stack, the
// (input_dim, output_dim) of each layer in order.
struct StackShape {
  std::string name;
  std::vector<LayerKind> kinds;
  std::vector<int64_t> in_dims;
  std::vector<int64_t> out_dims;
};

struct CheckpointMeta {
  ArchConfig config;
  std::vector<StackShape> stacks;
};

CheckpointMeta read_checkpoint_meta(const std::string &path);

}  // namespace udac

#endif  // UDAC_CHECKPOINT_H_
