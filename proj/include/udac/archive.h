// udac/archive.h

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

#ifndef UDAC_ARCHIVE_H_
#define UDAC_ARCHIVE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "udac/frontend.h"
#include "udac/tensor.h"

namespace udac {

// Feature archive, magic "UDAF":
//   magic, u32 version, u32 stage, u32 dim, u32 config digest,
//   u32 utterance count, then per utterance: id (u32 length + bytes),
//   u32 T, T*dim row-major LE f64.
// Write -> read -> write is bit-exact.

inline constexpr char kArchiveMagic[4] = {'U', 'D', 'A', 'F'};
inline constexpr uint32_t kArchiveVersion = 1;

struct ArchiveUtterance {
  std::string id;
  Tensor frames;  // T x dim
};

struct FeatureArchive {
  FeatureStage stage = FeatureStage::kRaw;
  int64_t dim = 0;
  uint32_t config_digest = 0;  // CRC-32 of the producing config's canonical string
  std::vector<ArchiveUtterance> utterances;

  int64_t total_frames() const;
};

void write_archive(const FeatureArchive &archive, const std::string &path);
FeatureArchive read_archive(const std::string &path);

// Alignments: text, one line per utterance, `<utt-id> <senone-id> ...`.
using AlignmentMap = std::map<std::string, std::vector<int32_t>>;

void write_alignments(const AlignmentMap &ali, const std::string &path);
AlignmentMap read_alignments(const std::string &path);

// Pairs an archive with alignments; every archive utterance must have an
// alignment whose length equals its frame count, senone ids within
// [0, senone_count).  Throws IoError naming the offending utterance.
void validate_alignments(const FeatureArchive &archive, const AlignmentMap &ali,
                         int64_t senone_count);

}  // namespace udac

#endif  // UDAC_ARCHIVE_H_
