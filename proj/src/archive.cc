// udac/archive.cc

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

#include "udac/archive.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "udac/binio.h"
#include "udac/error.h"

namespace udac {

int64_t FeatureArchive::total_frames() const {
  int64_t total = 0;
  for (const auto &utt : utterances) total += utt.frames.rows();
  return total;
}

void write_archive(const FeatureArchive &archive, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  BinWriter w(os);
  w.write_bytes(kArchiveMagic, sizeof kArchiveMagic);
  w.write_u32(kArchiveVersion);
  w.write_u32(static_cast<uint32_t>(archive.stage));
  w.write_u32(static_cast<uint32_t>(archive.dim));
  w.write_u32(archive.config_digest);
  w.write_u32(static_cast<uint32_t>(archive.utterances.size()));
  for (const auto &utt : archive.utterances) {
    if (utt.frames.cols() != archive.dim) {
      throw ShapeError("archive write: utterance '" + utt.id + "' has dim " +
                       std::to_string(utt.frames.cols()) +
                       ", archive header says " + std::to_string(archive.dim));
    }
    w.write_string(utt.id);
    w.write_u32(static_cast<uint32_t>(utt.frames.rows()));
    w.write_f64v(utt.frames.data());
  }
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

FeatureArchive read_archive(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  BinReader r(is, path);
  char magic[4];
  r.read_bytes(magic, sizeof magic);
  if (std::memcmp(magic, kArchiveMagic, sizeof magic) != 0) {
    r.fail("bad magic, not a feature archive");
  }
  const uint32_t version = r.read_u32();
  if (version != kArchiveVersion) {
    r.fail("unsupported archive version " + std::to_string(version));
  }
  FeatureArchive archive;
  const uint32_t stage = r.read_u32();
  if (stage > static_cast<uint32_t>(FeatureStage::kSynthetic)) {
    r.fail("bad stage tag " + std::to_string(stage));
  }
  archive.stage = static_cast<FeatureStage>(stage);
  archive.dim = r.read_u32();
  if (archive.dim < 1) r.fail("bad feature dim");
  archive.config_digest = r.read_u32();
  const uint32_t count = r.read_u32();
  archive.utterances.resize(count);
  for (uint32_t i = 0; i < count; i++) {
    auto &utt = archive.utterances[i];
    utt.id = r.read_string(4096);
    if (utt.id.empty()) r.fail("empty utterance id at record " + std::to_string(i));
    const uint32_t t_count = r.read_u32();
    if (t_count < 1) r.fail("utterance '" + utt.id + "' has no frames");
    utt.frames = Tensor(t_count, archive.dim);
    r.read_bytes(utt.frames.data().data(),
                 utt.frames.data().size() * sizeof(double));
  }
  return archive;
}

void write_alignments(const AlignmentMap &ali, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (const auto &[id, senones] : ali) {
    os << id;
    for (int32_t s : senones) os << ' ' << s;
    os << '\n';
  }
  os.flush();
  if (!os) throw IoError("write to " + path + " failed");
}

AlignmentMap read_alignments(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  AlignmentMap ali;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id;
    ss >> id;
    if (id.empty()) continue;
    if (ali.count(id) > 0) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": duplicate utterance '" + id + "'");
    }
    std::vector<int32_t> senones;
    int64_t s;
    while (ss >> s) senones.push_back(static_cast<int32_t>(s));
    if (!ss.eof()) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": malformed senone id in '" + id + "'");
    }
    if (senones.empty()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": utterance '" +
                    id + "' has no senone labels");
    }
    ali[id] = std::move(senones);
  }
  return ali;
}

void validate_alignments(const FeatureArchive &archive, const AlignmentMap &ali,
                         int64_t senone_count) {
  for (const auto &utt : archive.utterances) {
    auto it = ali.find(utt.id);
    if (it == ali.end()) {
      throw IoError("no alignment for utterance '" + utt.id + "'");
    }
    if (static_cast<int64_t>(it->second.size()) != utt.frames.rows()) {
      throw IoError("alignment length mismatch for '" + utt.id + "': " +
                    std::to_string(it->second.size()) + " labels vs " +
                    std::to_string(utt.frames.rows()) + " frames");
    }
    for (int32_t s : it->second) {
      if (s < 0 || s >= senone_count) {
        throw IoError("senone id " + std::to_string(s) + " in '" + utt.id +
                      "' outside [0, " + std::to_string(senone_count) + ")");
      }
    }
  }
}

}  // namespace udac
