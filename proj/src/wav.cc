// udac/wav.cc

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

#include <cstring>
#include <fstream>

#include "udac/error.h"
#include "udac/frontend.h"

namespace udac {

namespace {

uint32_t rd_u32(std::ifstream &is, const std::string &path) {
  uint32_t v;
  is.read(reinterpret_cast<char *>(&v), 4);
  if (is.gcount() != 4) throw IoError(path + ": truncated WAV");
  return v;
}

uint16_t rd_u16(std::ifstream &is, const std::string &path) {
  uint16_t v;
  is.read(reinterpret_cast<char *>(&v), 2);
  if (is.gcount() != 2) throw IoError(path + ": truncated WAV");
  return v;
}

}  // namespace

Waveform read_wav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char tag[4];
  is.read(tag, 4);
  if (is.gcount() != 4 || std::memcmp(tag, "RIFF", 4) != 0) {
    throw IoError(path + ": not a RIFF file");
  }
  rd_u32(is, path);  // riff size
  is.read(tag, 4);
  if (is.gcount() != 4 || std::memcmp(tag, "WAVE", 4) != 0) {
    throw IoError(path + ": not a WAVE file");
  }

  Waveform wav;
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0;
  while (is.read(tag, 4)) {
    const uint32_t chunk_size = rd_u32(is, path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const uint16_t format = rd_u16(is, path);
      channels = rd_u16(is, path);
      wav.sample_rate = static_cast<int>(rd_u32(is, path));
      rd_u32(is, path);  // byte rate
      rd_u16(is, path);  // block align
      bits = rd_u16(is, path);
      if (chunk_size > 16) is.seekg(chunk_size - 16, std::ios::cur);
      if (format != 1) throw IoError(path + ": only PCM WAV is supported");
      if (channels != 1) {
        throw IoError(path + ": expected mono audio, got " +
                      std::to_string(channels) + " channels");
      }
      if (bits != 16) {
        throw IoError(path + ": expected 16-bit samples, got " +
                      std::to_string(bits));
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt");
      const size_t count = chunk_size / 2;
      wav.samples.resize(count);
      is.read(reinterpret_cast<char *>(wav.samples.data()), chunk_size);
      if (static_cast<uint32_t>(is.gcount()) != chunk_size) {
        throw IoError(path + ": truncated data chunk");
      }
      if (wav.samples.empty()) throw IoError(path + ": empty audio");
      if (wav.sample_rate != 8000 && wav.sample_rate != 16000) {
        throw IoError(path + ": sample rate " +
                      std::to_string(wav.sample_rate) +
                      " not in {8000, 16000}");
      }
      return wav;
    } else {
      // skip unknown chunk (padded to even size)
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw IoError(path + ": no data chunk found");
}

void write_wav(const Waveform &wav, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const uint32_t data_size = static_cast<uint32_t>(wav.samples.size() * 2);
  const uint32_t riff_size = 36 + data_size;
  auto wr_u32 = [&os](uint32_t v) { os.write(reinterpret_cast<char *>(&v), 4); };
  auto wr_u16 = [&os](uint16_t v) { os.write(reinterpret_cast<char *>(&v), 2); };
  os.write("RIFF", 4);
  wr_u32(riff_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(16);
  wr_u16(1);  // PCM
  wr_u16(1);  // mono
  wr_u32(static_cast<uint32_t>(wav.sample_rate));
  wr_u32(static_cast<uint32_t>(wav.sample_rate * 2));
  wr_u16(2);
  wr_u16(16);
  os.write("data", 4);
  wr_u32(data_size);
  os.write(reinterpret_cast<const char *>(wav.samples.data()), data_size);
  if (!os) throw IoError("write to " + path + " failed");
}

}  // namespace udac
