// udac/binio.cc

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

#include "udac/binio.h"

#include <array>

namespace udac {

namespace {

std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; i++) {
    uint32_t c = i;
    for (int k = 0; k < 8; k++) {
      c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
    }
    table[i] = c;
  }
  return table;
}

const std::array<uint32_t, 256> &crc_table() {
  static const std::array<uint32_t, 256> table = make_crc_table();
  return table;
}

}  // namespace

void Crc32::update(const void *data, size_t len) {
  const auto *p = static_cast<const unsigned char *>(data);
  const auto &table = crc_table();
  uint32_t c = state_;
  for (size_t i = 0; i < len; i++) {
    c = table[(c ^ p[i]) & 0xffu] ^ (c >> 8);
  }
  state_ = c;
}

uint32_t crc32_of(const void *data, size_t len) {
  Crc32 crc;
  crc.update(data, len);
  return crc.value();
}

uint32_t crc32_of(const std::string &s) { return crc32_of(s.data(), s.size()); }

void BinWriter::write_bytes(const void *data, size_t len) {
  os_.write(static_cast<const char *>(data), static_cast<std::streamsize>(len));
  if (!os_) throw IoError("write failed");
  crc_.update(data, len);
}

void BinWriter::write_crc_trailer() {
  const uint32_t v = crc_.value();
  os_.write(reinterpret_cast<const char *>(&v), sizeof v);
  if (!os_) throw IoError("write failed");
}

void BinReader::read_bytes(void *data, size_t len) {
  is_.read(static_cast<char *>(data), static_cast<std::streamsize>(len));
  if (static_cast<size_t>(is_.gcount()) != len) {
    fail("truncated (wanted " + std::to_string(len) + " bytes)");
  }
  crc_.update(data, len);
}

uint32_t BinReader::read_u32() {
  uint32_t v;
  read_bytes(&v, sizeof v);
  return v;
}

int64_t BinReader::read_i64() {
  int64_t v;
  read_bytes(&v, sizeof v);
  return v;
}

double BinReader::read_f64() {
  double v;
  read_bytes(&v, sizeof v);
  return v;
}

void BinReader::read_f64v(std::vector<double> *v, size_t count) {
  v->resize(count);
  read_bytes(v->data(), count * sizeof(double));
}

std::string BinReader::read_string(size_t max_len) {
  const uint32_t len = read_u32();
  if (len > max_len) {
    fail("string length " + std::to_string(len) + " exceeds limit");
  }
  std::string s(len, '\0');
  if (len > 0) read_bytes(s.data(), len);
  return s;
}

void BinReader::check_crc_trailer() {
  const uint32_t expected = crc_.value();
  uint32_t stored;
  is_.read(reinterpret_cast<char *>(&stored), sizeof stored);
  if (static_cast<size_t>(is_.gcount()) != sizeof stored) {
    fail("truncated CRC trailer");
  }
  if (stored != expected) {
    fail("CRC mismatch: stored " + std::to_string(stored) + ", computed " +
         std::to_string(expected));
  }
}

void BinReader::fail(const std::string &why) const {
  throw IoError(source_ + ": " + why);
}

}  // namespace udac
