// udac/binio.h

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

#ifndef UDAC_BINIO_H_
#define UDAC_BINIO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "udac/error.h"

namespace udac {

// All on-disk formats are little-endian; this toolkit targets LE hosts.
static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

// Streaming CRC-32 (IEEE reflected polynomial 0xEDB88320).
class Crc32 {
 public:
  void update(const void *data, size_t len);
  uint32_t value() const { return state_ ^ 0xffffffffu; }

 private:
  uint32_t state_ = 0xffffffffu;
};

uint32_t crc32_of(const void *data, size_t len);
uint32_t crc32_of(const std::string &s);

// Writer that mirrors every byte into a running CRC.
class BinWriter {
 public:
  explicit BinWriter(std::ostream &os) : os_(os) {}

  void write_bytes(const void *data, size_t len);
  void write_u32(uint32_t v) { write_bytes(&v, sizeof v); }
  void write_i64(int64_t v) { write_bytes(&v, sizeof v); }
  void write_f64(double v) { write_bytes(&v, sizeof v); }
  void write_f64v(const std::vector<double> &v) {
    write_bytes(v.data(), v.size() * sizeof(double));
  }
  void write_string(const std::string &s) {
    write_u32(static_cast<uint32_t>(s.size()));
    write_bytes(s.data(), s.size());
  }

  uint32_t crc() const { return crc_.value(); }
  // Writes the CRC itself without folding it into the running state.
  void write_crc_trailer();

 private:
  std::ostream &os_;
  Crc32 crc_;
};

class BinReader {
 public:
  BinReader(std::istream &is, std::string source)
      : is_(is), source_(std::move(source)) {}

  void read_bytes(void *data, size_t len);
  uint32_t read_u32();
  int64_t read_i64();
  double read_f64();
  void read_f64v(std::vector<double> *v, size_t count);
  std::string read_string(size_t max_len = 1 << 20);

  uint32_t crc() const { return crc_.value(); }
  // Reads the trailing CRC and compares against the running state.
  void check_crc_trailer();

  const std::string &source() const { return source_; }
  [[noreturn]] void fail(const std::string &why) const;

 private:
  std::istream &is_;
  std::string source_;
  Crc32 crc_;
};

}  // namespace udac

#endif  // UDAC_BINIO_H_
