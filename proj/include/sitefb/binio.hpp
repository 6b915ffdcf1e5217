// SPDX-License-Identifier: Apache-2.0
//
// sitefb: site-specific limited-feedback beamforming simulation library
// Copyright (C) 2026 The sitefb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SITEFB_BINIO_HPP
#define SITEFB_BINIO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitefb/numkernel.hpp"

namespace sitefb::binio {

// Little-endian byte sink; independent of host byte order.
class Writer {
 public:
  void bytes(std::string_view raw);
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void c128(cplx v) { f64(v.real()); f64(v.imag()); }

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

// Little-endian byte source over an in-memory buffer. Reads past the end
// raise a truncation error.
class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}
  static Reader open(const std::filesystem::path& path);

  void expect_magic(std::string_view magic);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  cplx c128() {
    const double re = f64();
    return {re, f64()};
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::uint8_t* take(std::size_t n);

  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace sitefb::binio

#endif  // SITEFB_BINIO_HPP
