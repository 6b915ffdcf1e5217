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

#ifndef SITEFB_ERROR_HPP
#define SITEFB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sitefb {

enum class ErrorCode {
  dimension_mismatch,
  empty_basis,
  rank_deficient,
  degenerate_channel,
  invalid_argument,
  format,
  truncation,
  unavailable,
  numeric_failure,
  config,
  io,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::empty_basis: return "empty basis";
    case ErrorCode::rank_deficient: return "rank deficient";
    case ErrorCode::degenerate_channel: return "degenerate channel";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::format: return "format error";
    case ErrorCode::truncation: return "truncated file";
    case ErrorCode::unavailable: return "unavailable";
    case ErrorCode::numeric_failure: return "numeric failure";
    case ErrorCode::config: return "config error";
    case ErrorCode::io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace sitefb

#endif  // SITEFB_ERROR_HPP
