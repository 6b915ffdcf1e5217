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

#ifndef SITEFB_PROBING_HPP
#define SITEFB_PROBING_HPP

#include <cstdint>
#include <filesystem>
#include <optional>

#include "sitefb/numkernel.hpp"

namespace sitefb {

namespace binio {
class Writer;
class Reader;
}  // namespace binio

enum class CodebookKind : std::uint8_t { dft_oversampled = 0, random = 1, learned = 2 };

const char* to_string(CodebookKind kind);

// n_t x K matrix of unit-norm beams (columns).
struct Codebook {
  CMat beams;
  CodebookKind kind = CodebookKind::dft_oversampled;

  int n_t() const { return static_cast<int>(beams.rows()); }
  int size() const { return static_cast<int>(beams.cols()); }
  CVec beam(std::size_t k) const { return beams.col(k); }
  // Throws invalid_argument when a column norm deviates from 1 by > tol.
  void validate(double tol = 1e-12) const;
};

// Oversampled DFT codebook with n_t * oversample beams; beam m points at
// spatial frequency m / (n_t * oversample) wrapped into [-0.5, 0.5).
Codebook dft_codebook(int n_t, int oversample);

// K beams sampled uniformly on [-0.5, 0.5) of spatial frequency: column k of
// the K-beam uniform sweep, i.e. a K-column slice of the oversampled grid.
Codebook dft_sweep(int n_t, int k);

// i.i.d. complex Gaussian beams, normalized to unit norm.
Codebook random_codebook(int n_t, int k, std::uint64_t seed);

// Renormalizes every column to unit norm in place.
void normalize_columns(CMat& beams);

struct NoiseModel {
  double mu_b = 0.0;     // dB
  double sigma_b = 1.0;  // dB
  double p_ssb = 1.0;    // linear
  bool enabled = true;

  void validate() const;
};

inline constexpr double kRsrpFloorDb = -300.0;

struct RsrpFingerprint {
  RVec values_db;
  std::optional<RVec> noise_free_db;
};

// 10 log10(p) floored at kRsrpFloorDb.
double power_to_db(double p);

RsrpFingerprint rsrp_fingerprint(std::span<const cplx> h, const Codebook& book, const NoiseModel& noise,
                                 std::uint64_t rng_seed);

// Per-fingerprint standardization: (r - mean) / (std + 1e-6).
RVec normalize_fingerprint(std::span<const double> values_db);
inline RVec normalize_fingerprint(const RsrpFingerprint& r) { return normalize_fingerprint(r.values_db); }

inline constexpr double kFingerprintStdEps = 1e-6;

// Codebook interchange ("BLCB1", little-endian, column-major entries).
void save_codebook(const Codebook& book, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);
// Codebook record without the magic; embedded in model checkpoints.
void write_codebook_payload(binio::Writer& w, const Codebook& book);
Codebook read_codebook_payload(binio::Reader& r);

}  // namespace sitefb

#endif  // SITEFB_PROBING_HPP
