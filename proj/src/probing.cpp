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

#include "sitefb/probing.hpp"

#include <cmath>
#include <numeric>

#include "sitefb/binio.hpp"
#include "sitefb/channel.hpp"
#include "sitefb/error.hpp"
#include "sitefb/rng.hpp"

namespace sitefb {

namespace {
constexpr std::string_view kCodebookMagic = "BLCB1";
}

const char* to_string(CodebookKind kind) {
  switch (kind) {
    case CodebookKind::dft_oversampled: return "dft";
    case CodebookKind::random: return "random";
    case CodebookKind::learned: return "learned";
  }
  return "unknown";
}

void Codebook::validate(double tol) const {
  for (std::size_t k = 0; k < beams.cols(); ++k)
    if (!(std::abs(norm(beams.col(k)) - 1.0) <= tol))
      throw Error(ErrorCode::invalid_argument, "codebook column " + std::to_string(k) + " is not unit norm");
}

Codebook dft_codebook(int n_t, int oversample) {
  if (n_t < 1 || oversample < 1) throw Error(ErrorCode::invalid_argument, "dft_codebook: n_t and oversample must be positive");
  return dft_sweep(n_t, n_t * oversample);
}

Codebook dft_sweep(int n_t, int k) {
  if (n_t < 1 || k < 1) throw Error(ErrorCode::invalid_argument, "dft_sweep: n_t and k must be positive");
  Codebook book{CMat(static_cast<std::size_t>(n_t), static_cast<std::size_t>(k)), CodebookKind::dft_oversampled};
  for (int m = 0; m < k; ++m)
    book.beams.set_col(static_cast<std::size_t>(m),
                       steering(wrap_spatial_freq(static_cast<double>(m) / static_cast<double>(k)), n_t));
  return book;
}

Codebook random_codebook(int n_t, int k, std::uint64_t seed) {
  if (n_t < 1 || k < 1) throw Error(ErrorCode::invalid_argument, "random_codebook: n_t and k must be positive");
  Rng rng(seed);
  Codebook book{CMat(static_cast<std::size_t>(n_t), static_cast<std::size_t>(k)), CodebookKind::random};
  for (std::size_t c = 0; c < book.beams.cols(); ++c)
    for (std::size_t r = 0; r < book.beams.rows(); ++r) book.beams(r, c) = rng.complex_normal();
  normalize_columns(book.beams);
  return book;
}

void normalize_columns(CMat& beams) {
  for (std::size_t c = 0; c < beams.cols(); ++c) {
    double e = 0.0;
    for (std::size_t r = 0; r < beams.rows(); ++r) e += std::norm(beams(r, c));
    const double n = std::sqrt(e);
    if (!(n > 0.0)) throw Error(ErrorCode::numeric_failure, "cannot normalize a zero beam");
    for (std::size_t r = 0; r < beams.rows(); ++r) beams(r, c) /= n;
  }
}

void NoiseModel::validate() const {
  if (!(sigma_b >= 0.0)) throw Error(ErrorCode::invalid_argument, "NoiseModel: sigma_b must be non-negative");
  if (!(p_ssb > 0.0)) throw Error(ErrorCode::invalid_argument, "NoiseModel: p_ssb must be positive");
}

double power_to_db(double p) {
  const double db = 10.0 * std::log10(p);
  return db > kRsrpFloorDb ? db : kRsrpFloorDb;
}

RsrpFingerprint rsrp_fingerprint(std::span<const cplx> h, const Codebook& book, const NoiseModel& noise,
                                 std::uint64_t rng_seed) {
  noise.validate();
  if (h.size() != book.beams.rows()) throw Error(ErrorCode::dimension_mismatch, "rsrp_fingerprint: channel length differs from n_t");
  require_nonzero_channel(h);
  const CVec s = matmul_herm(book.beams, h);
  RVec clean(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) clean[k] = power_to_db(noise.p_ssb * std::norm(s[k]));

  RsrpFingerprint out;
  out.values_db = clean;
  if (noise.enabled) {
    Rng rng(rng_seed);
    for (auto& v : out.values_db) v += rng.normal(noise.mu_b, noise.sigma_b);
  }
  out.noise_free_db = std::move(clean);
  return out;
}

RVec normalize_fingerprint(std::span<const double> r) {
  if (r.empty()) throw Error(ErrorCode::invalid_argument, "normalize_fingerprint: empty fingerprint");
  const double k = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / k;
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / k);
  RVec out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = (r[i] - mean) / (sd + kFingerprintStdEps);
  return out;
}

void write_codebook_payload(binio::Writer& w, const Codebook& book) {
  w.u8(static_cast<std::uint8_t>(book.kind));
  w.u32(static_cast<std::uint32_t>(book.beams.rows()));
  w.u32(static_cast<std::uint32_t>(book.beams.cols()));
  for (std::size_t c = 0; c < book.beams.cols(); ++c)
    for (std::size_t r = 0; r < book.beams.rows(); ++r) w.c128(book.beams(r, c));
}

Codebook read_codebook_payload(binio::Reader& r) {
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(CodebookKind::learned)) throw Error(ErrorCode::format, "unknown codebook kind");
  const auto n_t = r.u32();
  const auto k = r.u32();
  if (n_t == 0 || k == 0) throw Error(ErrorCode::format, "codebook with zero dimension");
  if (static_cast<std::uint64_t>(n_t) * k * 16 > r.remaining()) throw Error(ErrorCode::truncation, "codebook entries truncated");
  Codebook book{CMat(n_t, k), static_cast<CodebookKind>(kind)};
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t row = 0; row < n_t; ++row) book.beams(row, c) = r.c128();
  return book;
}

void save_codebook(const Codebook& book, const std::filesystem::path& path) {
  binio::Writer w;
  w.bytes(kCodebookMagic);
  write_codebook_payload(w, book);
  w.save(path);
}

Codebook load_codebook(const std::filesystem::path& path) {
  auto r = binio::Reader::open(path);
  r.expect_magic(kCodebookMagic);
  auto book = read_codebook_payload(r);
  if (r.remaining() != 0) throw Error(ErrorCode::format, "trailing bytes in codebook file");
  return book;
}

}  // namespace sitefb
