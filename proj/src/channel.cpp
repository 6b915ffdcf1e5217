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

#include "sitefb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sitefb/binio.hpp"
#include "sitefb/error.hpp"
#include "sitefb/rng.hpp"

namespace sitefb {

namespace {

constexpr std::string_view kDatasetMagic = "BLCH1";
constexpr std::uint8_t kDatasetVersion = 1;

}  // namespace

void PathSet::validate() const {
  if (gains.size() != spatial_freqs.size())
    throw Error(ErrorCode::invalid_argument, "PathSet: gains and spatial_freqs differ in length");
  for (double u : spatial_freqs)
    if (!(std::abs(u) <= 0.5)) throw Error(ErrorCode::invalid_argument, "PathSet: |u| exceeds 0.5");
  if (!all_finite(gains)) throw Error(ErrorCode::invalid_argument, "PathSet: non-finite gain");
}

void SiteModel::validate() const {
  if (n_t < 1) throw Error(ErrorCode::invalid_argument, "SiteModel: n_t must be positive");
  if (cluster_centers.empty()) throw Error(ErrorCode::invalid_argument, "SiteModel: no clusters");
  if (gain_profile_db.size() != cluster_centers.size())
    throw Error(ErrorCode::invalid_argument, "SiteModel: gain profile length differs from cluster count");
  for (double c : cluster_centers)
    if (!(c >= -0.5 && c < 0.5)) throw Error(ErrorCode::invalid_argument, "SiteModel: cluster center outside [-0.5, 0.5)");
  if (!(cluster_spread >= 0.0)) throw Error(ErrorCode::invalid_argument, "SiteModel: negative spread");
  if (!(gain_sigma_db >= 0.0)) throw Error(ErrorCode::invalid_argument, "SiteModel: negative gain spread");
  if (path_count_min < 1 || path_count_min > path_count_max)
    throw Error(ErrorCode::invalid_argument, "SiteModel: invalid path count range");
}

double wrap_spatial_freq(double u) {
  double w = u - std::floor(u + 0.5);
  if (w >= 0.5) w -= 1.0;
  return w;
}

CVec steering(double u, int n_t) {
  if (n_t < 1) throw Error(ErrorCode::invalid_argument, "steering: n_t must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_t));
  CVec a(static_cast<std::size_t>(n_t));
  for (int k = 0; k < n_t; ++k) {
    // Reduce the phase modulo one cycle before calling sincos to keep large
    // k*u products accurate.
    const double cycles = static_cast<double>(k) * u;
    const double phase = 2.0 * std::numbers::pi * (cycles - std::round(cycles));
    a[static_cast<std::size_t>(k)] = std::polar(scale, phase);
  }
  return a;
}

CMat steering_matrix(const PathSet& paths, int n_t) {
  CMat a(static_cast<std::size_t>(n_t), paths.size());
  for (std::size_t l = 0; l < paths.size(); ++l) a.set_col(l, steering(paths.spatial_freqs[l], n_t));
  return a;
}

ChannelRealization assemble(const PathSet& paths, int n_t) {
  paths.validate();
  CVec h(static_cast<std::size_t>(n_t));
  for (std::size_t l = 0; l < paths.size(); ++l) {
    const CVec a = steering(paths.spatial_freqs[l], n_t);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] += paths.gains[l] * a[k];
  }
  return {paths, std::move(h)};
}

double orthogonality_residual(const PathSet& paths, int n_t) {
  if (paths.empty()) throw Error(ErrorCode::unavailable, "orthogonality_residual: no path decomposition");
  const CMat a = steering_matrix(paths, n_t);
  return max_abs(matmul_herm(a, a) - CMat::identity(paths.size()));
}

ChannelDataset sample_site(const SiteModel& model, std::size_t count, std::uint64_t rng_seed) {
  model.validate();
  if (count < 1) throw Error(ErrorCode::invalid_argument, "sample_site: count must be positive");
  Rng rng(derive_seed(model.seed, rng_seed));
  const auto clusters = model.cluster_centers.size();
  const auto span = static_cast<std::size_t>(model.path_count_max - model.path_count_min + 1);

  ChannelDataset ds;
  ds.n_t = model.n_t;
  ds.origin = DatasetOrigin::synthetic;
  ds.samples.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t paths = static_cast<std::size_t>(model.path_count_min) + rng.uniform_index(span);
    PathSet ps;
    for (std::size_t l = 0; l < paths; ++l) {
      const std::size_t c = rng.uniform_index(clusters);
      const double u = model.cluster_centers[c] + rng.uniform(-model.cluster_spread, model.cluster_spread);
      const double power_db = model.gain_profile_db[c] + model.gain_sigma_db * rng.normal();
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      ps.spatial_freqs.push_back(wrap_spatial_freq(u));
      ps.gains.push_back(std::polar(std::pow(10.0, power_db / 20.0), phase));
    }
    ds.samples.push_back(assemble(ps, model.n_t));
  }
  return ds;
}

void save_dataset(const ChannelDataset& ds, const std::filesystem::path& path) {
  binio::Writer w;
  w.bytes(kDatasetMagic);
  w.u8(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(ds.n_t));
  w.u32(static_cast<std::uint32_t>(ds.samples.size()));
  for (const auto& s : ds.samples) {
    if (s.h.size() != static_cast<std::size_t>(ds.n_t))
      throw Error(ErrorCode::dimension_mismatch, "save_dataset: sample length differs from n_t");
    w.u16(static_cast<std::uint16_t>(s.paths.size()));
    for (const auto& g : s.paths.gains) w.c128(g);
    for (double u : s.paths.spatial_freqs) w.f64(u);
    for (const auto& x : s.h) w.c128(x);
  }
  w.save(path);
}

ChannelDataset load_dataset(const std::filesystem::path& path, std::optional<int> expected_n_t) {
  auto r = binio::Reader::open(path);
  r.expect_magic(kDatasetMagic);
  const auto version = r.u8();
  if (version != kDatasetVersion)
    throw Error(ErrorCode::format, "unsupported dataset version " + std::to_string(version));
  ChannelDataset ds;
  ds.n_t = static_cast<int>(r.u32());
  const auto count = r.u32();
  if (ds.n_t < 1) throw Error(ErrorCode::format, "dataset declares n_t = 0");
  if (expected_n_t && *expected_n_t != ds.n_t)
    throw Error(ErrorCode::dimension_mismatch, "dataset n_t " + std::to_string(ds.n_t) + " but expected " +
                                                   std::to_string(*expected_n_t));
  ds.origin = DatasetOrigin::imported;
  ds.samples.reserve(std::min<std::size_t>(count, r.remaining() / (2 + 16 * static_cast<std::size_t>(ds.n_t))));
  for (std::uint32_t n = 0; n < count; ++n) {
    ChannelRealization s;
    const auto paths = r.u16();
    s.paths.gains.resize(paths);
    s.paths.spatial_freqs.resize(paths);
    for (auto& g : s.paths.gains) g = r.c128();
    for (auto& u : s.paths.spatial_freqs) u = r.f64();
    s.h.resize(static_cast<std::size_t>(ds.n_t));
    for (auto& x : s.h) x = r.c128();
    if (!all_finite(s.h)) throw Error(ErrorCode::format, "non-finite channel entry in sample " + std::to_string(n));
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::format, "trailing bytes after declared sample count");
  if (ds.samples.empty()) throw Error(ErrorCode::format, "dataset is empty");
  return ds;
}

void require_nonzero_channel(std::span<const cplx> h) {
  const double e = norm_sq(h);
  if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorCode::degenerate_channel, "channel has zero (or non-finite) norm");
}

}  // namespace sitefb
