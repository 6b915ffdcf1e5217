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

#ifndef SITEFB_CHANNEL_HPP
#define SITEFB_CHANNEL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sitefb/numkernel.hpp"

namespace sitefb {

// Dominant propagation paths of one channel: complex gains (path loss
// included) and spatial frequencies u = (d / lambda) sin(phi) in cycles per
// element, u in [-0.5, 0.5).
struct PathSet {
  CVec gains;
  RVec spatial_freqs;

  std::size_t size() const { return gains.size(); }
  bool empty() const { return gains.empty(); }
  // Throws invalid_argument on length mismatch, |u| > 0.5 or non-finite gains.
  void validate() const;
};

struct ChannelRealization {
  PathSet paths;  // may be empty for imported channels
  CVec h;

  bool has_paths() const { return !paths.empty(); }
};

enum class DatasetOrigin { synthetic, imported };

struct ChannelDataset {
  int n_t = 0;
  std::vector<ChannelRealization> samples;
  DatasetOrigin origin = DatasetOrigin::synthetic;

  std::size_t size() const { return samples.size(); }
};

// Synthetic site-specific channel distribution: a few angular clusters with
// fixed centers model the persistent geometry of a deployment site, while
// per-sample draws (path count, in-cluster offset, gain) model UE placement.
struct SiteModel {
  int n_t = 64;
  RVec cluster_centers{-0.22, 0.08, 0.31};
  double cluster_spread = 0.02;  // half-width of the uniform in-cluster offset
  int path_count_min = 2;
  int path_count_max = 4;
  RVec gain_profile_db{-100.0, -110.0, -115.0};  // mean per-path power per cluster
  double gain_sigma_db = 3.0;                     // log-normal spread of path power
  std::uint64_t seed = 1;

  void validate() const;
};

// Wraps a spatial frequency into [-0.5, 0.5).
double wrap_spatial_freq(double u);

// Normalized ULA steering vector: entry k = exp(j 2 pi k u) / sqrt(n_t).
CVec steering(double u, int n_t);

// Steering vectors of all paths as columns (n_t x L).
CMat steering_matrix(const PathSet& paths, int n_t);

ChannelRealization assemble(const PathSet& paths, int n_t);

// max |A^H A - I| over the path steering matrix; zero when the paths are
// exactly orthogonal on the array.
double orthogonality_residual(const PathSet& paths, int n_t);

ChannelDataset sample_site(const SiteModel& model, std::size_t count, std::uint64_t rng_seed);

// Binary dataset interchange ("BLCH1", little-endian).
void save_dataset(const ChannelDataset& ds, const std::filesystem::path& path);
ChannelDataset load_dataset(const std::filesystem::path& path, std::optional<int> expected_n_t = std::nullopt);

// Throws degenerate_channel when ||h|| == 0 (or non-finite).
void require_nonzero_channel(std::span<const cplx> h);

}  // namespace sitefb

#endif  // SITEFB_CHANNEL_HPP
