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

#ifndef SITEFB_CONFIG_HPP
#define SITEFB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sitefb/channel.hpp"
#include "sitefb/learn.hpp"
#include "sitefb/schemes.hpp"

namespace sitefb {

struct SchemeParams {
  int oversample = 4;  // Type-I / Type-II DFT oversampling
  int q = 4;
  int n_p = 4;  // PSC port count
  int k = 8;    // probing beams
};

struct SampleCounts {
  std::size_t train = 1400;
  std::size_t val = 300;
  std::size_t test = 300;
  std::size_t total() const { return train + val + test; }
};

struct ExperimentGrid {
  std::vector<std::pair<int, int>> convergence_kq{{16, 8}, {16, 4}, {8, 4}};
  std::vector<int> pareto_k{4, 8, 16};
  std::vector<int> pareto_q{1, 2, 4, 8};
  RVec snr_db{-10, -5, 0, 5, 10, 15, 20, 25, 30};
  double cdf_snr_db = 10.0;
  std::vector<std::size_t> angular_samples{0, 1, 2};
  int angular_grid = 512;
};

struct ExperimentConfig {
  SiteModel site;
  LinkParams link;
  SchemeParams schemes;
  TrainConfig train;
  SampleCounts counts;
  ExperimentGrid grid;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  // Throws Error(config) on inconsistent values.
  void validate() const;
};

// Sectioned "key = value" text. Unknown sections or keys are rejected so
// typos never pass silently. When [link] gives no `rho`, the linear SNR is
// derived from p_t_dbm, bw_hz and noise_psd_dbm_hz.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical flat rendering ("section.key" -> value string) in a fixed order,
// used for the config echo in run summaries.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

}  // namespace sitefb

#endif  // SITEFB_CONFIG_HPP
