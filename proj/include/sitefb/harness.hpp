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

#ifndef SITEFB_HARNESS_HPP
#define SITEFB_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sitefb/config.hpp"
#include "sitefb/learn.hpp"

namespace sitefb {

struct Splits {
  ChannelDataset train, val, test;
};

// Draws counts.total() channels from the site under cfg.seed and splits them
// by a seeded permutation into train / val / test.
Splits make_splits(const ExperimentConfig& cfg);

// Training configuration for a (K, Q) setting; all settings share one seed.
TrainConfig train_config_for(const ExperimentConfig& cfg, int k, int q);

// Noise seed of the deployment fingerprint for test sample `index`.
std::uint64_t deployment_seed(const ExperimentConfig& cfg, std::size_t index);

// Mean deployment outcome of trained artifacts over a dataset.
struct DeploymentSummary {
  double mean_eta = 0.0;
  double mean_effective_se = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t reduced_rank = 0;
};
DeploymentSummary evaluate_deployment(const ExperimentConfig& cfg, const TrainResult& artifacts,
                                      const ChannelDataset& ds);

// Optional progress sink. Wall-clock times are reported only here and never
// written to result files.
using LogSink = std::ostream*;

// Writes the three splits as site_{train,val,test}.blch.
Splits run_gen_site(const ExperimentConfig& cfg, LogSink log = nullptr);

// Trains the configured (K, Q) setting; writes model.blml and train_trace.csv.
TrainResult run_train(const ExperimentConfig& cfg, LogSink log = nullptr);

struct ConvergenceRun {
  int k = 0, q = 0;
  std::optional<TrainTrace> trace;
  std::string error;  // nonempty when training failed
};
std::vector<ConvergenceRun> run_convergence(const ExperimentConfig& cfg,
                                            const std::vector<std::pair<int, int>>& kq_list, LogSink log = nullptr);

struct AblationResult {
  double learned = 0.0;
  double random = 0.0;
  double dft = 0.0;
  TrainResult learned_artifacts;
  TrainTrace random_trace, dft_trace;
};
AblationResult run_ablation(const ExperimentConfig& cfg, LogSink log = nullptr);

struct SweepPoint {
  int k = 0, q = 0;
  double mean_eta = 0.0;
  int overhead = 0;
  double mean_effective_se = 0.0;
  bool pareto = false;
  std::string error;
};
// Flags points not dominated in (overhead lower, mean_eta higher). Failed
// points never enter the front.
void mark_pareto(std::vector<SweepPoint>& points);
std::vector<SweepPoint> run_pareto(const ExperimentConfig& cfg, const std::vector<int>& k_list,
                                   const std::vector<int>& q_list, LogSink log = nullptr);

struct SchemeSummary {
  std::string scheme;
  int q_or_np = 0;
  int overhead = 0;
  double mean_eta = 0.0;
  double mean_effective_se = 0.0;
  RVec eta;           // per evaluated test sample
  RVec captured;      // ||P h||^2 per evaluated test sample
};
struct ComparisonResult {
  std::vector<SchemeSummary> schemes;  // type1, type2, psc, proposed
  RVec snr_db;
  std::vector<RVec> se_vs_snr;  // [snr][scheme]
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};
// Uses `artifacts` when given, otherwise trains the proposed scheme first.
ComparisonResult run_comparison(const ExperimentConfig& cfg, const std::optional<TrainResult>& artifacts = std::nullopt,
                                LogSink log = nullptr);

struct AngularSample {
  std::size_t sample_id = 0;
  RVec u;
  RVec proposed, type1, type2;
  std::optional<std::vector<std::pair<double, double>>> paths;  // (u, normalized power)
};
std::vector<AngularSample> run_angular(const ExperimentConfig& cfg, const std::vector<std::size_t>& sample_ids,
                                       const std::optional<TrainResult>& artifacts = std::nullopt,
                                       LogSink log = nullptr);

// Indices of local maxima of a sampled response on the periodic grid,
// strongest first.
std::vector<std::size_t> response_peaks(std::span<const double> response);

// Build identifier embedded in summaries.
std::string build_tag();

}  // namespace sitefb

#endif  // SITEFB_HARNESS_HPP
