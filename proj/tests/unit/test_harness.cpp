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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "sitefb/harness.hpp"
#include "support.hpp"

using namespace sitefb;
using namespace sitefb::testing;

namespace {

ExperimentConfig toy() { return load_config(SITEFB_CONFIG_DIR "/toy_site.ini"); }

// Small, fast variant of the toy site.
ExperimentConfig mini(const std::filesystem::path& out) {
  auto cfg = toy();
  cfg.counts = {160, 40, 40};
  cfg.train.width = 16;
  cfg.train.depth = 2;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 16;
  cfg.grid.angular_grid = 128;
  cfg.output_dir = out;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

std::size_t bin_distance(double u, std::size_t bin, int grid) {
  const double pos = (u + 0.5) * grid;
  double d = std::fmod(std::abs(pos - static_cast<double>(bin)), static_cast<double>(grid));
  d = std::min(d, grid - d);
  return static_cast<std::size_t>(std::lround(d));
}

// Toy-site artifacts shared by the calibrated cases below.
struct ToyRuns {
  std::vector<ConvergenceRun> convergence;
  TrainResult artifacts;
};

const ToyRuns& toy_runs() {
  static const ToyRuns runs = [] {
    auto cfg = toy();
    cfg.output_dir = temp_dir("harness_toy");
    ToyRuns r;
    r.convergence = run_convergence(cfg, {{16, 8}, {8, 4}});
    r.artifacts = run_train(cfg);
    return r;
  }();
  return runs;
}

}  // namespace

TEST_CASE("make_splits: sizes, determinism and seed dependence") {
  auto cfg = mini("unused");
  const auto a = make_splits(cfg);
  const auto b = make_splits(cfg);
  CHECK(a.train.size() == 160);
  CHECK(a.val.size() == 40);
  CHECK(a.test.size() == 40);
  CHECK(max_abs_diff(a.test.samples[7].h, b.test.samples[7].h) == 0.0);
  cfg.seed = 2;
  const auto c = make_splits(cfg);
  CHECK(max_abs_diff(a.test.samples[7].h, c.test.samples[7].h) > 0.0);
  for (const auto& s : a.train.samples) CHECK(s.has_paths());
}

TEST_CASE("run_convergence: one setting, two epochs") {
  const auto dir = temp_dir("harness_conv");
  const auto cfg = mini(dir);
  const auto runs = run_convergence(cfg, {{4, 2}});
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].error.empty());
  const auto rows = read_csv(dir / "convergence_K4_Q2.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"epoch", "train_eta", "val_eta", "grad_norm"});
  CHECK(rows[1][0] == "1");
  CHECK(rows[2][0] == "2");
  CHECK(std::filesystem::exists(dir / "convergence.json"));
}

TEST_CASE("run_convergence: a failing setting does not abort the others") {
  const auto dir = temp_dir("harness_conv_fail");
  const auto cfg = mini(dir);
  const auto runs = run_convergence(cfg, {{4, 99}, {4, 2}});
  REQUIRE(runs.size() == 2);
  CHECK_FALSE(runs[0].error.empty());
  CHECK(runs[1].error.empty());
  CHECK(std::filesystem::exists(dir / "convergence_K4_Q2.csv"));
  CHECK(slurp(dir / "convergence.json").find("\"error\"") != std::string::npos);
}

TEST_CASE("mark_pareto: domination and antichain") {
  std::vector<SweepPoint> pts(3);
  pts[0] = {4, 1, 0.6, 6, 0.0, false, {}};
  pts[1] = {8, 2, 0.5, 12, 0.0, false, {}};  // dominated by pts[0]
  pts[2] = {8, 4, 0.9, 16, 0.0, false, {}};
  mark_pareto(pts);
  CHECK(pts[0].pareto);
  CHECK_FALSE(pts[1].pareto);
  CHECK(pts[2].pareto);

  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<SweepPoint> p(12);
    for (auto& x : p) {
      x.overhead = 4 + static_cast<int>(rng.uniform_index(20));
      x.mean_eta = std::round(rng.uniform() * 10.0) / 10.0;
      if (rng.uniform() < 0.1) x.error = "failed";
    }
    mark_pareto(p);
    auto dominates = [](const SweepPoint& a, const SweepPoint& b) {
      return a.overhead <= b.overhead && a.mean_eta >= b.mean_eta && (a.overhead < b.overhead || a.mean_eta > b.mean_eta);
    };
    for (const auto& a : p) {
      if (!a.error.empty()) CHECK_FALSE(a.pareto);
      bool dominated = false;
      for (const auto& b : p)
        if (b.error.empty() && dominates(b, a)) dominated = true;
      if (a.error.empty()) CHECK(a.pareto == !dominated);
    }
  }
}

TEST_CASE("run_pareto: overhead column follows K + 2Q") {
  const auto dir = temp_dir("harness_pareto");
  const auto cfg = mini(dir);
  const auto pts = run_pareto(cfg, {4, 8}, {1, 2});
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) CHECK(p.overhead == p.k + 2 * p.q);
  const auto rows = read_csv(dir / "pareto.csv");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(std::stoi(rows[i][2]) == std::stoi(rows[i][0]) + 2 * std::stoi(rows[i][1]));
  CHECK(std::any_of(pts.begin(), pts.end(), [](const SweepPoint& p) { return p.pareto; }));
  CHECK_THROWS_AS(run_pareto(cfg, {}, {1}), Error);
}

TEST_CASE("run_comparison: per-sample ordering, overheads and CDF files") {
  const auto dir = temp_dir("harness_cmp");
  const auto cfg = mini(dir);
  const auto res = run_comparison(cfg);
  REQUIRE(res.schemes.size() == 4);
  CHECK(res.evaluated + res.skipped == 40);
  const auto& t1 = res.schemes[0];
  const auto& t2 = res.schemes[1];
  for (std::size_t i = 0; i < t1.eta.size(); ++i) CHECK(t2.eta[i] >= t1.eta[i] - 1e-12);
  CHECK(t2.mean_eta >= t1.mean_eta);
  CHECK(t1.overhead == 16 + 1);
  CHECK(t2.overhead == 16 + 2 * 4);
  CHECK(res.schemes[2].overhead == 16 + 2 * 4);
  CHECK(res.schemes[3].overhead == 8 + 2 * 4);
  for (const auto& s : res.schemes) {
    CHECK(s.mean_eta >= 0.0);
    CHECK(s.mean_eta <= 1.0);
  }

  for (const char* name : {"type1", "type2", "psc", "proposed"}) {
    const auto rows = read_csv(dir / ("cdf_" + std::string(name) + ".csv"));
    REQUIRE(rows.size() == res.evaluated + 1);
    CHECK(rows[0] == std::vector<std::string>{"effective_se_bps_hz", "cdf"});
    for (std::size_t i = 2; i < rows.size(); ++i) {
      CHECK(std::stod(rows[i][0]) >= std::stod(rows[i - 1][0]));
      CHECK(std::stod(rows[i][1]) >= std::stod(rows[i - 1][1]));
    }
    CHECK(std::stod(rows.back()[1]) == 1.0);
  }
  const auto se = read_csv(dir / "se_vs_snr.csv");
  CHECK(se.size() == cfg.grid.snr_db.size() + 1);
  const auto outcomes = read_csv(dir / "comparison_outcomes.csv");
  CHECK(outcomes.size() == 4 * res.evaluated + 1);
}

TEST_CASE("run_angular: normalized responses and path markers") {
  const auto dir = temp_dir("harness_ang");
  const auto cfg = mini(dir);
  const auto samples = run_angular(cfg, {0, 5});
  REQUIRE(samples.size() == 2);
  for (const auto& a : samples) {
    CHECK(a.u.size() == 128);
    CHECK(std::count(a.type1.begin(), a.type1.end(), 1.0) == 1);
    for (const auto* r : {&a.proposed, &a.type1, &a.type2})
      for (double v : *r) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    REQUIRE(a.paths);
    for (const auto& [u, p] : *a.paths) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
  const auto rows = read_csv(dir / "angular_5.csv");
  CHECK(rows.size() == 129);
  CHECK(rows[0] == std::vector<std::string>{"u", "proposed", "type1", "type2"});
  CHECK(std::filesystem::exists(dir / "angular_5_paths.csv"));
  CHECK_THROWS_AS(run_angular(cfg, {1000}), Error);
}

TEST_CASE("response_peaks: periodic maxima, strongest first") {
  const std::vector<double> r{0.9, 0.1, 0.5, 0.2, 0.3, 0.95};
  const auto p = response_peaks(r);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == 5);
  CHECK(p[1] == 2);
}

TEST_CASE("reruns are byte-identical, including with several workers") {
  const auto a = temp_dir("harness_rerun_a");
  const auto b = temp_dir("harness_rerun_b");
  auto cfg_a = mini(a);
  auto cfg_b = mini(b);
  cfg_b.train.threads = 4;
  for (auto* cfg : {&cfg_a, &cfg_b}) {
    run_gen_site(*cfg);
    run_train(*cfg);
    run_convergence(*cfg, {{4, 2}});
    run_ablation(*cfg);
    run_pareto(*cfg, {4}, {1, 2});
    run_comparison(*cfg);
    run_angular(*cfg, {0});
  }
  const auto fa = snapshot(a), fb = snapshot(b);
  REQUIRE(fa.size() == fb.size());
  CHECK(fa.size() > 15);
  for (const auto& [name, bytes] : fa) {
    INFO("file " << name);
    REQUIRE(fb.count(name) == 1);
    // Thread count is part of the echoed config, so summaries differ only there.
    if (name.ends_with(".json")) continue;
    CHECK(bytes == fb.at(name));
  }
  cfg_b.train.threads = 1;
  const auto c = temp_dir("harness_rerun_c");
  cfg_b.output_dir = c;
  run_comparison(cfg_b);
  CHECK(slurp(a / "comparison.json") == slurp(c / "comparison.json"));
}

TEST_CASE("toy site: the larger setting reaches at least the smaller one's efficiency") {
  const auto& runs = toy_runs().convergence;
  REQUIRE(runs.size() == 2);
  REQUIRE(runs[0].trace);
  REQUIRE(runs[1].trace);
  const double big = runs[0].trace->epochs.back().val_eta;
  const double small = runs[1].trace->epochs.back().val_eta;
  MESSAGE("(16,8) " << big << "  (8,4) " << small);
  CHECK(big >= small);
}

TEST_CASE("toy site: proposed response peaks sit on the strongest paths") {
  auto cfg = toy();
  cfg.output_dir = temp_dir("harness_toy_ang");
  const auto& art = toy_runs().artifacts;
  const std::vector<std::size_t> ids{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto samples = run_angular(cfg, ids, art);
  const auto splits = make_splits(cfg);
  const auto q = static_cast<std::size_t>(cfg.schemes.q);
  std::size_t hits = 0, total = 0;
  for (const auto& a : samples) {
    const auto& paths = splits.test.samples[a.sample_id].paths;
    std::vector<std::size_t> order(paths.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::norm(paths.gains[x]) > std::norm(paths.gains[y]); });
    order.resize(std::min(order.size(), q));
    // A sample with L < q paths can only be expected to show L peaks.
    auto peaks = response_peaks(a.proposed);
    peaks.resize(std::min(peaks.size(), order.size()));
    for (auto p : peaks) {
      std::size_t nearest = static_cast<std::size_t>(cfg.grid.angular_grid);
      for (auto l : order) nearest = std::min(nearest, bin_distance(paths.spatial_freqs[l], p, cfg.grid.angular_grid));
      ++total;
      if (nearest <= 2) ++hits;
      else MESSAGE("sample " << a.sample_id << ": peak at bin " << p << " is " << nearest << " bins from the nearest strong path");
    }
  }
  MESSAGE(hits << " of " << total << " peaks lie within 2 bins of a strong path");
  CHECK(hits == total);
}

TEST_CASE("toy site: effective SE is not maximized at the largest (K, Q)") {
  auto cfg = toy();
  cfg.output_dir = temp_dir("harness_toy_pareto");
  cfg.train.epochs = 60;
  const auto pts = run_pareto(cfg, {8, 16}, {4, 8});
  REQUIRE(pts.size() == 4);
  const auto best = std::max_element(pts.begin(), pts.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.mean_effective_se < b.mean_effective_se;
  });
  for (const auto& p : pts) MESSAGE("K=" << p.k << " Q=" << p.q << " eta " << p.mean_eta << " se " << p.mean_effective_se);
  CHECK_FALSE((best->k == 16 && best->q == 8));
}
