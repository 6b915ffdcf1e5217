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

#include "sitefb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sitefb/parallel.hpp"

#ifndef SITEFB_BUILD_TAG
#define SITEFB_BUILD_TAG "unknown"
#endif

namespace sitefb {

namespace {

using json = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

json config_json(const ExperimentConfig& cfg) {
  json out = json::object();
  for (const auto& [k, v] : config_entries(cfg)) out[k] = v;
  return out;
}

void write_summary(const ExperimentConfig& cfg, const std::string& experiment, json results) {
  json doc;
  doc["experiment"] = experiment;
  doc["build"] = build_tag();
  doc["config"] = config_json(cfg);
  doc["results"] = std::move(results);
  write_text(cfg.output_dir / (experiment + ".json"), doc.dump(2) + "\n");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(LogSink log, const std::string& line) {
  if (log) *log << line << '\n';
}

ChannelDataset take(const ChannelDataset& ds, std::span<const std::size_t> idx) {
  ChannelDataset out;
  out.n_t = ds.n_t;
  out.origin = ds.origin;
  out.samples.reserve(idx.size());
  for (auto i : idx) out.samples.push_back(ds.samples[i]);
  return out;
}

bool is_degenerate(std::span<const cplx> h) { return !(norm_sq(h) > 0.0) || !all_finite(h); }

std::string trace_csv(const TrainTrace& trace) {
  std::string out = "epoch,train_eta,val_eta,grad_norm\n";
  for (const auto& e : trace.epochs)
    out += std::to_string(e.epoch) + "," + format_double(e.train_eta) + "," + format_double(e.val_eta) + "," +
           format_double(e.grad_norm) + "\n";
  return out;
}

json trace_json(const TrainTrace& trace) {
  json j;
  j["initial_train_eta"] = trace.initial_train_eta;
  j["initial_val_eta"] = trace.initial_val_eta;
  j["epochs"] = trace.epochs.size();
  if (!trace.epochs.empty()) {
    j["final_train_eta"] = trace.epochs.back().train_eta;
    j["final_val_eta"] = trace.epochs.back().val_eta;
  }
  return j;
}

TrainResult train_setting(const ExperimentConfig& cfg, const Splits& splits, TrainConfig tc, LogSink log,
                          const std::string& label) {
  Stopwatch sw;
  auto res = train(splits.train, splits.val, tc);
  std::ostringstream msg;
  msg << label << ": " << res.trace.epochs.size() << " epochs, val eta " << res.trace.initial_val_eta << " -> "
      << (res.trace.epochs.empty() ? res.trace.initial_val_eta : res.trace.epochs.back().val_eta) << " ("
      << sw.seconds() << " s)";
  note(log, msg.str());
  (void)cfg;
  return res;
}

}  // namespace

std::string build_tag() { return SITEFB_BUILD_TAG; }

Splits make_splits(const ExperimentConfig& cfg) {
  SiteModel site = cfg.site;
  site.seed = cfg.seed;
  const auto all = sample_site(site, cfg.counts.total(), 0);
  Rng rng(derive_seed(cfg.seed, 1));
  const auto perm = rng.permutation(all.size());
  const std::span<const std::size_t> p(perm);
  Splits s;
  s.train = take(all, p.first(cfg.counts.train));
  s.val = take(all, p.subspan(cfg.counts.train, cfg.counts.val));
  s.test = take(all, p.subspan(cfg.counts.train + cfg.counts.val));
  return s;
}

TrainConfig train_config_for(const ExperimentConfig& cfg, int k, int q) {
  TrainConfig tc = cfg.train;
  tc.k = k;
  tc.q = q;
  tc.seed = derive_seed(cfg.seed, 2);
  return tc;
}

std::uint64_t deployment_seed(const ExperimentConfig& cfg, std::size_t index) {
  return derive_seed(derive_seed(cfg.seed, 3), index);
}

DeploymentSummary evaluate_deployment(const ExperimentConfig& cfg, const TrainResult& artifacts,
                                      const ChannelDataset& ds) {
  std::vector<std::optional<FeedbackOutcome>> outcomes(ds.size());
  parallel_for(ds.size(), cfg.train.threads, [&](std::size_t i) {
    const auto& h = ds.samples[i].h;
    if (is_degenerate(h)) return;
    outcomes[i] = export_deployment(artifacts.probing, artifacts.model, h, cfg.train.noise, deployment_seed(cfg, i),
                                    cfg.link);
  });
  DeploymentSummary s;
  for (const auto& o : outcomes) {
    if (!o) {
      ++s.skipped;
      continue;
    }
    ++s.evaluated;
    s.mean_eta += o->eta;
    s.mean_effective_se += o->effective_se;
    if (o->flags & kFlagReducedRank) ++s.reduced_rank;
  }
  if (s.evaluated) {
    s.mean_eta /= static_cast<double>(s.evaluated);
    s.mean_effective_se /= static_cast<double>(s.evaluated);
  }
  return s;
}

Splits run_gen_site(const ExperimentConfig& cfg, LogSink log) {
  auto splits = make_splits(cfg);
  ensure_dir(cfg.output_dir);
  save_dataset(splits.train, cfg.output_dir / "site_train.blch");
  save_dataset(splits.val, cfg.output_dir / "site_val.blch");
  save_dataset(splits.test, cfg.output_dir / "site_test.blch");
  json results = {{"n_t", cfg.site.n_t},
                  {"train", splits.train.size()},
                  {"val", splits.val.size()},
                  {"test", splits.test.size()},
                  {"files", {"site_train.blch", "site_val.blch", "site_test.blch"}}};
  write_summary(cfg, "gen-site", results);
  note(log, "gen-site: wrote " + std::to_string(cfg.counts.total()) + " channels");
  return splits;
}

TrainResult run_train(const ExperimentConfig& cfg, LogSink log) {
  const auto splits = make_splits(cfg);
  auto res = train_setting(cfg, splits, train_config_for(cfg, cfg.schemes.k, cfg.schemes.q), log, "train");
  ensure_dir(cfg.output_dir);
  save_checkpoint(cfg.output_dir / "model.blml", res.probing, res.model);
  write_text(cfg.output_dir / "train_trace.csv", trace_csv(res.trace));
  const auto dep = evaluate_deployment(cfg, res, splits.val);
  json results = {{"k", cfg.schemes.k},
                  {"q", cfg.schemes.q},
                  {"trace", trace_json(res.trace)},
                  {"val_deployment_mean_eta", dep.mean_eta},
                  {"val_reduced_rank", dep.reduced_rank},
                  {"files", {"model.blml", "train_trace.csv"}}};
  write_summary(cfg, "train", results);
  return res;
}

std::vector<ConvergenceRun> run_convergence(const ExperimentConfig& cfg,
                                            const std::vector<std::pair<int, int>>& kq_list, LogSink log) {
  const auto splits = make_splits(cfg);
  std::vector<ConvergenceRun> runs;
  json results = json::array();
  for (auto [k, q] : kq_list) {
    ConvergenceRun run{k, q, std::nullopt, {}};
    const std::string label = "convergence K=" + std::to_string(k) + " Q=" + std::to_string(q);
    json entry;
    entry["k"] = k;
    entry["q"] = q;
    try {
      auto res = train_setting(cfg, splits, train_config_for(cfg, k, q), log, label);
      run.trace = res.trace;
    } catch (const TrainingDiverged& e) {
      run.trace = e.trace();
      run.error = e.what();
    } catch (const Error& e) {
      run.error = e.what();
    }
    if (!run.error.empty()) {
      note(log, label + " failed: " + run.error);
      entry["error"] = run.error;
    }
    if (run.trace) {
      const auto file = "convergence_K" + std::to_string(k) + "_Q" + std::to_string(q) + ".csv";
      write_text(cfg.output_dir / file, trace_csv(*run.trace));
      entry["file"] = file;
      entry["trace"] = trace_json(*run.trace);
    }
    results.push_back(entry);
    runs.push_back(std::move(run));
  }
  write_summary(cfg, "convergence", results);
  return runs;
}

AblationResult run_ablation(const ExperimentConfig& cfg, LogSink log) {
  const auto splits = make_splits(cfg);
  const int k = cfg.schemes.k, q = cfg.schemes.q;
  AblationResult r;

  auto fixed = train_config_for(cfg, k, q);
  fixed.train_probing = false;

  r.learned_artifacts = train_setting(cfg, splits, train_config_for(cfg, k, q), log, "ablation learned");
  r.learned = evaluate_deployment(cfg, r.learned_artifacts, splits.test).mean_eta;

  fixed.probing_init = ProbingInit::random;
  auto rnd = train_setting(cfg, splits, fixed, log, "ablation random");
  r.random = evaluate_deployment(cfg, rnd, splits.test).mean_eta;
  r.random_trace = rnd.trace;

  fixed.probing_init = ProbingInit::dft;
  auto dft = train_setting(cfg, splits, fixed, log, "ablation dft");
  r.dft = evaluate_deployment(cfg, dft, splits.test).mean_eta;
  r.dft_trace = dft.trace;

  std::string csv = "probing,mean_eta\n";
  csv += "learned," + format_double(r.learned) + "\n";
  csv += "random," + format_double(r.random) + "\n";
  csv += "dft," + format_double(r.dft) + "\n";
  write_text(cfg.output_dir / "ablation.csv", csv);

  json results;
  results["k"] = k;
  results["q"] = q;
  results["test_samples"] = splits.test.size();
  results["mean_eta"] = {{"learned", r.learned}, {"random", r.random}, {"dft", r.dft}};
  results["learned_trace"] = trace_json(r.learned_artifacts.trace);
  results["random_trace"] = trace_json(r.random_trace);
  results["dft_trace"] = trace_json(r.dft_trace);
  write_summary(cfg, "ablation", results);
  return r;
}

void mark_pareto(std::vector<SweepPoint>& points) {
  for (auto& p : points) {
    p.pareto = p.error.empty();
    if (!p.pareto) continue;
    for (const auto& o : points) {
      if (&o == &p || !o.error.empty()) continue;
      const bool no_worse = o.overhead <= p.overhead && o.mean_eta >= p.mean_eta;
      const bool better = o.overhead < p.overhead || o.mean_eta > p.mean_eta;
      if (no_worse && better) {
        p.pareto = false;
        break;
      }
    }
  }
}

std::vector<SweepPoint> run_pareto(const ExperimentConfig& cfg, const std::vector<int>& k_list,
                                   const std::vector<int>& q_list, LogSink log) {
  if (k_list.empty() || q_list.empty()) throw Error(ErrorCode::config, "pareto grids must be nonempty");
  const auto splits = make_splits(cfg);
  std::vector<SweepPoint> points;
  for (int k : k_list)
    for (int q : q_list) {
      SweepPoint p;
      p.k = k;
      p.q = q;
      p.overhead = overhead_proposed(k, q);
      const std::string label = "pareto K=" + std::to_string(k) + " Q=" + std::to_string(q);
      try {
        const auto res = train_setting(cfg, splits, train_config_for(cfg, k, q), log, label);
        const auto s = evaluate_deployment(cfg, res, splits.test);
        p.mean_eta = s.mean_eta;
        p.mean_effective_se = s.mean_effective_se;
      } catch (const Error& e) {
        p.error = e.what();
        note(log, label + " failed: " + p.error);
      }
      points.push_back(std::move(p));
    }
  mark_pareto(points);

  std::string csv = "k,q,overhead,mean_eta,mean_effective_se,pareto\n";
  json results = json::array();
  for (const auto& p : points) {
    json entry = {{"k", p.k}, {"q", p.q}, {"overhead", p.overhead}};
    if (!p.error.empty()) {
      entry["error"] = p.error;
    } else {
      csv += std::to_string(p.k) + "," + std::to_string(p.q) + "," + std::to_string(p.overhead) + "," +
             format_double(p.mean_eta) + "," + format_double(p.mean_effective_se) + "," + (p.pareto ? "1" : "0") +
             "\n";
      entry["mean_eta"] = p.mean_eta;
      entry["mean_effective_se"] = p.mean_effective_se;
      entry["pareto"] = p.pareto;
    }
    results.push_back(entry);
  }
  write_text(cfg.output_dir / "pareto.csv", csv);
  write_summary(cfg, "pareto", results);
  return points;
}

ComparisonResult run_comparison(const ExperimentConfig& cfg, const std::optional<TrainResult>& artifacts, LogSink log) {
  const auto splits = make_splits(cfg);
  const TrainResult trained =
      artifacts ? *artifacts
                : train_setting(cfg, splits, train_config_for(cfg, cfg.schemes.k, cfg.schemes.q), log, "compare");
  const auto& test = splits.test;
  const int n_t = cfg.site.n_t;
  const Codebook quant = dft_codebook(n_t, cfg.schemes.oversample);

  constexpr std::size_t kSchemes = 4;
  std::vector<std::optional<std::array<FeedbackOutcome, kSchemes>>> per_sample(test.size());
  parallel_for(test.size(), cfg.train.threads, [&](std::size_t i) {
    const auto& h = test.samples[i].h;
    if (is_degenerate(h)) return;
    per_sample[i] = std::array<FeedbackOutcome, kSchemes>{
        type1(h, quant, cfg.link), type2(h, quant, cfg.schemes.q, cfg.link), psc(h, cfg.schemes.n_p, cfg.link),
        export_deployment(trained.probing, trained.model, h, cfg.train.noise, deployment_seed(cfg, i), cfg.link)};
  });

  ComparisonResult res;
  const char* names[kSchemes] = {"type1", "type2", "psc", "proposed"};
  res.schemes.resize(kSchemes);
  for (std::size_t s = 0; s < kSchemes; ++s) res.schemes[s].scheme = names[s];

  std::string outcomes_csv = std::string(kOutcomeCsvHeader) + "\n";
  double energy_sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!per_sample[i]) {
      ++res.skipped;
      continue;
    }
    ++res.evaluated;
    const double energy = norm_sq(test.samples[i].h);
    energy_sum += energy;
    for (std::size_t s = 0; s < kSchemes; ++s) {
      const auto& o = (*per_sample[i])[s];
      auto& sum = res.schemes[s];
      sum.q_or_np = o.q_or_np;
      sum.overhead = o.overhead_uses;
      sum.mean_eta += o.eta;
      sum.mean_effective_se += o.effective_se;
      sum.eta.push_back(o.eta);
      sum.captured.push_back(o.eta * energy);
      outcomes_csv += outcome_csv_row(i, o) + "\n";
    }
  }
  if (res.skipped) note(log, "compare: skipped " + std::to_string(res.skipped) + " degenerate test channels");
  if (res.evaluated == 0) throw Error(ErrorCode::numeric_failure, "compare: no evaluable test channels");
  for (auto& s : res.schemes) {
    s.mean_eta /= static_cast<double>(res.evaluated);
    s.mean_effective_se /= static_cast<double>(res.evaluated);
  }

  // The SNR grid rescales rho so that the mean test channel sees the grid SNR.
  const double mean_energy = energy_sum / static_cast<double>(res.evaluated);
  auto link_at = [&](double snr_db) {
    LinkParams l = cfg.link;
    l.rho = std::pow(10.0, snr_db / 10.0) / mean_energy;
    return l;
  };
  auto mean_se_at = [&](const SchemeSummary& s, const LinkParams& l) {
    double acc = 0.0;
    for (double c : s.captured) acc += effective_se(c, s.overhead, l);
    return acc / static_cast<double>(s.captured.size());
  };

  res.snr_db = cfg.grid.snr_db;
  std::string se_csv = "snr_db";
  for (const auto& s : res.schemes) se_csv += "," + s.scheme + "_bps_hz";
  se_csv += "\n";
  for (double snr : res.snr_db) {
    const auto l = link_at(snr);
    RVec row;
    se_csv += format_double(snr);
    for (const auto& s : res.schemes) {
      row.push_back(mean_se_at(s, l));
      se_csv += "," + format_double(row.back());
    }
    se_csv += "\n";
    res.se_vs_snr.push_back(std::move(row));
  }

  const auto cdf_link = link_at(cfg.grid.cdf_snr_db);
  for (const auto& s : res.schemes) {
    RVec se;
    for (double c : s.captured) se.push_back(effective_se(c, s.overhead, cdf_link));
    std::sort(se.begin(), se.end());
    std::string csv = "effective_se_bps_hz,cdf\n";
    for (std::size_t i = 0; i < se.size(); ++i)
      csv += format_double(se[i]) + "," + format_double(static_cast<double>(i + 1) / static_cast<double>(se.size())) +
             "\n";
    write_text(cfg.output_dir / ("cdf_" + s.scheme + ".csv"), csv);
  }

  std::string summary_csv = "scheme,q_or_np,overhead,mean_eta,mean_effective_se_bps_hz\n";
  json schemes = json::array();
  for (const auto& s : res.schemes) {
    summary_csv += s.scheme + "," + std::to_string(s.q_or_np) + "," + std::to_string(s.overhead) + "," +
                   format_double(s.mean_eta) + "," + format_double(s.mean_effective_se) + "\n";
    schemes.push_back({{"scheme", s.scheme},
                       {"q_or_np", s.q_or_np},
                       {"overhead", s.overhead},
                       {"mean_eta", s.mean_eta},
                       {"mean_effective_se_bps_hz", s.mean_effective_se}});
  }
  write_text(cfg.output_dir / "comparison_summary.csv", summary_csv);
  write_text(cfg.output_dir / "se_vs_snr.csv", se_csv);
  write_text(cfg.output_dir / "comparison_outcomes.csv", outcomes_csv);

  json results;
  results["evaluated"] = res.evaluated;
  results["skipped"] = res.skipped;
  results["schemes"] = schemes;
  results["cdf_snr_db"] = cfg.grid.cdf_snr_db;
  write_summary(cfg, "comparison", results);
  return res;
}

std::vector<std::size_t> response_peaks(std::span<const double> r) {
  const std::size_t n = r.size();
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = r[(i + n - 1) % n], next = r[(i + 1) % n];
    if (r[i] > prev && r[i] >= next) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
  return peaks;
}

std::vector<AngularSample> run_angular(const ExperimentConfig& cfg, const std::vector<std::size_t>& sample_ids,
                                       const std::optional<TrainResult>& artifacts, LogSink log) {
  const auto splits = make_splits(cfg);
  const TrainResult trained =
      artifacts ? *artifacts
                : train_setting(cfg, splits, train_config_for(cfg, cfg.schemes.k, cfg.schemes.q), log, "angular");
  const Codebook quant = dft_codebook(cfg.site.n_t, cfg.schemes.oversample);
  const int grid = cfg.grid.angular_grid;

  auto span_of = [&](const std::vector<int>& idx) {
    std::vector<CVec> cols;
    for (int i : idx) cols.push_back(quant.beam(static_cast<std::size_t>(i)));
    return Subspace::from_span(CMat::from_columns(cols));
  };

  std::vector<AngularSample> out;
  json results = json::array();
  for (auto id : sample_ids) {
    if (id >= splits.test.size()) throw Error(ErrorCode::invalid_argument, "angular sample id outside the test split");
    const auto& sample = splits.test.samples[id];
    const auto& h = sample.h;
    require_nonzero_channel(h);

    const auto fp = rsrp_fingerprint(h, trained.probing.codebook(), cfg.train.noise, deployment_seed(cfg, id));
    const auto learned = Subspace::from_span(decode(trained.model, normalize_fingerprint(fp.values_db)));

    AngularSample a;
    a.sample_id = id;
    a.u = angular_grid(grid);
    a.proposed = angular_response(learned, grid, true);
    a.type1 = angular_response(span_of(type1(h, quant, cfg.link).report.indices), grid, true);
    a.type2 = angular_response(span_of(type2(h, quant, cfg.schemes.q, cfg.link).report.indices), grid, true);

    std::string csv = "u,proposed,type1,type2\n";
    for (std::size_t i = 0; i < a.u.size(); ++i)
      csv += format_double(a.u[i]) + "," + format_double(a.proposed[i]) + "," + format_double(a.type1[i]) + "," +
             format_double(a.type2[i]) + "\n";
    const auto base = "angular_" + std::to_string(id);
    write_text(cfg.output_dir / (base + ".csv"), csv);
    json entry = {{"sample_id", id}, {"file", base + ".csv"}};

    if (sample.has_paths()) {
      double max_power = 0.0;
      for (const auto& g : sample.paths.gains) max_power = std::max(max_power, std::norm(g));
      std::vector<std::pair<double, double>> paths;
      std::string pcsv = "u,power\n";
      for (std::size_t l = 0; l < sample.paths.size(); ++l) {
        const double pw = max_power > 0.0 ? std::norm(sample.paths.gains[l]) / max_power : 0.0;
        paths.emplace_back(sample.paths.spatial_freqs[l], pw);
        pcsv += format_double(sample.paths.spatial_freqs[l]) + "," + format_double(pw) + "\n";
      }
      a.paths = std::move(paths);
      write_text(cfg.output_dir / (base + "_paths.csv"), pcsv);
      entry["paths_file"] = base + "_paths.csv";
    } else {
      note(log, "angular: sample " + std::to_string(id) + " has no path data; path markers omitted");
    }
    results.push_back(entry);
    out.push_back(std::move(a));
  }
  write_summary(cfg, "angular", results);
  return out;
}

}  // namespace sitefb
