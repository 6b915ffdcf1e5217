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

// Command-line front end for the experiment harness.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sitefb/harness.hpp"

namespace {

using namespace sitefb;

enum ExitCode { kOk = 0, kConfigError = 2, kNumericError = 3, kIoError = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io:
    case ErrorCode::format:
    case ErrorCode::truncation:
      return kIoError;
    case ErrorCode::numeric_failure:
    case ErrorCode::rank_deficient:
    case ErrorCode::degenerate_channel:
    case ErrorCode::empty_basis:
      return kNumericError;
    default:
      return kConfigError;
  }
}

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string model;  // eval / compare / angular: reuse a checkpoint
};

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.config.empty()) cfg.validate();
  if (const char* env = std::getenv("SITEFB_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

std::optional<TrainResult> maybe_checkpoint(const std::string& path) {
  if (path.empty()) return std::nullopt;
  auto [probing, model] = load_checkpoint(path);
  return TrainResult{std::move(probing), std::move(model), {}};
}

void require_matching_model(const ExperimentConfig& cfg, const std::optional<TrainResult>& a) {
  if (!a) return;
  if (a->model.n_t() != cfg.site.n_t || a->model.q() != cfg.schemes.q || a->model.k() != cfg.schemes.k)
    throw Error(ErrorCode::config, "checkpoint shape does not match the configured n_t / K / Q");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sitefb: site-specific limited-feedback beamforming experiments"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "experiment config file (INI)");
    sub->add_option("--out", opts.out, "output directory (overrides config and SITEFB_OUTPUT_DIR)");
    sub->add_option("--seed", opts.seed, "master seed (overrides config)");
    return sub;
  };

  auto* gen = add_common(app.add_subcommand("gen-site", "sample the synthetic site and write train/val/test datasets"));
  auto* trn = add_common(app.add_subcommand("train", "train probing codebook and decoder at the configured K, Q"));
  auto* evl = add_common(app.add_subcommand("eval", "evaluate a trained checkpoint against the baseline schemes"));
  evl->add_option("--model", opts.model, "checkpoint file (default: <out>/model.blml)");
  auto* cnv = add_common(app.add_subcommand("convergence", "train every configured (K, Q) and write per-epoch traces"));
  auto* abl = add_common(app.add_subcommand("ablation", "learned vs. fixed random vs. fixed DFT probing"));
  auto* par = add_common(app.add_subcommand("pareto", "overhead / efficiency sweep over the (K, Q) grid"));
  auto* cmp = add_common(app.add_subcommand("compare", "scheme comparison, effective SE vs. SNR and CDFs"));
  cmp->add_option("--model", opts.model, "checkpoint file (trains one when omitted)");
  auto* ang = add_common(app.add_subcommand("angular", "angular response of the feedback subspaces"));
  ang->add_option("--model", opts.model, "checkpoint file (trains one when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    const ExperimentConfig cfg = resolve(opts);
    std::ostream* log = &std::cerr;
    if (*gen) {
      run_gen_site(cfg, log);
    } else if (*trn) {
      run_train(cfg, log);
    } else if (*evl) {
      const auto a = maybe_checkpoint(opts.model.empty() ? (cfg.output_dir / "model.blml").string() : opts.model);
      require_matching_model(cfg, a);
      run_comparison(cfg, a, log);
    } else if (*cnv) {
      const auto runs = run_convergence(cfg, cfg.grid.convergence_kq, log);
      for (const auto& r : runs)
        if (!r.error.empty()) return kNumericError;
    } else if (*abl) {
      run_ablation(cfg, log);
    } else if (*par) {
      run_pareto(cfg, cfg.grid.pareto_k, cfg.grid.pareto_q, log);
    } else if (*cmp) {
      const auto a = maybe_checkpoint(opts.model);
      require_matching_model(cfg, a);
      run_comparison(cfg, a, log);
    } else if (*ang) {
      const auto a = maybe_checkpoint(opts.model);
      require_matching_model(cfg, a);
      run_angular(cfg, cfg.grid.angular_samples, a, log);
    }
  } catch (const Error& e) {
    std::cerr << "sitefb: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "sitefb: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}
