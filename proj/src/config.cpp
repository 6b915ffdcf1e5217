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

#include "sitefb/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace sitefb {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw Error(ErrorCode::config, "cannot parse '" + t + "' for key " + key);
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error(ErrorCode::config, "expected a boolean for key " + key);
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& key, const std::string& text) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw Error(ErrorCode::config, "expected K:Q pairs for key " + key);
    out.emplace_back(parse_number<int>(key, parts[0]), parse_number<int>(key, parts[1]));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

std::string num(double v) { return format_double(v); }
template <class I>
  requires std::is_integral_v<I>
std::string num(I v) {
  return std::to_string(v);
}

struct Key {
  std::string path;  // "section.key"; top-level keys have no dot
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SITEFB_NUM_KEY(path, field, type)                                                          \
  Key {                                                                                           \
    path, [](ExperimentConfig& c, const std::string& v) { c.field = parse_number<type>(path, v); }, \
        [](const ExperimentConfig& c) { return num(c.field); }                                    \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      SITEFB_NUM_KEY("seed", seed, std::uint64_t),
      SITEFB_NUM_KEY("site.n_t", site.n_t, int),
      {"site.cluster_centers", [](ExperimentConfig& c, const std::string& v) { c.site.cluster_centers = parse_list<double>("site.cluster_centers", v); },
       [](const ExperimentConfig& c) { return join(c.site.cluster_centers); }},
      SITEFB_NUM_KEY("site.cluster_spread", site.cluster_spread, double),
      SITEFB_NUM_KEY("site.path_count_min", site.path_count_min, int),
      SITEFB_NUM_KEY("site.path_count_max", site.path_count_max, int),
      {"site.gain_profile_db", [](ExperimentConfig& c, const std::string& v) { c.site.gain_profile_db = parse_list<double>("site.gain_profile_db", v); },
       [](const ExperimentConfig& c) { return join(c.site.gain_profile_db); }},
      SITEFB_NUM_KEY("site.gain_sigma_db", site.gain_sigma_db, double),
      SITEFB_NUM_KEY("link.rho", link.rho, double),
      SITEFB_NUM_KEY("link.t_c", link.t_c, int),
      SITEFB_NUM_KEY("link.t_ssb", link.t_ssb, int),
      SITEFB_NUM_KEY("link.p_t_dbm", link.p_t_dbm, double),
      SITEFB_NUM_KEY("link.bw_hz", link.bw_hz, double),
      SITEFB_NUM_KEY("link.noise_psd_dbm_hz", link.noise_psd_dbm_hz, double),
      SITEFB_NUM_KEY("schemes.oversample", schemes.oversample, int),
      SITEFB_NUM_KEY("schemes.q", schemes.q, int),
      SITEFB_NUM_KEY("schemes.n_p", schemes.n_p, int),
      SITEFB_NUM_KEY("schemes.k", schemes.k, int),
      SITEFB_NUM_KEY("train.depth", train.depth, int),
      SITEFB_NUM_KEY("train.width", train.width, int),
      SITEFB_NUM_KEY("train.batch_size", train.batch_size, int),
      SITEFB_NUM_KEY("train.step", train.step, double),
      SITEFB_NUM_KEY("train.epochs", train.epochs, int),
      {"train.optimizer",
       [](ExperimentConfig& c, const std::string& v) {
         const auto t = trim(v);
         if (t == "sgd")
           c.train.optimizer = Optimizer::sgd;
         else if (t == "adam")
           c.train.optimizer = Optimizer::adam;
         else
           throw Error(ErrorCode::config, "train.optimizer must be sgd or adam");
       },
       [](const ExperimentConfig& c) { return std::string(c.train.optimizer == Optimizer::sgd ? "sgd" : "adam"); }},
      SITEFB_NUM_KEY("train.adam_beta1", train.adam_beta1, double),
      SITEFB_NUM_KEY("train.adam_beta2", train.adam_beta2, double),
      SITEFB_NUM_KEY("train.adam_eps", train.adam_eps, double),
      SITEFB_NUM_KEY("train.ridge_eps", train.ridge_eps, double),
      {"train.probing_init",
       [](ExperimentConfig& c, const std::string& v) {
         const auto t = trim(v);
         if (t == "dft")
           c.train.probing_init = ProbingInit::dft;
         else if (t == "random")
           c.train.probing_init = ProbingInit::random;
         else
           throw Error(ErrorCode::config, "train.probing_init must be dft or random");
       },
       [](const ExperimentConfig& c) { return std::string(c.train.probing_init == ProbingInit::dft ? "dft" : "random"); }},
      SITEFB_NUM_KEY("train.threads", train.threads, int),
      SITEFB_NUM_KEY("train.noise_mu_db", train.noise.mu_b, double),
      SITEFB_NUM_KEY("train.noise_sigma_db", train.noise.sigma_b, double),
      SITEFB_NUM_KEY("train.p_ssb", train.noise.p_ssb, double),
      {"train.noise_enabled", [](ExperimentConfig& c, const std::string& v) { c.train.noise.enabled = parse_bool("train.noise_enabled", v); },
       [](const ExperimentConfig& c) { return std::string(c.train.noise.enabled ? "true" : "false"); }},
      SITEFB_NUM_KEY("samples.train", counts.train, std::size_t),
      SITEFB_NUM_KEY("samples.val", counts.val, std::size_t),
      SITEFB_NUM_KEY("samples.test", counts.test, std::size_t),
      {"experiment.convergence_kq", [](ExperimentConfig& c, const std::string& v) { c.grid.convergence_kq = parse_pairs("experiment.convergence_kq", v); },
       [](const ExperimentConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.grid.convergence_kq.size(); ++i)
           out += (i ? "," : "") + std::to_string(c.grid.convergence_kq[i].first) + ":" +
                  std::to_string(c.grid.convergence_kq[i].second);
         return out;
       }},
      {"experiment.pareto_k", [](ExperimentConfig& c, const std::string& v) { c.grid.pareto_k = parse_list<int>("experiment.pareto_k", v); },
       [](const ExperimentConfig& c) { return join(c.grid.pareto_k); }},
      {"experiment.pareto_q", [](ExperimentConfig& c, const std::string& v) { c.grid.pareto_q = parse_list<int>("experiment.pareto_q", v); },
       [](const ExperimentConfig& c) { return join(c.grid.pareto_q); }},
      {"experiment.snr_db", [](ExperimentConfig& c, const std::string& v) { c.grid.snr_db = parse_list<double>("experiment.snr_db", v); },
       [](const ExperimentConfig& c) { return join(c.grid.snr_db); }},
      SITEFB_NUM_KEY("experiment.cdf_snr_db", grid.cdf_snr_db, double),
      {"experiment.angular_samples", [](ExperimentConfig& c, const std::string& v) { c.grid.angular_samples = parse_list<std::size_t>("experiment.angular_samples", v); },
       [](const ExperimentConfig& c) { return join(c.grid.angular_samples); }},
      SITEFB_NUM_KEY("experiment.angular_grid", grid.angular_grid, int),
      {"output.dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = trim(v); },
       [](const ExperimentConfig& c) { return c.output_dir.string(); }},
  };
  return table;
}

#undef SITEFB_NUM_KEY

const Key* find_key(const std::string& path) {
  for (const auto& k : keys())
    if (k.path == path) return &k;
  return nullptr;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    site.validate();
    link.validate();
    train.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  if (schemes.oversample < 1) throw Error(ErrorCode::config, "schemes.oversample must be >= 1");
  if (schemes.q < 1 || schemes.q > site.n_t) throw Error(ErrorCode::config, "schemes.q must lie in [1, n_t]");
  if (schemes.n_p < 1 || schemes.n_p > site.n_t) throw Error(ErrorCode::config, "schemes.n_p must lie in [1, n_t]");
  if (schemes.k < 1) throw Error(ErrorCode::config, "schemes.k must be >= 1");
  if (train.k != schemes.k || train.q != schemes.q)
    throw Error(ErrorCode::config, "training K/Q differ from scheme K/Q");
  if (counts.train < 1 || counts.val < 1 || counts.test < 1) throw Error(ErrorCode::config, "sample counts must be >= 1");
  if (counts.train < static_cast<std::size_t>(train.batch_size))
    throw Error(ErrorCode::config, "samples.train is smaller than train.batch_size");
  for (auto [k, q] : grid.convergence_kq)
    if (k < 1 || q < 1 || q > site.n_t) throw Error(ErrorCode::config, "experiment.convergence_kq has an invalid pair");
  if (grid.pareto_k.empty() || grid.pareto_q.empty()) throw Error(ErrorCode::config, "pareto grids must be nonempty");
  for (int k : grid.pareto_k)
    if (k < 1) throw Error(ErrorCode::config, "experiment.pareto_k entries must be >= 1");
  for (int q : grid.pareto_q)
    if (q < 1 || q > site.n_t) throw Error(ErrorCode::config, "experiment.pareto_q entries must lie in [1, n_t]");
  if (grid.angular_grid < 2) throw Error(ErrorCode::config, "experiment.angular_grid must be >= 2");
  if (output_dir.empty()) throw Error(ErrorCode::config, "output.dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config, e.what());
  }

  ExperimentConfig cfg;
  bool rho_given = false;
  for (const auto& [name, node] : tree) {
    std::vector<std::pair<std::string, std::string>> entries;
    if (node.empty())
      entries.emplace_back(name, node.data());
    else
      for (const auto& [key, leaf] : node) entries.emplace_back(name + "." + key, leaf.data());
    for (const auto& [path, value] : entries) {
      const Key* k = find_key(path);
      if (!k) throw Error(ErrorCode::config, "unknown key " + path);
      k->set(cfg, value);
      rho_given = rho_given || path == "link.rho";
    }
  }
  if (!rho_given) {
    const int t_ssb = cfg.link.t_ssb;
    cfg.link = LinkParams::from_budget(cfg.link.p_t_dbm, cfg.link.bw_hz, cfg.link.noise_psd_dbm_hz, cfg.link.t_c);
    cfg.link.t_ssb = t_ssb;
  }
  cfg.train.k = cfg.schemes.k;
  cfg.train.q = cfg.schemes.q;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  // The output directory is left out so reruns into different directories
  // produce identical summaries.
  for (const auto& k : keys())
    if (k.path != "output.dir") out.emplace_back(k.path, k.get(cfg));
  return out;
}

}  // namespace sitefb
