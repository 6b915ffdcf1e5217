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

#include "sitefb/schemes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "sitefb/error.hpp"

namespace sitefb {

namespace {

// Candidates whose component outside the current span has squared norm below
// this are treated as already contained in it.
constexpr double kDependentBeamTol = 1e-10;

// Degenerate-projection threshold relative to ||h||^2.
constexpr double kDegenerateRatio = 1e-30;

// A swap must raise the captured energy by this fraction of ||h||^2.
constexpr double kSwapGain = 1e-13;

struct Addition {
  std::optional<std::size_t> beam;
  double captured = 0.0;  // ||P h||^2 after adding `beam` to the fixed set
};

// Codeword (outside `exclude`) whose addition to span(beams[:, fixed])
// captures the most channel energy. Lowest index wins ties.
Addition best_addition(const CMat& beams, std::span<const cplx> h, std::span<const int> fixed,
                       std::span<const int> exclude) {
  std::vector<CVec> basis;
  for (int f : fixed) {
    CVec v = beams.col(static_cast<std::size_t>(f));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const cplx c = dot(b, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
      }
    const double nv = norm(v);
    if (nv <= 1e-12) continue;
    for (auto& x : v) x /= nv;
    basis.push_back(std::move(v));
  }
  CVec residual(h.begin(), h.end());
  for (const auto& b : basis) {
    const cplx c = dot(b, residual);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= c * b[i];
  }
  const double base = norm_sq(h) - norm_sq(residual);
  const CVec corr = matmul_herm(beams, residual);
  std::vector<double> inside(beams.cols(), 0.0);
  for (const auto& b : basis) {
    const CVec proj = matmul_herm(beams, b);
    for (std::size_t m = 0; m < inside.size(); ++m) inside[m] += std::norm(proj[m]);
  }

  Addition best;
  double best_gain = -1.0;
  for (std::size_t m = 0; m < beams.cols(); ++m) {
    if (std::find(exclude.begin(), exclude.end(), static_cast<int>(m)) != exclude.end()) continue;
    double col_energy = 0.0;
    for (std::size_t i = 0; i < beams.rows(); ++i) col_energy += std::norm(beams(i, m));
    const double outside = col_energy - inside[m];
    if (outside <= kDependentBeamTol * col_energy) continue;
    const double gain = std::norm(corr[m]) / outside;
    if (gain > best_gain) {
      best_gain = gain;
      best.beam = m;
    }
  }
  best.captured = base + std::max(best_gain, 0.0);
  return best;
}

constexpr std::size_t kPoolSize = 12;

struct Pooled {
  std::vector<int> beams;
  double captured = 0.0;
};

// Exhaustive search over size-q subsets of the kPoolSize codewords with the
// largest single-beam correlation. Depth-first so that each prefix is
// orthogonalized once.
Pooled best_pooled_subset(const CMat& beams, std::span<const cplx> h, int q) {
  const CVec corr = matmul_herm(beams, h);
  std::vector<int> pool(beams.cols());
  std::iota(pool.begin(), pool.end(), 0);
  std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
    return std::norm(corr[static_cast<std::size_t>(a)]) > std::norm(corr[static_cast<std::size_t>(b)]);
  });
  pool.resize(std::min(pool.size(), kPoolSize));
  const auto depth = static_cast<std::size_t>(std::min<int>(q, static_cast<int>(pool.size())));

  Pooled best;
  std::vector<int> chosen;
  std::vector<CVec> basis;
  auto descend = [&](auto&& self, std::size_t from, double captured) -> void {
    if (chosen.size() == depth) {
      if (captured > best.captured) best = {chosen, captured};
      return;
    }
    for (std::size_t i = from; i + (depth - chosen.size()) <= pool.size(); ++i) {
      const int m = pool[i];
      CVec v = beams.col(static_cast<std::size_t>(m));
      const double col_energy = norm_sq(v);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          const cplx c = dot(b, v);
          for (std::size_t r = 0; r < v.size(); ++r) v[r] -= c * b[r];
        }
      const double nv = norm(v);
      if (nv * nv <= kDependentBeamTol * col_energy) continue;
      for (auto& x : v) x /= nv;
      const double gain = std::norm(dot(v, h));
      chosen.push_back(m);
      basis.push_back(std::move(v));
      self(self, i + 1, captured + gain);
      basis.pop_back();
      chosen.pop_back();
    }
  };
  descend(descend, 0, 0.0);
  return best;
}

void check_length(std::span<const cplx> h, std::size_t n_t, const char* who) {
  if (h.size() != n_t) throw Error(ErrorCode::dimension_mismatch, std::string(who) + ": channel length differs from n_t");
}

void finish(FeedbackOutcome& o, std::span<const cplx> h, const LinkParams& link) {
  const double captured = std::norm(dot(h, o.w_hat));
  o.rate_bps_hz = achievable_rate(link.rho, captured);
  o.effective_se = effective_se(captured, o.overhead_uses, link);
}

}  // namespace

Subspace Subspace::from_span(const CMat& spanning, double tol) { return Subspace(orthonormalize(spanning, tol)); }

Subspace Subspace::from_orthonormal(CMat basis) {
  if (basis.cols() < 1 || basis.cols() > basis.rows())
    throw Error(ErrorCode::invalid_argument, "Subspace: need 1 <= q <= n_t");
  if (max_abs(matmul_herm(basis, basis) - CMat::identity(basis.cols())) > 1e-10)
    throw Error(ErrorCode::invalid_argument, "Subspace: basis is not orthonormal");
  return Subspace(std::move(basis));
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::type1: return "type1";
    case Scheme::type2: return "type2";
    case Scheme::psc: return "psc";
    case Scheme::proposed: return "proposed";
  }
  return "unknown";
}

LinkParams LinkParams::from_budget(double p_t_dbm, double bw_hz, double noise_psd_dbm_hz, int t_c) {
  LinkParams link;
  link.p_t_dbm = p_t_dbm;
  link.bw_hz = bw_hz;
  link.noise_psd_dbm_hz = noise_psd_dbm_hz;
  link.t_c = t_c;
  const double rho_db = p_t_dbm - (noise_psd_dbm_hz + 10.0 * std::log10(bw_hz));
  link.rho = std::pow(10.0, rho_db / 10.0);
  link.validate();
  return link;
}

void LinkParams::validate() const {
  if (!(rho > 0.0)) throw Error(ErrorCode::invalid_argument, "LinkParams: rho must be positive");
  if (t_c <= 0) throw Error(ErrorCode::invalid_argument, "LinkParams: t_c must be positive");
  if (t_ssb < 0) throw Error(ErrorCode::invalid_argument, "LinkParams: t_ssb must be non-negative");
}

int overhead_type1(int n_t) { return n_t + 1; }
int overhead_type2(int n_t, int q) { return n_t + 2 * q; }
int overhead_psc(int n_t, int n_p) { return n_t + 2 * n_p; }
int overhead_proposed(int k, int q) { return k + 2 * q; }

CVec project(const Subspace& sub, std::span<const cplx> h) {
  check_length(h, sub.basis().rows(), "project");
  return matmul(sub.basis(), matmul_herm(sub.basis(), h));
}

double capture_efficiency(const Subspace& sub, std::span<const cplx> h) {
  check_length(h, sub.basis().rows(), "capture_efficiency");
  require_nonzero_channel(h);
  // ||P h||^2 = ||U^H h||^2 for orthonormal U.
  const double eta = norm_sq(matmul_herm(sub.basis(), h)) / norm_sq(h);
  return std::clamp(eta, 0.0, 1.0);
}

double achievable_rate(double rho, double captured_energy) { return std::log2(1.0 + rho * captured_energy); }

double effective_se(double captured_energy, int overhead_uses, const LinkParams& link) {
  if (overhead_uses < 0) throw Error(ErrorCode::invalid_argument, "effective_se: negative overhead");
  const int total = overhead_uses + link.t_ssb;
  if (total >= link.t_c) return 0.0;
  const double frac = 1.0 - static_cast<double>(total) / static_cast<double>(link.t_c);
  return frac * achievable_rate(link.rho, captured_energy);
}

FeedbackOutcome type1(std::span<const cplx> h, const Codebook& quant, const LinkParams& link) {
  check_length(h, quant.beams.rows(), "type1");
  require_nonzero_channel(h);
  const CVec corr = matmul_herm(quant.beams, h);
  std::size_t best = 0;
  for (std::size_t m = 1; m < corr.size(); ++m)
    if (std::norm(corr[m]) > std::norm(corr[best])) best = m;

  FeedbackOutcome o;
  o.report.scheme = Scheme::type1;
  o.report.indices = {static_cast<int>(best)};
  o.h_hat = quant.beam(best);
  o.w_hat = o.h_hat;
  o.eta = std::clamp(std::norm(corr[best]) / norm_sq(h), 0.0, 1.0);
  o.overhead_uses = overhead_type1(quant.n_t());
  o.q_or_np = 1;
  finish(o, h, link);
  return o;
}

FeedbackOutcome type2(std::span<const cplx> h, const Codebook& quant, int q, const LinkParams& link) {
  const int n_t = quant.n_t();
  check_length(h, quant.beams.rows(), "type2");
  if (q < 1 || q > n_t) throw Error(ErrorCode::invalid_argument, "type2: need 1 <= q <= n_t");
  require_nonzero_channel(h);

  std::uint32_t flags = kFlagNone;
  const double energy = norm_sq(h);
  std::vector<int> selected;
  double captured_sel = 0.0;

  // Greedy residual-projection selection; after every addition the set is
  // polished by best-improvement single swaps. Each step starts from the
  // previous step's set, so capture never decreases with q.
  for (int step = 0; step < q; ++step) {
    const auto add = best_addition(quant.beams, h, selected, selected);
    if (!add.beam) {
      flags |= kFlagRankDropped;
      break;
    }
    selected.push_back(static_cast<int>(*add.beam));
    captured_sel = add.captured;

    for (int sweep = 0; sweep < 8 * q; ++sweep) {
      std::optional<std::pair<std::size_t, std::size_t>> swap;
      double best = captured_sel + kSwapGain * energy;
      for (std::size_t pos = 0; pos < selected.size(); ++pos) {
        std::vector<int> rest = selected;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
        const auto alt = best_addition(quant.beams, h, rest, selected);
        if (alt.beam && alt.captured > best) {
          best = alt.captured;
          swap = {pos, *alt.beam};
        }
      }
      if (!swap) break;
      selected[swap->first] = static_cast<int>(swap->second);
      captured_sel = best;
    }
  }

  // Swaps cannot leave a local optimum that differs in two or more beams, so
  // the subsets of the strongest single-beam candidates are also searched.
  if (!selected.empty()) {
    auto pooled = best_pooled_subset(quant.beams, h, static_cast<int>(selected.size()));
    if (pooled.captured > captured_sel + kSwapGain * energy) {
      selected = std::move(pooled.beams);
      captured_sel = pooled.captured;
    }
  }

  // UE-side least-squares coefficients over the selected beams; a beam that
  // makes the system numerically singular is dropped.
  CVec alpha;
  CMat d_sel;
  while (!selected.empty()) {
    std::vector<CVec> cols;
    for (int m : selected) cols.push_back(quant.beam(static_cast<std::size_t>(m)));
    d_sel = CMat::from_columns(cols);
    try {
      alpha = least_squares(d_sel, h, 0.0);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::rank_deficient) throw;
      selected.pop_back();
      flags |= kFlagRankDropped;
    }
  }

  FeedbackOutcome o;
  o.report.scheme = Scheme::type2;
  o.report.indices = selected;
  o.report.coefficients = alpha;
  o.h_hat = matmul(d_sel, alpha);
  const double captured = norm_sq(o.h_hat);
  o.w_hat = (1.0 / std::sqrt(captured)) * o.h_hat;
  o.eta = std::clamp(captured / norm_sq(h), 0.0, 1.0);
  o.overhead_uses = overhead_type2(n_t, q);
  o.q_or_np = q;
  o.flags = flags;
  finish(o, h, link);
  return o;
}

FeedbackOutcome psc(std::span<const cplx> h, int n_p, const LinkParams& link) {
  const int n_t = static_cast<int>(h.size());
  if (n_p < 1 || n_p > n_t) throw Error(ErrorCode::invalid_argument, "psc: need 1 <= n_p <= n_t");
  require_nonzero_channel(h);
  std::vector<int> order(h.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::norm(h[static_cast<std::size_t>(a)]) > std::norm(h[static_cast<std::size_t>(b)]); });
  order.resize(static_cast<std::size_t>(n_p));

  FeedbackOutcome o;
  o.report.scheme = Scheme::psc;
  o.report.indices = order;
  o.h_hat.assign(h.size(), 0.0);
  double captured = 0.0;
  for (int i : order) {
    const auto idx = static_cast<std::size_t>(i);
    o.report.coefficients.push_back(h[idx]);
    o.h_hat[idx] = h[idx];
    captured += std::norm(h[idx]);
  }
  o.w_hat = (1.0 / std::sqrt(captured)) * o.h_hat;
  o.eta = std::clamp(captured / norm_sq(h), 0.0, 1.0);
  o.overhead_uses = overhead_psc(n_t, n_p);
  o.q_or_np = n_p;
  finish(o, h, link);
  return o;
}

FeedbackOutcome proposed(std::span<const cplx> h, const Subspace& sub, int k_probe, const LinkParams& link) {
  check_length(h, sub.basis().rows(), "proposed");
  require_nonzero_channel(h);
  FeedbackOutcome o;
  o.report.scheme = Scheme::proposed;
  o.report.coefficients = matmul_herm(sub.basis(), h);  // z_p = C_p^H h
  o.h_hat = matmul(sub.basis(), o.report.coefficients);
  o.overhead_uses = overhead_proposed(k_probe, sub.dim());
  o.q_or_np = sub.dim();
  const double captured = norm_sq(o.h_hat);
  if (!(captured > kDegenerateRatio * norm_sq(h))) {
    // No usable direction: report zero efficiency and fall back to the first
    // basis vector so the beamformer stays finite and unit norm.
    o.flags |= kFlagDegenerateProjection;
    o.w_hat = sub.basis().col(0);
    o.eta = 0.0;
    o.rate_bps_hz = 0.0;
    o.effective_se = 0.0;
    return o;
  }
  o.w_hat = (1.0 / std::sqrt(captured)) * o.h_hat;
  o.eta = std::clamp(captured / norm_sq(h), 0.0, 1.0);
  finish(o, h, link);
  return o;
}

Subspace oracle_subspace(const PathSet& paths, int q, int n_t) {
  if (paths.empty()) throw Error(ErrorCode::unavailable, "oracle_subspace: channel has no path decomposition");
  if (q < 1) throw Error(ErrorCode::invalid_argument, "oracle_subspace: q must be positive");
  paths.validate();
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(paths.gains[a]) > std::abs(paths.gains[b]); });
  order.resize(std::min(order.size(), static_cast<std::size_t>(q)));
  std::vector<CVec> cols;
  for (auto l : order) cols.push_back(steering(paths.spatial_freqs[l], n_t));
  return Subspace::from_span(CMat::from_columns(cols));
}

MismatchBound mismatch_bound(const Subspace& inferred, const Subspace& oracle, std::span<const cplx> h) {
  const double eta_star = capture_efficiency(oracle, h);
  MismatchBound b;
  b.delta = spectral_norm(inferred.projector() - oracle.projector());
  b.lower_bound_eta = std::max(eta_star - b.delta, 0.0);
  return b;
}

RVec angular_grid(int grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::invalid_argument, "angular grid needs at least 2 points");
  RVec u(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) u[static_cast<std::size_t>(i)] = -0.5 + static_cast<double>(i) / grid_points;
  return u;
}

RVec angular_response(const Subspace& sub, int grid_points, bool normalize_max) {
  const RVec grid = angular_grid(grid_points);
  RVec g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    g[i] = std::clamp(norm_sq(matmul_herm(sub.basis(), steering(grid[i], sub.n_t()))), 0.0, 1.0);
  if (normalize_max) {
    const double peak = *std::max_element(g.begin(), g.end());
    if (peak > 0.0)
      for (auto& v : g) v /= peak;
  }
  return g;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string outcome_csv_row(std::size_t sample_id, const FeedbackOutcome& o) {
  return std::to_string(sample_id) + "," + to_string(o.report.scheme) + "," + std::to_string(o.q_or_np) + "," +
         format_double(o.eta) + "," + format_double(o.rate_bps_hz) + "," + std::to_string(o.overhead_uses) + "," +
         format_double(o.effective_se) + "," + std::to_string(o.flags);
}

std::string outcome_jsonl_row(std::size_t sample_id, const FeedbackOutcome& o) {
  return "{\"sample_id\":" + std::to_string(sample_id) + ",\"scheme\":\"" + to_string(o.report.scheme) +
         "\",\"q_or_np\":" + std::to_string(o.q_or_np) + ",\"eta\":" + format_double(o.eta) +
         ",\"rate\":" + format_double(o.rate_bps_hz) + ",\"overhead\":" + std::to_string(o.overhead_uses) +
         ",\"effective_se\":" + format_double(o.effective_se) + ",\"flags\":" + std::to_string(o.flags) + "}";
}

}  // namespace sitefb
