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

#ifndef SITEFB_SCHEMES_HPP
#define SITEFB_SCHEMES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sitefb/channel.hpp"
#include "sitefb/numkernel.hpp"
#include "sitefb/probing.hpp"

namespace sitefb {

// Subspace with an orthonormal basis (n_t x q).
class Subspace {
 public:
  // Orthonormalizes `spanning` (rank-revealing); the dimension may be smaller
  // than the number of input columns.
  static Subspace from_span(const CMat& spanning, double tol = 1e-8);
  // Adopts an already-orthonormal basis; throws invalid_argument when
  // ||U^H U - I||_max exceeds 1e-10.
  static Subspace from_orthonormal(CMat basis);

  const CMat& basis() const { return basis_; }
  int n_t() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  CMat projector() const { return sitefb::projector(basis_); }

 private:
  explicit Subspace(CMat basis) : basis_(std::move(basis)) {}
  CMat basis_;
};

enum class Scheme { type1, type2, psc, proposed };

const char* to_string(Scheme s);

struct FeedbackReport {
  Scheme scheme = Scheme::type1;
  std::vector<int> indices;  // z_I, S_II or S_PSC
  CVec coefficients;         // alpha_II, alpha_PSC or z_p
};

// Outcome flags (bitmask).
enum OutcomeFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagRankDropped = 1u << 0,           // type2 dropped a dependent beam
  kFlagDegenerateProjection = 1u << 1,  // P h == 0, beamformer falls back
  kFlagReducedRank = 1u << 2,           // decoded basis had rank below q
};

struct LinkParams {
  double rho = 1e14;  // linear SNR P_t / sigma_n^2
  int t_c = 1000;     // coherence block length in channel uses
  int t_ssb = 0;      // shared SSB sweep cost, charged to every scheme alike
  double p_t_dbm = 40.0;
  double bw_hz = 10e6;
  double noise_psd_dbm_hz = -170.0;

  // rho_dB = P_t - (S_n + 10 log10 BW).
  static LinkParams from_budget(double p_t_dbm, double bw_hz, double noise_psd_dbm_hz, int t_c);
  void validate() const;
};

struct FeedbackOutcome {
  FeedbackReport report;
  CVec h_hat;
  CVec w_hat;
  double eta = 0.0;
  double rate_bps_hz = 0.0;
  int overhead_uses = 0;
  double effective_se = 0.0;
  std::uint32_t flags = kFlagNone;
  int q_or_np = 0;
};

// Feedback overhead in channel uses (shared SSB sweep excluded).
int overhead_type1(int n_t);
int overhead_type2(int n_t, int q);
int overhead_psc(int n_t, int n_p);
int overhead_proposed(int k, int q);

CVec project(const Subspace& sub, std::span<const cplx> h);
double capture_efficiency(const Subspace& sub, std::span<const cplx> h);

double achievable_rate(double rho, double captured_energy);
// (1 - T_o / T_c) log2(1 + rho * captured_energy), zero when T_o >= T_c.
double effective_se(double captured_energy, int overhead_uses, const LinkParams& link);

FeedbackOutcome type1(std::span<const cplx> h, const Codebook& quant, const LinkParams& link);
FeedbackOutcome type2(std::span<const cplx> h, const Codebook& quant, int q, const LinkParams& link);
FeedbackOutcome psc(std::span<const cplx> h, int n_p, const LinkParams& link);
FeedbackOutcome proposed(std::span<const cplx> h, const Subspace& sub, int k_probe, const LinkParams& link);

// Span of the steering vectors of the min(q, L) strongest paths.
Subspace oracle_subspace(const PathSet& paths, int q, int n_t);

struct MismatchBound {
  double delta = 0.0;
  double lower_bound_eta = 0.0;
};

// delta = ||P_inferred - P_oracle||_2, bound = [eta_oracle - delta]_+.
MismatchBound mismatch_bound(const Subspace& inferred, const Subspace& oracle, std::span<const cplx> h);

// G(u) = a(u)^H P a(u) on the uniform grid u_i = -0.5 + i / grid_points.
RVec angular_response(const Subspace& sub, int grid_points, bool normalize_max = false);
RVec angular_grid(int grid_points);

// Fixed-column serialization of outcome records.
inline constexpr const char* kOutcomeCsvHeader = "sample_id,scheme,q_or_np,eta,rate,overhead,effective_se,flags";
std::string outcome_csv_row(std::size_t sample_id, const FeedbackOutcome& o);
std::string outcome_jsonl_row(std::size_t sample_id, const FeedbackOutcome& o);

// Shortest round-trip decimal form; deterministic across runs.
std::string format_double(double v);

}  // namespace sitefb

#endif  // SITEFB_SCHEMES_HPP
