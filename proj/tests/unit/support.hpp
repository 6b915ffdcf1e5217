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

// Shared helpers for the unit tests: random instances and oracles that do
// not reuse the library's own factorizations.
#ifndef SITEFB_TEST_SUPPORT_HPP
#define SITEFB_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sitefb/learn.hpp"
#include "sitefb/numkernel.hpp"
#include "sitefb/rng.hpp"

namespace sitefb::testing {

inline CMat random_cmat(std::size_t rows, std::size_t cols, Rng& rng) {
  CMat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.complex_normal();
  return m;
}

inline CVec random_cvec(std::size_t n, Rng& rng) {
  CVec v(n);
  for (auto& x : v) x = rng.complex_normal();
  return v;
}

inline CVec random_unit(std::size_t n, Rng& rng) {
  CVec v = random_cvec(n, rng);
  const double s = norm(v);
  for (auto& x : v) x /= s;
  return v;
}

inline double max_abs_diff(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Gauss-Jordan inverse with partial pivoting.
inline CMat gauss_jordan_inverse(CMat a) {
  const std::size_t n = a.rows();
  CMat inv = CMat::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) == 0.0) throw std::runtime_error("singular");
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const cplx d = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const cplx f = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

// C (C^H C)^{-1} C^H from the normal equations.
inline CMat gram_projector(const CMat& c) {
  return matmul(matmul(c, gauss_jordan_inverse(matmul_herm(c, c))), c.herm());
}

// Largest |x^H D x| over unit x for Hermitian D: dense random search over the
// range of D followed by shifted Rayleigh-quotient ascent from the best starts.
// The unrefined sampled maximum is reported through `sampled_max`.
inline double rayleigh_oracle(const CMat& d, const CMat& range_basis, Rng& rng, int samples,
                              double* sampled_max = nullptr) {
  const std::size_t r = range_basis.cols();
  auto quotient = [&](const CVec& x) { return dot(x, matmul(d, x)).real(); };
  std::vector<std::pair<double, CVec>> best;
  double raw = 0.0;
  for (int s = 0; s < samples; ++s) {
    const CVec x = matmul(range_basis, random_unit(r, rng));
    const double v = std::abs(quotient(x));
    raw = std::max(raw, v);
    if (best.size() < 16 || v > best.back().first) {
      best.emplace_back(v, x);
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (best.size() > 16) best.pop_back();
    }
  }
  if (sampled_max) *sampled_max = raw;
  double top = raw;
  for (auto [v, x] : best) {
    const double sign = quotient(x) >= 0.0 ? 1.0 : -1.0;
    for (int it = 0; it < 2000; ++it) {
      CVec y = matmul(d, x);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = sign * y[i] + x[i];  // (sign D + I) x
      const double ny = norm(y);
      for (auto& e : y) e /= ny;
      x = std::move(y);
    }
    top = std::max(top, std::abs(quotient(x)));
  }
  return top;
}

// Worst relative error |a - n| / max(|a|, |n|, 1e-6) between reverse-mode
// gradients and central differences of the mean batch loss, per tensor
// (probing re/im parts reported as "B").
inline std::vector<std::pair<std::string, double>> gradient_check(MlpModel m, TrainableProbing b,
                                                                   const ChannelDataset& batch, double ridge_eps,
                                                                   double step = 1e-5) {
  const double n = static_cast<double>(batch.size());
  auto loss = [&] {
    double s = 0.0;
    for (const auto& x : batch.samples) s -= forward_sample(b, m, x.h, {}, 1.0, ridge_eps).eta;
    return s / n;
  };
  std::vector<SampleForward> fwd;
  for (const auto& x : batch.samples) fwd.push_back(forward_sample(b, m, x.h, {}, 1.0, ridge_eps));
  const auto g = backward(m, b, fwd, std::vector<double>(batch.size(), -1.0 / n));
  auto rel = [](double a, double fd) { return std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}); };

  std::vector<std::pair<std::string, double>> out;
  for (const auto& t : m.tensors()) {
    double worst = 0.0;
    for (std::size_t i = t.offset; i < t.offset + t.size; ++i) {
      const double keep = m.theta()[i];
      m.theta()[i] = keep + step;
      const double up = loss();
      m.theta()[i] = keep - step;
      const double down = loss();
      m.theta()[i] = keep;
      worst = std::max(worst, rel(g.theta[i], (up - down) / (2 * step)));
    }
    out.emplace_back(t.name, worst);
  }
  double worst_b = 0.0;
  for (std::size_t i = 0; i < b.b.values().size(); ++i)
    for (int part = 0; part < 2; ++part) {
      cplx& z = b.b.data()[i];
      const cplx keep = z;
      const cplx bump = part ? cplx(0.0, step) : cplx(step, 0.0);
      z = keep + bump;
      const double up = loss();
      z = keep - bump;
      const double down = loss();
      z = keep;
      const cplx a = g.probing.data()[i];
      worst_b = std::max(worst_b, rel(part ? a.imag() : a.real(), (up - down) / (2 * step)));
    }
  out.emplace_back("B", worst_b);
  return out;
}

// Model with LayerNorm affine terms and biases moved off their initial values
// so that every gradient path is exercised.
inline MlpModel perturbed_model(int n_t, int k, int q, int depth, int width, std::uint64_t seed) {
  auto m = MlpModel::init(n_t, k, q, depth, width, seed);
  Rng r(seed + 1);
  for (const auto& layer : m.layers())
    for (std::size_t i = 0; i < layer.out; ++i) {
      m.theta()[layer.ln_scale + i] = 1.0 + 0.3 * r.normal();
      m.theta()[layer.ln_shift + i] = 0.2 * r.normal();
      m.theta()[layer.bias + i] = 0.1 * r.normal();
    }
  return m;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("sitefb_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sitefb::testing

#endif  // SITEFB_TEST_SUPPORT_HPP
