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

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "sitefb/binio.hpp"
#include "sitefb/channel.hpp"
#include "sitefb/error.hpp"
#include "support.hpp"

using namespace sitefb;
using namespace sitefb::testing;

namespace {

// |a(u1)^H a(u2)|^2 in closed form.
double dirichlet_sq(double delta, int n) {
  const double den = std::sin(std::numbers::pi * delta);
  if (std::abs(den) < 1e-15) return 1.0;
  const double v = std::sin(std::numbers::pi * n * delta) / den;
  return v * v / (static_cast<double>(n) * n);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("steering: broadside vector and unit norm") {
  const CVec a = steering(0.0, 4);
  for (const auto& x : a) CHECK(std::abs(x - cplx(0.5, 0.0)) < 1e-15);
  for (int i = 0; i < 1000; ++i) {
    const double u = -0.5 + i / 1000.0;
    CHECK(std::abs(norm(steering(u, 37)) - 1.0) < 1e-14);
  }
}

TEST_CASE("steering: inner products follow the Dirichlet kernel") {
  Rng rng(1);
  for (int n : {4, 16, 64})
    for (int t = 0; t < 50; ++t) {
      const double u1 = rng.uniform(-0.5, 0.5), u2 = rng.uniform(-0.5, 0.5);
      const double direct = std::norm(dot(steering(u1, n), steering(u2, n)));
      CHECK(std::abs(direct - dirichlet_sq(u1 - u2, n)) < 1e-12);
    }
}

TEST_CASE("steering: integer multiples of 1/N_t are orthogonal") {
  for (int n : {8, 16, 64})
    for (int k = 1; k < n; ++k) {
      const double u1 = -0.31;
      CHECK(std::abs(dot(steering(u1, n), steering(wrap_spatial_freq(u1 + double(k) / n), n))) < 1e-12);
    }
}

TEST_CASE("assemble: single path, cancellation and expansion consistency") {
  const auto one = assemble({{cplx(1.0)}, {0.0}}, 8);
  CHECK(max_abs_diff(one.h, steering(0.0, 8)) < 1e-15);

  const auto zero = assemble({{cplx(1.0), cplx(-1.0)}, {0.1, 0.1}}, 8);
  CHECK(norm(zero.h) < 1e-15);
  CHECK(code_of([&] { require_nonzero_channel(zero.h); }) == ErrorCode::degenerate_channel);

  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    PathSet ps;
    for (int l = 0; l < 3; ++l) {
      ps.gains.push_back(rng.complex_normal());
      ps.spatial_freqs.push_back(rng.uniform(-0.5, 0.5));
    }
    const auto ch = assemble(ps, 16);
    const CVec redo = matmul(steering_matrix(ps, 16), ps.gains);
    CHECK(max_abs_diff(ch.h, redo) < 1e-12);
  }
}

TEST_CASE("assemble: energy equals the Gram form and nearly sum |alpha|^2 when separated") {
  const int n = 32;
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    PathSet ps;
    const double base = rng.uniform(-0.5, 0.5);
    for (int l = 0; l < 3; ++l) {
      ps.gains.push_back(rng.complex_normal());
      ps.spatial_freqs.push_back(wrap_spatial_freq(base + l * (2.0 / n + rng.uniform(0.0, 0.1))));
    }
    const auto ch = assemble(ps, n);
    const CMat a = steering_matrix(ps, n);
    const double gram = dot(ps.gains, matmul(matmul_herm(a, a), ps.gains)).real();
    CHECK(std::abs(norm_sq(ch.h) - gram) < 1e-12 * gram);
    double power = 0.0;
    for (auto g : ps.gains) power += std::norm(g);
    // Cross terms are bounded by the orthogonality residual.
    const double res = orthogonality_residual(ps, n);
    double cross = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != j) cross += std::abs(ps.gains[i]) * std::abs(ps.gains[j]) * res;
    CHECK(std::abs(norm_sq(ch.h) - power) <= cross + 1e-12);
  }
}

TEST_CASE("orthogonality_residual: closed forms") {
  CHECK(orthogonality_residual({{cplx(1.0)}, {0.2}}, 16) < 1e-15);
  CHECK(orthogonality_residual({{cplx(1.0), cplx(2.0)}, {0.1, 0.1 + 3.0 / 16}}, 16) < 1e-12);
  const double expect = std::sqrt(dirichlet_sq(1.0 / 32, 16));
  CHECK(std::abs(orthogonality_residual({{cplx(1.0), cplx(1.0)}, {0.0, 1.0 / 32}}, 16) - expect) < 1e-12);
  CHECK(code_of([] { orthogonality_residual({}, 16); }) == ErrorCode::unavailable);
}

TEST_CASE("sample_site: collinear degenerate site") {
  SiteModel m;
  m.n_t = 8;
  m.cluster_centers = {0.13};
  m.gain_profile_db = {-100};
  m.cluster_spread = 0.0;
  m.gain_sigma_db = 0.0;
  m.path_count_min = m.path_count_max = 1;
  const auto ds = sample_site(m, 20, 4);
  for (const auto& a : ds.samples)
    for (const auto& b : ds.samples) CHECK(std::abs(std::abs(dot(a.h, b.h)) / (norm(a.h) * norm(b.h)) - 1.0) < 1e-12);
}

TEST_CASE("sample_site: deterministic and respects model ranges") {
  SiteModel m;
  const auto a = sample_site(m, 50, 9), b = sample_site(m, 50, 9), c = sample_site(m, 50, 10);
  bool differs = false;
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(a.samples[i].h == b.samples[i].h);
    differs = differs || a.samples[i].h != c.samples[i].h;
    const auto& p = a.samples[i].paths;
    CHECK(p.size() >= 2);
    CHECK(p.size() <= 4);
    for (double u : p.spatial_freqs) {
      bool near = false;
      for (double ctr : m.cluster_centers) near = near || std::abs(u - ctr) <= m.cluster_spread + 1e-15;
      CHECK(near);
    }
  }
  CHECK(differs);
  CHECK(a.origin == DatasetOrigin::synthetic);
}

TEST_CASE("sample_site: mean path power tracks the profile") {
  SiteModel m;
  m.cluster_centers = {0.0};
  m.gain_profile_db = {-100};
  const auto ds = sample_site(m, 1000, 11);
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& s : ds.samples)
    for (auto g : s.paths.gains) {
      acc += 10.0 * std::log10(std::norm(g));
      ++n;
    }
  CHECK(std::abs(acc / n + 100.0) < 1.0);
}

TEST_CASE("dataset: bit-exact round trip and structured errors") {
  const auto dir = temp_dir("channel");
  SiteModel m;
  m.n_t = 8;
  auto ds = sample_site(m, 10, 3);
  ds.samples[2].paths = {};  // imported-style sample without paths
  save_dataset(ds, dir / "d.blch");
  const auto back = load_dataset(dir / "d.blch");
  REQUIRE(back.size() == 10);
  CHECK(back.n_t == 8);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(back.samples[i].h == ds.samples[i].h);
    CHECK(back.samples[i].paths.gains == ds.samples[i].paths.gains);
    CHECK(back.samples[i].paths.spatial_freqs == ds.samples[i].paths.spatial_freqs);
  }
  CHECK_FALSE(back.samples[2].has_paths());

  CHECK(code_of([&] { load_dataset(dir / "d.blch", 16); }) == ErrorCode::dimension_mismatch);

  auto bytes = binio::Reader::open(dir / "d.blch");
  std::vector<std::uint8_t> raw;
  while (bytes.remaining()) raw.push_back(bytes.u8());

  auto write = [&](const std::vector<std::uint8_t>& data, const char* name) {
    std::ofstream(dir / name, std::ios::binary).write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    return dir / name;
  };
  auto bad_magic = raw;
  bad_magic[0] = 'X';
  CHECK(code_of([&] { load_dataset(write(bad_magic, "m.blch")); }) == ErrorCode::format);

  // Declared count 10 but only 9 records present.
  auto short_file = raw;
  const std::size_t last = ds.samples[9].paths.size();
  short_file.resize(raw.size() - (2 + last * 24 + 8 * 16));
  CHECK(code_of([&] { load_dataset(write(short_file, "t.blch")); }) == ErrorCode::truncation);

  auto trailing = raw;
  trailing.push_back(0);
  CHECK(code_of([&] { load_dataset(write(trailing, "x.blch")); }) == ErrorCode::format);
  std::filesystem::remove_all(dir);
}
