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

#include "doctest.h"
#include "sitefb/error.hpp"
#include "sitefb/numkernel.hpp"
#include "support.hpp"

using namespace sitefb;
using namespace sitefb::testing;

TEST_CASE("matmul_herm: identity, unit column and brute-force oracle") {
  const CVec v{{1.0, 2.0}, {-0.5, 0.25}};
  CHECK(max_abs_diff(matmul_herm(CMat::identity(2), v), v) == 0.0);

  const double s = 1.0 / std::sqrt(3.0);
  const CMat a{{cplx(s, 0)}, {cplx(0, s)}, {cplx(-s, 0)}};
  const CMat g = matmul_herm(a, a);
  CHECK(g.rows() == 1);
  CHECK(std::abs(g(0, 0) - 1.0) < 1e-15);

  Rng rng(11);
  const CMat m = random_cmat(3, 2, rng);
  const CVec b = random_cvec(3, rng);
  const CVec got = matmul_herm(m, b);
  for (std::size_t j = 0; j < 2; ++j) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < 3; ++i) acc += std::conj(m(i, j)) * b[i];
    CHECK(std::abs(got[j] - acc) < 1e-14);
  }
  CHECK_THROWS_AS(matmul_herm(m, CVec(2)), Error);
  CHECK_THROWS_AS(matmul_herm(m, CMat(2, 2)), Error);
}

TEST_CASE("orthonormalize: orthonormal input keeps its span") {
  Rng rng(3);
  const CMat q = orthonormalize(random_cmat(4, 2, rng));
  const CMat u = orthonormalize(q);
  REQUIRE(u.cols() == 2);
  CHECK(max_abs_diff(matmul_herm(u, u), CMat::identity(2)) < 1e-12);
  CHECK(max_abs_diff(projector(u), projector(q)) < 1e-12);
}

TEST_CASE("orthonormalize: duplicated column collapses to rank one") {
  Rng rng(4);
  const CVec a = random_cvec(5, rng);
  const CMat m = CMat::from_columns(std::vector<CVec>{a, a});
  const CMat u = orthonormalize(m);
  CHECK(u.cols() == 1);
  CHECK(std::abs(norm(u.col(0)) - 1.0) < 1e-14);
}

TEST_CASE("orthonormalize: span matches the normal-equation projector") {
  Rng rng(5);
  const CMat c = random_cmat(8, 3, rng);
  const CMat u = orthonormalize(c);
  REQUIRE(u.cols() == 3);
  const CMat p_out = projector(u);
  const CMat p_ref = gram_projector(c);
  for (int t = 0; t < 20; ++t) {
    const CVec x = random_cvec(8, rng);
    CHECK(norm(matmul(p_out, x) - matmul(p_ref, x)) < 1e-10);
  }
}

TEST_CASE("orthonormalize: errors") {
  CHECK_THROWS_AS(orthonormalize(CMat(3, 2)), Error);
  try {
    orthonormalize(CMat(3, 2));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_basis);
  }
  try {
    orthonormalize(CMat(2, 3));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("orthonormalize property: U^H U = I and projector algebra") {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.uniform_index(14);
    const std::size_t k = 1 + rng.uniform_index(n);
    const CMat u = orthonormalize(random_cmat(n, k, rng));
    CHECK(max_abs_diff(matmul_herm(u, u), CMat::identity(u.cols())) < 1e-10);
    const CMat p = projector(u);
    CHECK(max_abs_diff(matmul(p, p), p) < 1e-10);
    CHECK(max_abs_diff(p, p.herm()) < 1e-12);
  }
}

TEST_CASE("least_squares: orthonormal matrix gives a^H b") {
  Rng rng(7);
  const CMat a = orthonormalize(random_cmat(6, 3, rng));
  const CVec b = random_cvec(6, rng);
  CHECK(max_abs_diff(least_squares(a, b), matmul_herm(a, b)) < 1e-12);
}

TEST_CASE("least_squares: b in span(a) has zero residual") {
  Rng rng(8);
  const CMat a = random_cmat(6, 3, rng);
  const CVec b = matmul(a, random_cvec(3, rng));
  const CVec x = least_squares(a, b);
  CHECK(norm(b - matmul(a, x)) < 1e-10);
}

TEST_CASE("least_squares: residual is orthogonal to the columns") {
  Rng rng(9);
  const CMat a = random_cmat(6, 3, rng);
  const CVec b = random_cvec(6, rng);
  const CVec r = b - matmul(a, least_squares(a, b));
  CHECK(norm(matmul_herm(a, r)) < 1e-12 * norm(b) * 10);
}

TEST_CASE("least_squares property: matches the Gram-inverse oracle") {
  Rng rng(10);
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = 3 + rng.uniform_index(10);
    const std::size_t n = 1 + rng.uniform_index(m);
    const CMat a = random_cmat(m, n, rng);
    const CVec b = random_cvec(m, rng);
    const CVec x = least_squares(a, b);
    const CVec ref = matmul(gauss_jordan_inverse(matmul_herm(a, a)), matmul_herm(a, b));
    CHECK(norm(x - ref) <= 1e-9 * norm(ref));

    const double ridge = 0.3;
    CMat gram = matmul_herm(a, a);
    for (std::size_t i = 0; i < n; ++i) gram(i, i) += ridge;
    const CVec ref_ridge = matmul(gauss_jordan_inverse(gram), matmul_herm(a, b));
    CHECK(norm(least_squares(a, b, ridge) - ref_ridge) <= 1e-9 * norm(ref_ridge));
  }
}

TEST_CASE("least_squares: rank deficiency without ridge") {
  Rng rng(12);
  const CVec c = random_cvec(4, rng);
  const CMat a = CMat::from_columns(std::vector<CVec>{c, c});
  try {
    least_squares(a, random_cvec(4, rng));
    FAIL("expected rank_deficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rank_deficient);
  }
  CHECK_NOTHROW(least_squares(a, random_cvec(4, rng), 1e-3));
}

TEST_CASE("spectral_norm: identity, rank one, zero") {
  CHECK(std::abs(spectral_norm(CMat::identity(5)) - 1.0) < 1e-12);
  Rng rng(13);
  const CVec u = random_unit(6, rng), v = random_unit(4, rng);
  CMat r1(6, 4);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) r1(i, j) = u[i] * std::conj(v[j]);
  CHECK(std::abs(spectral_norm(r1) - 1.0) < 1e-12);
  CHECK(spectral_norm(CMat(3, 3)) == 0.0);
  CHECK_THROWS_AS(spectral_norm(CMat()), Error);
}

TEST_CASE("spectral_norm: two lines at angle theta differ by sin(theta)") {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    const CVec a = random_unit(6, rng), b = random_unit(6, rng);
    const CMat pa = projector(CMat::from_columns(std::vector<CVec>{a}));
    const CMat pb = projector(CMat::from_columns(std::vector<CVec>{b}));
    const double expect = std::sqrt(1.0 - std::norm(dot(a, b)));
    CHECK(std::abs(spectral_norm(pa - pb) - expect) < 1e-9);
  }
}

TEST_CASE("spectral_norm: projector difference against the Rayleigh oracle") {
  Rng rng(15);
  for (int t = 0; t < 3; ++t) {
    const CMat u1 = orthonormalize(random_cmat(6, 2, rng));
    const CMat u2 = orthonormalize(random_cmat(6, 2, rng));
    const CMat d = projector(u1) - projector(u2);
    std::vector<CVec> cols;
    for (std::size_t j = 0; j < 2; ++j) {
      cols.push_back(u1.col(j));
      cols.push_back(u2.col(j));
    }
    const CMat joint = orthonormalize(CMat::from_columns(cols));
    double sampled = 0.0;
    const double oracle = rayleigh_oracle(d, joint, rng, 10000, &sampled);
    const double power = spectral_norm(d);
    CHECK(std::abs(power - oracle) < 1e-3);
    CHECK(sampled <= power + 1e-9);
    CHECK(power <= 1.0 + 1e-9);
  }
}
