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

#include "sitefb/numkernel.hpp"

#include <algorithm>
#include <cmath>

#include "sitefb/error.hpp"

namespace sitefb {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::dimension_mismatch, what);
}

// Column-major working copy used by the Gram-Schmidt routines.
std::vector<CVec> columns_of(const CMat& m) {
  std::vector<CVec> cols(m.cols(), CVec(m.rows()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) cols[c][r] = m(r, c);
  return cols;
}

void axpy(cplx alpha, const CVec& x, CVec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

CMat::CMat(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, "CMat: entry count does not match shape");
}

CMat::CMat(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    require(row.size() == cols_, "CMat: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::from_columns(std::span<const CVec> columns) {
  if (columns.empty()) return {};
  CMat m(columns.front().size(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) m.set_col(c, columns[c]);
  return m;
}

CVec CMat::col(std::size_t c) const {
  CVec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void CMat::set_col(std::size_t c, std::span<const cplx> v) {
  require(v.size() == rows_ && c < cols_, "CMat::set_col: shape mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

CMat CMat::herm() const {
  CMat out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm_sq(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return acc;
}

double norm(std::span<const cplx> v) { return std::sqrt(norm_sq(v)); }

bool all_finite(std::span<const cplx> v) {
  return std::all_of(v.begin(), v.end(),
                     [](const cplx& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

CVec operator+(const CVec& a, const CVec& b) {
  require(a.size() == b.size(), "vector add: length mismatch");
  CVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

CVec operator-(const CVec& a, const CVec& b) {
  require(a.size() == b.size(), "vector sub: length mismatch");
  CVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

CVec operator*(cplx s, const CVec& v) {
  CVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

CMat operator+(const CMat& a, const CMat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix add: shape mismatch");
  CMat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.values().size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

CMat operator-(const CMat& a, const CMat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sub: shape mismatch");
  CMat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.values().size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

CMat matmul(const CMat& a, const CMat& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  CMat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

CVec matmul(const CMat& a, std::span<const cplx> x) {
  require(a.cols() == x.size(), "matvec: inner dimensions differ");
  CVec out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
    out[i] = acc;
  }
  return out;
}

CMat matmul_herm(const CMat& a, const CMat& b) {
  require(a.rows() == b.rows(), "matmul_herm: inner dimensions differ");
  CMat out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const cplx aki = std::conj(a(k, i));
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * b(k, j);
    }
  return out;
}

CVec matmul_herm(const CMat& a, std::span<const cplx> b) {
  require(a.rows() == b.size(), "matmul_herm: inner dimensions differ");
  CVec out(a.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) out[i] += std::conj(a(k, i)) * b[k];
  return out;
}

double max_abs(const CMat& m) {
  double best = 0.0;
  for (const auto& x : m.values()) best = std::max(best, std::abs(x));
  return best;
}

CMat orthonormalize(const CMat& basis, double tol) {
  if (basis.cols() > basis.rows())
    throw Error(ErrorCode::dimension_mismatch, "orthonormalize: more columns than rows");
  auto cols = columns_of(basis);
  double max_norm = 0.0;
  for (const auto& c : cols) max_norm = std::max(max_norm, norm(c));
  if (!(max_norm > 0.0)) throw Error(ErrorCode::empty_basis, "orthonormalize: all-zero input");

  std::vector<CVec> kept;
  for (auto& v : cols) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : kept) axpy(-dot(q, v), q, v);
    const double r = norm(v);
    if (r < tol * max_norm) continue;
    for (auto& x : v) x /= r;
    kept.push_back(std::move(v));
  }
  return CMat::from_columns(kept);
}

CVec least_squares(const CMat& a, std::span<const cplx> b, double ridge) {
  require(a.rows() == b.size(), "least_squares: rhs length mismatch");
  if (ridge < 0.0) throw Error(ErrorCode::invalid_argument, "least_squares: negative ridge");
  const std::size_t n = a.cols();
  if (n == 0) return {};

  // Ridge is solved as ordinary least squares on [a; sqrt(ridge) I].
  const std::size_t m = a.rows() + (ridge > 0.0 ? n : 0);
  std::vector<CVec> q(n, CVec(m));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) q[c][r] = a(r, c);
  if (ridge > 0.0)
    for (std::size_t c = 0; c < n; ++c) q[c][a.rows() + c] = std::sqrt(ridge);

  double max_norm = 0.0;
  for (const auto& c : q) max_norm = std::max(max_norm, norm(c));
  if (!(max_norm > 0.0)) throw Error(ErrorCode::rank_deficient, "least_squares: zero matrix");

  CMat r_fac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < j; ++i) {
        const cplx proj = dot(q[i], q[j]);
        r_fac(i, j) += proj;
        axpy(-proj, q[i], q[j]);
      }
    const double diag = norm(q[j]);
    if (diag <= 1e-13 * max_norm)
      throw Error(ErrorCode::rank_deficient, "least_squares: columns are linearly dependent");
    r_fac(j, j) = diag;
    for (auto& x : q[j]) x /= diag;
  }

  CVec rhs(m);
  std::copy(b.begin(), b.end(), rhs.begin());
  CVec coeff(n);
  for (std::size_t i = 0; i < n; ++i) {
    coeff[i] = dot(q[i], rhs);
    axpy(-coeff[i], q[i], rhs);
  }
  CVec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    cplx acc = coeff[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= r_fac(ii, j) * x[j];
    x[ii] = acc / r_fac(ii, ii);
  }
  return x;
}

CMat projector(const CMat& u) { return matmul(u, u.herm()); }

double spectral_norm(const CMat& m, int iters, double tol) {
  if (m.empty()) throw Error(ErrorCode::invalid_argument, "spectral_norm: empty matrix");
  if (max_abs(m) == 0.0) return 0.0;

  // Fixed, deterministic start vector with no special structure.
  CVec v(m.cols());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double t = static_cast<double>(k);
    v[k] = cplx(1.0 + 0.5 * std::cos(1.7 * t + 0.3), 0.5 * std::sin(2.3 * t + 1.1));
  }
  double nv = norm(v);
  for (auto& x : v) x /= nv;

  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    const CVec mv = matmul(m, v);
    const double est = norm(mv);
    CVec w = matmul_herm(m, mv);
    const double nw = norm(w);
    if (nw == 0.0) return est;
    for (auto& x : w) x /= nw;
    v = std::move(w);
    const bool converged = std::abs(est - sigma) <= tol * est;
    sigma = est;
    if (converged) break;
  }
  return norm(matmul(m, v));
}

}  // namespace sitefb
