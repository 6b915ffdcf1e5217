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

#ifndef SITEFB_NUMKERNEL_HPP
#define SITEFB_NUMKERNEL_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sitefb {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Dense complex matrix, row-major.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMat(std::size_t rows, std::size_t cols, std::vector<cplx> data);
  CMat(std::initializer_list<std::initializer_list<cplx>> rows);

  static CMat identity(std::size_t n);
  // Builds a matrix whose columns are the given vectors (all of equal length).
  static CMat from_columns(std::span<const CVec> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }
  const std::vector<cplx>& values() const noexcept { return data_; }

  CVec col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const cplx> v);

  // Conjugate transpose.
  CMat herm() const;

  friend bool operator==(const CMat&, const CMat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

// a^H b.
cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm_sq(std::span<const cplx> v);
double norm(std::span<const cplx> v);
bool all_finite(std::span<const cplx> v);

CVec operator+(const CVec& a, const CVec& b);
CVec operator-(const CVec& a, const CVec& b);
CVec operator*(cplx s, const CVec& v);

CMat operator+(const CMat& a, const CMat& b);
CMat operator-(const CMat& a, const CMat& b);

CMat matmul(const CMat& a, const CMat& b);
CVec matmul(const CMat& a, std::span<const cplx> x);

// a^H b without forming a^H.
CMat matmul_herm(const CMat& a, const CMat& b);
CVec matmul_herm(const CMat& a, std::span<const cplx> b);

// Largest absolute entry.
double max_abs(const CMat& m);

// Orthonormal basis for the column span of `basis`, computed by modified
// Gram-Schmidt with one re-orthogonalization pass. A column is dropped when
// its residual norm falls below tol * (largest input column norm), so the
// output has as many columns as the numerical rank.
CMat orthonormalize(const CMat& basis, double tol = 1e-8);

// argmin_x ||b - a x||^2 + ridge ||x||^2. With ridge == 0 the matrix must
// have full column rank; otherwise a rank_deficient error is raised.
CVec least_squares(const CMat& a, std::span<const cplx> b, double ridge = 0.0);

// Orthogonal projector U U^H for a matrix with orthonormal columns.
CMat projector(const CMat& orthonormal_basis);

// Largest singular value by power iteration on m^H m. Stops when the
// relative change of the estimate drops below tol or after `iters` steps.
double spectral_norm(const CMat& m, int iters = 5000, double tol = 1e-14);

}  // namespace sitefb

#endif  // SITEFB_NUMKERNEL_HPP
