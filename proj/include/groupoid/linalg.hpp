#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "groupoid/error.hpp"

namespace groupoid {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Row-major initializer, convenient in tests.
  static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != m.cols_) throw PreconditionError("ragged matrix rows");
      std::size_t j = 0;
      for (const Complex& v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const Complex> data() const noexcept { return data_; }

  Matrix adjoint() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (const Complex& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (const Complex& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(Complex s) {
    for (Complex& v : data_) v *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Complex s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw PreconditionError("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw PreconditionError("matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Complex> data_;
};

/// Largest entrywise |a − b|; shapes must agree.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw PreconditionError("matrix shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// max |U*U − I| entrywise.
inline double unitarity_defect(const Matrix& u) {
  return max_abs_diff(u.adjoint() * u, Matrix::identity(u.cols()));
}

inline Matrix block_diagonal(std::span<const Matrix> blocks) {
  std::size_t n = 0;
  for (const Matrix& b : blocks) {
    if (!b.square()) throw PreconditionError("block_diagonal needs square blocks");
    n += b.rows();
  }
  Matrix m(n, n);
  std::size_t off = 0;
  for (const Matrix& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) m(off + i, off + j) = b(i, j);
    off += b.rows();
  }
  return m;
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------
// Spectral norm

struct PowerIterationOptions {
  double rel_tol = 1e-12;
  std::size_t max_iterations = 10000;
};

namespace detail {

inline double vec_norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const Complex& x : v) s += std::norm(x);
  return std::sqrt(s);
}

/// Rayleigh-quotient power iteration on a Hermitian PSD matrix from one
/// start vector. Returns the converged eigenvalue estimate.
inline double power_iterate(const Matrix& a, std::vector<Complex> v, const PowerIterationOptions& opts) {
  const std::size_t n = a.rows();
  double prev = -1.0;
  std::vector<Complex> u(n);
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    std::fill(u.begin(), u.end(), Complex{});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) u[i] += a(i, j) * v[j];
    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += (std::conj(v[i]) * u[i]).real();
    const double un = vec_norm(u);
    if (un == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = u[i] / un;
    if (std::abs(lambda - prev) <= opts.rel_tol * std::max(std::abs(lambda), 1e-300)) return lambda;
    prev = lambda;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(opts.max_iterations) +
                         " iterations; for dimension ≤ 3 use exact_small_spectral_norm");
}

}  // namespace detail

/// Largest singular value of B via power iteration on B*B.
///
/// Starts from the normalized all-ones vector and from every standard basis
/// vector and keeps the largest converged estimate; a single start can be
/// orthogonal to the top singular vector (e.g. I − swap against all-ones).
inline double spectral_norm(const Matrix& b, const PowerIterationOptions& opts = {}) {
  if (b.rows() == 0 || b.cols() == 0) return 0.0;
  const Matrix a = b.adjoint() * b;
  if (a.max_abs() == 0.0) return 0.0;
  const std::size_t n = a.rows();
  double best = detail::power_iterate(a, std::vector<Complex>(n, 1.0 / std::sqrt(static_cast<double>(n))), opts);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Complex> e(n);
    e[k] = 1.0;
    best = std::max(best, detail::power_iterate(a, std::move(e), opts));
  }
  return std::sqrt(std::max(best, 0.0));
}

/// Closed-form largest eigenvalue of B*B for at most 3 columns
/// (characteristic polynomial of a Hermitian matrix, trigonometric roots).
inline double exact_small_spectral_norm(const Matrix& b) {
  const Matrix a = b.adjoint() * b;
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  if (n == 1) return std::sqrt(std::max(a(0, 0).real(), 0.0));
  if (n == 2) {
    const double p = a(0, 0).real(), q = a(1, 1).real();
    const double lmax = 0.5 * (p + q) + std::sqrt(0.25 * (p - q) * (p - q) + std::norm(a(0, 1)));
    return std::sqrt(std::max(lmax, 0.0));
  }
  if (n != 3) throw PreconditionError("exact_small_spectral_norm supports at most 3 columns");
  const double p1 = std::norm(a(0, 1)) + std::norm(a(0, 2)) + std::norm(a(1, 2));
  const double d0 = a(0, 0).real(), d1 = a(1, 1).real(), d2 = a(2, 2).real();
  if (p1 == 0.0) return std::sqrt(std::max({d0, d1, d2, 0.0}));
  const double q = (d0 + d1 + d2) / 3.0;
  const double p2 = (d0 - q) * (d0 - q) + (d1 - q) * (d1 - q) + (d2 - q) * (d2 - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Matrix m = a;
  for (std::size_t i = 0; i < 3; ++i) m(i, i) -= q;
  m *= 1.0 / p;
  const Complex det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                      m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                      m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  const double r = std::clamp(det.real() / 2.0, -1.0, 1.0);
  const double lmax = q + 2.0 * p * std::cos(std::acos(r) / 3.0);
  return std::sqrt(std::max(lmax, 0.0));
}

// ---------------------------------------------------------------------------
// Null spaces and commutants

struct EliminationOptions {
  double pivot_tol = 1e-10;
  std::size_t max_entries = 1000000;  // cap on unknowns² of the working system
};

/// Incrementally maintained reduced row echelon form over ℂ.
class RowEchelon {
 public:
  RowEchelon(std::size_t unknowns, double pivot_tol) : m_(unknowns), tol_(pivot_tol) {}

  /// Adds an equation row; returns true when it raised the rank.
  bool add(std::vector<Complex> row) {
    double scale = 0.0;
    for (const Complex& v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Complex f = row[pivots_[r]];
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < m_; ++j) row[j] -= f * rows_[r][j];
    }
    std::size_t p = m_;
    double best = 0.0;
    for (std::size_t j = 0; j < m_; ++j)
      if (std::abs(row[j]) > best) {
        best = std::abs(row[j]);
        p = j;
      }
    if (best <= tol_ * std::max(scale, 1.0)) return false;
    const Complex inv = 1.0 / row[p];
    for (Complex& v : row) v *= inv;
    row[p] = 1.0;
    for (std::size_t j = 0; j < m_; ++j)
      if (std::abs(row[j]) <= tol_ * 1e-3) row[j] = 0.0;
    for (auto& other : rows_) {
      const Complex f = other[p];
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < m_; ++j) other[j] -= f * row[j];
      other[p] = 0.0;
    }
    rows_.push_back(std::move(row));
    pivots_.push_back(p);
    return true;
  }

  std::size_t rank() const noexcept { return rows_.size(); }
  std::size_t unknowns() const noexcept { return m_; }

  /// One basis vector per free column: 1 at the free column, minus the
  /// pivot rows' coefficients at the pivot columns.
  std::vector<std::vector<Complex>> null_space() const {
    std::vector<char> is_pivot(m_, 0);
    for (std::size_t p : pivots_) is_pivot[p] = 1;
    std::vector<std::vector<Complex>> basis;
    for (std::size_t f = 0; f < m_; ++f) {
      if (is_pivot[f]) continue;
      std::vector<Complex> v(m_);
      v[f] = 1.0;
      for (std::size_t r = 0; r < rows_.size(); ++r) v[pivots_[r]] = -rows_[r][f];
      basis.push_back(std::move(v));
    }
    return basis;
  }

 private:
  std::size_t m_;
  double tol_;
  std::vector<std::vector<Complex>> rows_;
  std::vector<std::size_t> pivots_;
};

/// Basis of {T : [T, A] = 0 for every generator A}, the null space of the
/// stacked linear maps T ↦ TA − AT.
inline std::vector<Matrix> commutant_basis(std::span<const Matrix> generators, std::size_t n,
                                           const EliminationOptions& opts = {}) {
  const std::size_t m = n * n;
  if (m != 0 && m > opts.max_entries / m)
    throw InstanceTooLarge("commutant system with " + std::to_string(m) + " unknowns exceeds the cap of " +
                           std::to_string(opts.max_entries) + " working entries");
  for (const Matrix& a : generators)
    if (a.rows() != n || a.cols() != n) throw PreconditionError("generators must all be n×n");
  RowEchelon ech(m, opts.pivot_tol);
  for (const Matrix& a : generators) {
    if (ech.rank() == m) break;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<Complex> row(m);
        for (std::size_t k = 0; k < n; ++k) {
          row[i * n + k] += a(k, j);
          row[k * n + j] -= a(i, k);
        }
        ech.add(std::move(row));
      }
  }
  std::vector<Matrix> out;
  for (const auto& v : ech.null_space()) {
    Matrix t(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(i, j) = v[i * n + j];
    out.push_back(std::move(t));
  }
  return out;
}

/// Frobenius distance from `x` to span(basis).
inline double distance_to_span(const Matrix& x, std::span<const Matrix> basis) {
  std::vector<Matrix> ortho;
  for (const Matrix& b : basis) {
    Matrix v = b;
    for (int pass = 0; pass < 2; ++pass)
      for (const Matrix& q : ortho) {
        Complex ip{};
        for (std::size_t i = 0; i < v.data().size(); ++i) ip += std::conj(q.data()[i]) * v.data()[i];
        v -= ip * q;
      }
    const double nv = v.frobenius();
    if (nv > 1e-12) ortho.push_back((1.0 / nv) * v);
  }
  Matrix r = x;
  for (int pass = 0; pass < 2; ++pass)
    for (const Matrix& q : ortho) {
      Complex ip{};
      for (std::size_t i = 0; i < r.data().size(); ++i) ip += std::conj(q.data()[i]) * r.data()[i];
      r -= ip * q;
    }
  return r.frobenius();
}

struct CommutantReport {
  int levels = 1;
  std::size_t total_dimension = 0;         // Σ dim H_x
  std::size_t dimension = 0;               // dim of the requested level
  std::vector<Matrix> basis;               // basis of M′ (levels 1) or M″ (levels 2)
  std::size_t commutant_dimension = 0;     // dim M′
  std::size_t bicommutant_dimension = 0;   // dim M″ (levels 2)
  std::size_t tricommutant_dimension = 0;  // dim M‴ (levels 2)
  double max_commutator = 0.0;             // max |[A, C]| over generators A, C ∈ M′ basis
  double max_generator_residual = 0.0;     // max distance of a generator from span M″ (levels 2)
  bool passed(double tol) const {
    if (max_commutator > tol) return false;
    if (levels == 2)
      return max_generator_residual <= tol && tricommutant_dimension == commutant_dimension;
    return true;
  }
};

/// Commutant (levels = 1) or bicommutant (levels = 2) of a generator set in
/// finite dimension. Level 2 also verifies M ⊆ M″ and dim M‴ = dim M′.
inline CommutantReport commutant(std::span<const Matrix> generators, int levels,
                                 const EliminationOptions& opts = {}) {
  if (levels != 1 && levels != 2) throw PreconditionError("commutant levels must be 1 or 2");
  if (generators.empty()) throw PreconditionError("commutant needs at least one generator");
  const std::size_t n = generators.front().rows();
  CommutantReport r;
  r.levels = levels;
  r.total_dimension = n;
  std::vector<Matrix> first = commutant_basis(generators, n, opts);
  r.commutant_dimension = first.size();
  for (const Matrix& a : generators)
    for (const Matrix& c : first) r.max_commutator = std::max(r.max_commutator, commutator(a, c).max_abs());
  if (levels == 1) {
    r.dimension = first.size();
    r.basis = std::move(first);
    return r;
  }
  std::vector<Matrix> second = commutant_basis(first, n, opts);
  r.bicommutant_dimension = second.size();
  for (const Matrix& a : generators)
    r.max_generator_residual = std::max(r.max_generator_residual, distance_to_span(a, second));
  r.tricommutant_dimension = commutant_basis(second, n, opts).size();
  r.dimension = second.size();
  r.basis = std::move(second);
  return r;
}

}  // namespace groupoid
