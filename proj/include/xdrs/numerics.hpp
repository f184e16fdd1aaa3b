#pragma once

// Small dense linear-algebra toolbox shared by all modules: vectors,
// row-major matrices, Cholesky and LU solves, a cyclic Jacobi
// eigendecomposition, PSD square roots, and 2x2 spectra. Everything here
// targets matrices of modest size (<= ~64x64), so plain O(n^3) methods
// without pivoting subtleties are used throughout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "xdrs/errors.hpp"

namespace xdrs {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : e_(n, value) {}
  Vector(std::initializer_list<double> init) : e_(init) {}
  explicit Vector(std::vector<double> entries) : e_(std::move(entries)) {}

  std::size_t size() const { return e_.size(); }
  double& operator[](std::size_t i) { return e_[i]; }
  const double& operator[](std::size_t i) const { return e_[i]; }

  auto begin() { return e_.begin(); }
  auto end() { return e_.end(); }
  auto begin() const { return e_.begin(); }
  auto end() const { return e_.end(); }
  const std::vector<double>& entries() const { return e_; }

  Vector& operator+=(const Vector& rhs) {
    if (rhs.size() != e_.size()) throw DimMismatch("vector +=: size mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += rhs[i];
    return *this;
  }
  Vector& operator-=(const Vector& rhs) {
    if (rhs.size() != e_.size()) throw DimMismatch("vector -=: size mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= rhs[i];
    return *this;
  }
  Vector& operator*=(double s) {
    for (double& v : e_) v *= s;
    return *this;
  }

 private:
  std::vector<double> e_;
};

inline Vector operator+(Vector a, const Vector& b) { return a += b; }
inline Vector operator-(Vector a, const Vector& b) { return a -= b; }
inline Vector operator*(double s, Vector a) { return a *= s; }
inline Vector operator*(Vector a, double s) { return a *= s; }
inline Vector operator-(Vector a) { return a *= -1.0; }

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimMismatch("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vector& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), e_(rows * cols, value) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    e_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw DimMismatch("Matrix: ragged initializer");
      e_.insert(e_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const double& operator()(std::size_t i, std::size_t j) const {
    return e_[i * cols_ + j];
  }

  Vector apply(const Vector& x) const {
    if (x.size() != cols_) throw DimMismatch("Matrix::apply: size mismatch");
    Vector y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  Vector apply_transpose(const Vector& x) const {
    if (x.size() != rows_)
      throw DimMismatch("Matrix::apply_transpose: size mismatch");
    Vector y(cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[j] += (*this)(i, j) * x[i];
    return y;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& rhs) {
    if (rhs.rows_ != rows_ || rhs.cols_ != cols_)
      throw DimMismatch("matrix +=: shape mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += rhs.e_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& rhs) {
    if (rhs.rows_ != rows_ || rhs.cols_ != cols_)
      throw DimMismatch("matrix -=: shape mismatch");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= rhs.e_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : e_) v *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : e_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : e_) s += v * v;
    return std::sqrt(s);
  }

  bool is_symmetric(double rel_tol = 1e-12) const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j) {
        double a = (*this)(i, j), b = (*this)(j, i);
        if (std::abs(a - b) > rel_tol * (1.0 + std::abs(a))) return false;
      }
    return true;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> e_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimMismatch("Matrix product: size mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// Cholesky factorization M = L L^T of a symmetric positive definite matrix.
// Factor once, solve many right-hand sides (the quadratic prox and the ADMM
// subproblems reuse the factor across iterations).
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& m) : n_(m.rows()), L_(m) {
    if (m.rows() != m.cols()) throw DimMismatch("cholesky: matrix not square");
    for (std::size_t j = 0; j < n_; ++j) {
      for (std::size_t i = j; i < n_; ++i) {
        double s = L_(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= L_(i, k) * L_(j, k);
        if (i == j) {
          if (s <= 0.0) throw NotSpd("cholesky: nonpositive pivot");
          L_(j, j) = std::sqrt(s);
        } else {
          L_(i, j) = s / L_(j, j);
        }
      }
      for (std::size_t k = j + 1; k < n_; ++k) L_(j, k) = 0.0;
    }
  }

  Vector solve(const Vector& b) const {
    if (b.size() != n_) throw DimMismatch("cholesky solve: size mismatch");
    Vector y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= L_(i, k) * y[k];
      y[i] = s / L_(i, i);
    }
    Vector x(n_);
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n_; ++k) s -= L_(k, ii) * x[k];
      x[ii] = s / L_(ii, ii);
    }
    return x;
  }

 private:
  std::size_t n_;
  Matrix L_;
};

inline Vector solve_spd(const Matrix& m, const Vector& b) {
  return CholeskyFactor(m).solve(b);
}

// Partial-pivoting LU, factored once and reused; used for resolvents of
// non-symmetric monotone linear maps and for KKT systems.
class LuFactor {
 public:
  explicit LuFactor(Matrix a) : n_(a.rows()), lu_(std::move(a)), perm_(n_) {
    if (lu_.cols() != n_) throw DimMismatch("lu: matrix not square");
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
    for (std::size_t col = 0; col < n_; ++col) {
      std::size_t piv = col;
      for (std::size_t i = col + 1; i < n_; ++i)
        if (std::abs(lu_(i, col)) > std::abs(lu_(piv, col))) piv = i;
      if (lu_(piv, col) == 0.0) throw SingularSystem("lu: singular matrix");
      if (piv != col) {
        for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(col, j), lu_(piv, j));
        std::swap(perm_[col], perm_[piv]);
      }
      for (std::size_t i = col + 1; i < n_; ++i) {
        const double f = lu_(i, col) / lu_(col, col);
        lu_(i, col) = f;
        for (std::size_t j = col + 1; j < n_; ++j) lu_(i, j) -= f * lu_(col, j);
      }
    }
  }

  Vector solve(const Vector& b) const {
    if (b.size() != n_) throw DimMismatch("lu solve: size mismatch");
    Vector y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
      y[i] = s;
    }
    Vector x(n_);
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_(ii, j) * x[j];
      x[ii] = s / lu_(ii, ii);
    }
    return x;
  }

 private:
  std::size_t n_;
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

inline Vector solve_lu(Matrix a, const Vector& b) {
  return LuFactor(std::move(a)).solve(b);
}

struct SymEigen {
  Vector values;   // unsorted, aligned with vector columns
  Matrix vectors;  // column i is the eigenvector for values[i]
};

// Cyclic Jacobi eigendecomposition for symmetric matrices.
inline SymEigen sym_eigen(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw DimMismatch("sym_eigen: matrix not square");
  Matrix a = m;
  // Symmetrize up front so roundoff-level asymmetry cannot bias rotations.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = v;
    }
  Matrix v = Matrix::identity(n);
  const double scale = std::max(1.0, a.max_abs());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale * n) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= 1e-18 * scale) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  SymEigen out;
  out.values = Vector(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = v;
  return out;
}

inline double min_eigenvalue_sym(const Matrix& m) {
  const SymEigen e = sym_eigen(m);
  double mn = e.values[0];
  for (std::size_t i = 1; i < e.values.size(); ++i)
    mn = std::min(mn, e.values[i]);
  return mn;
}

// Symmetric PSD square root via Jacobi. Eigenvalues in [-1e-12, 0) are a
// floating-point artifact and get clamped to 0; anything below -1e-8 is a
// genuinely indefinite input.
inline Matrix sqrt_psd(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw DimMismatch("sqrt_psd: matrix not square");
  const SymEigen e = sym_eigen(m);
  Vector roots(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = e.values[i];
    if (lam < -1e-8) throw NotPsd("sqrt_psd: negative eigenvalue");
    if (lam < 0.0) lam = 0.0;
    roots[i] = std::sqrt(lam);
  }
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += e.vectors(i, k) * roots[k] * e.vectors(j, k);
      s(i, j) = s(j, i) = acc;
    }
  return s;
}

struct Spectrum2x2 {
  std::array<double, 2> eig_moduli;       // descending
  std::array<double, 2> singular_values;  // descending
};

// Closed-form eigenvalue moduli (complex pairs allowed) and singular values
// of a 2x2 matrix.
inline Spectrum2x2 spectrum_2x2(const Matrix& t) {
  if (t.rows() != 2 || t.cols() != 2) throw DimMismatch("spectrum_2x2: not 2x2");
  const double a = t(0, 0), b = t(0, 1), c = t(1, 0), d = t(1, 1);
  const double tr = a + d;
  const double det = a * d - b * c;
  const double disc = tr * tr - 4.0 * det;
  Spectrum2x2 out;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    const double l1 = 0.5 * (tr + r), l2 = 0.5 * (tr - r);
    out.eig_moduli = {std::abs(l1), std::abs(l2)};
  } else {
    // Complex conjugate pair: |lambda|^2 = det.
    const double mod = std::sqrt(det);
    out.eig_moduli = {mod, mod};
  }
  if (out.eig_moduli[0] < out.eig_moduli[1])
    std::swap(out.eig_moduli[0], out.eig_moduli[1]);
  // Singular values from the symmetric 2x2 T^T T.
  const double s11 = a * a + c * c;
  const double s22 = b * b + d * d;
  const double s12 = a * b + c * d;
  const double mean = 0.5 * (s11 + s22);
  const double rad = std::sqrt(0.25 * (s11 - s22) * (s11 - s22) + s12 * s12);
  out.singular_values = {std::sqrt(std::max(0.0, mean + rad)),
                         std::sqrt(std::max(0.0, mean - rad))};
  return out;
}

// Spectral norm ||A|| by power iteration on A^T A, to 1e-10 relative.
inline double operator_norm(const Matrix& a, std::size_t max_iters = 20000) {
  const std::size_t n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = 1.0 + 1e-3 * static_cast<double>(i);  // deterministic, non-special
  double nx = norm(x);
  x *= 1.0 / nx;
  double lam = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    Vector y = a.apply_transpose(a.apply(x));
    const double ny = norm(y);
    if (ny == 0.0) return 0.0;
    const double lam_new = dot(x, y);
    y *= 1.0 / ny;
    x = y;
    if (it > 0 && std::abs(lam_new - lam) <= 1e-10 * std::max(1.0, lam_new)) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
  }
  return std::sqrt(std::max(0.0, lam));
}

}  // namespace xdrs
