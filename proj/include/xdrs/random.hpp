#pragma once

// Seeded problem generators. Every draw flows from an explicit
// std::mt19937_64, so a config seed fully determines experiment outputs.

#include <cmath>
#include <cstdint>
#include <random>

#include "xdrs/numerics.hpp"

namespace xdrs {

using Rng = std::mt19937_64;

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * gauss(rng);
  return v;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = scale * gauss(rng);
  return m;
}

// Random orthogonal matrix by Gram-Schmidt on a Gaussian draw.
inline Matrix random_orthogonal(Rng& rng, std::size_t n) {
  Matrix q = random_matrix(rng, n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t prev = 0; prev < j; ++prev) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += q(i, j) * q(i, prev);
      for (std::size_t i = 0; i < n; ++i) q(i, j) -= proj * q(i, prev);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) {
      // Degenerate draw; restart this column from a basis vector.
      for (std::size_t i = 0; i < n; ++i) q(i, j) = (i == j) ? 1.0 : 0.0;
      --j;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
  }
  return q;
}

// SPD matrix with eigenvalues log-spaced in [1, cond].
inline Matrix random_spd(Rng& rng, std::size_t n, double cond) {
  const Matrix q = random_orthogonal(rng, n);
  Vector lam(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0
                            : static_cast<double>(i) /
                                  static_cast<double>(n - 1);
    lam[i] = std::pow(cond, t);
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q(i, k) * lam[k] * q(j, k);
      m(i, j) = m(j, i) = s;
    }
  return m;
}

// Random 2x2 skew-symmetric map scaled by omega (a rotation generator).
inline Matrix skew_rotation(double omega) {
  return Matrix{{0.0, omega}, {-omega, 0.0}};
}

}  // namespace xdrs
