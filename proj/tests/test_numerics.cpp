#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "xdrs/numerics.hpp"
#include "xdrs/random.hpp"

using namespace xdrs;

TEST_CASE("solve_spd identity and diagonal cases") {
  CHECK(solve_spd(Matrix::identity(3), Vector{1.0, 2.0, 3.0})[0] == 1.0);
  const Vector x = solve_spd(Matrix{{2.0, 0.0}, {0.0, 4.0}}, Vector{2.0, 8.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("solve_spd residual oracle on random SPD systems up to dim 32") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 32);
    const Matrix m = random_spd(rng, n, 50.0);
    const Vector b = random_vector(rng, n);
    const Vector x = solve_spd(m, b);
    CHECK(norm(m.apply(x) - b) <= 1e-10 * (1.0 + norm(b)));
  }
}

TEST_CASE("solve_spd rejects indefinite input") {
  CHECK_THROWS_AS(solve_spd(Matrix{{1.0, 2.0}, {2.0, 1.0}}, Vector{1.0, 1.0}),
                  NotSpd);
}

TEST_CASE("solve_lu handles skew systems and flags singular ones") {
  // (I + M) x = v for the 2x2 rotation generator.
  const Vector x = solve_lu(Matrix{{1.0, 1.0}, {-1.0, 1.0}}, Vector{1.0, 1.0});
  CHECK(x[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(solve_lu(Matrix{{1.0, 1.0}, {1.0, 1.0}}, Vector{1.0, 0.0}),
                  SingularSystem);
}

TEST_CASE("sqrt_psd trivial cases") {
  const Matrix s = sqrt_psd(4.0 * Matrix::identity(2));
  CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sqrt_psd(Matrix(3, 3)).max_abs() == 0.0);
}

TEST_CASE("sqrt_psd squaring oracle, including the lifting gap matrix") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 3, 5, 0.4);
    const double gamma = 0.9 / operator_norm(a);
    Matrix m(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 5; ++k) s += a(i, k) * a(j, k);
        m(i, j) = -s;
      }
    for (std::size_t i = 0; i < 3; ++i) m(i, i) += 1.0 / (gamma * gamma);
    const Matrix s = sqrt_psd(m);
    CHECK(s.is_symmetric(1e-10));
    CHECK(min_eigenvalue_sym(s) >= -1e-10);
    CHECK((s * s - m).frobenius_norm() <= 1e-9 * (1.0 + m.frobenius_norm()));
  }
}

TEST_CASE("sqrt_psd rejects genuinely indefinite matrices") {
  CHECK_THROWS_AS(sqrt_psd(Matrix{{1.0, 0.0}, {0.0, -0.5}}), NotPsd);
}

TEST_CASE("spectrum_2x2 known matrices") {
  const Spectrum2x2 id = spectrum_2x2(Matrix::identity(2));
  CHECK(id.eig_moduli[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(id.singular_values[1] == doctest::Approx(1.0).epsilon(1e-15));

  // Rotation-scaled matrix: both moduli 2/sqrt(5).
  const Spectrum2x2 rot =
      spectrum_2x2(Matrix{{0.8, -0.4}, {0.4, 0.8}});
  CHECK(rot.eig_moduli[0] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(rot.eig_moduli[1] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));

  // Nilpotent-like: characteristic polynomial x^2 gives moduli (0,0);
  // T^T T has eigenvalues {4, 0}.
  const Spectrum2x2 nil = spectrum_2x2(Matrix{{1.0, -1.0}, {1.0, -1.0}});
  CHECK(nil.eig_moduli[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(nil.singular_values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(nil.singular_values[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("spectrum_2x2 determinant products") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix t = random_matrix(rng, 2, 2);
    const double det = std::abs(t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0));
    const Spectrum2x2 s = spectrum_2x2(t);
    CHECK(s.eig_moduli[0] * s.eig_moduli[1] ==
          doctest::Approx(det).epsilon(1e-12));
    CHECK(s.singular_values[0] * s.singular_values[1] ==
          doctest::Approx(det).epsilon(1e-12));
  }
}

TEST_CASE("operator_norm matches the largest singular value") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 2, 2);
    CHECK(operator_norm(a) ==
          doctest::Approx(spectrum_2x2(a).singular_values[0]).epsilon(1e-9));
  }
  CHECK(operator_norm(Matrix(3, 4)) == 0.0);
}

TEST_CASE("sym_eigen reconstructs symmetric matrices") {
  Rng rng(13);
  const Matrix m = random_spd(rng, 6, 30.0);
  const SymEigen e = sym_eigen(m);
  Matrix rec(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k)
        s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
      rec(i, j) = s;
    }
  CHECK((rec - m).max_abs() <= 1e-11 * (1.0 + m.max_abs()));
}
