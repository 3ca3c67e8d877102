#include <cmath>
#include <random>

#include "ci/geometry.hpp"
#include "doctest.h"

using namespace ci;

namespace {
// Cramer's rule on the dyad system, independent of the library LU.
std::array<double, 3> cramer_gamma2(const Sym2& R) {
  double k[3][2] = {{1 / std::sqrt(2.0), 1 / std::sqrt(3.0)}, {-0.5, 2 / std::sqrt(6.0)}, {0.5, 0}};
  double A[3][3];
  for (int i = 0; i < 3; ++i) {
    A[0][i] = k[i][0] * k[i][0];
    A[1][i] = k[i][0] * k[i][1];
    A[2][i] = k[i][1] * k[i][1];
  }
  double b[3] = {R.a11, R.a12, R.a22};
  auto det = [](double M[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  };
  double D = det(A);
  std::array<double, 3> g{};
  for (int c = 0; c < 3; ++c) {
    double B[3][3];
    for (int r = 0; r < 3; ++r)
      for (int j = 0; j < 3; ++j) B[r][j] = j == c ? b[r] : A[r][j];
    g[c] = det(B) / D;
  }
  return g;
}
}  // namespace

TEST_CASE("basis vectors and partition of identity") {
  const auto& B = basis();
  CHECK(B.k[0][0] == 1 / std::sqrt(2.0));
  CHECK(B.k[1][1] == 2 / std::sqrt(6.0));
  double s11 = 0, s12 = 0, s22 = 0;
  for (const auto& d : B.dyads) {
    s11 += d.a11;
    s12 += d.a12;
    s22 += d.a22;
  }
  CHECK(std::abs(s11 - 1) <= 1e-15);
  CHECK(std::abs(s12) <= 1e-15);
  CHECK(std::abs(s22 - 1) <= 1e-15);
  CHECK(B.dyads[0].a12 == doctest::Approx(1 / std::sqrt(6.0)));
}

TEST_CASE("gamma of the identity is one") {
  auto g = gamma_coefficients({1, 0, 1});
  for (double v : g) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gamma against the Cramer oracle") {
  Sym2 R{1, 0.1, 1};
  auto frozen = std::array<double, 3>{1.1633, 0.9184, 0.7551};
  auto oracle = cramer_gamma2(R);
  auto g2 = gamma_squared(R);
  for (int i = 0; i < 3; ++i) {
    CHECK(g2[i] == doctest::Approx(oracle[i]).epsilon(1e-13));
    CHECK(g2[i] == doctest::Approx(frozen[i]).epsilon(1e-4));
  }
  const auto& B = basis();
  double r11 = 0, r12 = 0, r22 = 0;
  for (int i = 0; i < 3; ++i) {
    r11 += g2[i] * B.dyads[i].a11;
    r12 += g2[i] * B.dyads[i].a12;
    r22 += g2[i] * B.dyads[i].a22;
  }
  CHECK(std::abs(r11 - 1) <= 1e-12);
  CHECK(std::abs(r12 - 0.1) <= 1e-12);
  CHECK(std::abs(r22 - 1) <= 1e-12);
}

TEST_CASE("zero matrix is not admissible") { CHECK_THROWS_AS(gamma_coefficients({0, 0, 0}), AdmissibilityError); }

TEST_CASE("vector split") {
  const auto& B = basis();
  auto g = vector_coefficients({B.k[0][0], B.k[0][1]});
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(g[1]) < 1e-15);
  auto z = vector_coefficients({0, 0});
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  auto e = vector_coefficients({1, 0});
  // 2x2 Cramer oracle
  double det = B.k[0][0] * B.k[1][1] - B.k[1][0] * B.k[0][1];
  CHECK(e[0] == doctest::Approx(B.k[1][1] / det).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(-B.k[0][1] / det).epsilon(1e-14));
  CHECK(e[0] == doctest::Approx(0.9428).epsilon(1e-4));
  CHECK(e[1] == doctest::Approx(-0.6667).epsilon(1e-4));
}

TEST_CASE("property: linear vector split recombines exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-10, 10);
  const auto& B = basis();
  for (int i = 0; i < 2000; ++i) {
    Vec2 f{U(rng), U(rng)}, h{U(rng), U(rng)};
    double al = U(rng), be = U(rng);
    auto g = vector_coefficients(f);
    double r0 = g[0] * B.k[0][0] + g[1] * B.k[1][0] - f[0];
    double r1 = g[0] * B.k[0][1] + g[1] * B.k[1][1] - f[1];
    CHECK(std::hypot(r0, r1) <= 1e-14 * (1 + std::hypot(f[0], f[1])));
    auto gh = vector_coefficients(h);
    auto gc = vector_coefficients({al * f[0] + be * h[0], al * f[1] + be * h[1]});
    CHECK(gc[0] == doctest::Approx(al * g[0] + be * gh[0]).epsilon(1e-12));
  }
}

TEST_CASE("calibrated r0 is admissible and maximal") {
  double r0 = calibrate_r0();
  CHECK(r0 > 0);
  CHECK(r0 < 0.5);
  CHECK(r0_ball_admissible(r0, 10000, 11));
  CHECK_FALSE(r0_ball_admissible(2 * r0, 10000, 11));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-r0, r0);
  for (int i = 0; i < 1000; ++i) {
    auto g = gamma_coefficients({1 + U(rng), U(rng), 1 + U(rng)});
    for (double v : g) {
      CHECK(v >= 0.5 * (1 - 1e-9));
      CHECK(v <= 1.5);
    }
  }
  CHECK(default_M() > 600);
}
