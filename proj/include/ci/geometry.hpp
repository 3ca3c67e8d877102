#pragma once

#include <array>

#include "ci/errors.hpp"

namespace ci {

/// Symmetric 2x2 matrix stored as (11, 12, 22).
struct Sym2 {
  double a11 = 0, a12 = 0, a22 = 0;
  double max_norm() const;
};

using Vec2 = std::array<double, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// The fixed directions k1, k2, k3 with their dyads and solve data.
struct DecompositionBasis {
  std::array<Vec2, 3> k;
  std::array<Sym2, 3> dyads;
  /// Columns are vec(k_i (x) k_i); vec(R) = gram * gamma^2.
  Mat3 gram;
  /// gram^{-1}, computed once from the LU factors.
  Mat3 gram_inverse;
  /// (k1 k2)^{-1}
  std::array<Vec2, 2> vec_inverse;
  double r0 = 0;
};

const DecompositionBasis& basis();

/// gamma_i^2 without admissibility checks.
std::array<double, 3> gamma_squared(const Sym2& R);
/// gamma_i(R); requires ||R - Id||_max <= r0 and positive squares.
std::array<double, 3> gamma_coefficients(const Sym2& R);
/// (g1, g2) with g1 k1 + g2 k2 = f.
Vec2 vector_coefficients(const Vec2& f);

/// Largest dyadic-refined radius with gamma^2 in [1/4, 9/4] on the max-norm ball, times 0.9.
double calibrate_r0();
/// True iff every sampled R in the max-norm ball of radius r keeps gamma^2 in [1/4, 9/4].
bool r0_ball_admissible(double r, int samples, unsigned long long seed);

/// max{1, 600 max gamma, 600 / min gamma} over the ball of radius r0/2.
double default_M();

}  // namespace ci
