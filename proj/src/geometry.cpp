#include "ci/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ci {

double Sym2::max_norm() const { return std::max({std::abs(a11), std::abs(a12), std::abs(a22)}); }

namespace {

struct LU3 {
  Mat3 a;
  std::array<int, 3> piv;
};

LU3 lu_factor(Mat3 a) {
  LU3 f;
  f.piv = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (a[p][c] == 0) throw ContractError("singular gram matrix");
    std::swap(a[c], a[p]);
    std::swap(f.piv[c], f.piv[p]);
    for (int r = c + 1; r < 3; ++r) {
      a[r][c] /= a[c][c];
      for (int k = c + 1; k < 3; ++k) a[r][k] -= a[r][c] * a[c][k];
    }
  }
  f.a = a;
  return f;
}

std::array<double, 3> lu_solve(const LU3& f, const std::array<double, 3>& b) {
  std::array<double, 3> y;
  for (int r = 0; r < 3; ++r) {
    y[r] = b[f.piv[r]];
    for (int k = 0; k < r; ++k) y[r] -= f.a[r][k] * y[k];
  }
  for (int r = 2; r >= 0; --r) {
    for (int k = r + 1; k < 3; ++k) y[r] -= f.a[r][k] * y[k];
    y[r] /= f.a[r][r];
  }
  return y;
}

DecompositionBasis make_basis() {
  DecompositionBasis B;
  B.k = {Vec2{1 / std::sqrt(2.0), 1 / std::sqrt(3.0)}, Vec2{-0.5, 2 / std::sqrt(6.0)}, Vec2{0.5, 0.0}};
  for (int i = 0; i < 3; ++i) {
    const auto& k = B.k[i];
    B.dyads[i] = {k[0] * k[0], k[0] * k[1], k[1] * k[1]};
    B.gram[0][i] = B.dyads[i].a11;
    B.gram[1][i] = B.dyads[i].a12;
    B.gram[2][i] = B.dyads[i].a22;
  }
  LU3 f = lu_factor(B.gram);
  for (int c = 0; c < 3; ++c) {
    std::array<double, 3> e{0, 0, 0};
    e[c] = 1;
    auto col = lu_solve(f, e);
    for (int r = 0; r < 3; ++r) B.gram_inverse[r][c] = col[r];
  }
  double a = B.k[0][0], b = B.k[1][0], c = B.k[0][1], d = B.k[1][1];
  double det = a * d - b * c;
  B.vec_inverse = {Vec2{d / det, -b / det}, Vec2{-c / det, a / det}};
  return B;
}

DecompositionBasis& mutable_basis() {
  static DecompositionBasis B = make_basis();
  return B;
}

bool gamma_in_band(const std::array<double, 3>& g2) {
  for (double v : g2)
    if (!(v >= 0.25 && v <= 2.25)) return false;
  return true;
}

Sym2 ball_sample(double r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-r, r);
  return {1 + U(rng), U(rng), 1 + U(rng)};
}

}  // namespace

const DecompositionBasis& basis() {
  static const bool once = [] {
    mutable_basis().r0 = calibrate_r0();
    return true;
  }();
  (void)once;
  return mutable_basis();
}

std::array<double, 3> gamma_squared(const Sym2& R) {
  const auto& G = mutable_basis().gram_inverse;
  std::array<double, 3> v{R.a11, R.a12, R.a22}, g{};
  for (int i = 0; i < 3; ++i) g[i] = G[i][0] * v[0] + G[i][1] * v[1] + G[i][2] * v[2];
  return g;
}

std::array<double, 3> gamma_coefficients(const Sym2& R) {
  const double r0 = basis().r0;
  Sym2 d{R.a11 - 1, R.a12, R.a22 - 1};
  if (!(d.max_norm() <= r0)) {
    std::ostringstream os;
    os << "matrix outside the admissible ball: |R - Id|_max = " << d.max_norm() << " > r0 = " << r0;
    throw AdmissibilityError(os.str());
  }
  auto g2 = gamma_squared(R);
  std::array<double, 3> g{};
  for (int i = 0; i < 3; ++i) {
    if (!(g2[i] > 0)) throw AdmissibilityError("nonpositive gamma^2 in the dyad solve");
    g[i] = std::sqrt(g2[i]);
  }
  return g;
}

Vec2 vector_coefficients(const Vec2& f) {
  const auto& V = mutable_basis().vec_inverse;
  return {V[0][0] * f[0] + V[0][1] * f[1], V[1][0] * f[0] + V[1][1] * f[1]};
}

bool r0_ball_admissible(double r, int samples, unsigned long long seed) {
  for (int s = 0; s < 8; ++s) {
    Sym2 R{1 + ((s & 1) ? r : -r), (s & 2) ? r : -r, 1 + ((s & 4) ? r : -r)};
    if (!gamma_in_band(gamma_squared(R))) return false;
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i)
    if (!gamma_in_band(gamma_squared(ball_sample(r, rng)))) return false;
  return true;
}

double calibrate_r0() {
  static const double r0 = [] {
    double lo = 0;
    double hi = 1;
    while (!r0_ball_admissible(hi, 2000, 1)) {
      hi *= 0.5;
      if (hi < 1e-12) throw ContractError("r0 calibration failed");
    }
    lo = hi;
    hi *= 2;
    for (int k = 0; k < 40; ++k) {
      double mid = 0.5 * (lo + hi);
      if (r0_ball_admissible(mid, 2000, 1))
        lo = mid;
      else
        hi = mid;
    }
    return 0.9 * lo;
  }();
  return r0;
}

double default_M() {
  const double r = 0.5 * basis().r0;
  double gmax = 0, gmin = 1e300;
  for (int s = 0; s < 8; ++s) {
    Sym2 R{1 + ((s & 1) ? r : -r), (s & 2) ? r : -r, 1 + ((s & 4) ? r : -r)};
    for (double v : gamma_squared(R)) {
      gmax = std::max(gmax, std::sqrt(v));
      gmin = std::min(gmin, std::sqrt(v));
    }
  }
  return std::max({1.0, 600 * gmax, 600 / gmin});
}

}  // namespace ci
