#include <cmath>
#include <random>

#include "ci/localization.hpp"
#include "doctest.h"

using namespace ci;

TEST_CASE("quadratic partition sums to one") {
  for (double mu : {1.0, 7.0, 20.0}) {
    auto pts = sample_ball(1.0, {1000, 7});
    double worst = 0;
    for (const auto& p : pts) {
      double s = 0;
      for (const auto& w : partition_jets(mu, p, 0)) s += std::norm(w.alpha[0]);
      worst = std::max(worst, std::abs(s - 1));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("partition support, translation, at most 27 neighbours") {
  Point p{1.05 / 3.0, 0, 0};  // mu = 3: distance 1.05 from l = 0
  CHECK(partition_weight({0, 0, 0}, 3.0, p) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 200; ++i) {
    Point y{U(rng), U(rng), U(rng)};
    Lattice l{1, -2, 3};
    double a = partition_weight(l, 1.0, y);
    double b = partition_weight({0, 0, 0}, 1.0, Point{y.t - 1, y.x1 + 2, y.x2 - 3});
    CHECK(std::abs(a - b) <= 1e-15);
    CHECK(partition_jets(1.0, y, 0).size() <= 27);
  }
}

TEST_CASE("partition jets match point weights and finite differences") {
  double mu = 7;
  Point p{0.11, -0.23, 0.31};
  auto ws = partition_jets(mu, p, 3);
  Jet sum(3);
  for (const auto& w : ws) {
    CHECK(w.alpha[0].real() == doctest::Approx(partition_weight(w.l, mu, p)).epsilon(1e-14));
    double h = 1e-6;
    double fd = (partition_weight(w.l, mu, Point{p.t, p.x1 + h, p.x2}) -
                 partition_weight(w.l, mu, Point{p.t, p.x1 - h, p.x2})) /
                (2 * h);
    CHECK(w.alpha.partial(0, 1, 0).real() == doctest::Approx(fd).epsilon(1e-5).scale(1));
    sum += w.alpha * w.alpha;
  }
  CHECK(std::abs(sum[0] - 1.0) < 1e-13);
  for (int i = 1; i < sum.size(); ++i) CHECK(std::abs(sum[i]) < 1e-8 * std::pow(mu, 3));
}

TEST_CASE("energy profile plateau and support") {
  double r = 0.5, d = 0.25;
  auto E = energy_profile(r, d);
  auto rho = E.rho_field();
  auto e = E.e_field();
  CHECK(rho.eval(Point{}).c[0] == std::sqrt(2 * d));
  CHECK(e.eval(Point{0, r + d / 2 - 1e-3, 0}).c[0] == 2 * d * (std::sqrt(2 * d) * std::sqrt(2 * d) / (2 * d)));
  CHECK(rho.eval(Point{0, r + d + 0.01, 0}).c[0] == 0.0);
  for (const auto& p : sample_ball(r + d, {500, 3})) {
    double v = rho.eval(p).c[0];
    CHECK(v >= 0);
    CHECK(v <= std::sqrt(2 * d) + 1e-15);
  }
}

TEST_CASE("mollifier preserves constants and bounds the displacement") {
  auto c = std::make_shared<ConstantNode>(Rank::Sym, std::array<cd, 3>{0.3, -0.1, 0.2});
  WaveField C(c, 1.0);
  auto Cl = mollify(C, 0.1);
  Point p{0.05, 0.1, -0.2};
  auto v = Cl.eval(p);
  CHECK(v[0] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(-0.1).epsilon(1e-14));
  WaveField b(bump_node(Point{}, 0.5, 1.0), 0.5);
  double ell = 0.05;
  auto bl = mollify(b, ell);
  CHECK(bl.support_radius() == doctest::Approx(0.5 + ell));
  CHECK(bl.eval(Point{0, 0.5 + ell + 1e-3, 0}).c[0] == 0.0);
  // Lipschitz constant of the bump (by sampling its gradient)
  double lip = 0;
  WaveField gx(make_grad(b.node()), 0.5);
  WaveField gt(make_deriv(b.node(), 0), 0.5);
  for (const auto& q : sample_ball(0.5, {4000, 1})) lip = std::max(lip, std::hypot(gx.eval(q).norm(), gt.eval(q).norm()));
  for (const auto& q : sample_ball(0.5, {300, 2})) CHECK(std::abs(bl.eval(q).c[0] - b.eval(q).c[0]) <= 1.01 * lip * ell);
}

TEST_CASE("mollified jets agree with finite differences") {
  WaveField b(bump_node(Point{0, 0.1, 0}, 0.5, 1.0), 0.6);
  auto bl = mollify(b, 0.08);
  Point p{0.02, 0.17, -0.09};
  Ctx ctx(p);
  auto j = bl.jets(ctx, 2);
  double h = 1e-5;
  double fd = (bl.eval(Point{p.t, p.x1, p.x2 + h}).c[0] - bl.eval(Point{p.t, p.x1, p.x2 - h}).c[0]) / (2 * h);
  CHECK(j[0].partial(0, 0, 1).real() == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("stress amplitudes and flux coefficients") {
  auto E = energy_profile(0.5, 0.5);
  WaveField zero(make_zero(Rank::Sym), 0.5);
  auto a = stress_amplitudes(zero, E);
  for (const auto& p : sample_ball(1.0, {100, 1}))
    for (int i = 0; i < 3; ++i) CHECK(a[i].eval(p).c[0] == E.rho_field().eval(p).c[0]);
  // small stress supported well inside the plateau
  auto bump = bump_node(Point{}, 0.4, 0.05);
  WaveField R(make_tensor(bump, Rank::Sym, {0.7, 0.4, -0.3}), 0.4);
  auto Rl = mollify(R, 0.05);
  auto A = stress_amplitudes(Rl, E);
  const auto& B = basis();
  for (const auto& p : sample_ball(1.0, {500, 2})) {
    double ev = E.e_field().eval(p).c[0];
    auto rl = Rl.eval(p);
    double s11 = 0, s12 = 0, s22 = 0;
    for (int i = 0; i < 3; ++i) {
      double ai = A[i].eval(p).c[0];
      s11 += ai * ai * B.dyads[i].a11;
      s12 += ai * ai * B.dyads[i].a12;
      s22 += ai * ai * B.dyads[i].a22;
    }
    CHECK(std::abs(s11 - (ev - rl[0])) <= 1e-10);
    CHECK(std::abs(s12 + rl[1]) <= 1e-10);
    CHECK(std::abs(s22 - (ev - rl[2])) <= 1e-10);
  }
  auto phi = bump_node(Point{}, 0.4, 1.0);
  WaveField f(make_tensor(phi, Rank::Vector, {-B.k[0][0], -B.k[0][1]}), 0.4);
  auto c = flux_coefficients(f);
  for (const auto& p : sample_ball(0.4, {200, 3})) {
    CHECK(c[0].eval(p).c[0] == doctest::Approx(WaveField(phi, 0.4).eval(p).c[0]).epsilon(1e-14));
    CHECK(std::abs(c[1].eval(p).c[0]) < 1e-15);
  }
}

TEST_CASE("stress outside the admissible ball is a precondition error") {
  auto E = energy_profile(0.5, 0.5);
  WaveField R(make_tensor(bump_node(Point{}, 0.4, 1.0), Rank::Sym, {1.0, 0.0, 0.0}), 0.4);
  auto A = stress_amplitudes(R, E);
  CHECK_THROWS_AS(A[0].eval(Point{}), PreconditionError);
}

namespace {
double kernel(const Point& z, double ell) {
  double s = 1 - (z.t * z.t + z.x1 * z.x1 + z.x2 * z.x2) / (ell * ell);
  return s > 0 ? std::exp(-1 / s) : 0.0;
}
// Direct sum of the normalized lattice average, independent of the bank.
template <class F>
double lattice_average(F u, const Point& p, double ell, int npr) {
  double s = ell / npr, num = 0, den = 0;
  int lo[3], hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = int(std::ceil((p[d] - ell) / s));
    hi[d] = int(std::floor((p[d] + ell) / s));
  }
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        Point y{i * s, j * s, k * s};
        double w = kernel(Point{p.t - y.t, p.x1 - y.x1, p.x2 - y.x2}, ell);
        if (w == 0) continue;
        num += u(y) * w;
        den += w;
      }
  return num / den;
}
double radial_hat(double ell, double k) {
  int n = 20000;
  double s = 0, s0 = 0;
  for (int i = 0; i < n; ++i) {
    double r = (i + 0.5) * ell / n;
    double ph = std::exp(-1 / (1 - r * r / (ell * ell)));
    s += ph * r * std::sin(k * r) / k;
    s0 += ph * r * r;
  }
  return s / s0;
}
}  // namespace

TEST_CASE("mollifying twice equals one pass with the self-convolved lattice kernel") {
  double ell = 0.1;
  int npr = 2;
  WaveField b(bump_node(Point{0, 0.1, 0}, 0.5, 1.0), 0.6);
  auto twice = mollify(mollify(b, ell, npr), ell, npr);
  auto u = [&](const Point& y) { return y.norm() < 0.6 ? b.eval(y).c[0] : 0.0; };
  for (const auto& p : sample_ball(0.5, {20, 9})) {
    double once = lattice_average([&](const Point& y) { return lattice_average(u, y, ell, npr); }, p, ell, npr);
    CHECK(std::abs(twice.eval(p).c[0] - once) <= 1e-6);
  }
}

TEST_CASE("lattice average approaches the continuous kernel for fine lattices") {
  double ell = 0.1;
  Vec3 K{3, 10, -7};
  auto a = std::make_shared<ConstantNode>(Rank::Scalar, std::array<cd, 3>{1.0});
  WaveField w(std::make_shared<WaveNode>(a, K), 1.0);
  auto m2 = mollify(mollify(w, ell, 4), ell, 4);
  double h = radial_hat(ell, std::sqrt(K[0] * K[0] + K[1] * K[1] + K[2] * K[2]));
  for (const auto& p : sample_ball(0.3, {20, 0})) {
    cd ex = h * h * std::exp(cd(0, K[0] * p.t + K[1] * p.x1 + K[2] * p.x2));
    CHECK(std::abs(m2.eval_complex(p)[0] - ex) <= 5e-3);
  }
}

TEST_CASE("nyquist option rejects an unresolved frequency") {
  WaveField b(bump_node(Point{}, 0.5, 1.0), 0.5);
  auto bank = make_mollifier_bank({b}, 0.1, 2);
  CHECK_NOTHROW(bank->check_nyquist(0, 1e6));
  CHECK_NOTHROW(bank->check_nyquist(8, 10));
  CHECK_THROWS_AS(bank->check_nyquist(8, 100), ConfigError);
}
