#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ci/fields.hpp"
#include "doctest.h"

using namespace ci;

namespace {
NodeP unit_wave(Rank r, std::array<cd, 3> amp, WaveTag tag) {
  auto a = std::make_shared<ConstantNode>(r, amp);
  return std::make_shared<WaveNode>(a, tag_wavevector(tag), tag);
}
}  // namespace

TEST_CASE("derivative of a constant-amplitude wave multiplies by i lambda xi") {
  WaveTag g{0, 1, 4, 0, 0, 1};
  auto w = unit_wave(Rank::Scalar, {1.0}, g);
  auto d = make_deriv(w, 2);
  Ctx ctx(Point{0.1, 0.2, 0.3});
  auto ts = ctx.terms(*d, 0);
  REQUIRE(ts->size() == 1);
  CHECK(std::abs((*ts)[0].a[0].value() - cd(0, 4)) < 1e-14);
  CHECK((*ts)[0].tagged);
  g.sign = -1;
  auto dm = make_deriv(unit_wave(Rank::Scalar, {1.0}, g), 2);
  CHECK(std::abs((*Ctx(Point{}).terms(*dm, 0))[0].a[0].value() - cd(0, -4)) < 1e-14);
}

TEST_CASE("wave evaluation matches the closed form") {
  WaveTag g{0.6, 0.8, 7, 0.3, -0.2, 1};
  auto w = unit_wave(Rank::Vector, {1.0, cd(0, 2)}, g);
  WaveField f(w, 1.0);
  Point p{0.2, -0.3, 0.4};
  Vec3 K = tag_wavevector(g);
  double ph = K[0] * p.t + K[1] * p.x1 + K[2] * p.x2;
  auto z = f.eval_complex(p);
  CHECK(std::abs(z[0] - std::exp(cd(0, ph))) < 1e-13);
  CHECK(std::abs(z[1] - cd(0, 2) * std::exp(cd(0, ph))) < 1e-13);
  // time derivative by the jet equals the transport identity -lambda xi.w i
  auto dt = differentiate(f, 0).eval_complex(p);
  CHECK(std::abs(dt[0] - cd(0, K[0]) * z[0]) < 1e-12);
}

TEST_CASE("bump and plateau profiles") {
  auto b = bump_node(Point{}, 0.5, 3.0);
  WaveField f(b, 0.5);
  CHECK(f.eval(Point{}).c[0] == doctest::Approx(3.0));
  CHECK(f.eval(Point{0, 0.6, 0}).c[0] == 0.0);
  Point p{0.1, 0.2, -0.1};
  double h = 1e-6;
  double fd = (f.eval(Point{0.1, 0.2 + h, -0.1}).c[0] - f.eval(Point{0.1, 0.2 - h, -0.1}).c[0]) / (2 * h);
  Ctx ctx(p);
  auto j = f.jets(ctx, 2);
  CHECK(j[0].partial(0, 1, 0).real() == doctest::Approx(fd).epsilon(1e-7));
  auto pl = plateau_node(2.0, 0.3, 0.6);
  WaveField g(pl, 0.6);
  CHECK(g.eval(Point{0, 0.1, 0.1}).c[0] == 2.0);
  CHECK(g.eval(Point{0, 0.7, 0}).c[0] == 0.0);
  double mid = g.eval(Point{0, std::sqrt(0.5 * (0.09 + 0.36)), 0}).c[0];
  CHECK(mid == doctest::Approx(1.0));
}

TEST_CASE("product merge cancels exact opposite modes") {
  WaveTag g{1, 0, 3, 0, 0, 1};
  WaveTag gm = g;
  gm.sign = -1;
  auto a = make_sum(unit_wave(Rank::Scalar, {1.0}, g), unit_wave(Rank::Scalar, {1.0}, gm));
  auto c = make_sum(unit_wave(Rank::Scalar, {1.0}, g), unit_wave(Rank::Scalar, {-1.0}, gm));
  auto p = std::make_shared<ProductNode>(a, c, ProductKind::ScalarScalar, true);
  Ctx ctx(Point{0, 0.3, 0});
  auto ts = ctx.terms(*p, 0);
  CHECK(ts->size() == 2);  // (e+e-)(e-e-) = e^2 - e^-2
  for (const auto& t : *ts) CHECK(!t.smooth());
}

TEST_CASE("dense and termwise products agree") {
  WaveTag g{0.6, 0.8, 5, 0, 0, 1};
  auto a = std::make_shared<WaveNode>(bump_node(Point{}, 1.0, 1.0), tag_wavevector(g), g);
  auto b = make_sum(affine_node(1.0, {0, 1, 0}), a);
  auto pt = std::make_shared<ProductNode>(a, b, ProductKind::ScalarScalar);
  auto pd = std::make_shared<DenseProductNode>(a, b, ProductKind::ScalarScalar);
  Ctx ctx(Point{0.1, 0.2, 0.3});
  auto vt = ctx.value(*pt, 3);
  auto vd = ctx.value(*pd, 3);
  for (int i = 0; i < jet_size(3); ++i) CHECK(std::abs((*vt)[0][i] - (*vd)[0][i]) < 1e-12);
}

TEST_CASE("divergence of a symmetric field and grad-perp") {
  // psi = x1^2 x2 -> grad-perp = (-x1^2, 2 x1 x2), div = 0
  auto psi = std::make_shared<FunctionNode>(Rank::Scalar, [](const Point& p, int K) {
    Vals v;
    Jet x = Jet::variable(K, 1, p.x1), y = Jet::variable(K, 2, p.x2);
    v[0] = x * x * y;
    return v;
  });
  auto u = make_perp_grad(psi);
  WaveField f(u, 1.0);
  auto val = f.eval(Point{0, 0.5, 0.25});
  CHECK(val[0] == doctest::Approx(-0.25));
  CHECK(val[1] == doctest::Approx(0.25));
  WaveField d(make_div(u), 1.0);
  CHECK(std::abs(d.eval(Point{0, 0.5, 0.25})[0]) < 1e-14);
}

TEST_CASE("value norms") {
  Value s;
  s.n = 3;
  s.c = {1, 0, -3};
  CHECK(s.norm() == doctest::Approx(3.0));
  s.c = {2, 1, 2};
  CHECK(s.norm() == doctest::Approx(3.0));
  Value v;
  v.n = 2;
  v.c = {3, 4, 0};
  CHECK(v.norm() == doctest::Approx(5.0));
}

TEST_CASE("sampler is deterministic, in the ball, prefix-stable") {
  auto a = sample_ball(0.7, {200, 5});
  auto b = sample_ball(0.7, {50, 5});
  REQUIRE(a.size() == 200);
  for (size_t i = 0; i < b.size(); ++i) CHECK(a[i].t == b[i].t);
  for (const auto& p : a) CHECK(p.norm() < 0.7);
  auto c = sample_ball(0.7, {50, 6});
  CHECK(c[0].t != b[0].t);
}

TEST_CASE("sup and Holder estimates on closed-form fields") {
  WaveField f(bump_node(Point{}, 1.0, 2.0), 1.0);
  double s = sup_norm_estimate(f, SamplerConfig{4000, 1});
  CHECK(s <= 2.0);
  CHECK(s > 1.9);
  WaveField a(affine_node(0.0, {0, 1, 0}), 1.0);
  double hs = holder_seminorm_estimate(a, 0.5, SamplerConfig{50, 2});
  CHECK(hs == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
}

TEST_CASE("combine and rank contract") {
  WaveField a(affine_node(1.0, {0, 1, 0}), 1.0);
  WaveField b(affine_node(2.0, {0, 0, 1}), 1.0);
  auto c = combine(a, b, 2.0, -1.0);
  CHECK(c.eval(Point{0, 0.5, 0.5})[0] == doctest::Approx(2 * 1.5 - 2.5));
  WaveField v(std::make_shared<ConstantNode>(Rank::Vector, std::array<cd, 3>{1.0, 2.0, 0}), 1.0);
  CHECK_THROWS_AS(combine(a, v, 1, 1), ContractError);
  CHECK_THROWS_AS(a.eval(Point{0, 5, 0}), DomainError);
  auto pr = product_at(v, v, {Point{}});
  CHECK(pr[0].n == 3);
  CHECK(pr[0][1] == doctest::Approx(2.0));
}

TEST_CASE("grid snapshot round trip and interpolation") {
  auto fn = std::make_shared<FunctionNode>(Rank::Vector, [](const Point& p, int K) {
    Vals v;
    v[0] = Jet::variable(K, 1, p.x1) * cd(2.0) + Jet::constant(K, p.t);
    v[1] = Jet::variable(K, 2, p.x2) * Jet::variable(K, 2, p.x2) * cd(0, 1);
    return v;
  });
  WaveField f(fn, 1.0);
  Box box = Box::cube(1.0);
  auto g = sample_grid(f, {9, 11, 13}, box);
  auto path = (std::filesystem::temp_directory_path() / "ci_grid_test.txt").string();
  write_grid(path, g);
  auto h = read_grid(path);
  CHECK(h.dims() == g.dims());
  CHECK(h.rank() == Rank::Vector);
  CHECK(h.data() == g.data());
  std::remove(path.c_str());
  auto node = std::make_shared<GridNode>(std::make_shared<GridAmplitude>(h));
  WaveField gf(node, 1.0, box);
  Point p{0.13, -0.41, 0.27};
  auto z = gf.eval_complex(p);
  CHECK(z[0].real() == doctest::Approx(2 * p.x1 + p.t).epsilon(1e-12));
  CHECK(z[1].imag() == doctest::Approx(p.x2 * p.x2).epsilon(1e-12));
  Ctx ctx(p);
  auto j = gf.jets(ctx, 2);
  CHECK(j[0].partial(0, 1, 0).real() == doctest::Approx(2.0));
  CHECK(j[1].partial(0, 0, 2).imag() == doctest::Approx(2.0));
}

TEST_CASE("terms sidecar round trip") {
  std::vector<WaveTag> tags{{0.6, 0.8, 32, 0.1, -0.2, 1}, {1, 0, 64, 0, 0, -1}};
  auto path = (std::filesystem::temp_directory_path() / "ci_terms_test.txt").string();
  write_terms(path, tags);
  auto back = read_terms(path);
  CHECK(back == tags);
  std::remove(path.c_str());
}
