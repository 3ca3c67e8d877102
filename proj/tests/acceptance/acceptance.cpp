#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ci/antidiv.hpp"
#include "ci/construction.hpp"
#include "ci/iteration.hpp"
#include "ci/verify.hpp"

using namespace ci;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s:%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(), sec);
  std::fflush(stdout);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WaveField packet(Rank r, std::array<cd, 3> dir, Vec3 K, double radius, bool constant = false) {
  NodeP s = constant ? NodeP(std::make_shared<ConstantNode>(Rank::Scalar, std::array<cd, 3>{1.0}))
                     : bump_node(Point{0, 0.1, -0.05}, radius, 1.0);
  return WaveField(std::make_shared<WaveNode>(make_tensor(s, r, dir), K), 1.0);
}

WaveField real_packet(Rank r, std::array<cd, 3> dir, Vec3 xi, double lambda, double radius) {
  Vec3 K{lambda * xi[0], lambda * xi[1], lambda * xi[2]};
  return combine(packet(r, dir, K, radius), packet(r, dir, {-K[0], -K[1], -K[2]}, radius), 1, 1);
}

double sup_sym(const Sym2& a) { return std::max({std::abs(a.a11), std::abs(a.a12), std::abs(a.a22)}); }

// ---------------------------------------------------------------------------

void geometric_lemma(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  const auto& B = basis();
  const double r0 = B.r0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-r0, r0), F(-1, 1);
  double recon = 0, gmin = 10, gmax = 0, split = 0;
  for (int i = 0; i < 10000; ++i) {
    Sym2 R{1 + U(rng), U(rng), 1 + U(rng)};
    auto g = gamma_coefficients(R);
    Sym2 S;
    for (int j = 0; j < 3; ++j) {
      S.a11 += g[j] * g[j] * B.dyads[j].a11;
      S.a12 += g[j] * g[j] * B.dyads[j].a12;
      S.a22 += g[j] * g[j] * B.dyads[j].a22;
      gmin = std::min(gmin, g[j]);
      gmax = std::max(gmax, g[j]);
    }
    recon = std::max(recon, sup_sym({S.a11 - R.a11, S.a12 - R.a12, S.a22 - R.a22}));
    Vec2 f{F(rng), F(rng)};
    auto c = vector_coefficients(f);
    split = std::max(split, std::hypot(c[0] * B.k[0][0] + c[1] * B.k[1][0] - f[0],
                                       c[0] * B.k[0][1] + c[1] * B.k[1][1] - f[1]));
  }
  double sec = elapsed(t0);
  o.detail << " r0 = " << r0 << ", reconstruction " << recon << ", gamma in [" << gmin << ", " << gmax
           << "], vector split " << split << ", runtime " << sec << " s";
  o.require(recon <= 1e-12, "reconstruction <= 1e-12");
  o.require(gmin >= 0.5 && gmax <= 1.5, "gamma in [1/2, 3/2]");
  o.require(split <= 1e-14, "vector split <= 1e-14");
  o.require(sec < 2, "runtime < 2 s");
}

void antidiv_exactness(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1), L(8, 48), Rad(0.4, 0.9);
  std::uniform_int_distribution<int> Mo(1, 3);
  auto pts = sample_ball(0.8, {200, 1});
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    Vec3 xi;
    do {
      xi = {0.5 * U(rng), U(rng), U(rng)};
    } while (std::hypot(xi[1], xi[2]) < 0.3);
    double n = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    for (auto& x : xi) x /= n;
    double lam = L(rng), rad = Rad(rng);
    int m = Mo(rng);
    Vec3 K{lam * xi[0], lam * xi[1], lam * xi[2]};
    if (i % 2 == 0) {
      auto W = packet(Rank::Vector, {cd(U(rng), U(rng)), cd(U(rng), U(rng))}, K, rad);
      worst = std::max(worst, exactness_error(antidivergence_matrix(W, m), W, pts));
    } else {
      auto H = packet(Rank::Scalar, {cd(U(rng), U(rng))}, K, rad);
      worst = std::max(worst, exactness_error(antidivergence_vector(H, m), H, pts));
    }
  }
  auto C = packet(Rank::Vector, {1.0, cd(0.5, 0.2)}, {2.4, 4.8, 6.4}, 1, true);
  auto Cs = packet(Rank::Scalar, {1.0}, {0, 4.8, 6.4}, 1, true);
  auto rc = antidivergence_matrix(C, 1), rs = antidivergence_vector(Cs, 1);
  double closure = 0;
  for (const auto& p : pts) closure = std::max({closure, rc.closure.eval(p).norm(), rs.closure.eval(p).norm()});
  o.detail << " worst relative exactness error " << worst << " over 20 packets, order-1 constant-amplitude closure "
           << closure;
  o.require(worst <= 1e-8, "exactness <= 1e-8");
  o.require(closure == 0.0, "constant amplitude closure == 0");
}

void antidiv_decay(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  SamplerConfig s{10000, 2};
  std::vector<double> sups;
  for (double lam : {16.0, 32.0, 64.0}) {
    auto U = real_packet(Rank::Vector, {1.0, 0.3}, {0, 0.6, 0.8}, lam, 0.9);
    sups.push_back(antidivergence_matrix(U, 3).residual_sup(s));
  }
  // least-squares slope of log sup against log lambda
  double x[3] = {std::log(16.0), std::log(32.0), std::log(64.0)}, mx = 0, my = 0;
  for (int i = 0; i < 3; ++i) {
    mx += x[i] / 3;
    my += std::log(sups[i]) / 3;
  }
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += (x[i] - mx) * (std::log(sups[i]) - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  double slope = num / den, sec = elapsed(t0);
  o.detail << " closure sups " << sups[0] << ", " << sups[1] << ", " << sups[2] << ", slope " << slope << ", runtime "
           << sec << " s";
  o.require(slope <= -2.75, "slope <= -2.75");
  o.require(sec < 30, "runtime < 30 s");
}

void partition(Outcome& o) {
  double worst = 0;
  for (double mu : {1.0, 7.0, 20.0})
    for (const auto& p : sample_ball(1.0, {1000, 7})) {
      double s = 0;
      for (const auto& w : partition_jets(mu, p, 0)) s += std::norm(w.alpha[0]);
      worst = std::max(worst, std::abs(s - 1));
    }
  o.detail << " max |sum alpha^2 - 1| = " << worst;
  o.require(worst <= 1e-12, "partition within 1e-12");
}

void mollifier(Outcome& o) {
  WaveField R(make_tensor(bump_node(Point{}, 1.0, 0.05), Rank::Sym, {0.7, 0.4, -0.3}), 1.0);
  auto pts = sample_ball(1.0, {4000, 3});
  auto ne = norm_entry(R, pts, 1);
  const double Lambda = ne.c1 - ne.sup;  // sup |grad_{t,x} R|
  double lo = 1e300, hi = 0;
  for (double ell : {0.02, 0.04, 0.08}) {
    auto Rl = mollify(R, ell);
    double m = 0;
    for (const auto& p : pts) m = std::max(m, (Rl.eval(p) - R.eval(p)).norm());
    double q = m / (Lambda * ell);
    o.detail << " ell " << ell << ": " << q << ";";
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  o.detail << " spread " << hi / lo;
  o.require(hi / lo <= 2, "factor spread <= 2");
}

void substep_identities(Outcome& o, const SeedResult& seed, const StageResult& S) {
  const auto& B = basis();
  auto pts = sample_ball(seed.q.support_radius + S.params.delta, {50, 5});
  double e1 = 0, f1 = 0, e3 = 0, f3 = 0;
  for (const auto& p : pts) {
    Value R01 = S.after[0].R.eval(p), dR1 = S.sub[0].dR.eval(p);
    Value f01 = S.after[0].f.eval(p), df1 = S.sub[0].df.eval(p);
    double a2 = S.a[1].eval(p).c[0], a3 = S.a[2].eval(p).c[0], c2 = S.c[1].eval(p).c[0];
    const auto &k2 = B.k[1], &k3 = B.k[2];
    Sym2 m{R01[0] + a2 * a2 * k2[0] * k2[0] + a3 * a3 * k3[0] * k3[0] - dR1[0],
           R01[1] + a2 * a2 * k2[0] * k2[1] + a3 * a3 * k3[0] * k3[1] - dR1[1],
           R01[2] + a2 * a2 * k2[1] * k2[1] + a3 * a3 * k3[1] * k3[1] - dR1[2]};
    e1 = std::max(e1, sup_sym(m));
    f1 = std::max(f1, std::hypot(f01[0] + c2 * k2[0] - df1[0], f01[1] + c2 * k2[1] - df1[1]));
    Value sR = S.sub[0].dR.eval(p) + S.sub[1].dR.eval(p) + S.sub[2].dR.eval(p);
    Value sf = S.sub[0].df.eval(p) + S.sub[1].df.eval(p) + S.sub[2].df.eval(p);
    e3 = std::max(e3, (S.out.R.eval(p) - sR).norm());
    f3 = std::max(f3, (S.out.f.eval(p) - sf).norm());
  }
  o.detail << " after substep 1: stress " << e1 << ", flux " << f1 << "; after substep 3: stress " << e3 << ", flux "
           << f3;
  o.require(e1 <= 1e-10 && f1 <= 1e-10, "substep 1 representation <= 1e-10");
  o.require(e3 <= 1e-10 && f3 <= 1e-10, "substep 3 representation <= 1e-10");
}

void stage_contracts(Outcome& o, const SeedResult& seed, const StageResult& S, double build_sec) {
  auto t0 = std::chrono::steady_clock::now();
  DiagnosticsOptions opt;
  opt.sampler = {10000, 0};
  opt.c1 = false;
  DiagnosticsRow row = diagnostics(S.out, &seed.q, 1, 3, S.params.delta, S.params.delta_bar, opt);
  const double M = default_M(), d = S.params.delta;
  double growth = S.out.support_radius - seed.q.support_radius;
  auto sup = support_check(S.out, S.out.support_radius + 0.05, 2000);
  double sec = elapsed(t0) + build_sec;
  o.detail << " M = " << M << ": |dv| " << row.sup_dv << ", |dtheta| " << row.sup_dtheta << ", |dp| " << row.sup_dp
           << ", div " << row.res_div.sup << " / " << row.res_div.budget << ", momentum " << row.res_momentum.sup
           << " / " << row.res_momentum.budget << ", temperature " << row.res_temperature.sup << " / "
           << row.res_temperature.budget << ", support growth " << growth << ", |R~| " << row.sup_R << ", runtime "
           << sec << " s";
  o.require(row.sup_dv <= M * std::sqrt(d), "|v~ - v| <= M sqrt(delta)");
  o.require(row.sup_dtheta <= M * std::sqrt(d), "|theta~ - theta| <= M sqrt(delta)");
  o.require(row.sup_dp <= M * d, "|p~ - p| <= M delta");
  o.require(row.res_div.within_budget(), "div <= 1e-8 relative");
  o.require(row.res_momentum.within_budget(), "momentum residual <= budget");
  o.require(row.res_temperature.within_budget(), "temperature residual <= budget");
  o.require(growth <= d && sup.pass, "support growth <= delta");
  o.require(sec < 600, "runtime < 10 min");
}

double osc_trans(const StageResult& S, const std::vector<Point>& pts) {
  double s = 0;
  for (const auto& rec : S.sub) s += sup_norm_estimate(rec.osc_R, pts) + sup_norm_estimate(rec.trans_R, pts);
  return s;
}

void stress_reduction(Outcome& o, const SeedResult& seed, const StageResult& S) {
  RunConfig c;
  c.sampler = {500, 0};
  IterationHistory H = run(c);
  for (const auto& r : H.rows)
    o.detail << " stage " << r.stage << ": |R| " << r.sup_R << ", |f| " << r.sup_f
             << (r.flag.empty() ? "" : " (flagged: " + r.flag + ")") << ";";
  bool strict = !H.terminated_early && H.rows.size() == 3;
  for (size_t n = 1; n < H.rows.size(); ++n) {
    o.detail << " ratio R " << H.rows[n].sup_R / H.rows[n - 1].sup_R << ", f " << H.rows[n].sup_f / H.rows[n - 1].sup_f
             << ";";
    strict = strict && H.rows[n].sup_R < H.rows[n - 1].sup_R && H.rows[n].sup_f < H.rows[n - 1].sup_f;
  }
  o.require(strict, "two stages with strictly decreasing |R|_0 and |f|_0");

  StageParams P4 = S.params;
  for (auto& l : P4.lambda) l *= 4;
  StageResult S4 = stage(seed.q, P4);
  auto pts = sample_ball(S.out.support_radius, {400, 4});
  double base = osc_trans(S, pts), quad = osc_trans(S4, pts);
  o.detail << " oscillation+transport " << base << " -> " << quad << " at 4 lambda (factor " << base / quad << ")";
  o.require(base / quad >= 3, "4x lambda cuts oscillation+transport by >= 3");
}

void seed_criterion(Outcome& o, const SeedResult& s) {
  const double M = s.params.M;
  const Point probe{0, M_PI / (2 * s.params.lambda2), 0};
  Value w2 = s.w2o.eval(probe);
  double v0 = s.q.v.eval(probe).norm();
  auto tags = collect_tags(s.q.theta, sample_ball(0.85, {300, 4}));
  bool structural = tags.size() == 2;
  for (const auto& g : tags)
    structural = structural && g.xi1 == s.xi[0] && g.xi2 == s.xi[1] && g.lambda == s.N && g.w1 == 0 && g.w2 == 0;
  SamplerConfig sc{1000, 1};
  double R0 = sup_norm_estimate(s.q.R, sample_ball(s.params.r, sc));
  double f0 = sup_norm_estimate(s.q.f, sample_ball(s.params.r, sc));
  SeedParams p2 = s.params;
  p2.lambda1 *= 2;
  p2.lambda2 *= 2;
  SeedResult s2 = seed_solution(p2);
  double R1 = sup_norm_estimate(s2.q.R, sample_ball(s.params.r, sc));
  double f1 = sup_norm_estimate(s2.q.f, sample_ball(s.params.r, sc));
  o.detail << " |v0| at probe " << v0 << " (10 M = " << 10 * M << "), w2o(probe) = (" << w2[0] << ", " << w2[1]
           << "), theta tags " << tags.size() << (structural ? " admissible" : " NOT admissible") << ", |R0| " << R0
           << " -> " << R1 << ", |f0| " << f0 << " -> " << f1 << " at 2x lambda";
  o.require(v0 >= 10 * M, "|v0| >= 10 M");
  o.require(w2[0] == 0.0 && w2[1] == -20 * M, "w2o(probe) = (0, -20 M)");
  o.require(structural, "theta0 admissible");
  o.require(R1 < R0 && f1 < f0, "|R0|, |f0| decrease at 2x lambda");
}

void exponents(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  auto r = exponent_report(Rational(0), Rational(3, 2));
  auto e = exponent_report(rational_from_decimal("0.001"), Rational(3, 2));
  bool domain = false;
  try {
    exponent_report(rational_from_decimal("0.15"), Rational(3, 2));
  } catch (const DomainError&) {
    domain = true;
  }
  double sec = elapsed(t0);
  o.detail << " eps -> 0: d = " << r.d.str() << ", c = " << r.c.str() << ", alpha_v < " << r.alpha_v.str()
           << ", alpha_theta < " << r.alpha_theta.str() << "; eps = 1e-3: " << e.alpha_v.to_double() << ", "
           << e.alpha_theta.to_double();
  o.require(r.d == Rational(6) && r.c == Rational(9), "d = 6, c = 9");
  o.require(r.alpha_v == Rational(1, 28) && r.alpha_theta == Rational(1, 25), "limits 1/28 and 1/25");
  o.require(std::abs(e.alpha_v.to_double() - 1.0 / 28) <= 1e-2 && std::abs(e.alpha_theta.to_double() - 1.0 / 25) <= 1e-2,
            "eps = 1e-3 within 1e-2");
  o.require(domain, "eps = 0.15 is a domain error");
  o.require(sec < 1, "runtime < 1 s");
}

void delta_schedule(Outcome& o) {
  RunConfig c;
  c.N_stages = 0;
  c.sampler = {50, 0};
  validate_run_config(c);
  IterationHistory H = run(c);
  bool exact = true;
  for (int n = 0; n <= 6; ++n) {
    StageParams P = stage_params_for(c, n + 1, 1);
    exact = exact && P.delta == std::pow(c.a, -std::pow(c.b, n + 1));
  }
  exact = exact && H.rows.size() == 1 && H.rows[0].delta == std::pow(c.a, -1.0);
  o.detail << " a = " << c.a << ", b = " << c.b << ", sum delta_n = " << H.sum_delta << " (r = " << c.r
           << "), 4M/sqrt(a) = " << H.cauchy_bound << " (eps = " << c.epsilon << ")";
  o.require(exact, "delta_n = a^{-b^n} exactly");
  o.require(H.sum_delta < c.r, "sum delta_n < r");
  o.require(H.cauchy_bound < c.epsilon, "4M/sqrt(a) < eps");
  RunConfig bad = c;
  bad.a = 1.2;
  bool rejected = false;
  try {
    validate_run_config(bad);
  } catch (const ConfigError&) {
    rejected = true;
  }
  o.require(rejected, "a < 3/2 rejected");
}

}  // namespace

int main() {
  criterion("geometric_lemma", geometric_lemma);
  criterion("antidiv_exactness", antidiv_exactness);
  criterion("antidiv_decay", antidiv_decay);
  criterion("partition_of_unity", partition);
  criterion("mollifier_estimate", mollifier);
  criterion("exponent_arithmetic", exponents);
  criterion("delta_schedule", delta_schedule);

  std::optional<SeedResult> seed;
  criterion("seed", [&](Outcome& o) {
    seed = seed_solution(SeedParams{});
    seed_criterion(o, *seed);
  });
  if (!seed) return 1;
  auto t0 = std::chrono::steady_clock::now();
  StageResult S = stage(seed->q, StageParams{});
  double build = elapsed(t0);
  criterion("substep_identities", [&](Outcome& o) { substep_identities(o, *seed, S); });
  criterion("stage_contracts", [&](Outcome& o) { stage_contracts(o, *seed, S, build); });
  criterion("stress_reduction", [&](Outcome& o) { stress_reduction(o, *seed, S); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
