#include "ci/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <cstdlib>
#include <sstream>

namespace ci {

namespace {

// value jets without the box check: every constructed node is defined everywhere
Vals jets_at(const NodeP& n, Ctx& ctx, int K) { return *ctx.value(*n, K); }

double norm_of(const Vals& v, int nc) {
  Value x;
  x.n = nc;
  for (int c = 0; c < nc; ++c) x.c[c] = v[c].value().real();
  return x.norm();
}

double pd(const Jet& j, int dir) {
  int a = dir == 0, b = dir == 1, c = dir == 2;
  return j.partial(a, b, c).real();
}

// symmetric storage index of (i, j)
int sidx(int i, int j) { return i + j; }

struct Accum {
  std::vector<double> res, scale, unexpl;
  std::vector<std::vector<double>> closure;  // per closure field, per point
};

ResidualStats finish(const Accum& A, size_t n) {
  ResidualStats s;
  s.sample_count = n;
  double sum = 0, sc = 0;
  for (size_t i = 0; i < n; ++i) {
    s.sup = std::max(s.sup, A.res[i]);
    sum += A.res[i];
    sc = std::max(sc, A.scale[i]);
    s.unexplained = std::max(s.unexplained, A.unexpl[i]);
  }
  s.mean_abs = n ? sum / n : 0;
  double b = 0;
  for (const auto& c : A.closure) b += c.empty() ? 0 : *std::max_element(c.begin(), c.end());
  s.budget = b + sc;
  return s;
}

std::vector<WaveField> closures_of_rank(const Quintuple& q, Rank r) {
  std::vector<WaveField> o;
  for (const auto& c : q.closures)
    if (c.rank() == r) o.push_back(c);
  return o;
}

}  // namespace

ResidualStats momentum_residual(const Quintuple& q, const std::vector<Point>& pts) {
  Accum A;
  auto cl = closures_of_rank(q, Rank::Vector);
  A.closure.assign(cl.size(), {});
  for (const Point& p : pts) {
    Ctx ctx(p);
    Vals v = jets_at(q.v.node(), ctx, 1), pr = jets_at(q.p.node(), ctx, 1), th = jets_at(q.theta.node(), ctx, 0),
         R = jets_at(q.R.node(), ctx, 1);
    std::array<Jet, 3> vv;
    product_amp(ProductKind::SymOuter, v, v, 1, vv, 0.5);
    double res[2], sc = 0;
    for (int i = 0; i < 2; ++i) {
      double dt = pd(v[i], 0);
      double dvv = pd(vv[sidx(i, 0)], 1) + pd(vv[sidx(i, 1)], 2);
      double gp = pd(pr[0], i + 1);
      double tb = i == 1 ? th[0].value().real() : 0.0;
      double dR = pd(R[sidx(i, 0)], 1) + pd(R[sidx(i, 1)], 2);
      res[i] = dt + dvv + gp - tb - dR;
      sc = std::max({sc, std::abs(dt), std::abs(gp), std::abs(tb)});
      for (int j = 0; j < 2; ++j)
        sc = std::max({sc, std::abs(pd(vv[sidx(i, j)], j + 1)), std::abs(pd(R[sidx(i, j)], j + 1)),
                       std::abs(v[j].value().real() * pd(v[i], j + 1))});
    }
    A.res.push_back(std::hypot(res[0], res[1]));
    A.scale.push_back(kRoundoff * sc);
    double u = A.res.back();
    if (q.mom_closure) {
      Vals c = jets_at(q.mom_closure, ctx, 0);
      u = std::hypot(res[0] - c[0].value().real(), res[1] - c[1].value().real());
    }
    A.unexpl.push_back(u);
    for (size_t k = 0; k < cl.size(); ++k) A.closure[k].push_back(norm_of(jets_at(cl[k].node(), ctx, 0), 2));
  }
  return finish(A, pts.size());
}

ResidualStats momentum_residual(const Quintuple& q, const SamplerConfig& s) {
  return momentum_residual(q, sample_ball(q.support_radius, s));
}

ResidualStats temperature_residual(const Quintuple& q, const std::vector<Point>& pts) {
  Accum A;
  auto cl = closures_of_rank(q, Rank::Scalar);
  A.closure.assign(cl.size(), {});
  for (const Point& p : pts) {
    Ctx ctx(p);
    Vals v = jets_at(q.v.node(), ctx, 1), th = jets_at(q.theta.node(), ctx, 1), f = jets_at(q.f.node(), ctx, 1);
    double dt = pd(th[0], 0);
    double dvt = 0, df = 0, sc = std::abs(dt);
    for (int j = 0; j < 2; ++j) {
      double a = pd(mul(v[j], th[0], 1), j + 1), b = pd(f[j], j + 1);
      dvt += a;
      df += b;
      sc = std::max({sc, std::abs(a), std::abs(b), std::abs(v[j].value().real() * pd(th[0], j + 1)),
                     std::abs(th[0].value().real() * pd(v[j], j + 1))});
    }
    double res = dt + dvt - df;
    A.res.push_back(std::abs(res));
    A.scale.push_back(kRoundoff * sc);
    double u = std::abs(res);
    if (q.temp_closure) u = std::abs(res - jets_at(q.temp_closure, ctx, 0)[0].value().real());
    A.unexpl.push_back(u);
    for (size_t k = 0; k < cl.size(); ++k) A.closure[k].push_back(norm_of(jets_at(cl[k].node(), ctx, 0), 1));
  }
  return finish(A, pts.size());
}

ResidualStats temperature_residual(const Quintuple& q, const SamplerConfig& s) {
  return temperature_residual(q, sample_ball(q.support_radius, s));
}

ResidualStats divergence_check(const WaveField& v, const std::vector<Point>& pts) {
  ResidualStats s;
  s.sample_count = pts.size();
  double sum = 0, g = 0;
  for (const Point& p : pts) {
    Ctx ctx(p);
    Vals J = jets_at(v.node(), ctx, 1);
    double d1 = pd(J[0], 1), d2 = pd(J[1], 2);
    double d = std::abs(d1 + d2);
    g = std::max({g, std::abs(d1), std::abs(d2), std::abs(pd(J[0], 2)), std::abs(pd(J[1], 1))});
    s.sup = std::max(s.sup, d);
    sum += d;
  }
  s.mean_abs = pts.empty() ? 0 : sum / pts.size();
  s.budget = 1e-8 * g;
  s.unexplained = s.sup;
  return s;
}

ResidualStats divergence_check(const WaveField& v, double radius, const SamplerConfig& s) {
  return divergence_check(v, sample_ball(radius, s));
}

// ---------------------------------------------------------------------------
// weak form

namespace {

double bump1(double u, double* du) {
  if (std::abs(u) >= 1) {
    *du = 0;
    return 0;
  }
  double d = 1 - u * u;
  double b = std::exp(1 - 1 / d);
  *du = b * (-2 * u / (d * d));
  return b;
}

}  // namespace

ResidualStats weak_form_residual(const Quintuple& q, int test_count, const WeakFormOptions& o) {
  ResidualStats s;
  s.sample_count = static_cast<size_t>(std::max(test_count, 0));
  const double r = q.support_radius;
  const double D = o.domain_radius > 0 ? o.domain_radius : 2 * r;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(-1, 1), S(o.min_scale, o.max_scale);
  double sum = 0;
  for (int t = 0; t < test_count; ++t) {
    double sc = S(rng) * r;
    Point c;
    do {
      c = {U(rng) * D, U(rng) * D, U(rng) * D};
    } while (c.norm() + sc * std::sqrt(3.0) > D);
    const int n = o.nodes;
    const double h = 2 * sc / n;
    double W[4] = {0, 0, 0, 0}, Bd = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int e = 0; e < n; ++e) {
          double u[3] = {-1 + (a + 0.5) * h / sc, -1 + (b + 0.5) * h / sc, -1 + (e + 0.5) * h / sc};
          double f[3], df[3];
          for (int d = 0; d < 3; ++d) f[d] = bump1(u[d], &df[d]);
          double phi = f[0] * f[1] * f[2];
          if (phi == 0) continue;
          double g[3] = {df[0] * f[1] * f[2] / sc, f[0] * df[1] * f[2] / sc, f[0] * f[1] * df[2] / sc};
          Point p{c.t + u[0] * sc, c.x1 + u[1] * sc, c.x2 + u[2] * sc};
          Ctx ctx(p);
          auto val = [&](const NodeP& nd, int k) { return jets_at(nd, ctx, 0)[k].value().real(); };
          double v[2] = {val(q.v.node(), 0), val(q.v.node(), 1)};
          double pr = val(q.p.node(), 0), th = val(q.theta.node(), 0);
          double R[3] = {val(q.R.node(), 0), val(q.R.node(), 1), val(q.R.node(), 2)};
          double fl[2] = {val(q.f.node(), 0), val(q.f.node(), 1)};
          for (int j = 0; j < 2; ++j) {
            double w = g[0] * v[j] + pr * g[j + 1] + (j == 1 ? th * phi : 0.0);
            for (int i = 0; i < 2; ++i) w += (v[j] * v[i] - R[sidx(i, j)]) * g[i + 1];
            W[j] += w;
          }
          W[2] += th * g[0] + (v[0] * th - fl[0]) * g[1] + (v[1] * th - fl[1]) * g[2];
          W[3] += v[0] * g[1] + v[1] * g[2];
          double cb = 0;
          if (q.mom_closure) cb += norm_of(jets_at(q.mom_closure, ctx, 0), 2);
          if (q.temp_closure) cb += std::abs(val(q.temp_closure, 0));
          Bd += cb * std::abs(phi);
        }
    double vol = h * h * h;
    double m = 0;
    for (double w : W) m = std::max(m, std::abs(w) * vol);
    s.sup = std::max(s.sup, m);
    s.budget = std::max(s.budget, Bd * vol);
    sum += m;
  }
  s.mean_abs = test_count > 0 ? sum / test_count : 0;
  s.budget += 1e-6;
  return s;
}

// ---------------------------------------------------------------------------

SupportReport support_check(const Quintuple& q, double radius, size_t count, uint64_t seed) {
  SupportReport rep;
  rep.samples = count;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  for (size_t i = 0; i < count; ++i) {
    double z[3] = {N(rng), N(rng), N(rng)};
    double n = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    Point p{radius * z[0] / n, radius * z[1] / n, radius * z[2] / n};
    Ctx ctx(p);
    for (const WaveField* f : {&q.v, &q.p, &q.theta, &q.R, &q.f}) {
      Vals J = jets_at(f->node(), ctx, 0);
      for (int c = 0; c < f->node()->nc(); ++c) rep.max_leak = std::max(rep.max_leak, std::abs(J[c].value()));
    }
  }
  rep.pass = rep.max_leak == 0;
  return rep;
}

NormEntry norm_entry(const WaveField& f, const std::vector<Point>& pts, double r) {
  NormEntry e;
  const double h = 1e-3 * r;
  double gx = 0, gt = 0;
  auto at = [&](const Point& p) {
    Ctx ctx(p);
    Vals J = jets_at(f.node(), ctx, 0);
    Value v;
    v.n = f.node()->nc();
    for (int c = 0; c < v.n; ++c) v.c[c] = J[c].value().real();
    return v;
  };
  for (const Point& p : pts) {
    e.sup = std::max(e.sup, at(p).norm());
    double d[3];
    for (int k = 0; k < 3; ++k) {
      Vec3 dh{0, 0, 0};
      dh[k] = h;
      Vec3 mh{-dh[0], -dh[1], -dh[2]};
      d[k] = ((1.0 / (2 * h)) * (at(p + dh) - at(p + mh))).norm();
    }
    gt = std::max(gt, d[0]);
    gx = std::max(gx, std::hypot(d[1], d[2]));
  }
  e.c1 = e.sup + gx + gt;
  return e;
}

DiagnosticsRow diagnostics(const Quintuple& q, const Quintuple* prev, int stage, int substep, double delta,
                           double delta_bar, const DiagnosticsOptions& o) {
  DiagnosticsRow row;
  row.stage = stage;
  row.substep = substep;
  row.delta = delta;
  row.delta_bar = delta_bar;
  row.support_radius = q.support_radius;
  auto pts = sample_ball(q.support_radius, o.sampler);
  const double r = q.support_radius;
  if (o.c1) {
    auto R = norm_entry(q.R, pts, r), f = norm_entry(q.f, pts, r), v = norm_entry(q.v, pts, r),
         t = norm_entry(q.theta, pts, r);
    row.sup_R = R.sup;
    row.sup_f = f.sup;
    row.c1_R = R.c1;
    row.c1_f = f.c1;
    row.c1_v = v.c1;
    row.c1_theta = t.c1;
  } else {
    row.sup_R = sup_norm_estimate(q.R, pts);
    row.sup_f = sup_norm_estimate(q.f, pts);
  }
  if (prev) {
    for (const Point& p : pts) {
      Ctx a(p);
      auto diff = [&](const NodeP& x, const NodeP& y, int nc) {
        Vals A = jets_at(x, a, 0), B = jets_at(y, a, 0);
        Value d;
        d.n = nc;
        for (int c = 0; c < nc; ++c) d.c[c] = (A[c].value() - B[c].value()).real();
        return d.norm();
      };
      row.sup_dv = std::max(row.sup_dv, diff(q.v.node(), prev->v.node(), 2));
      row.sup_dtheta = std::max(row.sup_dtheta, diff(q.theta.node(), prev->theta.node(), 1));
      row.sup_dp = std::max(row.sup_dp, diff(q.p.node(), prev->p.node(), 1));
    }
  }
  if (o.residuals) {
    row.res_momentum = momentum_residual(q, pts);
    row.res_temperature = temperature_residual(q, pts);
    row.res_div = divergence_check(q.v, pts);
  }
  return row;
}

void add_mechanisms(DiagnosticsRow& row, const StageResult& s, const std::vector<Point>& pts) {
  for (const auto& rec : s.sub) {
    std::string n = std::to_string(rec.n);
    row.mechanism_breakdown["oscillation_R" + n] = sup_norm_estimate(rec.osc_R, pts);
    row.mechanism_breakdown["transport_R" + n] = sup_norm_estimate(rec.trans_R, pts);
    row.mechanism_breakdown["error_R" + n] = sup_norm_estimate(rec.err_R, pts);
    row.mechanism_breakdown["oscillation_f" + n] = sup_norm_estimate(rec.osc_f, pts);
    row.mechanism_breakdown["transport_f" + n] = sup_norm_estimate(rec.trans_f, pts);
    row.mechanism_breakdown["error_f" + n] = sup_norm_estimate(rec.err_f, pts);
  }
}

std::string csv_header() {
  return "stage,substep,delta,delta_bar,sup_R,sup_f,sup_dv,sup_dtheta,sup_dp,c1_R,c1_f,c1_v,c1_theta,"
         "res_mom_sup,res_temp_sup,res_div_sup,budget,support_radius";
}

std::string csv_row(const DiagnosticsRow& r) {
  std::ostringstream os;
  os << r.stage << ',' << r.substep;
  for (double x : {r.delta, r.delta_bar, r.sup_R, r.sup_f, r.sup_dv, r.sup_dtheta, r.sup_dp, r.c1_R, r.c1_f, r.c1_v,
                   r.c1_theta, r.res_momentum.sup, r.res_temperature.sup, r.res_div.sup,
                   r.res_momentum.budget + r.res_temperature.budget, r.support_radius})
    os << ',' << format_double(x);
  return os.str();
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

void check_csv_header(const std::string& line) {
  auto want = split_commas(csv_header()), got = split_commas(line);
  for (size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size()) throw ConfigError("norms.csv: missing column '" + want[i] + "'");
    if (got[i] != want[i]) throw ConfigError("norms.csv: expected column '" + want[i] + "', found '" + got[i] + "'");
  }
  if (got.size() > want.size()) throw ConfigError("norms.csv: unexpected column '" + got[want.size()] + "'");
}

DiagnosticsRow parse_csv_row(const std::string& line) {
  auto f = split_commas(line);
  auto names = split_commas(csv_header());
  if (f.size() != names.size()) throw ConfigError("norms.csv: row has " + std::to_string(f.size()) + " fields");
  auto num = [&](size_t i) {
    char* end = nullptr;
    double v = std::strtod(f[i].c_str(), &end);
    if (f[i].empty() || *end != 0) throw ConfigError("norms.csv: bad value in column '" + names[i] + "'");
    return v;
  };
  DiagnosticsRow r;
  r.stage = static_cast<int>(num(0));
  r.substep = static_cast<int>(num(1));
  double* dst[] = {&r.delta, &r.delta_bar, &r.sup_R, &r.sup_f, &r.sup_dv, &r.sup_dtheta, &r.sup_dp, &r.c1_R,
                   &r.c1_f, &r.c1_v, &r.c1_theta, &r.res_momentum.sup, &r.res_temperature.sup, &r.res_div.sup,
                   &r.res_momentum.budget, &r.support_radius};
  for (size_t i = 0; i < 16; ++i) *dst[i] = num(i + 2);
  return r;
}

}  // namespace ci
