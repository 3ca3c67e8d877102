#include "ci/construction.hpp"

#include <cmath>
#include <sstream>

namespace ci {

namespace {

using Parts = std::vector<std::pair<NodeP, cd>>;

NodeP sum_of(Rank r, const Parts& p) {
  Parts kept;
  for (const auto& x : p)
    if (x.first) kept.push_back(x);
  return make_sum(r, kept);
}

NodeP append_node(const NodeP& acc, const NodeP& x, cd c, Rank r) {
  if (!acc) return make_scale(x, c);
  return make_sum(r, {{acc, 1.0}, {x, c}});
}

struct Ladder {
  NodeP potential, closure;
};

Ladder ladder(const NodeP& input, AntidivKind kind, int m, double tau) {
  auto L = std::make_shared<AntidivLadder>(input, kind, m, tau);
  return {std::make_shared<AntidivPotentialNode>(L), std::make_shared<AntidivClosureNode>(L)};
}

NodeP quad_dense(const NodeP& wo, const NodeP& wc) {
  // wo (x) wc + wc (x) wo + wc (x) wc
  return make_sum(Rank::Sym, {{std::make_shared<DenseProductNode>(wo, wc, ProductKind::SymOuter), 1.0},
                              {std::make_shared<DenseProductNode>(wc, wc, ProductKind::SymOuter), 0.5}});
}

double sampled_sup(const WaveField& f, double radius, const SamplerConfig& s) {
  return sup_norm_estimate(f, sample_ball(radius, s));
}

}  // namespace

Quintuple zero_quintuple(double r) {
  Quintuple q;
  q.v = WaveField(make_zero(Rank::Vector), r);
  q.p = WaveField(make_zero(Rank::Scalar), r);
  q.theta = WaveField(make_zero(Rank::Scalar), r);
  q.R = WaveField(make_zero(Rank::Sym), r);
  q.f = WaveField(make_zero(Rank::Vector), r);
  q.support_radius = r;
  q.mom_closure = make_zero(Rank::Vector);
  q.temp_closure = make_zero(Rank::Scalar);
  return q;
}

void validate_params(const StageParams& s) {
  auto fail = [](const std::string& m) { throw ConfigError("stage parameters: " + m); };
  if (!(s.delta > 0) || !(s.delta_bar > 0)) fail("delta and delta_bar must be positive");
  if (s.delta_bar > 0.5 * std::pow(s.delta, 1.5)) fail("delta_bar > delta^{3/2}/2");
  if (!(s.ell > 0) || s.ell > s.delta / 2) fail("ell must lie in (0, delta/2]");
  if (s.m_order < 1) fail("m_order must be >= 1");
  for (int n = 0; n < 3; ++n) {
    if (!(s.mu[n] > 0) || !(s.lambda[n] > 0)) fail("mu and lambda must be positive");
    if (n > 0 && !(s.mu[n] > s.mu[n - 1])) fail("mu must increase across substeps");
  }
}

StageResult stage(const Quintuple& prev, const StageParams& P) {
  validate_params(P);
  const double eta = P.eta > 0 ? P.eta : basis().r0;
  const double r = prev.support_radius;
  if (P.check_preconditions) {
    double sR = sampled_sup(prev.R, r, P.precondition_sampler);
    double sf = sampled_sup(prev.f, r, P.precondition_sampler);
    if (sR > eta * P.delta || sf > eta * P.delta) {
      std::ostringstream os;
      os << "stage precondition violated: |R|_0 = " << sR << ", |f|_0 = " << sf << ", eta*delta = " << eta * P.delta;
      throw PreconditionError(os.str());
    }
  }
  StageResult S;
  S.params = P;
  const double rn = r + P.delta;
  auto bank = make_mollifier_bank({prev.R, prev.f}, P.ell, P.mollifier_npr);
  S.R0l = bank->field(0);
  S.f0l = bank->field(1);
  S.profile = energy_profile(r, P.delta);
  S.coef = make_coefficients(S.R0l.node(), S.f0l.node(), S.profile);
  for (int i = 0; i < 3; ++i) S.a[i] = WaveField(S.coef->node(3 + i), rn);
  for (int i = 0; i < 2; ++i) S.c[i] = WaveField(S.coef->node(6 + i), rn);
  const auto& B = basis();
  const NodeP e = S.profile.e;

  Quintuple q = prev;
  for (int n = 0; n < 3; ++n) {
    FamilySpec fs;
    fs.k = B.k[n];
    fs.mu = P.mu[n];
    fs.lambda = P.lambda[n];
    fs.amp = S.coef->node(3 + n);
    fs.beta = n < 2 ? S.coef->node(9 + n) : nullptr;
    fs.v_prev = q.v.node();
    fs.theta_prev = q.theta.node();
    fs.support = rn;
    auto fam = make_family(fs);
    SubstepRecord& rec = S.sub[n];
    rec.n = n + 1;
    rec.family = fam;
    auto F = [&](FamilyPart p) { return fam->field(p); };
    rec.w = F(FamilyPart::W);
    rec.w_o = F(FamilyPart::WO);
    rec.w_c = F(FamilyPart::WC);
    rec.chi = F(FamilyPart::X);
    rec.chi_o = F(FamilyPart::XO);
    rec.chi_c = F(FamilyPart::XC);
    rec.sq = F(FamilyPart::SQ);
    rec.sqf = F(FamilyPart::SQF);

    // stress
    Ladder LM = ladder(make_div(fam->node(FamilyPart::M)), AntidivKind::Matrix, P.m_order, P.branch_ratio);
    Ladder LT = ladder(fam->node(FamilyPart::TW), AntidivKind::Matrix, P.m_order, P.branch_ratio);
    Ladder LX{};
    if (n < 2)
      LX = ladder(make_tensor(fam->node(FamilyPart::X), Rank::Vector, {0, 1, 0}), AntidivKind::Matrix, P.m_order,
                  P.branch_ratio);
    Parts err{{quad_dense(rec.w_o.node(), rec.w_c.node()), 1.0}, {fam->node(FamilyPart::NV), 1.0}};
    if (LX.potential) err.push_back({LX.potential, -1.0});
    if (n == 0) err.push_back({make_sum(prev.R.node(), S.R0l.node(), 1.0, -1.0), 1.0});
    NodeP errR = sum_of(Rank::Sym, err);
    rec.osc_R = WaveField(LM.potential, rn);
    rec.trans_R = WaveField(LT.potential, rn);
    rec.err_R = WaveField(errR, rn);
    NodeP dR = make_sum(Rank::Sym, {{LM.potential, 1.0}, {LT.potential, 1.0}, {errR, 1.0}});
    rec.dR = WaveField(dR, rn);

    // flux
    Parts errf{{fam->node(FamilyPart::TH), 1.0}};
    Ladder LK{}, LTX{};
    if (n < 2) {
      LK = ladder(make_div(fam->node(FamilyPart::KF)), AntidivKind::Vector, P.m_order, P.branch_ratio);
      LTX = ladder(fam->node(FamilyPart::TX), AntidivKind::Vector, P.m_order, P.branch_ratio);
      errf.push_back({std::make_shared<DenseProductNode>(rec.w_o.node(), rec.chi_c.node(), ProductKind::VecScalar), 1.0});
      errf.push_back({std::make_shared<DenseProductNode>(rec.w_c.node(), rec.chi.node(), ProductKind::VecScalar), 1.0});
      errf.push_back({fam->node(FamilyPart::VX), 1.0});
    }
    if (n == 0) errf.push_back({make_sum(prev.f.node(), S.f0l.node(), 1.0, -1.0), 1.0});
    NodeP errF = sum_of(Rank::Vector, errf);
    rec.osc_f = WaveField(LK.potential ? LK.potential : make_zero(Rank::Vector), rn);
    rec.trans_f = WaveField(LTX.potential ? LTX.potential : make_zero(Rank::Vector), rn);
    rec.err_f = WaveField(errF, rn);
    NodeP dF = sum_of(Rank::Vector, {{LK.potential, 1.0}, {LTX.potential, 1.0}, {errF, 1.0}});
    rec.df = WaveField(dF, rn);

    Quintuple nq;
    nq.support_radius = rn;
    nq.v = WaveField(make_sum(q.v.node(), rec.w.node()), rn);
    nq.theta = WaveField(make_sum(q.theta.node(), rec.chi.node()), rn);
    nq.p = n == 0 ? WaveField(make_sum(q.p.node(), e, 1.0, -1.0), rn) : WaveField(q.p.node(), rn);
    NodeP Rbase = n == 0 ? make_sum(S.R0l.node(), make_tensor(e, Rank::Sym, {1, 0, 1}), 1.0, -1.0) : q.R.node();
    NodeP fbase = n == 0 ? S.f0l.node() : q.f.node();
    nq.R = WaveField(make_sum(Rank::Sym, {{Rbase, 1.0}, {rec.sq.node(), 1.0}, {dR, 1.0}}), rn);
    nq.f = WaveField(make_sum(Rank::Vector, {{fbase, 1.0}, {rec.sqf.node(), 1.0}, {dF, 1.0}}), rn);
    nq.closures = q.closures;
    nq.mom_closure = q.mom_closure;
    nq.temp_closure = q.temp_closure;
    nq.mom_closure = append_node(nq.mom_closure, LM.closure, 1.0, Rank::Vector);
    nq.mom_closure = append_node(nq.mom_closure, LT.closure, 1.0, Rank::Vector);
    nq.closures.push_back(WaveField(LM.closure, rn));
    nq.closures.push_back(WaveField(LT.closure, rn));
    if (LX.closure) {
      nq.mom_closure = append_node(nq.mom_closure, LX.closure, -1.0, Rank::Vector);
      nq.closures.push_back(WaveField(LX.closure, rn));
    }
    if (LK.closure) {
      nq.temp_closure = append_node(nq.temp_closure, LK.closure, 1.0, Rank::Scalar);
      nq.temp_closure = append_node(nq.temp_closure, LTX.closure, 1.0, Rank::Scalar);
      nq.closures.push_back(WaveField(LK.closure, rn));
      nq.closures.push_back(WaveField(LTX.closure, rn));
    }
    S.after[n] = nq;
    q = nq;
  }
  S.out = q;
  return S;
}

// ---------------------------------------------------------------------------

SeedResult seed_solution(const SeedParams& s) {
  auto need = [](bool ok, const std::string& m) {
    if (!ok) throw PreconditionError("seed: " + m);
  };
  need(s.r > 0 && s.M > 0, "r and M must be positive");
  need(s.mu1 >= 4 && s.lambda1 >= 4 * s.mu1 && s.mu2 >= 4 * s.lambda1 && s.lambda2 >= 4 * s.mu2,
       "scales must satisfy 4 <= mu1, 4 mu1 <= lambda1, 4 lambda1 <= mu2, 4 mu2 <= lambda2");
  int ex = 0;
  need(std::frexp(s.lambda2, &ex) == 0.5, "lambda2 must be a power of two");
  SeedResult out;
  out.params = s;
  const double r = s.r;
  NodeP phi = plateau_node(10 * s.M, r / 2, 0.95 * r);
  NodeP b = s.b_amp != 0 ? bump_node(Point{0, 0, 0}, 0.9 * r, s.b_amp) : make_zero(Rank::Scalar);
  out.phi = WaveField(phi, r);
  out.b = WaveField(b, r);

  // substep 1: k1 = (1, 0), waves along x2
  FamilySpec f1;
  f1.k = {1, 0};
  f1.mu = s.mu1;
  f1.lambda = s.lambda1;
  f1.seed_form = true;
  f1.amp = phi;
  f1.amp_scale = 1.0;
  f1.support = r;
  auto fam1 = make_family(f1);
  out.fam1 = fam1;
  NodeP v01 = fam1->node(FamilyPart::W);
  out.v01o = fam1->field(FamilyPart::WO);
  out.v01c = fam1->field(FamilyPart::WC);

  // theta01 = Lap(b (e + c.c.)/N^2), N = lambda1, direction k1perp
  out.N = s.lambda1;
  out.xi = {0, 1};
  const Vec3 Kt{0, s.lambda1 * out.xi[0], s.lambda1 * out.xi[1]};
  const Vec3 Km{0, -Kt[1], -Kt[2]};
  WaveTag tp{out.xi[0], out.xi[1], s.lambda1, 0, 0, 1}, tm = tp;
  tm.sign = -1;
  NodeP bN = make_scale(b, 1.0 / (s.lambda1 * s.lambda1));
  NodeP pot = make_sum(std::make_shared<WaveNode>(bN, Kt, tp), std::make_shared<WaveNode>(bN, Km, tm));
  NodeP th = make_div(make_grad(pot));
  NodeP mb = make_scale(b, -1.0);
  NodeP tho = make_sum(std::make_shared<WaveNode>(mb, Kt, tp), std::make_shared<WaveNode>(mb, Km, tm));
  NodeP thc = make_sum(th, tho, 1.0, -1.0);

  NodeP phi2 = std::make_shared<ProductNode>(phi, phi, ProductKind::ScalarScalar);
  NodeP pbar = make_scale(phi2, -2.0);
  NodeP Rbar = make_tensor(pbar, Rank::Sym, {1, 0, 1});

  Ladder L1 = ladder(make_sum(Rank::Vector, {{fam1->node(FamilyPart::TW), 1.0},
                                             {make_div(fam1->node(FamilyPart::M)), 1.0},
                                             {make_tensor(th, Rank::Vector, {0, 1, 0}), -1.0}}),
                     AntidivKind::Matrix, s.m_order, s.branch_ratio);
  NodeP dR01 = make_sum(quad_dense(out.v01o.node(), out.v01c.node()), L1.potential);
  NodeP vo_tho = std::make_shared<ProductNode>(out.v01o.node(), tho, ProductKind::VecScalar, true);
  Ladder G1 = ladder(make_sum(make_deriv(th, 0), make_div(vo_tho)), AntidivKind::Vector, s.m_order, s.branch_ratio);
  NodeP df01 = make_sum(Rank::Vector,
                        {{std::make_shared<DenseProductNode>(out.v01o.node(), thc, ProductKind::VecScalar), 1.0},
                         {std::make_shared<DenseProductNode>(out.v01c.node(), th, ProductKind::VecScalar), 1.0},
                         {G1.potential, 1.0}});
  out.dR01 = WaveField(dR01, r);
  out.df01 = WaveField(df01, r);

  Quintuple& q1 = out.q01;
  q1.support_radius = r;
  q1.v = WaveField(v01, r);
  q1.p = WaveField(pbar, r);
  q1.theta = WaveField(th, r);
  q1.R = WaveField(make_sum(Rank::Sym, {{Rbar, 1.0}, {fam1->node(FamilyPart::SQ), 1.0}, {dR01, 1.0}}), r);
  q1.f = WaveField(df01, r);
  q1.mom_closure = L1.closure;
  q1.temp_closure = G1.closure;
  q1.closures = {WaveField(L1.closure, r), WaveField(G1.closure, r)};

  // substep 2: k2 = (0, 1), waves along x1, phase velocities v01(l/mu2)
  FamilySpec f2 = f1;
  f2.k = {0, 1};
  f2.mu = s.mu2;
  f2.lambda = s.lambda2;
  f2.v_prev = v01;
  auto fam2 = make_family(f2);
  out.fam2 = fam2;
  out.w2o = fam2->field(FamilyPart::WO);
  out.w2c = fam2->field(FamilyPart::WC);
  Ladder LM = ladder(make_div(fam2->node(FamilyPart::M)), AntidivKind::Matrix, s.m_order, s.branch_ratio);
  Ladder LT = ladder(fam2->node(FamilyPart::TW), AntidivKind::Matrix, s.m_order, s.branch_ratio);
  NodeP dR02 = make_sum(Rank::Sym, {{quad_dense(out.w2o.node(), out.w2c.node()), 1.0},
                                    {fam2->node(FamilyPart::NV), 1.0},
                                    {LM.potential, 1.0},
                                    {LT.potential, 1.0}});
  NodeP w2 = fam2->node(FamilyPart::W);
  Ladder G2 = ladder(std::make_shared<ProductNode>(w2, make_grad(th), ProductKind::Dot, true), AntidivKind::Vector,
                     s.m_order, s.branch_ratio);
  out.dR02 = WaveField(dR02, r);
  out.df02 = WaveField(G2.potential, r);

  Quintuple& q = out.q;
  q.support_radius = r;
  q.v = WaveField(make_sum(v01, w2), r);
  q.p = q1.p;
  q.theta = q1.theta;
  q.R = WaveField(make_sum(Rank::Sym, {{q1.R.node(), 1.0}, {fam2->node(FamilyPart::SQ), 1.0}, {dR02, 1.0}}), r);
  q.f = WaveField(make_sum(q1.f.node(), G2.potential), r);
  q.mom_closure = make_sum(Rank::Vector, {{L1.closure, 1.0}, {LM.closure, 1.0}, {LT.closure, 1.0}});
  q.temp_closure = make_sum(G1.closure, G2.closure);
  q.closures = q1.closures;
  q.closures.push_back(WaveField(LM.closure, r));
  q.closures.push_back(WaveField(LT.closure, r));
  q.closures.push_back(WaveField(G2.closure, r));

  const Point probe{0, M_PI / (2 * s.lambda2), 0};
  Value vp = q.v.eval(probe);
  if (!(vp.norm() >= 10 * s.M)) {
    std::ostringstream os;
    os << "seed: |v0| = " << vp.norm() << " at the probe point is below 10 M = " << 10 * s.M
       << "; increase the lambda's";
    throw PreconditionError(os.str());
  }
  if (s.delta0 > 0) {
    const double bound = (s.eta > 0 ? s.eta : basis().r0) * s.delta0;
    double sR = sampled_sup(q.R, r, s.check_sampler), sf = sampled_sup(q.f, r, s.check_sampler);
    if (sR > bound || sf > bound) {
      std::ostringstream os;
      os << "seed: |R0|_0 = " << sR << ", |f0|_0 = " << sf << " exceed eta delta0 = " << bound
         << "; increase the lambda's";
      throw PreconditionError(os.str());
    }
  }
  return out;
}

}  // namespace ci
