#include "ci/antidiv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ci {

int default_antidiv_order(double epsilon) {
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  int m = static_cast<int>(std::ceil(1.0 + 1.0 / epsilon)) + 1;
  return std::min(m, 6);
}

AntidivLadder::AntidivLadder(NodeP input, AntidivKind kind, int m, double branch_ratio)
    : input_(std::move(input)), kind_(kind), m_(m), tau_(branch_ratio) {
  if (m_ < 1) throw ContractError("anti-divergence order must be >= 1");
  if (kind_ == AntidivKind::Matrix && input_->rank() != Rank::Vector)
    throw ContractError("matrix anti-divergence needs a vector field");
  if (kind_ == AntidivKind::Vector && input_->rank() != Rank::Scalar)
    throw ContractError("vector anti-divergence needs a scalar field");
  if (!(tau_ > 0 && tau_ < 0.7)) throw ContractError("branch ratio must lie in (0, 0.7)");
}

namespace {
bool amplitude_zero(const Term& t, int nc) {
  for (int c = 0; c < nc; ++c)
    if (!t.a[c].is_zero()) return false;
  return true;
}
Term with_amp(const Term& src) {
  Term t;
  t.K = src.K;
  t.tagged = src.tagged;
  t.tag = src.tag;
  return t;
}
}  // namespace

void AntidivLadder::ladder_matrix(const Term& t, int K, Parts& out) const {
  const double k1 = t.K[1], k2 = t.K[2];
  const double kn = std::hypot(k1, k2);
  const cd mi(0, -1);
  Jet V1 = t.a[0], V2 = t.a[1];
  Term pot = with_amp(t);
  for (int c = 0; c < 3; ++c) pot.a[c] = Jet(K);
  for (int j = 0; j < m_; ++j) {
    Jet r1 = mi * V1, r2 = mi * V2;
    Jet M11, M12, M22;
    const int ord = V1.order();
    if (std::abs(k1) >= tau_ * kn && std::abs(k2) >= tau_ * kn) {
      M11 = (1.0 / k1) * r1;
      M12 = Jet(ord);
      M22 = (1.0 / k2) * r2;
    } else if (std::abs(k1) < std::abs(k2)) {
      M11 = Jet(ord);
      M12 = (1.0 / k2) * r1;
      M22 = (1.0 / k2) * (r2 - cd(k1) * M12);
    } else {
      M22 = Jet(ord);
      M12 = (1.0 / k1) * r2;
      M11 = (1.0 / k1) * (r1 - cd(k2) * M12);
    }
    pot.a[0] += M11;
    pot.a[1] += M12;
    pot.a[2] += M22;
    V1 = -(M11.deriv(1) + M12.deriv(2));
    V2 = -(M12.deriv(1) + M22.deriv(2));
  }
  out.potential.push_back(std::move(pot));
  Term cl = with_amp(t);
  cl.a[0] = V1.truncated(K);
  cl.a[1] = V2.truncated(K);
  out.closure.push_back(std::move(cl));
}

void AntidivLadder::ladder_vector(const Term& t, int K, Parts& out) const {
  const double k1 = t.K[1], k2 = t.K[2];
  const double q = k1 * k1 + k2 * k2;
  Jet phi = t.a[0];
  Term pot = with_amp(t);
  pot.a[0] = Jet(K);
  pot.a[1] = Jet(K);
  for (int j = 0; j < m_; ++j) {
    pot.a[0] += cd(0, -k1 / q) * phi;
    pot.a[1] += cd(0, -k2 / q) * phi;
    phi = cd(0, 1.0 / q) * (cd(k1) * phi.deriv(1) + cd(k2) * phi.deriv(2));
  }
  out.potential.push_back(std::move(pot));
  Term cl = with_amp(t);
  cl.a[0] = phi.truncated(K);
  out.closure.push_back(std::move(cl));
}

const AntidivLadder::Parts& AntidivLadder::parts(Ctx& ctx, int K) const {
  auto& slot = ctx.slot(this);
  if (slot) {
    auto* p = static_cast<Parts*>(slot.get());
    if (p->K >= K) return *p;
  }
  auto P = std::make_shared<Parts>();
  P->K = K;
  auto in = ctx.terms(*input_, K + m_);
  const int nc = input_->nc();
  for (const Term& t : *in) {
    if (t.K[1] == 0 && t.K[2] == 0) {
      if (amplitude_zero(t, nc)) continue;
      throw ClassError("anti-divergence input has a term without spatial frequency");
    }
    if (kind_ == AntidivKind::Matrix)
      ladder_matrix(t, K, *P);
    else
      ladder_vector(t, K, *P);
  }
  slot = P;
  return *P;
}

AntidivPotentialNode::AntidivPotentialNode(std::shared_ptr<const AntidivLadder> l)
    : Node(l->kind() == AntidivKind::Matrix ? Rank::Sym : Rank::Vector), l_(std::move(l)) {}

Terms AntidivPotentialNode::compute(Ctx& ctx, int K) const { return l_->parts(ctx, K).potential; }

AntidivClosureNode::AntidivClosureNode(std::shared_ptr<const AntidivLadder> l)
    : Node(l->input()->rank()), l_(std::move(l)) {}

Terms AntidivClosureNode::compute(Ctx& ctx, int K) const { return l_->parts(ctx, K).closure; }

namespace {
AntidivResult make_result(const WaveField& in, AntidivKind kind, int m, double tau) {
  auto lad = std::make_shared<AntidivLadder>(in.node(), kind, m, tau);
  AntidivResult r;
  r.potential = WaveField(std::make_shared<AntidivPotentialNode>(lad), in.support_radius(), in.box());
  r.closure = WaveField(std::make_shared<AntidivClosureNode>(lad), in.support_radius(), in.box());
  r.order = m;
  return r;
}
}  // namespace

AntidivResult antidivergence_matrix(const WaveField& U, int m, double branch_ratio) {
  if (U.rank() != Rank::Vector) throw ContractError("antidivergence_matrix needs a vector field");
  return make_result(U, AntidivKind::Matrix, m, branch_ratio);
}

AntidivResult antidivergence_vector(const WaveField& H, int m) {
  if (H.rank() != Rank::Scalar) throw ContractError("antidivergence_vector needs a scalar field");
  return make_result(H, AntidivKind::Vector, m, 0.25);
}

double exactness_error(const AntidivResult& r, const WaveField& input, const std::vector<Point>& pts) {
  WaveField d(make_div(r.potential.node()), input.support_radius(), input.box());
  double err = 0, scale = 0;
  for (const Point& p : pts) {
    Ctx ctx(p);
    Value u = input.eval(ctx);
    Value s = d.eval(ctx) + r.closure.eval(ctx);
    err = std::max(err, (s - u).norm());
    scale = std::max(scale, u.norm());
  }
  return scale > 0 ? err / scale : err;
}

MomentReport moment_audit(const WaveField& input, double t, int n) {
  struct Acc {
    cd m1 = 0, m2 = 0, ang = 0;
    double abs = 0, absx = 0;
  };
  std::map<Vec3, Acc> acc;
  const double R = input.support_radius();
  const double h = 2 * R / n;
  const int nc = input.node()->nc();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Point p{t, -R + (i + 0.5) * h, -R + (j + 0.5) * h};
      if (p.norm() >= R) continue;
      Ctx ctx(p);
      auto ts = ctx.terms(*input.node(), 0);
      for (const Term& term : *ts) {
        double ph = term.K[0] * p.t + term.K[1] * p.x1 + term.K[2] * p.x2;
        cd e(std::cos(ph), std::sin(ph));
        Acc& a = acc[term.K];
        cd u1 = term.a[0].value() * e;
        cd u2 = nc > 1 ? term.a[1].value() * e : cd(0);
        a.m1 += u1 * h * h;
        a.m2 += u2 * h * h;
        a.ang += (p.x1 * u2 - p.x2 * u1) * h * h;
        double mag = std::sqrt(std::norm(u1) + std::norm(u2));
        a.abs += mag * h * h;
        a.absx += mag * std::hypot(p.x1, p.x2) * h * h;
      }
    }
  MomentReport rep;
  for (const auto& [K, a] : acc) {
    if (a.abs == 0) continue;
    ++rep.terms;
    rep.max_mean = std::max(rep.max_mean, std::sqrt(std::norm(a.m1) + std::norm(a.m2)) / a.abs);
    if (nc > 1 && a.absx > 0) rep.max_angular = std::max(rep.max_angular, std::abs(a.ang) / a.absx);
  }
  return rep;
}

}  // namespace ci
