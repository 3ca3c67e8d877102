#include "ci/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ci {

namespace {

/// phi(y) = psi(1 - |y|^2/c^2) jets for y = mu(p + h) - l.
Jet scaled_bump_jet(const Point& p, const Lattice& l, double mu, double c, int K, double* value) {
  double d[3] = {mu * p.t - l[0], mu * p.x1 - l[1], mu * p.x2 - l[2]};
  double u0 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  double s0 = 1.0 - u0 / (c * c);
  if (value) *value = s0 > 0 ? std::exp(-1.0 / s0) : 0.0;
  if (s0 <= 0) return Jet(K);
  Jet s(K);
  s[0] = s0;
  const double q = 1.0 / (c * c);
  if (K >= 1)
    for (int k = 0; k < 3; ++k) s[1 + k] = -2 * d[k] * mu * q;
  if (K >= 2) {
    const auto& T = JetTables::get();
    s[T.index(2, 0, 0)] = -mu * mu * q;
    s[T.index(0, 2, 0)] = -mu * mu * q;
    s[T.index(0, 0, 2)] = -mu * mu * q;
  }
  return compose(psi_series(K, s0), s);
}

double bump_value(const Point& p, const Lattice& l, double mu, double c) {
  double d[3] = {mu * p.t - l[0], mu * p.x1 - l[1], mu * p.x2 - l[2]};
  double s0 = 1.0 - (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (c * c);
  return s0 > 0 ? std::exp(-1.0 / s0) : 0.0;
}

}  // namespace

double partition_weight(const Lattice& l, double mu, const Point& p, const PartitionSpec& s) {
  if (!(mu > 0)) throw ContractError("partition scale must be positive");
  const double phi = bump_value(p, l, mu, s.c2);
  if (phi == 0) return 0;
  Lattice c{static_cast<int>(std::lround(mu * p.t)), static_cast<int>(std::lround(mu * p.x1)),
            static_cast<int>(std::lround(mu * p.x2))};
  double S = 0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        double v = bump_value(p, {c[0] + i, c[1] + j, c[2] + k}, mu, s.c2);
        S += v * v;
      }
  return phi / std::sqrt(S);
}

std::vector<WeightJet> partition_jets(double mu, const Point& p, int K, const PartitionSpec& s) {
  if (!(mu > 0)) throw ContractError("partition scale must be positive");
  Lattice c{static_cast<int>(std::lround(mu * p.t)), static_cast<int>(std::lround(mu * p.x1)),
            static_cast<int>(std::lround(mu * p.x2))};
  std::vector<WeightJet> out;
  std::vector<double> vals;
  Jet S(K);
  double S0 = 0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        Lattice l{c[0] + i, c[1] + j, c[2] + k};
        double v;
        Jet phi = scaled_bump_jet(p, l, mu, s.c2, K, &v);
        if (v == 0) continue;
        fma_into(S, phi, phi);
        S0 += v * v;
        out.push_back({l, std::move(phi)});
        vals.push_back(v);
      }
  Jet inv = compose(series_pow(Series::var(K, S0), -0.5), S);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].alpha = mul(out[i].alpha, inv, K);
    out[i].alpha[0] = vals[i] / std::sqrt(S0);
  }
  return out;
}

// ---------------------------------------------------------------------------

WaveField EnergyProfile::rho_field() const { return WaveField(rho, r + delta); }
WaveField EnergyProfile::e_field() const { return WaveField(e, r + delta); }

EnergyProfile energy_profile(double r, double delta) {
  if (!(r > 0)) throw ContractError("energy profile radius must be positive");
  if (!(delta > 0 && delta <= 1)) throw ContractError("energy profile needs 0 < delta <= 1");
  EnergyProfile p;
  p.r = r;
  p.delta = delta;
  p.rho = plateau_node(std::sqrt(2 * delta), r + delta / 2, r + delta);
  p.e = std::make_shared<DenseProductNode>(p.rho, p.rho, ProductKind::ScalarScalar);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

class MollifiedNode : public Node {
 public:
  MollifiedNode(std::shared_ptr<const MollifierBank> b, size_t i, Rank r) : Node(r), b_(std::move(b)), i_(i) {}
  Terms compute(Ctx& ctx, int K) const override {
    Term t;
    t.a = b_->jets(ctx, K)[i_];
    return {t};
  }

 private:
  std::shared_ptr<const MollifierBank> b_;
  size_t i_;
};

struct BankJets {
  int K = -1;
  std::vector<Vals> v;
};

}  // namespace

MollifierBank::MollifierBank(std::vector<WaveField> fields, double ell, int npr, size_t cache_cap)
    : fields_(std::move(fields)), ell_(ell), s_(ell / npr), npr_(npr), cap_(cache_cap) {
  if (!(ell > 0)) throw ContractError("mollification scale must be positive");
  if (npr < 1) throw ContractError("mollifier nodes per radius must be >= 1");
}

std::shared_ptr<MollifierBank> make_mollifier_bank(std::vector<WaveField> fields, double ell, int npr) {
  return std::make_shared<MollifierBank>(std::move(fields), ell, npr);
}

WaveField MollifierBank::field(size_t i) const {
  const WaveField& f = fields_.at(i);
  Box b = f.box();
  return WaveField(std::make_shared<MollifiedNode>(shared_from_this(), i, f.rank()), f.support_radius() + ell_, b);
}

void MollifierBank::check_nyquist(double factor, double fmax) const {
  if (factor <= 0 || fmax <= 0) return;
  double need = 2 * M_PI / (factor * fmax);
  if (s_ > need) {
    std::ostringstream os;
    os << "mollifier lattice spacing " << s_ << " does not resolve frequency " << fmax << " with factor " << factor;
    throw ConfigError(os.str());
  }
}

const std::vector<std::array<cd, 3>>& MollifierBank::node_values(const Lattice& q) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find(q);
    if (it != cache_.end()) return it->second;
  }
  Point y{q[0] * s_, q[1] * s_, q[2] * s_};
  std::vector<std::array<cd, 3>> vals(fields_.size());
  Ctx ctx(y);
  for (size_t i = 0; i < fields_.size(); ++i) {
    const auto& f = fields_[i];
    if (f.box().contains(y) && y.norm() < f.support_radius())
      vals[i] = f.eval_complex(ctx);
    else
      vals[i] = {0, 0, 0};
  }
  std::lock_guard<std::mutex> lk(mu_);
  if (cache_.size() >= cap_) cache_.clear();
  return cache_.emplace(q, std::move(vals)).first->second;
}

const std::vector<Vals>& MollifierBank::jets(Ctx& ctx, int K) const {
  auto& slot = ctx.slot(this);
  if (slot) {
    auto* b = static_cast<BankJets*>(slot.get());
    if (b->K >= K) return b->v;
  }
  auto out = std::make_shared<BankJets>();
  out->K = K;
  out->v.resize(fields_.size());
  for (size_t i = 0; i < fields_.size(); ++i)
    for (int c = 0; c < ncomp(fields_[i].rank()); ++c) out->v[i][c] = Jet(K);
  const Point& p = ctx.point();
  Jet den(K);
  double den0 = 0;
  int lo[3], hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = static_cast<int>(std::ceil((p[d] - ell_) / s_));
    hi[d] = static_cast<int>(std::floor((p[d] + ell_) / s_));
  }
  for (int i = lo[0]; i <= hi[0]; ++i)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int k = lo[2]; k <= hi[2]; ++k) {
        Lattice q{i, j, k};
        // kernel psi(1 - |p + h - y_q|^2/ell^2) in lattice units
        double v;
        Jet w = scaled_bump_jet(p, q, 1.0 / s_, double(npr_), K, &v);
        if (v == 0) continue;
        den += w;
        den0 += v;
        const auto& nv = node_values(q);
        for (size_t f = 0; f < fields_.size(); ++f)
          for (int c = 0; c < ncomp(fields_[f].rank()); ++c)
            if (nv[f][c] != cd(0)) out->v[f][c] += nv[f][c] * w;
      }
  if (den0 == 0) throw ContractError("mollifier lattice left a point uncovered");
  Jet inv = compose(series_inv(Series::var(K, den[0])), den);
  for (auto& vals : out->v)
    for (auto& j : vals)
      if (!j.empty()) j = mul(j, inv, K);
  slot = out;
  return out->v;
}

WaveField mollify(const WaveField& f, double ell, int npr) { return make_mollifier_bank({f}, ell, npr)->field(0); }

// ---------------------------------------------------------------------------

CoefficientSet::CoefficientSet(NodeP R0l, NodeP f0l, EnergyProfile prof)
    : R0l_(std::move(R0l)), f0l_(std::move(f0l)), prof_(std::move(prof)) {
  if (R0l_->rank() != Rank::Sym) throw ContractError("stress coefficients need a symmetric matrix field");
  if (f0l_->rank() != Rank::Vector) throw ContractError("flux coefficients need a vector field");
}

std::shared_ptr<CoefficientSet> make_coefficients(NodeP R0l, NodeP f0l, const EnergyProfile& prof) {
  return std::make_shared<CoefficientSet>(std::move(R0l), std::move(f0l), prof);
}

const CoefficientSet::Jets& CoefficientSet::jets(Ctx& ctx, int K) const {
  auto& slot = ctx.slot(this);
  if (slot) {
    auto* j = static_cast<Jets*>(slot.get());
    if (j->K >= K) return *j;
  }
  auto J = std::make_shared<Jets>();
  J->K = K;
  auto R = ctx.value(*R0l_, K);
  auto f = ctx.value(*f0l_, K);
  auto rho = ctx.value(*prof_.rho, K);
  auto e = ctx.value(*prof_.e, K);
  const auto& B = basis();
  // flux split is linear and needs no energy
  for (int i = 0; i < 2; ++i) {
    J->c[i] = Jet(K);
    J->c[i] += cd(-B.vec_inverse[i][0]) * (*f)[0];
    J->c[i] += cd(-B.vec_inverse[i][1]) * (*f)[1];
  }
  const double e0 = (*e)[0].value().real();
  const bool Rzero = (*R)[0].is_zero() && (*R)[1].is_zero() && (*R)[2].is_zero();
  if (!(e0 >= 1e-12 * 2 * prof_.delta)) {
    if (!Rzero && std::max({(*R)[0].max_abs(), (*R)[1].max_abs(), (*R)[2].max_abs()}) > 0) {
      const Point& p = ctx.point();
      std::ostringstream os;
      os << "mollified stress nonzero where the energy profile vanishes at (" << p.t << ", " << p.x1 << ", "
         << p.x2 << ")";
      throw PreconditionError(os.str());
    }
    for (int i = 0; i < 3; ++i) {
      J->gamma[i] = Jet::constant(K, 1.0);
      J->a[i] = Rzero ? (*rho)[0] : Jet(K);
    }
    J->inv_sqrt2e = Jet(K);
    J->beta = {Jet(K), Jet(K)};
    J->active = false;
  } else {
    J->active = true;
    if (Rzero) {
      for (int i = 0; i < 3; ++i) {
        J->gamma[i] = Jet::constant(K, 1.0);
        J->a[i] = (*rho)[0];
      }
    } else {
      Jet ie = jet_inv((*e)[0]);
      std::array<Jet, 3> Q;
      for (int c = 0; c < 3; ++c) Q[c] = -mul((*R)[c], ie, K);
      Q[0][0] += 1.0;
      Q[2][0] += 1.0;
      Sym2 q0{Q[0].value().real(), Q[1].value().real(), Q[2].value().real()};
      Sym2 d{q0.a11 - 1, q0.a12, q0.a22 - 1};
      if (!(d.max_norm() <= B.r0)) {
        const Point& p = ctx.point();
        std::ostringstream os;
        os << "stress admissibility failed at (" << p.t << ", " << p.x1 << ", " << p.x2
           << "): |R0l/e|_max = " << d.max_norm() << " > r0 = " << B.r0;
        throw PreconditionError(os.str());
      }
      for (int i = 0; i < 3; ++i) {
        Jet g2(K);
        for (int c = 0; c < 3; ++c) g2 += cd(B.gram_inverse[i][c]) * Q[c];
        if (!(g2.value().real() > 0)) throw PreconditionError("nonpositive gamma^2 in stress amplitudes");
        J->gamma[i] = jet_sqrt(g2);
        J->a[i] = mul((*rho)[0], J->gamma[i], K);
      }
    }
    J->inv_sqrt2e = jet_pow(cd(2.0) * (*e)[0], -0.5);
    for (int n = 0; n < 2; ++n) {
      if (J->c[n].is_zero()) {
        J->beta[n] = Jet(K);
        continue;
      }
      J->beta[n] = mul(mul(J->c[n], J->inv_sqrt2e, K), jet_inv(J->gamma[n]), K);
    }
  }
  slot = J;
  return *J;
}

namespace {
class CoefNode : public Node {
 public:
  CoefNode(std::shared_ptr<const CoefficientSet> s, int which) : Node(Rank::Scalar), s_(std::move(s)), w_(which) {}
  Terms compute(Ctx& ctx, int K) const override {
    const auto& J = s_->jets(ctx, K);
    Term t;
    if (w_ < 3)
      t.a[0] = J.gamma[w_];
    else if (w_ < 6)
      t.a[0] = J.a[w_ - 3];
    else if (w_ < 8)
      t.a[0] = J.c[w_ - 6];
    else if (w_ == 8)
      t.a[0] = J.inv_sqrt2e;
    else
      t.a[0] = J.beta[w_ - 9];
    if (t.a[0].is_zero()) return {};
    return {t};
  }

 private:
  std::shared_ptr<const CoefficientSet> s_;
  int w_;
};
}  // namespace

NodeP CoefficientSet::node(int which) const {
  if (which < 0 || which > 10) throw ContractError("coefficient index out of range");
  return std::make_shared<CoefNode>(shared_from_this(), which);
}

std::array<WaveField, 3> stress_amplitudes(const WaveField& R0l, const EnergyProfile& prof) {
  auto set = make_coefficients(R0l.node(), make_zero(Rank::Vector), prof);
  double sup = prof.r + prof.delta;
  return {WaveField(set->node(3), sup), WaveField(set->node(4), sup), WaveField(set->node(5), sup)};
}

std::array<WaveField, 2> flux_coefficients(const WaveField& f0l) {
  auto set = make_coefficients(make_zero(Rank::Sym), f0l.node(), energy_profile(f0l.support_radius(), 1.0));
  return {WaveField(set->node(6), f0l.support_radius(), f0l.box()),
          WaveField(set->node(7), f0l.support_radius(), f0l.box())};
}

}  // namespace ci
