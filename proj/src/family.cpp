#include <cmath>
#include <stdexcept>

#include "ci/construction.hpp"

namespace ci {

int lattice_bracket(const Lattice& l) {
  int b = 0;
  for (int j = 0; j < 3; ++j)
    if (l[j] % 2 == 0) b += 1 << j;
  return b;
}

LatticeFamily::LatticeFamily(FamilySpec s) : s_(std::move(s)) {
  if (!s_.amp) throw ContractError("lattice family needs an amplitude");
  if (!(s_.mu > 0) || !(s_.lambda > 0)) throw ContractError("lattice family needs positive mu, lambda");
}

std::shared_ptr<LatticeFamily> make_family(FamilySpec s) { return std::make_shared<LatticeFamily>(std::move(s)); }

double LatticeFamily::multiplier(int br) const {
  if (s_.seed_form) return static_cast<double>(8 - br);
  return static_cast<double>(1 << br);
}

std::pair<Vec2, double> LatticeFamily::frame(const Lattice& l) const {
  {
    std::lock_guard<std::mutex> g(mu_);
    auto it = frames_.find(l);
    if (it != frames_.end()) return it->second;
  }
  Point q{l[0] / s_.mu, l[1] / s_.mu, l[2] / s_.mu};
  Ctx ctx(q);
  Vec2 c{0, 0};
  double sh = 0;
  if (s_.v_prev) {
    auto v = ctx.value(*s_.v_prev, 0);
    c = {(*v)[0].value().real(), (*v)[1].value().real()};
  }
  if (s_.theta_prev) sh = (*ctx.value(*s_.theta_prev, 0))[0].value().real();
  std::lock_guard<std::mutex> g(mu_);
  return frames_.emplace(l, std::make_pair(c, sh)).first->second;
}

const LatticeFamily::Data& LatticeFamily::data(Ctx& ctx, int Kb) const {
  auto& slot = ctx.slot(this);
  if (slot) {
    auto* d = static_cast<Data*>(slot.get());
    if (d->Kb >= Kb) return *d;
  }
  auto D = std::make_shared<Data>();
  D->Kb = Kb;
  const Point& p = ctx.point();
  Jet amp = (*ctx.value(*s_.amp, Kb))[0];
  Jet beta = s_.beta ? (*ctx.value(*s_.beta, Kb))[0] : Jet(Kb);
  if (!amp.is_zero() || !beta.is_zero()) {
    const Vec2 kp = kperp();
    const double bound = s_.mu * s_.support + 2;
    for (const auto& wj : partition_jets(s_.mu, p, Kb, s_.partition)) {
      Entry e;
      e.l = wj.l;
      e.b = mul(amp, wj.alpha, Kb);
      e.b *= s_.amp_scale;
      e.beta = mul(beta, wj.alpha, Kb);
      if (e.b.is_zero() && e.beta.is_zero()) continue;
      double ln = std::sqrt(double(e.l[0]) * e.l[0] + double(e.l[1]) * e.l[1] + double(e.l[2]) * e.l[2]);
      if (ln > bound) throw std::logic_error("lattice truncation overflow");
      auto fr = frame(e.l);
      e.c = fr.first;
      e.shift = fr.second;
      e.Lam = frequency(e.l);
      Vec3 Kp{-e.Lam * (kp[0] * e.c[0] + kp[1] * e.c[1]), e.Lam * kp[0], e.Lam * kp[1]};
      e.K = {Kp, Vec3{-Kp[0], -Kp[1], -Kp[2]}};
      if (s_.seed_form)
        e.sigma = {cd(0, -1), cd(0, 1)};
      else
        e.sigma = {cd(1), cd(1)};
      D->entries.push_back(std::move(e));
    }
  }
  slot = D;
  return *D;
}

WaveTag LatticeFamily::tag(const Entry& e, int sign) const {
  Vec2 kp = kperp();
  WaveTag g;
  g.xi1 = kp[0];
  g.xi2 = kp[1];
  g.lambda = e.Lam;
  g.w1 = e.c[0];
  g.w2 = e.c[1];
  g.sign = sign;
  return g;
}

void LatticeFamily::w_terms(const Entry& e, int K, Terms& out, int which) const {
  if (e.b.is_zero()) return;
  const Vec2 kp = kperp();
  const double k2 = s_.k[0] * s_.k[0] + s_.k[1] * s_.k[1];
  for (int s = 0; s < 2; ++s) {
    Term t;
    t.K = e.K[s];
    t.tagged = true;
    t.tag = tag(e, s == 0 ? 1 : -1);
    Jet main = e.sigma[s] * e.b.truncated(K);
    if (which == 1) {
      t.a[0] = s_.k[0] * main;
      t.a[1] = s_.k[1] * main;
      out.push_back(std::move(t));
      continue;
    }
    // grad-perp div of P kperp e^{iK.p}
    Jet P = (e.sigma[s] / (e.Lam * e.Lam * k2)) * e.b;
    Term T0;
    T0.K = t.K;
    T0.a[0] = kp[0] * P;
    T0.a[1] = kp[1] * P;
    Term D;
    D.K = t.K;
    D.a[0] = dterm(T0, 0, 1) + dterm(T0, 1, 2);
    t.a[0] = (-dterm(D, 0, 2)).truncated(K);
    t.a[1] = dterm(D, 0, 1).truncated(K);
    if (which == 2) {
      t.a[0] -= s_.k[0] * main;
      t.a[1] -= s_.k[1] * main;
    }
    out.push_back(std::move(t));
  }
}

void LatticeFamily::chi_terms(const Entry& e, int K, Terms& out, int which) const {
  if (e.beta.is_zero()) return;
  const double k2 = s_.k[0] * s_.k[0] + s_.k[1] * s_.k[1];
  for (int s = 0; s < 2; ++s) {
    Term t;
    t.K = e.K[s];
    t.tagged = true;
    t.tag = tag(e, s == 0 ? 1 : -1);
    Jet main = e.beta.truncated(K);
    if (which == 1) {
      t.a[0] = main;
      out.push_back(std::move(t));
      continue;
    }
    Term T0;
    T0.K = t.K;
    T0.a[0] = (-1.0 / (e.Lam * e.Lam * k2)) * e.beta;
    Term d1, d2;
    d1.K = d2.K = t.K;
    d1.a[0] = dterm(T0, 0, 1);
    d2.a[0] = dterm(T0, 0, 2);
    t.a[0] = (dterm(d1, 0, 1) + dterm(d2, 0, 2)).truncated(K);
    if (which == 2) t.a[0] -= main;
    out.push_back(std::move(t));
  }
}

namespace {

Rank part_rank(FamilyPart p) {
  switch (p) {
    case FamilyPart::X:
    case FamilyPart::XO:
    case FamilyPart::XC:
    case FamilyPart::TX: return Rank::Scalar;
    case FamilyPart::M:
    case FamilyPart::SQ:
    case FamilyPart::NV: return Rank::Sym;
    default: return Rank::Vector;
  }
}

Jet transport(const Jet& a, const Vec2& c) {
  Jet r = a.deriv(0);
  if (c[0] != 0) r += c[0] * a.deriv(1);
  if (c[1] != 0) r += c[1] * a.deriv(2);
  return r;
}

Vec3 vsum(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

class FamilyNode : public Node {
 public:
  FamilyNode(std::shared_ptr<const LatticeFamily> f, FamilyPart p) : Node(part_rank(p)), f_(std::move(f)), p_(p) {}

  Terms compute(Ctx& ctx, int K) const override {
    Terms out;
    switch (p_) {
      case FamilyPart::W:
      case FamilyPart::WO:
      case FamilyPart::WC: {
        int which = p_ == FamilyPart::W ? 0 : p_ == FamilyPart::WO ? 1 : 2;
        const auto& D = f_->data(ctx, which == 1 ? K : K + 2);
        for (const auto& e : D.entries) f_->w_terms(e, K, out, which);
        break;
      }
      case FamilyPart::X:
      case FamilyPart::XO:
      case FamilyPart::XC: {
        int which = p_ == FamilyPart::X ? 0 : p_ == FamilyPart::XO ? 1 : 2;
        const auto& D = f_->data(ctx, which == 1 ? K : K + 2);
        for (const auto& e : D.entries) f_->chi_terms(e, K, out, which);
        break;
      }
      case FamilyPart::TW:
      case FamilyPart::TX: {
        const auto& D = f_->data(ctx, K + 3);
        for (const auto& e : D.entries) {
          Terms ts;
          if (p_ == FamilyPart::TW)
            f_->w_terms(e, K + 1, ts, 0);
          else
            f_->chi_terms(e, K + 1, ts, 0);
          for (auto& t : ts) {
            for (int c = 0; c < nc(); ++c) t.a[c] = transport(t.a[c], e.c);
            out.push_back(std::move(t));
          }
        }
        break;
      }
      case FamilyPart::M:
      case FamilyPart::KF:
      case FamilyPart::SQ:
      case FamilyPart::SQF: pairs(ctx, K, out); break;
      case FamilyPart::NV:
      case FamilyPart::VX:
      case FamilyPart::TH: dense(ctx, K, out); break;
    }
    return out;
  }

 private:
  // main vector terms per entry and sign
  void mains(const LatticeFamily::Data& D, int K, std::vector<Terms>& W, std::vector<Terms>& X) const {
    for (const auto& e : D.entries) {
      Terms w, x;
      f_->w_terms(e, K, w, 1);
      f_->chi_terms(e, K, x, 1);
      W.push_back(std::move(w));
      X.push_back(std::move(x));
    }
  }

  void pairs(Ctx& ctx, int K, Terms& out) const {
    const auto& D = f_->data(ctx, K);
    std::vector<Terms> W, X;
    mains(D, K, W, X);
    const size_t n = D.entries.size();
    if (p_ == FamilyPart::SQ || p_ == FamilyPart::SQF) {
      Term t;
      bool any = false;
      for (size_t i = 0; i < n; ++i) {
        if (W[i].size() != 2) continue;
        if (p_ == FamilyPart::SQ) {
          product_amp(ProductKind::SymOuter, W[i][0].a, W[i][1].a, K, t.a);
          any = true;
        } else if (X[i].size() == 2) {
          product_amp(ProductKind::VecScalar, W[i][0].a, X[i][1].a, K, t.a);
          product_amp(ProductKind::VecScalar, W[i][1].a, X[i][0].a, K, t.a);
          any = true;
        }
      }
      if (any) out.push_back(std::move(t));
      return;
    }
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        if (p_ == FamilyPart::M && j < i) continue;
        const Terms& A = W[i];
        const Terms& B = p_ == FamilyPart::M ? W[j] : X[j];
        for (size_t s = 0; s < A.size(); ++s)
          for (size_t q = 0; q < B.size(); ++q) {
            if (i == j && s != q) continue;  // zero mode
            if (p_ == FamilyPart::M && i == j && q < s) continue;
            Term t;
            t.K = vsum(A[s].K, B[q].K);
            if (p_ == FamilyPart::M)
              product_amp(ProductKind::SymOuter, A[s].a, B[q].a, K, t.a, i == j ? 0.5 : 1.0);
            else
              product_amp(ProductKind::VecScalar, A[s].a, B[q].a, K, t.a);
            out.push_back(std::move(t));
          }
      }
  }

  void dense(Ctx& ctx, int K, Terms& out) const {
    const auto& D = f_->data(ctx, K + 2);
    const auto& S = f_->spec();
    const Point& p = ctx.point();
    Term t;
    for (int c = 0; c < nc(); ++c) t.a[c] = Jet(K);
    if (D.entries.empty()) return;
    Vals v{Jet(K), Jet(K), Jet(K)}, th{Jet(K), Jet(K), Jet(K)};
    if (S.v_prev) v = *ctx.value(*S.v_prev, K);
    if (S.theta_prev) th = *ctx.value(*S.theta_prev, K);
    bool any = false;
    for (const auto& e : D.entries) {
      if (p_ == FamilyPart::VX) {
        Terms x;
        f_->chi_terms(e, K, x, 0);
        if (x.empty()) continue;
        Vals xv = terms_value(x, p, K, 1);
        Vals d{v[0].truncated(K), v[1].truncated(K), Jet(K)};
        d[0][0] -= e.c[0];
        d[1][0] -= e.c[1];
        product_amp(ProductKind::VecScalar, d, xv, K, t.a);
        any = true;
        continue;
      }
      Terms w;
      f_->w_terms(e, K, w, 0);
      if (w.empty()) continue;
      Vals wv = terms_value(w, p, K, 2);
      if (p_ == FamilyPart::NV) {
        Vals d{v[0].truncated(K), v[1].truncated(K), Jet(K)};
        d[0][0] -= e.c[0];
        d[1][0] -= e.c[1];
        product_amp(ProductKind::SymOuter, wv, d, K, t.a);
      } else {
        Vals d{th[0].truncated(K), Jet(K), Jet(K)};
        d[0][0] -= e.shift;
        product_amp(ProductKind::VecScalar, wv, d, K, t.a);
      }
      any = true;
    }
    if (any) out.push_back(std::move(t));
  }

  std::shared_ptr<const LatticeFamily> f_;
  FamilyPart p_;
};

}  // namespace

NodeP LatticeFamily::node(FamilyPart part) const { return std::make_shared<FamilyNode>(shared_from_this(), part); }

WaveField LatticeFamily::field(FamilyPart part) const { return WaveField(node(part), s_.support); }

}  // namespace ci
