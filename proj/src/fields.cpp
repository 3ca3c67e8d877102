#include "ci/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace ci {

double Point::norm() const { return std::sqrt(t * t + x1 * x1 + x2 * x2); }

Point operator+(const Point& p, const Vec3& h) { return {p.t + h[0], p.x1 + h[1], p.x2 + h[2]}; }

std::string rank_name(Rank r) {
  switch (r) {
    case Rank::Scalar: return "scalar";
    case Rank::Vector: return "vector2";
    case Rank::Sym: return "symmatrix2";
  }
  return "?";
}

Rank parse_rank(const std::string& s) {
  if (s == "scalar") return Rank::Scalar;
  if (s == "vector2") return Rank::Vector;
  if (s == "symmatrix2") return Rank::Sym;
  throw ConfigError("unknown rank '" + s + "'");
}

Vec3 tag_wavevector(const WaveTag& g) {
  double s = g.sign * g.lambda;
  return {-s * (g.xi1 * g.w1 + g.xi2 * g.w2), s * g.xi1, s * g.xi2};
}

// ---------------------------------------------------------------------------

TermsP Ctx::terms(const Node& n, int K) {
  {
    auto it = cache_.find(&n);
    if (it != cache_.end() && it->second.terms && it->second.K >= K) return it->second.terms;
  }
  auto t = std::make_shared<const Terms>(n.compute(*this, K));
  auto& e = cache_[&n];
  if (!e.terms || e.K < K) {
    e.K = K;
    e.terms = t;
  }
  return t;
}

ValsP Ctx::value(const Node& n, int K) {
  {
    auto it = cache_.find(&n);
    if (it != cache_.end() && it->second.val && it->second.Kv >= K) return it->second.val;
  }
  auto v = std::make_shared<const Vals>(n.compute_value(*this, K));
  auto& e = cache_[&n];
  if (!e.val || e.Kv < K) {
    e.Kv = K;
    e.val = v;
  }
  return v;
}

Vals Node::compute_value(Ctx& ctx, int K) const {
  auto ts = ctx.terms(*this, K);
  return terms_value(*ts, ctx.point(), K, nc());
}

Vals terms_value(const Terms& ts, const Point& p, int K, int nc) {
  Vals out;
  for (int c = 0; c < nc; ++c) out[c] = Jet(K);
  for (const Term& t : ts) {
    if (t.smooth()) {
      for (int c = 0; c < nc; ++c) out[c] += t.a[c];
      continue;
    }
    double ph = t.K[0] * p.t + t.K[1] * p.x1 + t.K[2] * p.x2;
    cd e(std::cos(ph), std::sin(ph));
    if (K == 0) {
      for (int c = 0; c < nc; ++c) out[c][0] += e * t.a[c][0];
      continue;
    }
    Jet E = Jet::exp_phase(K, t.K);
    E *= e;
    for (int c = 0; c < nc; ++c) fma_into(out[c], t.a[c], E);
  }
  return out;
}

Jet dterm(const Term& t, int c, int dir) {
  Jet r = t.a[c].deriv(dir);
  if (t.K[dir] != 0) r += cd(0, t.K[dir]) * t.a[c];
  return r;
}

// ---------------------------------------------------------------------------

Terms ConstantNode::compute(Ctx&, int K) const {
  Term t;
  for (int c = 0; c < nc(); ++c) t.a[c] = Jet::constant(K, v_[c]);
  return {t};
}

Terms FunctionNode::compute(Ctx& ctx, int K) const {
  Term t;
  t.a = f_(ctx.point(), K);
  bool zero = true;
  for (int c = 0; c < nc(); ++c) zero = zero && t.a[c].is_zero();
  if (zero) return {};
  return {t};
}

Terms WaveNode::compute(Ctx& ctx, int K) const {
  auto in = ctx.terms(*amp_, K);
  Terms out;
  out.reserve(in->size());
  for (const Term& s : *in) {
    Term t = s;
    for (int d = 0; d < 3; ++d) t.K[d] += K_[d];
    if (tag_) {
      t.tagged = true;
      t.tag = *tag_;
    }
    out.push_back(std::move(t));
  }
  return out;
}

SumNode::SumNode(Rank r, std::vector<std::pair<NodeP, cd>> parts) : Node(r), parts_(std::move(parts)) {
  for (const auto& p : parts_)
    if (p.first->rank() != r) throw ContractError("SumNode: rank mismatch");
}

Terms SumNode::compute(Ctx& ctx, int K) const {
  Terms out;
  for (const auto& [n, s] : parts_) {
    if (s == cd(0)) continue;
    auto ts = ctx.terms(*n, K);
    for (const Term& t : *ts) {
      Term u = t;
      if (s != cd(1))
        for (int c = 0; c < nc(); ++c) u.a[c] *= s;
      out.push_back(std::move(u));
    }
  }
  return out;
}

Vals SumNode::compute_value(Ctx& ctx, int K) const {
  Vals out;
  for (int c = 0; c < nc(); ++c) out[c] = Jet(K);
  for (const auto& [n, s] : parts_) {
    if (s == cd(0)) continue;
    auto v = ctx.value(*n, K);
    for (int c = 0; c < nc(); ++c) {
      if (s == cd(1))
        out[c] += (*v)[c];
      else
        out[c] += s * (*v)[c];
    }
  }
  return out;
}

Terms LinearMapNode::compute(Ctx& ctx, int K) const {
  auto in = ctx.terms(*child_, K);
  const int ni = child_->nc();
  Terms out;
  out.reserve(in->size());
  for (const Term& s : *in) {
    Term t;
    t.K = s.K;
    t.tagged = s.tagged;
    t.tag = s.tag;
    int Ko = s.a[0].order();
    for (int i = 0; i < nc(); ++i) {
      t.a[i] = Jet(Ko);
      for (int j = 0; j < ni; ++j)
        if (L_[i][j] != cd(0)) t.a[i] += L_[i][j] * s.a[j];
    }
    out.push_back(std::move(t));
  }
  return out;
}

Terms DerivNode::compute(Ctx& ctx, int K) const {
  auto in = ctx.terms(*child_, K + 1);
  Terms out;
  out.reserve(in->size());
  for (const Term& s : *in) {
    Term t;
    t.K = s.K;
    t.tagged = s.tagged;
    t.tag = s.tag;
    for (int c = 0; c < nc(); ++c) t.a[c] = dterm(s, c, dir_);
    out.push_back(std::move(t));
  }
  return out;
}

DivNode::DivNode(NodeP child)
    : Node(child->rank() == Rank::Vector ? Rank::Scalar : Rank::Vector), child_(std::move(child)) {
  if (child_->rank() == Rank::Scalar) throw ContractError("div of a scalar field");
}

Terms DivNode::compute(Ctx& ctx, int K) const {
  auto in = ctx.terms(*child_, K + 1);
  Terms out;
  out.reserve(in->size());
  for (const Term& s : *in) {
    Term t;
    t.K = s.K;
    t.tagged = s.tagged;
    t.tag = s.tag;
    if (child_->rank() == Rank::Vector) {
      t.a[0] = dterm(s, 0, 1) + dterm(s, 1, 2);
    } else {
      t.a[0] = dterm(s, 0, 1) + dterm(s, 1, 2);
      t.a[1] = dterm(s, 1, 1) + dterm(s, 2, 2);
    }
    out.push_back(std::move(t));
  }
  return out;
}

GradNode::GradNode(NodeP child) : Node(Rank::Vector), child_(std::move(child)) {
  if (child_->rank() != Rank::Scalar) throw ContractError("grad of a non-scalar field");
}

Terms GradNode::compute(Ctx& ctx, int K) const {
  auto in = ctx.terms(*child_, K + 1);
  Terms out;
  out.reserve(in->size());
  for (const Term& s : *in) {
    Term t;
    t.K = s.K;
    t.tagged = s.tagged;
    t.tag = s.tag;
    t.a[0] = dterm(s, 0, 1);
    t.a[1] = dterm(s, 0, 2);
    out.push_back(std::move(t));
  }
  return out;
}

Rank product_rank(ProductKind k) {
  switch (k) {
    case ProductKind::ScalarScalar: return Rank::Scalar;
    case ProductKind::VecScalar: return Rank::Vector;
    case ProductKind::Dot: return Rank::Scalar;
    case ProductKind::SymOuter: return Rank::Sym;
  }
  return Rank::Scalar;
}

void product_amp(ProductKind kind, const std::array<Jet, 3>& a, const std::array<Jet, 3>& b, int K,
                 std::array<Jet, 3>& out, cd s) {
  int n = ncomp(product_rank(kind));
  for (int c = 0; c < n; ++c)
    if (out[c].order() != K) out[c] = Jet(K);
  switch (kind) {
    case ProductKind::ScalarScalar: fma_into(out[0], a[0], b[0], s); break;
    case ProductKind::VecScalar:
      fma_into(out[0], a[0], b[0], s);
      fma_into(out[1], a[1], b[0], s);
      break;
    case ProductKind::Dot:
      fma_into(out[0], a[0], b[0], s);
      fma_into(out[0], a[1], b[1], s);
      break;
    case ProductKind::SymOuter:
      fma_into(out[0], a[0], b[0], 2.0 * s);
      fma_into(out[1], a[0], b[1], s);
      fma_into(out[1], a[1], b[0], s);
      fma_into(out[2], a[1], b[1], 2.0 * s);
      break;
  }
}

Terms ProductNode::compute(Ctx& ctx, int K) const {
  auto ta = ctx.terms(*a_, K);
  auto tb = ctx.terms(*b_, K);
  Terms out;
  std::map<Vec3, size_t> where;
  for (const Term& x : *ta)
    for (const Term& y : *tb) {
      Vec3 Ks{x.K[0] + y.K[0], x.K[1] + y.K[1], x.K[2] + y.K[2]};
      if (merge_) {
        auto it = where.find(Ks);
        if (it != where.end()) {
          // separate product, then add: exact negatives cancel to exact zero
          std::array<Jet, 3> pa;
          product_amp(kind_, x.a, y.a, K, pa);
          for (int c = 0; c < nc(); ++c) out[it->second].a[c] += pa[c];
          continue;
        }
        where[Ks] = out.size();
      }
      Term t;
      t.K = Ks;
      product_amp(kind_, x.a, y.a, K, t.a);
      out.push_back(std::move(t));
    }
  if (merge_) {
    Terms kept;
    for (auto& t : out) {
      bool zero = true;
      for (int c = 0; c < nc(); ++c) zero = zero && t.a[c].is_zero();
      if (!zero) kept.push_back(std::move(t));
    }
    return kept;
  }
  return out;
}

Terms DenseProductNode::compute(Ctx& ctx, int K) const {
  auto va = ctx.value(*a_, K);
  auto vb = ctx.value(*b_, K);
  Term t;
  product_amp(kind_, *va, *vb, K, t.a);
  return {t};
}

Terms DenseNode::compute(Ctx& ctx, int K) const {
  auto v = ctx.value(*child_, K);
  Term t;
  t.a = *v;
  return {t};
}

NodeP make_sum(Rank r, std::vector<std::pair<NodeP, cd>> parts) {
  return std::make_shared<SumNode>(r, std::move(parts));
}

NodeP make_sum(const NodeP& a, const NodeP& b, cd ca, cd cb) {
  return std::make_shared<SumNode>(a->rank(), std::vector<std::pair<NodeP, cd>>{{a, ca}, {b, cb}});
}

NodeP make_scale(const NodeP& a, cd s) {
  return std::make_shared<SumNode>(a->rank(), std::vector<std::pair<NodeP, cd>>{{a, s}});
}

NodeP make_zero(Rank r) { return std::make_shared<SumNode>(r, std::vector<std::pair<NodeP, cd>>{}); }

NodeP make_tensor(const NodeP& scalar, Rank out, std::array<cd, 3> coeffs) {
  std::array<std::array<cd, 3>, 3> L{};
  for (int i = 0; i < 3; ++i) L[i][0] = coeffs[i];
  return std::make_shared<LinearMapNode>(scalar, out, L);
}

NodeP make_component(const NodeP& child, int comp) {
  std::array<std::array<cd, 3>, 3> L{};
  L[0][comp] = 1.0;
  return std::make_shared<LinearMapNode>(child, Rank::Scalar, L);
}

NodeP make_deriv(const NodeP& a, int dir) { return std::make_shared<DerivNode>(a, dir); }
NodeP make_div(const NodeP& a) { return std::make_shared<DivNode>(a); }
NodeP make_grad(const NodeP& a) { return std::make_shared<GradNode>(a); }

NodeP make_perp_grad(const NodeP& a) {
  std::array<std::array<cd, 3>, 3> L{};
  L[0][1] = -1.0;
  L[1][0] = 1.0;
  return std::make_shared<LinearMapNode>(make_grad(a), Rank::Vector, L);
}

Jet radius2_jet(const Point& p, const Point& c, int K) {
  Jet j(K);
  double d[3] = {p.t - c.t, p.x1 - c.x1, p.x2 - c.x2};
  j[0] = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  if (K >= 1)
    for (int k = 0; k < 3; ++k) j[1 + k] = 2 * d[k];
  if (K >= 2) {
    const auto& T = JetTables::get();
    j[T.index(2, 0, 0)] = 1;
    j[T.index(0, 2, 0)] = 1;
    j[T.index(0, 0, 2)] = 1;
  }
  return j;
}

NodeP bump_node(Point c, double R, double height) {
  return std::make_shared<FunctionNode>(Rank::Scalar, [c, R, height](const Point& p, int K) {
    Vals v;
    Jet u = radius2_jet(p, c, K);
    double s0 = 1.0 - u.value().real() / (R * R);
    if (s0 <= 0) {
      v[0] = Jet(K);
      return v;
    }
    Jet s = (-1.0 / (R * R)) * u;
    s[0] += 1.0;
    v[0] = compose(psi_series(K, s0), s) * cd(height * std::exp(1.0));
    return v;
  });
}

NodeP plateau_node(double height, double r_in, double r_out) {
  return std::make_shared<FunctionNode>(Rank::Scalar, [=](const Point& p, int K) {
    Vals v;
    Jet u = radius2_jet(p, Point{}, K);
    double w = r_out * r_out - r_in * r_in;
    double s0 = (u.value().real() - r_in * r_in) / w;
    if (s0 <= 0) {
      v[0] = Jet::constant(K, height);
      return v;
    }
    if (s0 >= 1) {
      v[0] = Jet(K);
      return v;
    }
    Jet s = (1.0 / w) * u;
    s[0] = s0;
    v[0] = compose(smoothstep_series(K, s0), s) * cd(height);
    return v;
  });
}

NodeP affine_node(double c0, Vec3 g) {
  return std::make_shared<FunctionNode>(Rank::Scalar, [=](const Point& p, int K) {
    Vals v;
    v[0] = Jet(K);
    v[0][0] = c0 + g[0] * p.t + g[1] * p.x1 + g[2] * p.x2;
    if (K >= 1)
      for (int d = 0; d < 3; ++d) v[0][1 + d] = g[d];
    return v;
  });
}

// ---------------------------------------------------------------------------

bool Box::contains(const Point& p) const {
  for (int d = 0; d < 3; ++d)
    if (!(p[d] >= lo[d] && p[d] <= hi[d])) return false;
  return true;
}

Box Box::cube(double half) { return Box{{-half, -half, -half}, {half, half, half}}; }

GridAmplitude::GridAmplitude(Rank r, double support, std::array<int, 3> dims, Box box, Interp in)
    : rank_(r), support_(support), dims_(dims), box_(box), interp_(in) {
  for (int d = 0; d < 3; ++d)
    if (dims_[d] < 2) throw ContractError("grid needs at least two nodes per axis");
  data_.assign(static_cast<size_t>(dims_[0]) * dims_[1] * dims_[2] * ncomp(r), cd(0));
}

double GridAmplitude::step(int d) const { return (box_.hi[d] - box_.lo[d]) / (dims_[d] - 1); }

Point GridAmplitude::node(int i, int j, int k) const {
  return {box_.lo[0] + i * step(0), box_.lo[1] + j * step(1), box_.lo[2] + k * step(2)};
}

cd& GridAmplitude::at(int i, int j, int k, int c) {
  return data_[((static_cast<size_t>(i) * dims_[1] + j) * dims_[2] + k) * ncomp(rank_) + c];
}

cd GridAmplitude::at(int i, int j, int k, int c) const {
  return data_[((static_cast<size_t>(i) * dims_[1] + j) * dims_[2] + k) * ncomp(rank_) + c];
}

namespace {

// Catmull-Rom weights for nodes i-1..i+2 as cubics in the cell coordinate s.
const double kCR[4][4] = {{0, -0.5, 1.0, -0.5}, {1.0, 0, -2.5, 1.5}, {0, 0.5, 2.0, -1.5}, {0, 0, -0.5, 0.5}};
const double kLin[2][4] = {{1.0, -1.0, 0, 0}, {0, 1.0, 0, 0}};

// Coefficients of h^k of w_m(f + h/step) for k = 0..3.
void axis_poly(const double W[][4], int nodes, double f, double step, double P[4][4]) {
  static const double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  for (int m = 0; m < nodes; ++m)
    for (int k = 0; k < 4; ++k) {
      double s = 0;
      for (int q = k; q < 4; ++q) s += W[m][q] * binom[q][k] * std::pow(f, q - k);
      P[m][k] = s / std::pow(step, k);
    }
}

}  // namespace

Vals GridAmplitude::jets(const Point& p, int K) const {
  const int nc = ncomp(rank_);
  Vals out;
  for (int c = 0; c < nc; ++c) out[c] = Jet(K);
  const bool cubic = interp_ == Interp::Tricubic;
  const int nodes = cubic ? 4 : 2;
  const int off = cubic ? 1 : 0;
  int base[3];
  double P[3][4][4];
  for (int d = 0; d < 3; ++d) {
    double s = (p[d] - box_.lo[d]) / step(d);
    int i0 = static_cast<int>(std::floor(s));
    i0 = std::clamp(i0, 0, dims_[d] - 2);
    base[d] = i0 - off;
    if (cubic)
      axis_poly(kCR, 4, s - i0, step(d), P[d]);
    else
      axis_poly(kLin, 2, s - i0, step(d), P[d]);
  }
  const auto& T = JetTables::get();
  const int pmax = cubic ? 3 : 1;
  for (int m0 = 0; m0 < nodes; ++m0) {
    int i = base[0] + m0;
    if (i < 0 || i >= dims_[0]) continue;
    for (int m1 = 0; m1 < nodes; ++m1) {
      int j = base[1] + m1;
      if (j < 0 || j >= dims_[1]) continue;
      for (int m2 = 0; m2 < nodes; ++m2) {
        int k = base[2] + m2;
        if (k < 0 || k >= dims_[2]) continue;
        for (int a = 0; a <= std::min(pmax, K); ++a)
          for (int b = 0; b <= std::min(pmax, K - a); ++b)
            for (int e = 0; e <= std::min(pmax, K - a - b); ++e) {
              double w = P[0][m0][a] * P[1][m1][b] * P[2][m2][e];
              if (w == 0) continue;
              int idx = T.index(a, b, e);
              for (int c = 0; c < nc; ++c) out[c][idx] += w * at(i, j, k, c);
            }
      }
    }
  }
  return out;
}

Terms GridNode::compute(Ctx& ctx, int K) const {
  Term t;
  t.a = g_->jets(ctx.point(), K);
  return {t};
}

// ---------------------------------------------------------------------------

double Value::norm() const {
  if (n == 1) return std::abs(c[0]);
  if (n == 2) return std::hypot(c[0], c[1]);
  double m = 0.5 * (c[0] + c[2]);
  double r = std::hypot(0.5 * (c[0] - c[2]), c[1]);
  return std::abs(m) + r;
}

Value operator-(const Value& a, const Value& b) {
  Value r = a;
  for (int i = 0; i < 3; ++i) r.c[i] -= b.c[i];
  return r;
}

Value operator+(const Value& a, const Value& b) {
  Value r = a;
  for (int i = 0; i < 3; ++i) r.c[i] += b.c[i];
  return r;
}

Value operator*(double s, const Value& a) {
  Value r = a;
  for (auto& v : r.c) v *= s;
  return r;
}

WaveField::WaveField(NodeP node, double support_radius, std::optional<Box> box)
    : node_(std::move(node)), support_(support_radius), box_(box ? *box : Box::cube(support_radius + 1.0)) {}

void WaveField::check_domain(const Point& p) const {
  if (!box_.contains(p)) {
    std::ostringstream os;
    os << "point (" << p.t << ", " << p.x1 << ", " << p.x2 << ") outside the field box";
    throw DomainError(os.str());
  }
}

std::array<cd, 3> WaveField::eval_complex(Ctx& ctx) const {
  check_domain(ctx.point());
  auto v = ctx.value(*node_, 0);
  std::array<cd, 3> r{};
  for (int c = 0; c < ncomp(rank()); ++c) r[c] = (*v)[c].value();
  return r;
}

std::array<cd, 3> WaveField::eval_complex(const Point& p) const {
  Ctx ctx(p);
  return eval_complex(ctx);
}

Value WaveField::eval(Ctx& ctx) const {
  auto z = eval_complex(ctx);
  Value v;
  v.n = ncomp(rank());
  for (int c = 0; c < v.n; ++c) v.c[c] = z[c].real();
  return v;
}

Value WaveField::eval(const Point& p) const {
  Ctx ctx(p);
  return eval(ctx);
}

Vals WaveField::jets(Ctx& ctx, int K) const {
  check_domain(ctx.point());
  return *ctx.value(*node_, K);
}

Value eval(const WaveField& f, const Point& p) { return f.eval(p); }

WaveField differentiate(const WaveField& f, int dir) {
  if (dir < 0 || dir > 2) throw ContractError("direction must be t, x1 or x2");
  return WaveField(make_deriv(f.node(), dir), f.support_radius(), f.box());
}

WaveField combine(const WaveField& a, const WaveField& b, double ca, double cb) {
  if (a.rank() != b.rank()) throw ContractError("combine: rank mismatch");
  Box box = a.box();
  for (int d = 0; d < 3; ++d) {
    box.lo[d] = std::min(box.lo[d], b.box().lo[d]);
    box.hi[d] = std::max(box.hi[d], b.box().hi[d]);
  }
  return WaveField(make_sum(a.node(), b.node(), ca, cb), std::max(a.support_radius(), b.support_radius()), box);
}

std::vector<Value> product_at(const WaveField& a, const WaveField& b, const std::vector<Point>& pts) {
  std::vector<Value> out;
  out.reserve(pts.size());
  for (const Point& p : pts) {
    Value x = a.eval(p), y = b.eval(p);
    Value r;
    if (x.n == 2 && y.n == 2) {
      r.n = 3;
      r.c = {x[0] * y[0], 0.5 * (x[0] * y[1] + x[1] * y[0]), x[1] * y[1]};
    } else if (x.n == 2 && y.n == 1) {
      r.n = 2;
      r.c = {x[0] * y[0], x[1] * y[0], 0};
    } else if (x.n == 1 && y.n == 2) {
      r.n = 2;
      r.c = {x[0] * y[0], x[0] * y[1], 0};
    } else if (x.n == 1 && y.n == 1) {
      r.n = 1;
      r.c = {x[0] * y[0], 0, 0};
    } else {
      throw ContractError("product_at: ranks not combinable");
    }
    out.push_back(r);
  }
  return out;
}

namespace {
double halton(uint64_t i, int base) {
  double f = 1, r = 0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}
}  // namespace

std::vector<Point> sample_ball(double radius, const SamplerConfig& s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double shift[3] = {U(rng), U(rng), U(rng)};
  const int bases[3] = {2, 3, 5};
  std::vector<Point> pts;
  pts.reserve(s.count);
  for (uint64_t i = 1; pts.size() < s.count; ++i) {
    Point p;
    for (int d = 0; d < 3; ++d) {
      double u = halton(i, bases[d]) + shift[d];
      u -= std::floor(u);
      p[d] = radius * (2 * u - 1);
    }
    if (p.norm() < radius) pts.push_back(p);
  }
  return pts;
}

double sup_norm_estimate(const WaveField& f, const std::vector<Point>& pts) {
  double m = 0;
  for (const Point& p : pts) m = std::max(m, f.eval(p).norm());
  return m;
}

double sup_norm_estimate(const WaveField& f, const SamplerConfig& s) {
  return sup_norm_estimate(f, sample_ball(f.support_radius(), s));
}

double holder_seminorm_estimate(const WaveField& f, double alpha, const SamplerConfig& s) {
  if (!(alpha > 0 && alpha < 1)) throw ContractError("holder exponent must lie in (0,1)");
  const double r = f.support_radius();
  auto base = sample_ball(r, s);
  std::mt19937_64 rng(s.seed + 17);
  std::normal_distribution<double> N(0.0, 1.0);
  double best = 0;
  for (const Point& p : base) {
    Value fp = f.eval(p);
    for (int j = 1; j <= 12; ++j) {
      double h = std::ldexp(r, -j);
      Vec3 g{N(rng), N(rng), N(rng)};
      double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
      Vec3 dirs[4] = {{h, 0, 0}, {0, h, 0}, {0, 0, h}, {h * g[0] / gn, h * g[1] / gn, h * g[2] / gn}};
      for (const auto& d : dirs) {
        Point q = p + d;
        if (!f.box().contains(q)) continue;
        double diff = (f.eval(q) - fp).norm();
        best = std::max(best, diff / std::pow(h, alpha));
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

GridAmplitude sample_grid(const WaveField& f, std::array<int, 3> dims, const Box& box) {
  GridAmplitude g(f.rank(), f.support_radius(), dims, box);
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int k = 0; k < dims[2]; ++k) {
        Point p = g.node(i, j, k);
        std::array<cd, 3> z{};
        if (f.box().contains(p)) z = f.eval_complex(p);
        for (int c = 0; c < ncomp(f.rank()); ++c) g.at(i, j, k, c) = z[c];
      }
  return g;
}

void write_grid(const std::string& path, const GridAmplitude& g) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  const auto& b = g.box();
  const auto& d = g.dims();
  os << "# rank=" << rank_name(g.rank()) << " support=" << format_double(g.support()) << " grid=" << d[0] << "x"
     << d[1] << "x" << d[2] << " box=" << format_double(b.lo[0]) << "," << format_double(b.hi[0]) << ","
     << format_double(b.lo[1]) << "," << format_double(b.hi[1]) << "," << format_double(b.lo[2]) << ","
     << format_double(b.hi[2]) << "\n";
  os << "# interp=" << (g.interp() == Interp::Tricubic ? "tricubic" : "trilinear") << "\n";
  const int nc = ncomp(g.rank());
  for (int i = 0; i < d[0]; ++i)
    for (int j = 0; j < d[1]; ++j)
      for (int k = 0; k < d[2]; ++k) {
        Point p = g.node(i, j, k);
        os << format_double(p.t) << " " << format_double(p.x1) << " " << format_double(p.x2);
        for (int c = 0; c < nc; ++c)
          os << " " << format_double(g.at(i, j, k, c).real()) << " " << format_double(g.at(i, j, k, c).imag());
        os << "\n";
      }
  if (!os) throw ConfigError("write failed for " + path);
}

namespace {
std::string header_value(const std::string& line, const std::string& key) {
  auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw ConfigError("grid header lacks '" + key + "'");
  pos += key.size() + 1;
  auto end = line.find(' ', pos);
  return line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}
}  // namespace

GridAmplitude read_grid(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::string header;
  std::getline(is, header);
  if (header.rfind("# ", 0) != 0) throw ConfigError("bad grid header in " + path);
  Rank r = parse_rank(header_value(header, "rank"));
  double support = std::stod(header_value(header, "support"));
  std::array<int, 3> dims{};
  if (std::sscanf(header_value(header, "grid").c_str(), "%dx%dx%d", &dims[0], &dims[1], &dims[2]) != 3)
    throw ConfigError("bad grid dims in " + path);
  Box box;
  {
    std::stringstream ss(header_value(header, "box"));
    std::string tok;
    double v[6];
    for (int i = 0; i < 6; ++i) {
      if (!std::getline(ss, tok, ',')) throw ConfigError("bad grid box in " + path);
      v[i] = std::stod(tok);
    }
    box.lo = {v[0], v[2], v[4]};
    box.hi = {v[1], v[3], v[5]};
  }
  GridAmplitude g(r, support, dims, box);
  std::string line;
  const int nc = ncomp(r);
  size_t row = 0, rows = static_cast<size_t>(dims[0]) * dims[1] * dims[2];
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("interp=trilinear") != std::string::npos) g.set_interp(Interp::Trilinear);
      continue;
    }
    if (row >= rows) throw ConfigError("too many rows in " + path);
    std::istringstream ls(line);
    double t, x1, x2;
    if (!(ls >> t >> x1 >> x2)) throw ConfigError("bad row in " + path);
    int i = static_cast<int>(row / (static_cast<size_t>(dims[1]) * dims[2]));
    int j = static_cast<int>((row / dims[2]) % dims[1]);
    int k = static_cast<int>(row % dims[2]);
    for (int c = 0; c < nc; ++c) {
      std::string re, im;
      if (!(ls >> re >> im)) throw ConfigError("short row in " + path);
      g.at(i, j, k, c) = cd(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr));
    }
    ++row;
  }
  if (row != rows) throw ConfigError("missing rows in " + path);
  return g;
}

void write_terms(const std::string& path, const std::vector<WaveTag>& tags) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << "# xi1 xi2 lambda w1 w2 sign\n";
  for (const auto& g : tags)
    os << format_double(g.xi1) << " " << format_double(g.xi2) << " " << format_double(g.lambda) << " "
       << format_double(g.w1) << " " << format_double(g.w2) << " " << g.sign << "\n";
}

std::vector<WaveTag> read_terms(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::vector<WaveTag> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string v[5];
    WaveTag g;
    if (!(ls >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> g.sign)) throw ConfigError("bad term row in " + path);
    double* dst[5] = {&g.xi1, &g.xi2, &g.lambda, &g.w1, &g.w2};
    for (int i = 0; i < 5; ++i) *dst[i] = std::strtod(v[i].c_str(), nullptr);
    out.push_back(g);
  }
  return out;
}

std::vector<WaveTag> collect_tags(const WaveField& f, const std::vector<Point>& pts) {
  std::vector<WaveTag> out;
  std::set<std::array<double, 6>> seen;
  for (const Point& p : pts) {
    Ctx ctx(p);
    auto ts = ctx.terms(*f.node(), 0);
    for (const Term& t : *ts) {
      if (!t.tagged) continue;
      std::array<double, 6> key{t.tag.xi1, t.tag.xi2, t.tag.lambda, t.tag.w1, t.tag.w2, double(t.tag.sign)};
      if (seen.insert(key).second) out.push_back(t.tag);
    }
  }
  return out;
}

}  // namespace ci
