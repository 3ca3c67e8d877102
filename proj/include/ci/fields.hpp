#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ci/errors.hpp"
#include "ci/jet.hpp"

namespace ci {

using Vec3 = std::array<double, 3>;

/// Space-time point (t, x1, x2).
struct Point {
  double t = 0, x1 = 0, x2 = 0;
  double operator[](int i) const { return i == 0 ? t : i == 1 ? x1 : x2; }
  double& operator[](int i) { return i == 0 ? t : i == 1 ? x1 : x2; }
  double norm() const;
};
Point operator+(const Point& p, const Vec3& h);

enum class Rank { Scalar = 1, Vector = 2, Sym = 3 };
inline int ncomp(Rank r) { return static_cast<int>(r); }
std::string rank_name(Rank r);
Rank parse_rank(const std::string& s);

/// Descriptor of one plane-wave factor e^{i sign lambda xi.(x - w t)}.
struct WaveTag {
  double xi1 = 0, xi2 = 0, lambda = 0, w1 = 0, w2 = 0;
  int sign = 1;
  bool operator==(const WaveTag&) const = default;
};
Vec3 tag_wavevector(const WaveTag& g);

/// One summand A(p+h) e^{i K.(p+h)}; amplitude jets are expanded in h around the
/// evaluation point, K is the space-time wavevector (K_t, K_x1, K_x2).
/// Symmetric matrices are stored as (11, 12, 22).
struct Term {
  Vec3 K{0, 0, 0};
  std::array<Jet, 3> a;
  bool tagged = false;
  WaveTag tag{};
  bool smooth() const { return K[0] == 0 && K[1] == 0 && K[2] == 0; }
};
using Terms = std::vector<Term>;
using TermsP = std::shared_ptr<const Terms>;
using Vals = std::array<Jet, 3>;
using ValsP = std::shared_ptr<const Vals>;

class Node;
using NodeP = std::shared_ptr<const Node>;

/// Per-point evaluation context: memoizes term lists and value jets of every node
/// touched while evaluating at one point.
class Ctx {
 public:
  explicit Ctx(const Point& p) : p_(p) {}
  const Point& point() const { return p_; }
  TermsP terms(const Node& n, int K);
  ValsP value(const Node& n, int K);
  std::shared_ptr<void>& slot(const void* key) { return aux_[key]; }

 private:
  struct Entry {
    int K = -1;
    TermsP terms;
    int Kv = -1;
    ValsP val;
  };
  Point p_;
  std::unordered_map<const Node*, Entry> cache_;
  std::unordered_map<const void*, std::shared_ptr<void>> aux_;
};

class Node {
 public:
  explicit Node(Rank r) : rank_(r) {}
  virtual ~Node() = default;
  Rank rank() const { return rank_; }
  int nc() const { return ncomp(rank_); }
  /// Enumerate the active terms at ctx.point() with amplitude jets of order >= K.
  virtual Terms compute(Ctx& ctx, int K) const = 0;
  /// Value jets of the full field; default sums the terms with their phases.
  virtual Vals compute_value(Ctx& ctx, int K) const;

 protected:
  Rank rank_;
};

/// Sum of terms with phases: value jets of order K.
Vals terms_value(const Terms& ts, const Point& p, int K, int nc);
/// Amplitude rule for derivatives: d_dir A + i K_dir A.
Jet dterm(const Term& t, int c, int dir);

// ---------------------------------------------------------------------------
// Generic nodes

class ConstantNode : public Node {
 public:
  ConstantNode(Rank r, std::array<cd, 3> v) : Node(r), v_(v) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  std::array<cd, 3> v_;
};

/// Smooth field given directly by its jets.
class FunctionNode : public Node {
 public:
  using Fn = std::function<Vals(const Point&, int)>;
  FunctionNode(Rank r, Fn f) : Node(r), f_(std::move(f)) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  Fn f_;
};

/// amplitude * e^{i K.p}
class WaveNode : public Node {
 public:
  WaveNode(NodeP amp, Vec3 K, std::optional<WaveTag> tag = {})
      : Node(amp->rank()), amp_(std::move(amp)), K_(K), tag_(tag) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP amp_;
  Vec3 K_;
  std::optional<WaveTag> tag_;
};

class SumNode : public Node {
 public:
  SumNode(Rank r, std::vector<std::pair<NodeP, cd>> parts);
  Terms compute(Ctx& ctx, int K) const override;
  Vals compute_value(Ctx& ctx, int K) const override;

 private:
  std::vector<std::pair<NodeP, cd>> parts_;
};

/// Constant linear map on components: out_i = sum_j L[i][j] in_j.
class LinearMapNode : public Node {
 public:
  LinearMapNode(NodeP child, Rank out, std::array<std::array<cd, 3>, 3> L)
      : Node(out), child_(std::move(child)), L_(L) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP child_;
  std::array<std::array<cd, 3>, 3> L_;
};

class DerivNode : public Node {
 public:
  DerivNode(NodeP child, int dir) : Node(child->rank()), child_(std::move(child)), dir_(dir) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP child_;
  int dir_;
};

/// Spatial divergence: vector -> scalar, symmetric matrix -> vector.
class DivNode : public Node {
 public:
  explicit DivNode(NodeP child);
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP child_;
};

/// Spatial gradient of a scalar.
class GradNode : public Node {
 public:
  explicit GradNode(NodeP child);
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP child_;
};

enum class ProductKind {
  ScalarScalar,  // s*s -> s
  VecScalar,     // v*s -> v
  Dot,           // v.v -> s
  SymOuter,      // a(x)b + b(x)a -> sym
};
Rank product_rank(ProductKind k);

/// Pointwise product of two component lists.
void product_amp(ProductKind kind, const std::array<Jet, 3>& a, const std::array<Jet, 3>& b, int K,
                 std::array<Jet, 3>& out, cd s = 1.0);

/// Termwise product: every pair of terms becomes one term with summed phase.
/// With merge, terms sharing a wavevector exactly are added and exact zeros dropped.
class ProductNode : public Node {
 public:
  ProductNode(NodeP a, NodeP b, ProductKind kind, bool merge = false)
      : Node(product_rank(kind)), a_(std::move(a)), b_(std::move(b)), kind_(kind), merge_(merge) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP a_, b_;
  ProductKind kind_;
  bool merge_;
};

/// Product of full value jets, exposed as a single non-oscillatory term.
class DenseProductNode : public Node {
 public:
  DenseProductNode(NodeP a, NodeP b, ProductKind kind)
      : Node(product_rank(kind)), a_(std::move(a)), b_(std::move(b)), kind_(kind) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP a_, b_;
  ProductKind kind_;
};

/// Full value jets of a child as a single non-oscillatory term.
class DenseNode : public Node {
 public:
  explicit DenseNode(NodeP child) : Node(child->rank()), child_(std::move(child)) {}
  Terms compute(Ctx& ctx, int K) const override;

 private:
  NodeP child_;
};

// Convenience constructors.
NodeP make_sum(Rank r, std::vector<std::pair<NodeP, cd>> parts);
NodeP make_sum(const NodeP& a, const NodeP& b, cd ca = 1.0, cd cb = 1.0);
NodeP make_scale(const NodeP& a, cd s);
NodeP make_zero(Rank r);
/// Scalar child times a constant component vector.
NodeP make_tensor(const NodeP& scalar, Rank out, std::array<cd, 3> coeffs);
NodeP make_component(const NodeP& child, int comp);
NodeP make_deriv(const NodeP& a, int dir);
NodeP make_div(const NodeP& a);
NodeP make_grad(const NodeP& a);
/// grad-perp of a scalar: (-d2, d1).
NodeP make_perp_grad(const NodeP& a);

/// exp(-1/(1-|p-c|^2/R^2)) / exp(-1): smooth bump of peak `height` supported in B_R(c).
NodeP bump_node(Point c, double R, double height);
/// height on B_{r_in}, 0 outside B_{r_out}, smooth radial transition in |p|^2.
NodeP plateau_node(double height, double r_in, double r_out);
/// c0 + g.p (affine scalar).
NodeP affine_node(double c0, Vec3 g);

/// Jet helpers for radial profiles.
Jet radius2_jet(const Point& p, const Point& c, int K);

// ---------------------------------------------------------------------------
// Sampled amplitudes on a uniform grid.

enum class Interp { Tricubic, Trilinear };

struct Box {
  std::array<double, 3> lo{}, hi{};
  bool contains(const Point& p) const;
  static Box cube(double half);
};

class GridAmplitude {
 public:
  GridAmplitude() = default;
  GridAmplitude(Rank r, double support, std::array<int, 3> dims, Box box, Interp in = Interp::Tricubic);
  Rank rank() const { return rank_; }
  double support() const { return support_; }
  const std::array<int, 3>& dims() const { return dims_; }
  const Box& box() const { return box_; }
  Interp interp() const { return interp_; }
  void set_interp(Interp i) { interp_ = i; }
  double step(int d) const;
  Point node(int i, int j, int k) const;
  cd& at(int i, int j, int k, int c);
  cd at(int i, int j, int k, int c) const;
  const std::vector<cd>& data() const { return data_; }
  /// Exact jets of the piecewise polynomial interpolant.
  Vals jets(const Point& p, int K) const;

 private:
  Rank rank_ = Rank::Scalar;
  double support_ = 0;
  std::array<int, 3> dims_{0, 0, 0};
  Box box_{};
  Interp interp_ = Interp::Tricubic;
  std::vector<cd> data_;
};

class GridNode : public Node {
 public:
  explicit GridNode(std::shared_ptr<const GridAmplitude> g) : Node(g->rank()), g_(std::move(g)) {}
  Terms compute(Ctx& ctx, int K) const override;
  const GridAmplitude& grid() const { return *g_; }

 private:
  std::shared_ptr<const GridAmplitude> g_;
};

// ---------------------------------------------------------------------------
// WaveField: rank-tagged field with support metadata and an evaluation box.

struct Value {
  std::array<double, 3> c{0, 0, 0};
  int n = 1;
  double operator[](int i) const { return c[i]; }
  double norm() const;
};
Value operator-(const Value& a, const Value& b);
Value operator+(const Value& a, const Value& b);
Value operator*(double s, const Value& a);

class WaveField {
 public:
  WaveField() = default;
  WaveField(NodeP node, double support_radius, std::optional<Box> box = {});
  Rank rank() const { return node_->rank(); }
  const NodeP& node() const { return node_; }
  double support_radius() const { return support_; }
  const Box& box() const { return box_; }
  bool valid() const { return static_cast<bool>(node_); }

  Value eval(const Point& p) const;
  Value eval(Ctx& ctx) const;
  std::array<cd, 3> eval_complex(const Point& p) const;
  std::array<cd, 3> eval_complex(Ctx& ctx) const;
  Vals jets(Ctx& ctx, int K) const;
  void check_domain(const Point& p) const;

 private:
  NodeP node_;
  double support_ = 0;
  Box box_{};
};

Value eval(const WaveField& f, const Point& p);
WaveField differentiate(const WaveField& f, int dir);
WaveField combine(const WaveField& a, const WaveField& b, double ca, double cb);
/// Pointwise products; vector x vector gives the symmetric part of a (x) b.
std::vector<Value> product_at(const WaveField& a, const WaveField& b, const std::vector<Point>& pts);

struct SamplerConfig {
  size_t count = 1000;
  uint64_t seed = 0;
};

/// Low-discrepancy points in the ball of the given radius (prefix-stable in count).
std::vector<Point> sample_ball(double radius, const SamplerConfig& s);
double sup_norm_estimate(const WaveField& f, const SamplerConfig& s);
double sup_norm_estimate(const WaveField& f, const std::vector<Point>& pts);
double holder_seminorm_estimate(const WaveField& f, double alpha, const SamplerConfig& s);

// ---------------------------------------------------------------------------
// Text snapshot of a sampled field.

GridAmplitude sample_grid(const WaveField& f, std::array<int, 3> dims, const Box& box);
void write_grid(const std::string& path, const GridAmplitude& g);
GridAmplitude read_grid(const std::string& path);
void write_terms(const std::string& path, const std::vector<WaveTag>& tags);
std::vector<WaveTag> read_terms(const std::string& path);
/// Distinct tagged terms active at the given points.
std::vector<WaveTag> collect_tags(const WaveField& f, const std::vector<Point>& pts);

std::string format_double(double v);

}  // namespace ci
