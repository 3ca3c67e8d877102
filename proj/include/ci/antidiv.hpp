#pragma once

#include <memory>

#include "ci/fields.hpp"

namespace ci {

/// Truncation order used when none is configured: ceil(1 + 1/eps) + 1, capped at 6.
int default_antidiv_order(double epsilon);

enum class AntidivKind { Matrix, Vector };

/// Per-term correction ladder shared by the potential and closure views.
/// Matrix: M_j K = -i V_j, V_{j+1} = -div M_j.  Vector: G_j = -i phi_j K/|K|^2,
/// phi_{j+1} = i (K.grad phi_j)/|K|^2.  div(potential) + closure = input exactly.
class AntidivLadder {
 public:
  AntidivLadder(NodeP input, AntidivKind kind, int m, double branch_ratio = 0.25);
  AntidivKind kind() const { return kind_; }
  int order() const { return m_; }
  const NodeP& input() const { return input_; }

  struct Parts {
    int K = -1;
    Terms potential, closure;
  };
  const Parts& parts(Ctx& ctx, int K) const;

 private:
  void ladder_matrix(const Term& t, int K, Parts& out) const;
  void ladder_vector(const Term& t, int K, Parts& out) const;
  NodeP input_;
  AntidivKind kind_;
  int m_;
  double tau_;
};

class AntidivPotentialNode : public Node {
 public:
  explicit AntidivPotentialNode(std::shared_ptr<const AntidivLadder> l);
  Terms compute(Ctx& ctx, int K) const override;

 private:
  std::shared_ptr<const AntidivLadder> l_;
};

class AntidivClosureNode : public Node {
 public:
  explicit AntidivClosureNode(std::shared_ptr<const AntidivLadder> l);
  Terms compute(Ctx& ctx, int K) const override;

 private:
  std::shared_ptr<const AntidivLadder> l_;
};

struct AntidivResult {
  WaveField potential;
  WaveField closure;
  int order = 0;
  double residual_sup(const SamplerConfig& s) const { return sup_norm_estimate(closure, s); }
};

/// Symmetric-matrix potential of a vector field in the oscillatory class.
AntidivResult antidivergence_matrix(const WaveField& U, int m, double branch_ratio = 0.25);
/// Vector potential of a scalar field in the oscillatory class.
AntidivResult antidivergence_vector(const WaveField& H, int m);

/// max |div potential + closure - input| / max |input| over the points.
double exactness_error(const AntidivResult& r, const WaveField& input, const std::vector<Point>& pts);

struct MomentReport {
  size_t terms = 0;
  double max_mean = 0;      // |int U dx| / int |U| dx, worst term
  double max_angular = 0;   // |int x_i U_j - x_j U_i dx| / int |x||U| dx, worst term (vector input)
};
/// Per-term quadrature of the mean and angular moments at time t over the disc of the field's support.
MomentReport moment_audit(const WaveField& input, double t, int nodes_per_axis);

}  // namespace ci
