#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "ci/fields.hpp"
#include "ci/geometry.hpp"

namespace ci {

using Lattice = std::array<int, 3>;

struct PartitionSpec {
  double c1 = 0.9;
  double c2 = 0.95;
};

/// alpha_l(mu t, mu x1, mu x2), alpha_l = phi(.-l)/sqrt(sum_l' phi(.-l')^2).
double partition_weight(const Lattice& l, double mu, const Point& p, const PartitionSpec& s = {});

struct WeightJet {
  Lattice l;
  Jet alpha;
};
/// All nonzero alpha_l(mu .) at p with jets in h (at most 27).
std::vector<WeightJet> partition_jets(double mu, const Point& p, int K, const PartitionSpec& s = {});

struct EnergyProfile {
  double r = 0, delta = 0;
  NodeP rho, e;
  WaveField rho_field() const;
  WaveField e_field() const;
};
/// rho = sqrt(2 delta) on Q_{r+delta/2}, 0 outside Q_{r+delta}; e = rho^2.
EnergyProfile energy_profile(double r, double delta);

/// Normalized lattice average at scale ell: sum_q u(y_q) phi_ell(p-y_q) / sum_q phi_ell(p-y_q),
/// nodes y_q on the lattice of spacing ell/npr.  All fields share the node evaluations.
class MollifierBank : public std::enable_shared_from_this<MollifierBank> {
 public:
  MollifierBank(std::vector<WaveField> fields, double ell, int npr = 2, size_t cache_cap = 4000000);
  double ell() const { return ell_; }
  double spacing() const { return s_; }
  size_t size() const { return fields_.size(); }
  /// Mollified field i as a lazy node; support grows by ell.
  WaveField field(size_t i) const;
  /// Mollified value jets of every field at ctx.point().
  const std::vector<Vals>& jets(Ctx& ctx, int K) const;
  /// Throws ConfigError unless spacing <= 2 pi / (factor * max_frequency); factor <= 0 disables.
  void check_nyquist(double nyquist_factor, double max_frequency) const;

 private:
  const std::vector<std::array<cd, 3>>& node_values(const Lattice& q) const;
  std::vector<WaveField> fields_;
  double ell_, s_;
  int npr_;
  size_t cap_;
  mutable std::mutex mu_;
  mutable std::map<Lattice, std::vector<std::array<cd, 3>>> cache_;
};

std::shared_ptr<MollifierBank> make_mollifier_bank(std::vector<WaveField> fields, double ell, int npr = 2);
WaveField mollify(const WaveField& f, double ell, int npr = 2);

/// gamma_i, a_i = rho gamma_i(Id - R0l/e), c_i = -g_i(f0l), and 1/sqrt(2e) on one shared pass.
class CoefficientSet : public std::enable_shared_from_this<CoefficientSet> {
 public:
  CoefficientSet(NodeP R0l, NodeP f0l, EnergyProfile prof);
  struct Jets {
    int K = -1;
    std::array<Jet, 3> gamma, a;
    std::array<Jet, 2> c;
    Jet inv_sqrt2e;
    /// c_n / (sqrt(2e) gamma_n), n = 1, 2
    std::array<Jet, 2> beta;
    bool active = false;
  };
  const Jets& jets(Ctx& ctx, int K) const;
  /// which: 0..2 gamma_i, 3..5 a_i, 6..7 c_i, 8 inv_sqrt2e, 9..10 beta base
  NodeP node(int which) const;
  const EnergyProfile& profile() const { return prof_; }

 private:
  NodeP R0l_, f0l_;
  EnergyProfile prof_;
};

std::shared_ptr<CoefficientSet> make_coefficients(NodeP R0l, NodeP f0l, const EnergyProfile& prof);
/// a_1, a_2, a_3 as fields.
std::array<WaveField, 3> stress_amplitudes(const WaveField& R0l, const EnergyProfile& prof);
/// c_1, c_2 as fields.
std::array<WaveField, 2> flux_coefficients(const WaveField& f0l);

}  // namespace ci
