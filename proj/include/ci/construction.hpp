#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ci/antidiv.hpp"
#include "ci/fields.hpp"
#include "ci/geometry.hpp"
#include "ci/localization.hpp"

namespace ci {

/// (v, p, theta, R, f) with the closure bookkeeping that explains its residuals.
struct Quintuple {
  WaveField v, p, theta, R, f;
  double support_radius = 0;
  /// Signed sum of every closure folded into R (resp. f): the exact momentum
  /// (resp. temperature) residual up to rounding.
  NodeP mom_closure, temp_closure;
  /// Individual closure fields, for the sup-norm budget.
  std::vector<WaveField> closures;
};

/// All-zero quintuple supported in Q_r.
Quintuple zero_quintuple(double r);

struct StageParams {
  double delta = 1, delta_bar = 0.5;
  double epsilon = 0.1;
  double eta = 0;  // 0 -> calibrated r0
  double M = 0;    // 0 -> default_M()
  double L_v = 1;
  double ell = 0.05;
  std::array<double, 3> mu{1, 2, 4};
  std::array<double, 3> lambda{64, 128, 256};
  int m_order = 3;
  double branch_ratio = 0.25;
  int mollifier_npr = 2;
  bool capped = false;
  /// Sampling used to test the norm preconditions.
  SamplerConfig precondition_sampler{2000, 1};
  bool check_preconditions = true;
};

/// Throws ConfigError on violated parameter relations (delta_bar, ell, mu ordering, positivity).
void validate_params(const StageParams& s);

// ---------------------------------------------------------------------------
// Lattice family of one substep

/// Inputs of one wave family: direction k, scales (mu, lambda), slow amplitude and
/// the previous fields that supply the frozen phase velocities and temperature shifts.
struct FamilySpec {
  Vec2 k{1, 0};
  double mu = 1, lambda = 1;
  /// Seed form: multiplier 8 - [l] (1 at l = 0), main term -+ i b k; otherwise 2^{[l]}, main term b k.
  bool seed_form = false;
  /// b_l = amp_scale * amp * alpha_l(mu .)
  NodeP amp;
  double amp_scale = 1.0 / 1.4142135623730951;
  /// beta_l = beta * alpha_l(mu .); null for no temperature waves.
  NodeP beta;
  NodeP v_prev, theta_prev;
  double support = 1;
  PartitionSpec partition{};
};

/// [l] = sum_j 2^j [l_j even]
int lattice_bracket(const Lattice& l);

enum class FamilyPart {
  W, WO, WC,   // velocity perturbation, main, correction
  X, XO, XC,   // temperature perturbation, main, correction
  TW, TX,      // sum_l (d_t + c_l.grad) w_l, same for chi_l
  M, KF,       // oscillatory parts of w_o (x) w_o and w_o chi_o
  SQ, SQF,     // non-oscillatory parts: 2 sum b^2 k(x)k, 2 sum beta b k
  NV,          // sum_l w_l (x) (v - c_l) + (v - c_l) (x) w_l (dense)
  VX,          // sum_l (v - c_l) chi_l (dense)
  TH,          // sum_l w_l (theta - theta(l/mu)) (dense)
};

class LatticeFamily : public std::enable_shared_from_this<LatticeFamily> {
 public:
  explicit LatticeFamily(FamilySpec s);
  const FamilySpec& spec() const { return s_; }
  Vec2 kperp() const { return {-s_.k[1], s_.k[0]}; }
  double multiplier(int bracket) const;
  double frequency(const Lattice& l) const { return s_.lambda * multiplier(lattice_bracket(l)); }

  struct Entry {
    Lattice l;
    double Lam = 0;
    Vec2 c{0, 0};
    double shift = 0;
    std::array<Vec3, 2> K;      // sign +, -
    std::array<cd, 2> sigma;    // main-term factor per sign
    Jet b, beta;                // order Kb
  };
  struct Data {
    int Kb = -1;
    std::vector<Entry> entries;
  };
  /// Active lattice entries at ctx.point() with amplitudes of order >= Kb.
  const Data& data(Ctx& ctx, int Kb) const;
  /// Phase velocity and temperature shift of lattice site l (memoized).
  std::pair<Vec2, double> frame(const Lattice& l) const;

  NodeP node(FamilyPart part) const;
  WaveField field(FamilyPart part) const;

  /// Per-entry terms.
  void w_terms(const Entry& e, int K, Terms& out, int which) const;  // which: 0 full, 1 main, 2 corr
  void chi_terms(const Entry& e, int K, Terms& out, int which) const;
  WaveTag tag(const Entry& e, int sign) const;

 private:
  FamilySpec s_;
  mutable std::mutex mu_;
  mutable std::map<Lattice, std::pair<Vec2, double>> frames_;
};

std::shared_ptr<LatticeFamily> make_family(FamilySpec s);

// ---------------------------------------------------------------------------
// Substeps and stages

/// Tagged pieces of one substep.
struct SubstepRecord {
  int n = 0;
  std::shared_ptr<LatticeFamily> family;
  WaveField w, w_o, w_c, chi, chi_o, chi_c;
  WaveField sq, sqf;
  /// delta R_{0n}, delta f_{0n} and their mechanism parts (oscillation, transport, error).
  WaveField dR, df;
  WaveField osc_R, trans_R, err_R, osc_f, trans_f, err_f;
};

struct StageResult {
  Quintuple out;
  std::array<Quintuple, 3> after;
  std::array<SubstepRecord, 3> sub;
  WaveField R0l, f0l;
  EnergyProfile profile;
  std::shared_ptr<CoefficientSet> coef;
  std::array<WaveField, 3> a;  // stress amplitudes
  std::array<WaveField, 2> c;  // flux coefficients
  StageParams params;
};

/// One application of the three-substep perturbation around prev.
StageResult stage(const Quintuple& prev, const StageParams& params);

// ---------------------------------------------------------------------------
// Seed

struct SeedParams {
  double r = 1;
  double M = 1e-3;  // plateau phi = 10 M
  double mu1 = 4, lambda1 = 2048, mu2 = 131072, lambda2 = 268435456;
  /// Peak of the temperature amplitude bump (supported in Q_{0.9 r}).
  double b_amp = 1e-3;
  int m_order = 3;
  double branch_ratio = 0.25;
  /// |R0|_0, |f0|_0 <= eta delta0 is required; eta = 0 -> calibrated r0, delta0 <= 0 disables.
  double eta = 0, delta0 = 1;
  SamplerConfig check_sampler{400, 1};
};

struct SeedResult {
  Quintuple q, q01;
  SeedParams params;
  std::shared_ptr<LatticeFamily> fam1, fam2;
  WaveField phi, b;
  /// theta_0 = Lap(b (e^{i N xi.x} + c.c.)/N^2)
  double N = 0;
  Vec2 xi{0, 1};
  WaveField v01o, v01c, w2o, w2c;
  WaveField dR01, dR02, df01, df02;
};

/// Throws PreconditionError if the scale ratios are below 4, lambda2 is not a power of two,
/// |v0| < 10 M at the probe point or the stresses exceed eta delta0.
SeedResult seed_solution(const SeedParams& s);

// ---------------------------------------------------------------------------
// Parameter schedule and iteration bookkeeping

struct ScheduleOptions {
  double lambda_cap = 0;  // <= 0: none
};

/// ell = delta_bar/(L_v Lambda), mu_1 = L_v (sqrt(delta)/delta_bar) Lambda,
/// lambda_i = L_v (sqrt(delta)/delta_bar) mu_i^{1+eps}, mu_i = L_v delta lambda_{i-1}/delta_bar.
StageParams schedule_parameters(double delta, double delta_bar, double Lambda, double epsilon, double L_v,
                                double eta = 0, const ScheduleOptions& opt = {});

/// lambda_0 = Lambda delta^{-1/2} + mu_1 Lambda ell / delta
double initial_lambda0(double delta, double Lambda, double mu1, double ell);

/// delta_n = a^{-b^n}
double delta_n(double a, double b, int n);

/// Exact rationals with 128-bit numerators.
struct Rational {
  __int128 num = 0, den = 1;
  Rational() = default;
  Rational(long long n, long long d = 1);
  static Rational make(__int128 n, __int128 d);
  double to_double() const;
  std::string str() const;
};
Rational operator+(const Rational& a, const Rational& b);
Rational operator-(const Rational& a, const Rational& b);
Rational operator*(const Rational& a, const Rational& b);
Rational operator/(const Rational& a, const Rational& b);
bool operator==(const Rational& a, const Rational& b);
bool operator<(const Rational& a, const Rational& b);
/// Nearest rational with denominator <= 10^6 of a finite decimal.
Rational rational_from_decimal(const std::string& s);

struct ExponentReport {
  Rational d, c, alpha_v, alpha_theta;
};
/// d = (1+e)^2(2+e) + (2+e)^2, c = (2d - (e^2+2e+3))/(3 - 2(1+e)^3),
/// alpha_v < 1/(1+2bc), alpha_theta < 1/(1+2(3+4e+e^2+c(1+e)^2)).  Throws DomainError.
ExponentReport exponent_report(const Rational& epsilon, const Rational& b);

}  // namespace ci
