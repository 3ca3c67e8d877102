#pragma once

#include <map>
#include <string>
#include <vector>

#include "ci/construction.hpp"

namespace ci {

struct ResidualStats {
  double sup = 0;
  double mean_abs = 0;
  size_t sample_count = 0;
  /// Sum of the closure sups on the same points plus a rounding allowance.
  double budget = 0;
  /// sup |residual - tracked closure|
  double unexplained = 0;
  bool within_budget() const { return sup <= budget; }
};

/// Rounding allowance folded into every budget, relative to the largest term of the balance.
constexpr double kRoundoff = 1e-10;

/// d_t v + div(v (x) v) + grad p - theta e2 - div R at the points.
ResidualStats momentum_residual(const Quintuple& q, const std::vector<Point>& pts);
ResidualStats momentum_residual(const Quintuple& q, const SamplerConfig& s);
/// d_t theta + div(v theta) - div f
ResidualStats temperature_residual(const Quintuple& q, const std::vector<Point>& pts);
ResidualStats temperature_residual(const Quintuple& q, const SamplerConfig& s);
/// |div v|; budget is 1e-8 max|grad v|.
ResidualStats divergence_check(const WaveField& v, const std::vector<Point>& pts);
ResidualStats divergence_check(const WaveField& v, double radius, const SamplerConfig& s);

/// Sup over random tensor bumps of the three weak identities, midpoint rule on nodes^3.
struct WeakFormOptions {
  int nodes = 24;
  uint64_t seed = 7;
  double domain_radius = 0;  // 0 -> 2 * support radius
  double min_scale = 0.1, max_scale = 0.4;
};
ResidualStats weak_form_residual(const Quintuple& q, int test_count, const WeakFormOptions& o = {});

struct SupportReport {
  bool pass = true;
  double max_leak = 0;
  size_t samples = 0;
};
/// All five fields must vanish exactly on the sphere |(t,x)| = radius.
SupportReport support_check(const Quintuple& q, double radius, size_t count = 2000, uint64_t seed = 3);

struct NormEntry {
  double sup = 0, c1 = 0;
};
/// sup and FD C^1 estimate (sup + sup|grad_x| + sup|d_t|, step 1e-3 r).
NormEntry norm_entry(const WaveField& f, const std::vector<Point>& pts, double r);

struct DiagnosticsRow {
  int stage = 0, substep = 0;
  double delta = 0, delta_bar = 0;
  double sup_R = 0, sup_f = 0, sup_dv = 0, sup_dtheta = 0, sup_dp = 0;
  double c1_R = 0, c1_f = 0, c1_v = 0, c1_theta = 0;
  ResidualStats res_momentum, res_temperature, res_div;
  double support_radius = 0;
  std::map<std::string, double> mechanism_breakdown;
  /// Non-empty when the row records an aborted stage.
  std::string flag;
};

struct DiagnosticsOptions {
  SamplerConfig sampler{1000, 0};
  bool residuals = true;
  bool c1 = true;
};

/// Norm and residual row of q; prev (optional) gives the increments.
DiagnosticsRow diagnostics(const Quintuple& q, const Quintuple* prev, int stage, int substep, double delta,
                           double delta_bar, const DiagnosticsOptions& o);
/// Adds the oscillation/transport/error sups of every substep.
void add_mechanisms(DiagnosticsRow& row, const StageResult& s, const std::vector<Point>& pts);

std::string csv_header();
std::string csv_row(const DiagnosticsRow& r);
/// Inverse of csv_row for the CSV columns (budget goes to res_momentum.budget); throws ConfigError.
DiagnosticsRow parse_csv_row(const std::string& line);
/// Throws ConfigError naming the first missing or unexpected column.
void check_csv_header(const std::string& line);

}  // namespace ci
