#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ci/construction.hpp"
#include "ci/verify.hpp"

namespace ci {

enum class ScheduleMode { Paper, Scaled };

struct RunConfig {
  double r = 1;
  double epsilon = 0.1;
  /// Seed constant (plateau 10 M); also enters the Cauchy bound 4M/sqrt(a).
  double M = 1e-3;
  double L_v = 20;
  double a = 4, b = 1.5;
  int N_stages = 2;
  double eta = 0;         // 0 -> calibrated r0
  double lambda_cap = 0;  // <= 0: none
  int m_order = 3;
  SamplerConfig sampler{1000, 0};
  /// Mollifier node spacing and Nyquist guard (factor <= 0 disables).
  double grid_step = 0.025, nyquist_factor = 0;
  ScheduleMode schedule_mode = ScheduleMode::Scaled;
  std::array<double, 3> scaled_mu{1, 2, 4};
  std::array<double, 3> scaled_lambda{64, 128, 256};
  double scaled_ell = 0.05;
  /// Lambda of the first stage in paper mode; 0 -> lambda_0 = Lambda delta^{-1/2} + mu_1 Lambda ell / delta.
  double Lambda0 = 0;
  SeedParams seed{};
  std::string output_dir = "out";
};

/// Throws ConfigError on inconsistent keys and on the iteration hypotheses:
/// a, b >= 3/2 (b = 3/2 in paper mode), 1/a <= min{r/2, eps^2/(16 M^2)},
/// sum_{n <= N} delta_n < r and 4 M / sqrt(a) < eps.
void validate_run_config(const RunConfig& c);

/// Stage parameters for stage n (delta = delta_n, delta_bar = min{delta_{n+1}, delta_n^{3/2}/2}).
/// Lambda is the measured C^1 size of the input (paper mode only).
StageParams stage_params_for(const RunConfig& c, int n, double Lambda);
/// Same with explicit (delta, delta_bar).
StageParams stage_params_with(const RunConfig& c, double delta, double delta_bar, double Lambda);

SeedParams seed_params_for(const RunConfig& c);

struct IterationHistory {
  std::vector<DiagnosticsRow> rows;
  double a = 0, b = 0;
  int N_stages = 0;
  ExponentReport exponents;
  double sum_delta = 0;      // sum_{n <= N} delta_n
  double cauchy_bound = 0;   // 4 M / sqrt(a)
  /// |v_{n+1} - v_n|_0 <= M_stage sqrt(delta_n) per completed stage.
  std::vector<bool> velocity_cauchy_ok;
  bool capped = false;
  bool terminated_early = false;
  std::string flag;
};

/// Full iteration state after k completed stages.
struct IterationState {
  int completed = 0;
  SeedParams seed;
  std::vector<StageParams> stages;
  Quintuple q;
};

struct RunHooks {
  /// After the seed (completed = 0) and after every stage.
  std::function<void(const IterationState&, const DiagnosticsRow&)> on_step;
  /// Previously computed rows for a resumed run; their stages are rebuilt, not re-measured.
  std::vector<DiagnosticsRow> resume_rows;
  std::optional<IterationState> resume;
};

/// Seed, then N_stages stages with delta_n = a^{-b^n}; a failing stage precondition ends the
/// run with a flagged row.
IterationHistory run(const RunConfig& c, const RunHooks& hooks = {});

/// Rebuilds the quintuple of a recipe (seed followed by the listed stages).
Quintuple rebuild(const SeedParams& seed, const std::vector<StageParams>& stages);

DiagnosticsOptions diagnostics_options(const RunConfig& c);

}  // namespace ci
