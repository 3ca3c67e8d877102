#include "ci/iteration.hpp"

#include <cmath>
#include <sstream>

namespace ci {

namespace {

double delta_bar_for(const RunConfig& c, int n) {
  double d = delta_n(c.a, c.b, n);
  return std::min(delta_n(c.a, c.b, n + 1), 0.5 * std::pow(d, 1.5));
}

Rational rational_of(double x) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << x;
  return rational_from_decimal(os.str());
}

}  // namespace

void validate_run_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (!(c.r > 0) || !(c.epsilon > 0) || !(c.M > 0) || !(c.L_v > 0)) fail("r, epsilon, M, L_v must be positive");
  if (!(c.a >= 1.5) || !(c.b >= 1.5)) fail("a and b must be >= 3/2");
  if (c.schedule_mode == ScheduleMode::Paper && c.b != 1.5) fail("paper mode requires b = 3/2");
  if (c.N_stages < 0) fail("N_stages must be >= 0");
  if (c.m_order < 1) fail("m_order must be >= 1");
  if (c.sampler.count == 0) fail("sampler.count must be positive");
  if (!(c.grid_step > 0)) fail("grid.step must be positive");
  if (c.eta < 0 || c.lambda_cap < 0 || c.nyquist_factor < 0 || c.Lambda0 < 0) fail("caps must be positive");
  if (c.schedule_mode == ScheduleMode::Scaled) {
    for (int i = 0; i < 3; ++i) {
      if (!(c.scaled_mu[i] > 0) || !(c.scaled_lambda[i] > 0)) fail("scaled ladder must be positive");
      if (i > 0 && !(c.scaled_mu[i] > c.scaled_mu[i - 1])) fail("scaled mu must increase");
    }
    if (!(c.scaled_ell > 0)) fail("scaled.ell must be positive");
  } else {
    const double eta = c.eta > 0 ? c.eta : basis().r0;
    if (c.L_v < 1 / eta) fail("L_v < 1/eta");
  }
  const double lo = 1 / std::min(c.r / 2, c.epsilon * c.epsilon / (16 * c.M * c.M));
  if (c.a < lo) {
    std::ostringstream os;
    os << "a = " << c.a << " is below 1/min{r/2, eps^2/(16 M^2)} = " << lo;
    fail(os.str());
  }
  double sum = 0;
  for (int n = 0; n <= c.N_stages; ++n) sum += delta_n(c.a, c.b, n);
  if (!(sum < c.r)) fail("sum of delta_n is not below r");
  if (!(4 * c.M / std::sqrt(c.a) < c.epsilon)) fail("4 M / sqrt(a) is not below epsilon");
}

SeedParams seed_params_for(const RunConfig& c) {
  SeedParams s = c.seed;
  s.r = c.r;
  s.M = c.M;
  s.m_order = c.m_order;
  s.eta = c.eta;
  s.delta0 = delta_n(c.a, c.b, 0);
  return s;
}

StageParams stage_params_for(const RunConfig& c, int n, double Lambda) {
  return stage_params_with(c, delta_n(c.a, c.b, n), delta_bar_for(c, n), Lambda);
}

StageParams stage_params_with(const RunConfig& c, double d, double db, double Lambda) {
  StageParams P;
  if (c.schedule_mode == ScheduleMode::Paper) {
    ScheduleOptions o;
    o.lambda_cap = c.lambda_cap;
    P = schedule_parameters(d, db, std::max(1.0, Lambda), c.epsilon, c.L_v, c.eta, o);
  } else {
    P.delta = d;
    P.delta_bar = db;
    P.epsilon = c.epsilon;
    P.eta = c.eta;
    P.L_v = c.L_v;
    P.ell = std::min(c.scaled_ell, d / 2);
    P.mu = c.scaled_mu;
    P.lambda = c.scaled_lambda;
    if (c.lambda_cap > 0 && P.lambda[2] > c.lambda_cap) {
      double f = c.lambda_cap / P.lambda[2];
      for (auto& l : P.lambda) l *= f;
      P.capped = true;
    }
  }
  P.m_order = c.m_order;
  P.mollifier_npr = std::max(1, static_cast<int>(std::lround(P.ell / c.grid_step)));
  P.precondition_sampler = {c.sampler.count, c.sampler.seed + 1};
  return P;
}

DiagnosticsOptions diagnostics_options(const RunConfig& c) {
  DiagnosticsOptions o;
  o.sampler = c.sampler;
  return o;
}

Quintuple rebuild(const SeedParams& seed, const std::vector<StageParams>& stages) {
  Quintuple q = seed_solution(seed).q;
  for (const auto& P : stages) q = stage(q, P).out;
  return q;
}

IterationHistory run(const RunConfig& c, const RunHooks& hooks) {
  validate_run_config(c);
  IterationHistory H;
  H.a = c.a;
  H.b = c.b;
  H.N_stages = c.N_stages;
  H.exponents = exponent_report(rational_of(c.epsilon), rational_of(c.b));
  for (int n = 0; n <= c.N_stages; ++n) H.sum_delta += delta_n(c.a, c.b, n);
  H.cauchy_bound = 4 * c.M / std::sqrt(c.a);
  const DiagnosticsOptions opt = diagnostics_options(c);
  const double M_stage = default_M();

  IterationState st;
  if (hooks.resume) {
    st = *hooks.resume;
    if (hooks.resume_rows.size() != static_cast<size_t>(st.completed) + 1)
      throw ConfigError("resume: row count does not match the snapshot");
    H.rows = hooks.resume_rows;
    for (size_t i = 1; i < H.rows.size(); ++i)
      H.velocity_cauchy_ok.push_back(H.rows[i].sup_dv <= M_stage * std::sqrt(H.rows[i].delta));
    for (const auto& P : st.stages) H.capped = H.capped || P.capped;
  } else {
    st.seed = seed_params_for(c);
    SeedResult sd = seed_solution(st.seed);
    st.q = sd.q;
    DiagnosticsRow row = diagnostics(st.q, nullptr, 0, 0, delta_n(c.a, c.b, 0), 0, opt);
    H.rows.push_back(row);
    if (hooks.on_step) hooks.on_step(st, row);
  }

  for (int n = st.completed + 1; n <= c.N_stages; ++n) {
    const DiagnosticsRow& last = H.rows.back();
    double Lambda = std::max({1.0, last.c1_R, last.c1_f, last.c1_v, last.c1_theta});
    if (n == 1 && c.Lambda0 > 0) Lambda = c.Lambda0;
    StageParams P;
    StageResult S;
    DiagnosticsRow row;
    auto flagged = [&](const std::exception& e) {
      DiagnosticsRow fl = last;
      fl.stage = n;
      fl.substep = 0;
      fl.delta = delta_n(c.a, c.b, n);
      fl.delta_bar = delta_bar_for(c, n);
      fl.flag = e.what();
      fl.mechanism_breakdown.clear();
      H.terminated_early = true;
      H.flag = e.what();
      return fl;
    };
    try {
      P = stage_params_for(c, n, Lambda);
      S = stage(st.q, P);
      row = diagnostics(S.out, &st.q, n, 3, P.delta, P.delta_bar, opt);
      add_mechanisms(row, S, sample_ball(S.out.support_radius, opt.sampler));
    } catch (const PreconditionError& e) {
      H.rows.push_back(flagged(e));
      break;
    } catch (const AdmissibilityError& e) {
      H.rows.push_back(flagged(e));
      break;
    }
    st.q = S.out;
    st.stages.push_back(P);
    st.completed = n;
    H.capped = H.capped || P.capped;
    H.velocity_cauchy_ok.push_back(row.sup_dv <= M_stage * std::sqrt(P.delta));
    H.rows.push_back(row);
    if (hooks.on_step) hooks.on_step(st, row);
  }
  return H;
}

}  // namespace ci
