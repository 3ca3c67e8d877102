#include "ci/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ci/config.hpp"
#include "ci/snapshot.hpp"
#include "json.hpp"

namespace ci {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config, out, in;
  std::optional<long long> seed;
};

RunConfig load(const Common& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("--seed must be >= 0");
    c.sampler.seed = static_cast<uint64_t>(*o.seed);
  }
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

std::string snap_dir(const RunConfig& c, int k) { return (fs::path(c.output_dir) / ("snapshot_" + std::to_string(k))).string(); }

std::string norms_path(const RunConfig& c) { return (fs::path(c.output_dir) / "norms.csv").string(); }

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw ConfigError("cannot create '" + d + "': " + ec.message());
}

void print_row(std::ostream& out, const DiagnosticsRow& r) {
  out << "stage " << r.stage << " substep " << r.substep << ": |R|_0 = " << r.sup_R << ", |f|_0 = " << r.sup_f
      << ", |dv|_0 = " << r.sup_dv << ", residuals mom " << r.res_momentum.sup << " / " << r.res_momentum.budget
      << ", temp " << r.res_temperature.sup << " / " << r.res_temperature.budget << ", div " << r.res_div.sup
      << ", support " << r.support_radius << "\n";
  if (!r.flag.empty()) out << "  flagged: " << r.flag << "\n";
}

/// Row of the last step of a snapshot, exactly as the run that produced it computes it.
DiagnosticsRow snapshot_row(const IterationState& st, const DiagnosticsOptions& opt) {
  if (st.completed == 0) return diagnostics(st.q, nullptr, 0, 0, st.seed.delta0, 0, opt);
  std::vector<StageParams> head(st.stages.begin(), st.stages.end() - 1);
  Quintuple prev = rebuild(st.seed, head);
  const StageParams& P = st.stages.back();
  return diagnostics(st.q, &prev, st.completed, 3, P.delta, P.delta_bar, opt);
}

int cmd_seed(const Common& o, std::ostream& out) {
  RunConfig c = load(o);
  validate_run_config(c);
  IterationState st;
  st.seed = seed_params_for(c);
  SeedResult sd = seed_solution(st.seed);
  st.q = sd.q;
  ensure_dir(c.output_dir);
  write_snapshot(snap_dir(c, 0), st);
  DiagnosticsRow row = diagnostics(st.q, nullptr, 0, 0, st.seed.delta0, 0, diagnostics_options(c));
  write_norms_csv(norms_path(c), {row});
  const Point probe{0, M_PI / (2 * st.seed.lambda2), 0};
  out << "seed: |v0| at the probe point = " << st.q.v.eval(probe).norm() << " (10 M = " << 10 * c.M << ")\n";
  if (st.seed.b_amp == 0) out << "  flagged: b_amp = 0, theta0 = 0\n";
  print_row(out, row);
  out << "snapshot: " << snap_dir(c, 0) << "\n";
  return kExitOk;
}

int cmd_stage(const Common& o, double delta, double delta_bar, std::ostream& out) {
  RunConfig c = load(o);
  IterationState st = read_snapshot(o.in);
  const DiagnosticsOptions opt = diagnostics_options(c);
  double Lambda = 1;
  if (c.schedule_mode == ScheduleMode::Paper) {
    DiagnosticsRow r = diagnostics(st.q, nullptr, st.completed, 0, delta, delta_bar, opt);
    Lambda = std::max({1.0, r.c1_R, r.c1_f, r.c1_v, r.c1_theta});
  }
  StageParams P = stage_params_with(c, delta, delta_bar, Lambda);
  StageResult S = stage(st.q, P);
  Quintuple prev = st.q;
  st.q = S.out;
  st.stages.push_back(P);
  st.completed += 1;
  DiagnosticsRow row = diagnostics(st.q, &prev, st.completed, 3, P.delta, P.delta_bar, opt);
  ensure_dir(c.output_dir);
  write_snapshot(snap_dir(c, st.completed), st);
  std::vector<DiagnosticsRow> rows;
  if (fs::exists(norms_path(c))) rows = read_norms_csv(norms_path(c));
  rows.push_back(row);
  write_norms_csv(norms_path(c), rows);
  print_row(out, row);
  out << "snapshot: " << snap_dir(c, st.completed) << "\n";
  return kExitOk;
}

json history_json(const IterationHistory& H) {
  json h;
  h["a"] = H.a;
  h["b"] = H.b;
  h["N_stages"] = H.N_stages;
  h["exponents"] = {{"d", H.exponents.d.str()},
                    {"c", H.exponents.c.str()},
                    {"alpha_v_bound", H.exponents.alpha_v.str()},
                    {"alpha_theta_bound", H.exponents.alpha_theta.str()}};
  h["sum_delta"] = H.sum_delta;
  h["cauchy_bound"] = H.cauchy_bound;
  h["velocity_cauchy_ok"] = H.velocity_cauchy_ok;
  h["capped"] = H.capped;
  h["terminated_early"] = H.terminated_early;
  h["flag"] = H.flag;
  json rows = json::array();
  for (const auto& r : H.rows) rows.push_back({{"stage", r.stage}, {"flag", r.flag}, {"mechanisms", r.mechanism_breakdown}});
  h["rows"] = rows;
  return h;
}

int cmd_run(const Common& o, std::optional<int> stages, bool resume, std::ostream& out) {
  RunConfig c = load(o);
  if (stages) c.N_stages = *stages;
  validate_run_config(c);
  ensure_dir(c.output_dir);
  RunHooks hooks;
  std::vector<DiagnosticsRow> rows;
  if (resume) {
    int k = -1;
    for (int i = 0; fs::exists(fs::path(snap_dir(c, i)) / "manifest.json"); ++i) k = i;
    if (k >= 0 && fs::exists(norms_path(c))) {
      IterationState st = read_snapshot(snap_dir(c, k));
      const SeedParams want = seed_params_for(c), &got = st.seed;
      if (want.r != got.r || want.M != got.M || want.mu1 != got.mu1 || want.lambda1 != got.lambda1 ||
          want.mu2 != got.mu2 || want.lambda2 != got.lambda2 || want.b_amp != got.b_amp || want.delta0 != got.delta0)
        throw ConfigError("resume: snapshot was written with a different seed configuration");
      rows = read_norms_csv(norms_path(c));
      if (rows.size() < static_cast<size_t>(k) + 1) throw ConfigError("resume: norms.csv is shorter than the snapshots");
      rows.resize(static_cast<size_t>(k) + 1);
      hooks.resume = st;
      hooks.resume_rows = rows;
      out << "resuming after stage " << k << "\n";
    }
  }
  hooks.on_step = [&](const IterationState& st, const DiagnosticsRow& row) {
    write_snapshot(snap_dir(c, st.completed), st);
    rows.push_back(row);
    write_norms_csv(norms_path(c), rows);
    print_row(out, row);
  };
  IterationHistory H = run(c, hooks);
  write_norms_csv(norms_path(c), H.rows);
  std::ofstream(fs::path(c.output_dir) / "history.json") << history_json(H).dump(2) << "\n";
  if (H.terminated_early) {
    print_row(out, H.rows.back());
    out << "run terminated early: " << H.flag << "\n";
    return kExitPrecondition;
  }
  return kExitOk;
}

int cmd_verify(const Common& o, const std::string& level, std::ostream& out) {
  RunConfig c = load(o);
  if (level != "fast" && level != "full") throw ConfigError("--verify-level must be fast or full");
  IterationState st = read_snapshot(o.in);
  const Quintuple& q = st.q;
  SamplerConfig s = c.sampler;
  if (level == "fast") s.count = std::max<size_t>(50, s.count / 5);
  auto pts = sample_ball(q.support_radius, s);
  struct Audit {
    std::string name;
    double value, bound;
    bool pass, info;
  };
  std::vector<Audit> A;
  auto m = momentum_residual(q, pts), t = temperature_residual(q, pts), d = divergence_check(q.v, pts);
  A.push_back({"momentum_residual", m.sup, m.budget, m.within_budget(), false});
  A.push_back({"temperature_residual", t.sup, t.budget, t.within_budget(), false});
  A.push_back({"divergence", d.sup, d.budget, d.within_budget(), false});
  auto sp = support_check(q, q.support_radius + 0.05, level == "full" ? 2000 : 400);
  A.push_back({"support", sp.max_leak, 0, sp.pass, false});
  if (level == "full") {
    WeakFormOptions wo;
    auto w = weak_form_residual(q, 4, wo);
    A.push_back({"weak_form", w.sup, w.budget, w.within_budget(), true});
  }
  ensure_dir(c.output_dir);
  std::ofstream csv(fs::path(c.output_dir) / "verify.csv");
  csv << "audit,value,bound,pass\n";
  bool ok = true;
  for (const auto& a : A) {
    csv << a.name << ',' << format_double(a.value) << ',' << format_double(a.bound) << ',' << (a.pass ? 1 : 0) << "\n";
    out << (a.pass ? "PASS " : (a.info ? "INFO " : "FAIL ")) << a.name << ": " << a.value << " (bound " << a.bound
        << ")" << (a.info ? " [informational]" : "") << "\n";
    if (!a.info) ok = ok && a.pass;
  }
  if (!ok) throw AuditError("verification failed");
  return kExitOk;
}

int cmd_export(const Common& o, const std::string& what, const std::string& field, double t, int n,
               std::ostream& out) {
  RunConfig c = load(o);
  IterationState st = read_snapshot(o.in);
  ensure_dir(c.output_dir);
  if (what == "slice") {
    if (n < 1) throw ConfigError("--n must be positive");
    std::string path = (fs::path(c.output_dir) / ("slice_" + field + ".csv")).string();
    write_slice_csv(path, field_by_name(st.q, field), t, n);
    out << "wrote " << path << "\n";
  } else if (what == "norms") {
    std::string path = (fs::path(c.output_dir) / "norms_export.csv").string();
    write_norms_csv(path, {snapshot_row(st, diagnostics_options(c))});
    out << "wrote " << path << "\n";
  } else if (what == "terms") {
    std::string path = (fs::path(c.output_dir) / ("terms_" + field + ".txt")).string();
    write_terms(path, collect_tags(field_by_name(st.q, field), sample_ball(st.q.support_radius, c.sampler)));
    out << "wrote " << path << "\n";
  } else {
    throw ConfigError("--what must be slice, norms or terms");
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convex-integration engine for the 2-D Boussinesq system"};
  app.require_subcommand(1);
  app.footer("Config keys (flat key = value, # comments; defaults shown):\n" + config_reference());
  Common o;
  auto common = [&](CLI::App* s, bool needs_in) {
    s->add_option("--config", o.config, "config file");
    s->add_option("--out", o.out, "output directory (overrides output_dir)");
    s->add_option("--seed", o.seed, "sampler seed (overrides sampler.seed)");
    if (needs_in) s->add_option("--in", o.in, "snapshot directory")->required();
  };
  auto* seed = app.add_subcommand("seed", "build the seed and write snapshot_0 and norms.csv");
  common(seed, false);
  auto* st = app.add_subcommand("stage", "apply one stage to a snapshot");
  common(st, true);
  double delta = 0, delta_bar = 0;
  st->add_option("--delta", delta, "delta")->required();
  st->add_option("--delta-bar", delta_bar, "delta_bar")->required();
  auto* rn = app.add_subcommand("run", "seed followed by N stages");
  common(rn, false);
  std::optional<int> stages;
  bool resume = false;
  rn->add_option("--stages", stages, "number of stages (overrides N_stages)");
  rn->add_flag("--resume", resume, "continue from the last snapshot in the output directory");
  auto* vf = app.add_subcommand("verify", "audit a snapshot");
  common(vf, true);
  std::string level = "fast";
  vf->add_option("--verify-level", level, "fast | full");
  auto* ex = app.add_subcommand("export", "export slices, norms or term lists of a snapshot");
  common(ex, true);
  std::string what = "slice", field = "theta";
  double t = 0;
  int n = 256;
  ex->add_option("--what", what, "slice | norms | terms");
  ex->add_option("--field", field, "v | p | theta | R | f");
  ex->add_option("--t", t, "slice time");
  ex->add_option("--n", n, "slice grid points per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  try {
    if (seed->parsed()) return cmd_seed(o, out);
    if (st->parsed()) return cmd_stage(o, delta, delta_bar, out);
    if (rn->parsed()) return cmd_run(o, stages, resume, out);
    if (vf->parsed()) return cmd_verify(o, level, out);
    if (ex->parsed()) return cmd_export(o, what, field, t, n, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const AdmissibilityError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const AuditError& e) {
    err << "audit failed: " << e.what() << "\n";
    return kExitAudit;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ci
