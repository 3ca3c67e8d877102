#include "ci/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ci {

using nlohmann::json;
namespace fs = std::filesystem;

std::string hexfloat(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  double x = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != 0) throw ConfigError("bad hexfloat '" + s + "'");
  return x;
}

namespace {

const char* kFormat = "ci-snapshot-1";
const char* kFields[] = {"v", "p", "theta", "R", "f"};

json hex_array(const double* x, size_t n) {
  json a = json::array();
  for (size_t i = 0; i < n; ++i) a.push_back(hexfloat(x[i]));
  return a;
}

template <size_t N>
void read_array(const json& j, std::array<double, N>& out) {
  if (!j.is_array() || j.size() != N) throw ConfigError("manifest: array of length " + std::to_string(N) + " expected");
  for (size_t i = 0; i < N; ++i) out[i] = parse_hexfloat(j[i].get<std::string>());
}

double hx(const json& j, const char* k) {
  if (!j.contains(k)) throw ConfigError(std::string("manifest: missing key '") + k + "'");
  return parse_hexfloat(j.at(k).get<std::string>());
}

json seed_json(const SeedParams& s) {
  return {{"r", hexfloat(s.r)},
          {"M", hexfloat(s.M)},
          {"mu1", hexfloat(s.mu1)},
          {"lambda1", hexfloat(s.lambda1)},
          {"mu2", hexfloat(s.mu2)},
          {"lambda2", hexfloat(s.lambda2)},
          {"b_amp", hexfloat(s.b_amp)},
          {"m_order", s.m_order},
          {"branch_ratio", hexfloat(s.branch_ratio)},
          {"eta", hexfloat(s.eta)},
          {"delta0", hexfloat(s.delta0)},
          {"check_sampler", {s.check_sampler.count, s.check_sampler.seed}}};
}

SeedParams seed_from(const json& j) {
  SeedParams s;
  s.r = hx(j, "r");
  s.M = hx(j, "M");
  s.mu1 = hx(j, "mu1");
  s.lambda1 = hx(j, "lambda1");
  s.mu2 = hx(j, "mu2");
  s.lambda2 = hx(j, "lambda2");
  s.b_amp = hx(j, "b_amp");
  s.m_order = j.at("m_order").get<int>();
  s.branch_ratio = hx(j, "branch_ratio");
  s.eta = hx(j, "eta");
  s.delta0 = hx(j, "delta0");
  s.check_sampler = {j.at("check_sampler")[0].get<size_t>(), j.at("check_sampler")[1].get<uint64_t>()};
  return s;
}

json stage_json(const StageParams& p) {
  return {{"delta", hexfloat(p.delta)},
          {"delta_bar", hexfloat(p.delta_bar)},
          {"epsilon", hexfloat(p.epsilon)},
          {"eta", hexfloat(p.eta)},
          {"M", hexfloat(p.M)},
          {"L_v", hexfloat(p.L_v)},
          {"ell", hexfloat(p.ell)},
          {"mu", hex_array(p.mu.data(), 3)},
          {"lambda", hex_array(p.lambda.data(), 3)},
          {"m_order", p.m_order},
          {"branch_ratio", hexfloat(p.branch_ratio)},
          {"mollifier_npr", p.mollifier_npr},
          {"capped", p.capped},
          {"precondition_sampler", {p.precondition_sampler.count, p.precondition_sampler.seed}},
          {"check_preconditions", p.check_preconditions}};
}

StageParams stage_from(const json& j) {
  StageParams p;
  p.delta = hx(j, "delta");
  p.delta_bar = hx(j, "delta_bar");
  p.epsilon = hx(j, "epsilon");
  p.eta = hx(j, "eta");
  p.M = hx(j, "M");
  p.L_v = hx(j, "L_v");
  p.ell = hx(j, "ell");
  read_array(j.at("mu"), p.mu);
  read_array(j.at("lambda"), p.lambda);
  p.m_order = j.at("m_order").get<int>();
  p.branch_ratio = hx(j, "branch_ratio");
  p.mollifier_npr = j.at("mollifier_npr").get<int>();
  p.capped = j.at("capped").get<bool>();
  p.precondition_sampler = {j.at("precondition_sampler")[0].get<size_t>(),
                            j.at("precondition_sampler")[1].get<uint64_t>()};
  p.check_preconditions = j.at("check_preconditions").get<bool>();
  return p;
}

std::vector<Point> probe_points(double radius, size_t n) { return sample_ball(radius, {n, 99}); }

json probe_values(const Quintuple& q, const std::vector<Point>& pts) {
  json a = json::array();
  for (const Point& p : pts) {
    json e;
    double x[3] = {p.t, p.x1, p.x2};
    e["point"] = hex_array(x, 3);
    for (const char* name : kFields) {
      Value v = field_by_name(q, name).eval(p);
      e[name] = hex_array(v.c.data(), static_cast<size_t>(v.n));
    }
    a.push_back(e);
  }
  return a;
}

}  // namespace

const WaveField& field_by_name(const Quintuple& q, const std::string& name) {
  if (name == "v") return q.v;
  if (name == "p") return q.p;
  if (name == "theta") return q.theta;
  if (name == "R") return q.R;
  if (name == "f") return q.f;
  throw ConfigError("unknown field '" + name + "' (v, p, theta, R, f)");
}

void write_snapshot(const std::string& dir, const IterationState& st, const SnapshotOptions& o) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create '" + dir + "': " + ec.message());
  json m;
  m["format"] = kFormat;
  m["completed"] = st.completed;
  m["seed"] = seed_json(st.seed);
  m["stages"] = json::array();
  for (const auto& p : st.stages) m["stages"].push_back(stage_json(p));
  m["support_radius"] = hexfloat(st.q.support_radius);
  m["probes"] = probe_values(st.q, probe_points(st.q.support_radius, o.probes));
  m["grids"] = json::array();
  const double s = st.q.support_radius;
  for (const char* name : kFields) {
    std::string file = std::string(name) + ".grid";
    write_grid((fs::path(dir) / file).string(), sample_grid(field_by_name(st.q, name), {o.grid_n, o.grid_n, o.grid_n},
                                                            Box::cube(s)));
    m["grids"].push_back(file);
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw ConfigError("cannot write manifest in '" + dir + "'");
  out << m.dump(2) << "\n";
}

IterationState read_snapshot(const std::string& dir) {
  fs::path mp = fs::path(dir) / "manifest.json";
  std::ifstream in(mp);
  if (!in) throw ConfigError("cannot read '" + mp.string() + "'");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigError("manifest: " + std::string(e.what()));
  }
  IterationState st;
  try {
    if (m.value("format", "") != kFormat) throw ConfigError("manifest: unknown format");
    st.completed = m.at("completed").get<int>();
    st.seed = seed_from(m.at("seed"));
    for (const auto& j : m.at("stages")) st.stages.push_back(stage_from(j));
    if (static_cast<int>(st.stages.size()) != st.completed) throw ConfigError("manifest: stage count mismatch");
    st.q = rebuild(st.seed, st.stages);
    if (hexfloat(st.q.support_radius) != m.at("support_radius").get<std::string>())
      throw AuditError("snapshot: rebuilt support radius differs from the manifest");
    const json& probes = m.at("probes");
    std::vector<Point> pts;
    for (const auto& e : probes) {
      std::array<double, 3> x;
      read_array(e.at("point"), x);
      pts.push_back({x[0], x[1], x[2]});
    }
    json now = probe_values(st.q, pts);
    if (now != probes) throw AuditError("snapshot: rebuilt fields differ from the recorded probe values");
  } catch (const json::exception& e) {
    throw ConfigError("manifest: " + std::string(e.what()));
  }
  return st;
}

void write_slice_csv(const std::string& path, const WaveField& f, double t, int n) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  const int nc = f.node()->nc();
  out << "t,x1,x2";
  for (int c = 0; c < nc; ++c) out << ",c" << c;
  out << "\n";
  const double s = f.support_radius();
  const double h = n > 1 ? 2 * s / (n - 1) : 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Point p{t, -s + i * h, -s + j * h};
      Value v = f.eval(p);
      out << format_double(p.t) << ',' << format_double(p.x1) << ',' << format_double(p.x2);
      for (int c = 0; c < nc; ++c) out << ',' << format_double(v.c[c]);
      out << "\n";
    }
}

void write_norms_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << csv_header() << "\n";
  for (const auto& r : rows) out << csv_row(r) << "\n";
}

std::vector<DiagnosticsRow> read_norms_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("norms.csv: empty file");
  check_csv_header(line);
  std::vector<DiagnosticsRow> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  return rows;
}

}  // namespace ci
