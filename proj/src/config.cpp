#include "ci/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

namespace ci {

namespace {

struct Key {
  std::string name, help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double to_real(const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != 0) throw ConfigError("expected a number, got '" + v + "'");
  return x;
}

long to_int(const std::string& v) {
  char* end = nullptr;
  long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != 0) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

Key real_key(std::string name, std::string help, double RunConfig::*m) {
  return {std::move(name), std::move(help), [m](RunConfig& c, const std::string& v) { c.*m = to_real(v); },
          [m](const RunConfig& c) { return format_double(c.*m); }};
}

Key seed_key(std::string name, std::string help, double SeedParams::*m) {
  return {std::move(name), std::move(help), [m](RunConfig& c, const std::string& v) { c.seed.*m = to_real(v); },
          [m](const RunConfig& c) { return format_double(c.seed.*m); }};
}

Key ladder_key(std::string name, std::string help, std::array<double, 3> RunConfig::*m, int i) {
  return {std::move(name), std::move(help), [m, i](RunConfig& c, const std::string& v) { (c.*m)[i] = to_real(v); },
          [m, i](const RunConfig& c) { return format_double((c.*m)[i]); }};
}

// "auto"/"none" stand for 0
Key optional_key(std::string name, std::string help, double RunConfig::*m, std::string word) {
  return {std::move(name), std::move(help),
          [m, word](RunConfig& c, const std::string& v) {
            if (v == word) {
              c.*m = 0;
              return;
            }
            double x = to_real(v);
            if (!(x > 0)) throw ConfigError("expected a positive number or '" + word + "', got '" + v + "'");
            c.*m = x;
          },
          [m, word](const RunConfig& c) { return c.*m > 0 ? format_double(c.*m) : word; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    std::vector<Key> v;
    v.push_back(real_key("r", "seed support radius", &RunConfig::r));
    v.push_back(real_key("epsilon", "regularity parameter", &RunConfig::epsilon));
    v.push_back(real_key("M", "seed constant: |v0|_0 >= 10 M", &RunConfig::M));
    v.push_back(real_key("L_v", "schedule constant", &RunConfig::L_v));
    v.push_back(real_key("a", "delta_n = a^{-b^n}", &RunConfig::a));
    v.push_back(real_key("b", "delta_n = a^{-b^n}", &RunConfig::b));
    v.push_back({"N_stages", "number of stages",
                 [](RunConfig& c, const std::string& s) { c.N_stages = static_cast<int>(to_int(s)); },
                 [](const RunConfig& c) { return std::to_string(c.N_stages); }});
    v.push_back(optional_key("eta", "stress threshold eta or auto (calibrated r0)", &RunConfig::eta, "auto"));
    v.push_back(optional_key("lambda_cap", "frequency cap or none", &RunConfig::lambda_cap, "none"));
    v.push_back({"m_order", "anti-divergence order",
                 [](RunConfig& c, const std::string& s) { c.m_order = static_cast<int>(to_int(s)); },
                 [](const RunConfig& c) { return std::to_string(c.m_order); }});
    v.push_back({"sampler.count", "sample points per audit",
                 [](RunConfig& c, const std::string& s) {
                   long n = to_int(s);
                   if (n <= 0) throw ConfigError("sampler.count must be positive");
                   c.sampler.count = static_cast<size_t>(n);
                 },
                 [](const RunConfig& c) { return std::to_string(c.sampler.count); }});
    v.push_back({"sampler.seed", "sampler seed",
                 [](RunConfig& c, const std::string& s) {
                   long n = to_int(s);
                   if (n < 0) throw ConfigError("sampler.seed must be >= 0");
                   c.sampler.seed = static_cast<uint64_t>(n);
                 },
                 [](const RunConfig& c) { return std::to_string(c.sampler.seed); }});
    v.push_back(real_key("grid.step", "mollifier node spacing", &RunConfig::grid_step));
    v.push_back(real_key("grid.nyquist_factor", "Nyquist guard factor (0 disables)", &RunConfig::nyquist_factor));
    v.push_back({"schedule_mode", "paper | scaled",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "paper")
                     c.schedule_mode = ScheduleMode::Paper;
                   else if (s == "scaled")
                     c.schedule_mode = ScheduleMode::Scaled;
                   else
                     throw ConfigError("schedule_mode must be paper or scaled, got '" + s + "'");
                 },
                 [](const RunConfig& c) { return std::string(c.schedule_mode == ScheduleMode::Paper ? "paper" : "scaled"); }});
    for (int i = 0; i < 3; ++i) {
      std::string n = std::to_string(i + 1);
      v.push_back(ladder_key("scaled.mu" + n, "scaled ladder mu_" + n, &RunConfig::scaled_mu, i));
      v.push_back(ladder_key("scaled.lambda" + n, "scaled ladder lambda_" + n, &RunConfig::scaled_lambda, i));
    }
    v.push_back(real_key("scaled.ell", "scaled mollification length (capped at delta/2)", &RunConfig::scaled_ell));
    v.push_back(optional_key("Lambda0", "first-stage Lambda (paper mode) or auto", &RunConfig::Lambda0, "auto"));
    v.push_back(seed_key("seed.mu1", "seed scale mu_1", &SeedParams::mu1));
    v.push_back(seed_key("seed.lambda1", "seed scale lambda_1", &SeedParams::lambda1));
    v.push_back(seed_key("seed.mu2", "seed scale mu_2", &SeedParams::mu2));
    v.push_back(seed_key("seed.lambda2", "seed scale lambda_2 (power of two)", &SeedParams::lambda2));
    v.push_back(seed_key("seed.b_amp", "peak of the temperature amplitude (0: theta0 = 0)", &SeedParams::b_amp));
    v.push_back({"output_dir", "output directory", [](RunConfig& c, const std::string& s) { c.output_dir = s; },
                 [](const RunConfig& c) { return c.output_dir; }});
    return v;
  }();
  return k;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    auto where = "config line " + std::to_string(no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    const Key* key = nullptr;
    for (const auto& x : keys())
      if (x.name == k) key = &x;
    if (!key) throw ConfigError(where + "unknown key '" + k + "'");
    if (!seen.insert(k).second) throw ConfigError(where + "repeated key '" + k + "'");
    try {
      key->set(c, v);
    } catch (const ConfigError& e) {
      throw ConfigError(where + k + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string config_reference() {
  RunConfig d;
  std::ostringstream os;
  for (const auto& k : keys()) os << "  " << k.name << " = " << k.get(d) << "    # " << k.help << "\n";
  return os.str();
}

std::string config_text(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& k : keys()) os << k.name << " = " << k.get(c) << "\n";
  return os.str();
}

}  // namespace ci
