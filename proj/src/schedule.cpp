#include <cctype>
#include <cmath>
#include <sstream>

#include "ci/construction.hpp"

namespace ci {

StageParams schedule_parameters(double delta, double delta_bar, double Lambda, double epsilon, double L_v,
                                double eta, const ScheduleOptions& opt) {
  auto fail = [](const std::string& m) { throw ConfigError("schedule: " + m); };
  if (!(delta > 0) || !(delta_bar > 0) || !(epsilon > 0) || !(L_v > 0)) fail("inputs must be positive");
  if (!(Lambda >= 1)) fail("Lambda must be >= 1");
  if (delta_bar > 0.5 * std::pow(delta, 1.5)) fail("delta_bar > delta^{3/2}/2");
  if (!(eta > 0)) eta = basis().r0;
  if (L_v < 1 / eta) fail("L_v < 1/eta");
  StageParams s;
  s.delta = delta;
  s.delta_bar = delta_bar;
  s.epsilon = epsilon;
  s.eta = eta;
  s.L_v = L_v;
  s.M = default_M();
  s.m_order = default_antidiv_order(epsilon);
  const double q = L_v * std::sqrt(delta) / delta_bar;
  s.ell = delta_bar / (L_v * Lambda);
  s.mu[0] = q * Lambda;
  s.lambda[0] = q * std::pow(s.mu[0], 1 + epsilon);
  for (int i = 1; i < 3; ++i) {
    s.mu[i] = L_v * delta * s.lambda[i - 1] / delta_bar;
    s.lambda[i] = q * std::pow(s.mu[i], 1 + epsilon);
  }
  // compatibility conditions
  if (!(1 / s.ell >= Lambda / (eta * delta) * (1 - 1e-12))) fail("1/ell < Lambda/(eta delta)");
  if (!(s.mu[0] >= Lambda / delta * (1 - 1e-12))) fail("mu_1 < Lambda/delta");
  for (int i = 0; i < 3; ++i) {
    double lo = std::max(std::pow(s.mu[i], 1 + epsilon), std::pow(s.ell, -(1 + epsilon)));
    if (!(s.lambda[i] >= lo * (1 - 1e-12))) fail("lambda_n < max{mu_n^{1+eps}, ell^{-(1+eps)}}");
    if (i > 0 && !(s.mu[i] > s.mu[i - 1])) fail("mu not increasing");
  }
  if (s.ell > delta / 2) fail("ell > delta/2");
  if (opt.lambda_cap > 0 && s.lambda[2] > opt.lambda_cap) {
    double f = opt.lambda_cap / s.lambda[2];
    for (auto& l : s.lambda) l *= f;
    s.capped = true;
  }
  return s;
}

double initial_lambda0(double delta, double Lambda, double mu1, double ell) {
  return Lambda / std::sqrt(delta) + mu1 * Lambda * ell / delta;
}

double delta_n(double a, double b, int n) { return std::pow(a, -std::pow(b, n)); }

// ---------------------------------------------------------------------------

namespace {

using i128 = __int128;

i128 iabs(i128 x) { return x < 0 ? -x : x; }

i128 igcd(i128 a, i128 b) {
  a = iabs(a);
  b = iabs(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

i128 imul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw DomainError("rational overflow");
  return r;
}

i128 iadd(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw DomainError("rational overflow");
  return r;
}

}  // namespace

Rational::Rational(long long n, long long d) { *this = make(n, d); }

Rational Rational::make(i128 n, i128 d) {
  if (d == 0) throw DomainError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 g = igcd(n, d);
  Rational r;
  if (g > 1) {
    n /= g;
    d /= g;
  }
  r.num = n;
  r.den = d;
  return r;
}

double Rational::to_double() const { return static_cast<long double>(num) / static_cast<long double>(den); }

std::string Rational::str() const {
  auto s = [](i128 x) {
    if (x == 0) return std::string("0");
    bool neg = x < 0;
    x = iabs(x);
    std::string o;
    while (x > 0) {
      o.insert(o.begin(), char('0' + int(x % 10)));
      x /= 10;
    }
    return neg ? "-" + o : o;
  };
  return den == 1 ? s(num) : s(num) + "/" + s(den);
}

Rational operator+(const Rational& a, const Rational& b) {
  i128 g = igcd(a.den, b.den);
  i128 da = a.den / g, db = b.den / g;
  return Rational::make(iadd(imul(a.num, db), imul(b.num, da)), imul(a.den, db));
}

Rational operator-(const Rational& a, const Rational& b) { return a + Rational::make(-b.num, b.den); }

Rational operator*(const Rational& a, const Rational& b) {
  i128 g1 = igcd(a.num, b.den), g2 = igcd(b.num, a.den);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return Rational::make(imul(a.num / g1, b.num / g2), imul(a.den / g2, b.den / g1));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw DomainError("rational division by zero");
  return a * Rational::make(b.den, b.num);
}

bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }

bool operator<(const Rational& a, const Rational& b) { return (a - b).num < 0; }

Rational rational_from_decimal(const std::string& txt) {
  std::string s;
  for (char ch : txt)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  i128 n = 0, d = 1;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      n = iadd(imul(n, 10), ch - '0');
      if (dot) d = imul(d, 10);
      digits = true;
    } else if (ch == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!digits) throw ConfigError("not a decimal number: '" + txt + "'");
  int ex = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw ConfigError("not a decimal number: '" + txt + "'");
    size_t used = 0;
    try {
      ex = std::stoi(s.substr(i + 1), &used);
    } catch (const std::exception&) {
      throw ConfigError("not a decimal number: '" + txt + "'");
    }
    if (i + 1 + used != s.size()) throw ConfigError("not a decimal number: '" + txt + "'");
  }
  for (; ex > 0; --ex) n = imul(n, 10);
  for (; ex < 0; ++ex) d = imul(d, 10);
  return Rational::make(neg ? -n : n, d);
}

ExponentReport exponent_report(const Rational& e, const Rational& b) {
  const Rational one(1), two(2), three(3), four(4);
  const Rational ope = one + e, tpe = two + e;
  ExponentReport r;
  r.d = ope * ope * tpe + tpe * tpe;
  Rational den = three - two * ope * ope * ope;
  if (!(Rational(0) < den)) {
    std::ostringstream os;
    os << "3 - 2(1+eps)^3 = " << den.to_double() << " is not positive";
    throw DomainError(os.str());
  }
  r.c = (two * r.d - (e * e + two * e + three)) / den;
  r.alpha_v = one / (one + two * b * r.c);
  r.alpha_theta = one / (one + two * (three + four * e + e * e + r.c * ope * ope));
  return r;
}

}  // namespace ci
