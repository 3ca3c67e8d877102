#pragma once

#include <array>
#include <complex>
#include <vector>

namespace ci {

using cd = std::complex<double>;

/// Largest Taylor order a jet may carry.
constexpr int kMaxOrder = 14;

/// Number of monomials t^a x1^b x2^c with a+b+c <= K.
constexpr int jet_size(int K) { return K < 0 ? 0 : (K + 1) * (K + 2) * (K + 3) / 6; }

struct Mono {
  int a, b, c;
  int deg() const { return a + b + c; }
};

/// Graded monomial index tables shared by all jets.
class JetTables {
 public:
  static const JetTables& get();
  int index(int a, int b, int c) const;
  const Mono& mono(int i) const { return monos_[i]; }
  int deg(int i) const { return degs_[i]; }
  int mul(int i, int j) const { return mul_[i * n_ + j]; }
  /// Index of the monomial obtained by removing one power of h_dir (or -1).
  int lower(int i, int dir) const { return lower_[3 * i + dir]; }
  int raise(int i, int dir) const { return raise_[3 * i + dir]; }

 private:
  JetTables();
  int n_;
  std::vector<Mono> monos_;
  std::vector<int> degs_;
  std::vector<short> mul_;
  std::vector<int> lower_, raise_;
};

/// Truncated Taylor expansion in h = (dt, dx1, dx2) around a base point:
///   f(p + h) = sum_alpha c_alpha h^alpha,  |alpha| <= order.
class Jet {
 public:
  Jet() = default;
  explicit Jet(int K) : K_(K), c_(jet_size(K)) {}

  static Jet constant(int K, cd v);
  /// x0 + h_dir
  static Jet variable(int K, int dir, double x0);
  /// Jet of exp(i k.h) (no base phase).
  static Jet exp_phase(int K, const std::array<double, 3>& k);

  int order() const { return K_; }
  int size() const { return static_cast<int>(c_.size()); }
  bool empty() const { return K_ < 0; }
  cd value() const { return c_.empty() ? cd(0) : c_[0]; }
  cd& operator[](int i) { return c_[i]; }
  const cd& operator[](int i) const { return c_[i]; }
  const std::vector<cd>& coeffs() const { return c_; }

  /// Partial derivative of order alpha at the base point.
  cd partial(int a, int b, int c) const;
  Jet truncated(int K) const;
  /// d/dh_dir, order drops by one.
  Jet deriv(int dir) const;
  bool is_zero() const;
  double max_abs() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(cd s);
  Jet operator-() const;

 private:
  int K_ = -1;
  std::vector<cd> c_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(cd s, const Jet& a);
Jet operator*(const Jet& a, cd s);
/// Product truncated at order K (<= min order of the operands).
Jet mul(const Jet& a, const Jet& b, int K);
/// out += s * a * b, truncated at out's order.
void fma_into(Jet& out, const Jet& a, const Jet& b, cd s = 1.0);

/// Univariate Taylor series of a function around a point, f(x0+u) = sum c_k u^k.
struct Series {
  std::vector<cd> c;
  explicit Series(int K = 0) : c(K + 1) {}
  int order() const { return static_cast<int>(c.size()) - 1; }
  static Series var(int K, cd x0);
  static Series cst(int K, cd v);
};

Series operator+(const Series& a, const Series& b);
Series operator-(const Series& a, const Series& b);
Series operator*(const Series& a, const Series& b);
Series operator*(cd s, const Series& a);
Series series_inv(const Series& a);
Series series_exp(const Series& a);
/// a^q for real q, requires a.c[0] != 0.
Series series_pow(const Series& a, double q);

/// f(J) for a univariate series of f expanded at J.value().
Jet compose(const Series& f, const Jet& J);

Jet jet_inv(const Jet& J);
Jet jet_sqrt(const Jet& J);
Jet jet_pow(const Jet& J, double q);
Jet jet_exp(const Jet& J);

/// psi(s) = exp(-1/s) for s > 0, 0 otherwise; the flat profile used by all bumps.
Series psi_series(int K, double s0);
/// Smooth step equal to 1 for s <= 0 and 0 for s >= 1.
Series smoothstep_series(int K, double s0);

}  // namespace ci
