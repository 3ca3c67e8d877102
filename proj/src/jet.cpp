#include "ci/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace ci {

namespace {
constexpr int kDim = kMaxOrder + 1;
int idx3_storage[kDim][kDim][kDim];
}  // namespace

JetTables::JetTables() {
  n_ = jet_size(kMaxOrder);
  for (int d = 0; d <= kMaxOrder; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) {
        int c = d - a - b;
        idx3_storage[a][b][c] = static_cast<int>(monos_.size());
        monos_.push_back({a, b, c});
        degs_.push_back(d);
      }
  mul_.assign(static_cast<size_t>(n_) * n_, -1);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      const Mono& p = monos_[i];
      const Mono& q = monos_[j];
      if (p.deg() + q.deg() <= kMaxOrder)
        mul_[static_cast<size_t>(i) * n_ + j] =
            static_cast<short>(idx3_storage[p.a + q.a][p.b + q.b][p.c + q.c]);
    }
  lower_.assign(3 * n_, -1);
  raise_.assign(3 * n_, -1);
  for (int i = 0; i < n_; ++i) {
    const Mono& m = monos_[i];
    int e[3] = {m.a, m.b, m.c};
    for (int d = 0; d < 3; ++d) {
      int f[3] = {e[0], e[1], e[2]};
      if (f[d] > 0) {
        f[d]--;
        lower_[3 * i + d] = idx3_storage[f[0]][f[1]][f[2]];
        f[d]++;
      }
      if (m.deg() < kMaxOrder) {
        f[d]++;
        raise_[3 * i + d] = idx3_storage[f[0]][f[1]][f[2]];
      }
    }
  }
}

const JetTables& JetTables::get() {
  static const JetTables t;
  return t;
}

int JetTables::index(int a, int b, int c) const { return idx3_storage[a][b][c]; }

Jet Jet::constant(int K, cd v) {
  Jet j(K);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(int K, int dir, double x0) {
  Jet j(K);
  j.c_[0] = x0;
  if (K >= 1) j.c_[1 + dir] = 1.0;
  return j;
}

Jet Jet::exp_phase(int K, const std::array<double, 3>& k) {
  Jet j(K);
  std::array<std::vector<cd>, 3> pw;
  for (int d = 0; d < 3; ++d) {
    pw[d].resize(K + 1);
    pw[d][0] = 1.0;
    for (int n = 1; n <= K; ++n) pw[d][n] = pw[d][n - 1] * cd(0, k[d]) / double(n);
  }
  const auto& T = JetTables::get();
  for (int i = 0; i < j.size(); ++i) {
    const Mono& m = T.mono(i);
    j.c_[i] = pw[0][m.a] * pw[1][m.b] * pw[2][m.c];
  }
  return j;
}

cd Jet::partial(int a, int b, int c) const {
  if (a + b + c > K_) throw std::out_of_range("jet order too low for requested partial");
  double f = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) * std::tgamma(c + 1.0);
  return c_[JetTables::get().index(a, b, c)] * f;
}

Jet Jet::truncated(int K) const {
  if (K >= K_) return *this;
  Jet j(K);
  for (int i = 0; i < j.size(); ++i) j.c_[i] = c_[i];
  return j;
}

Jet Jet::deriv(int dir) const {
  if (K_ < 1) throw std::logic_error("derivative of an order-0 jet");
  Jet j(K_ - 1);
  const auto& T = JetTables::get();
  for (int i = 0; i < j.size(); ++i) {
    int up = T.raise(i, dir);
    const Mono& m = T.mono(i);
    int e = dir == 0 ? m.a : dir == 1 ? m.b : m.c;
    j.c_[i] = c_[up] * double(e + 1);
  }
  return j;
}

bool Jet::is_zero() const {
  for (const auto& v : c_)
    if (v != cd(0)) return false;
  return true;
}

double Jet::max_abs() const {
  double m = 0;
  for (const auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.K_ < 0) return *this;
  if (K_ < 0) return *this = o;
  if (o.K_ < K_) {
    K_ = o.K_;
    c_.resize(jet_size(K_));
  }
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.K_ < 0) return *this;
  if (K_ < 0) return *this = -o;
  if (o.K_ < K_) {
    K_ = o.K_;
    c_.resize(jet_size(K_));
  }
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(cd s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet j = *this;
  for (auto& v : j.c_) v = -v;
  return j;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  r += b;
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  r -= b;
  return r;
}

Jet operator*(cd s, const Jet& a) {
  Jet r = a;
  r *= s;
  return r;
}

Jet operator*(const Jet& a, cd s) { return s * a; }

Jet mul(const Jet& a, const Jet& b, int K) {
  K = std::min({K, a.order(), b.order()});
  Jet r(K);
  if (K < 0) return r;
  fma_into(r, a, b, 1.0);
  return r;
}

void fma_into(Jet& out, const Jet& a, const Jet& b, cd s) {
  const int K = out.order();
  if (a.order() < K || b.order() < K) throw std::logic_error("fma_into: operand order too low");
  const auto& T = JetTables::get();
  const int n = out.size();
  for (int i = 0; i < n; ++i) {
    cd ai = a[i];
    if (ai == cd(0)) continue;
    ai *= s;
    const int jmax = jet_size(K - T.deg(i));
    for (int j = 0; j < jmax; ++j) out[T.mul(i, j)] += ai * b[j];
  }
}

Jet operator*(const Jet& a, const Jet& b) { return mul(a, b, std::min(a.order(), b.order())); }

Series Series::var(int K, cd x0) {
  Series s(K);
  s.c[0] = x0;
  if (K >= 1) s.c[1] = 1.0;
  return s;
}

Series Series::cst(int K, cd v) {
  Series s(K);
  s.c[0] = v;
  return s;
}

Series operator+(const Series& a, const Series& b) {
  Series r(std::min(a.order(), b.order()));
  for (int k = 0; k <= r.order(); ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

Series operator-(const Series& a, const Series& b) {
  Series r(std::min(a.order(), b.order()));
  for (int k = 0; k <= r.order(); ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

Series operator*(const Series& a, const Series& b) {
  Series r(std::min(a.order(), b.order()));
  for (int k = 0; k <= r.order(); ++k)
    for (int j = 0; j <= k; ++j) r.c[k] += a.c[j] * b.c[k - j];
  return r;
}

Series operator*(cd s, const Series& a) {
  Series r = a;
  for (auto& v : r.c) v *= s;
  return r;
}

Series series_inv(const Series& a) {
  if (a.c[0] == cd(0)) throw std::domain_error("series_inv: zero constant term");
  Series r(a.order());
  r.c[0] = 1.0 / a.c[0];
  for (int k = 1; k <= r.order(); ++k) {
    cd s = 0;
    for (int j = 1; j <= k; ++j) s += a.c[j] * r.c[k - j];
    r.c[k] = -s / a.c[0];
  }
  return r;
}

Series series_exp(const Series& a) {
  Series r(a.order());
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= r.order(); ++k) {
    cd s = 0;
    for (int j = 1; j <= k; ++j) s += double(j) * a.c[j] * r.c[k - j];
    r.c[k] = s / double(k);
  }
  return r;
}

Series series_pow(const Series& a, double q) {
  if (a.c[0] == cd(0)) throw std::domain_error("series_pow: zero constant term");
  Series r(a.order());
  r.c[0] = std::pow(a.c[0], q);
  if (a.c[0].imag() == 0.0 && a.c[0].real() > 0) r.c[0] = std::pow(a.c[0].real(), q);
  for (int k = 1; k <= r.order(); ++k) {
    cd s = 0;
    for (int j = 1; j <= k; ++j) s += ((q + 1.0) * j - k) * a.c[j] * r.c[k - j];
    r.c[k] = s / (double(k) * a.c[0]);
  }
  return r;
}

Jet compose(const Series& f, const Jet& J) {
  const int K = std::min(J.order(), f.order());
  Jet d = J.truncated(K);
  d[0] = 0;
  Jet r = Jet::constant(K, f.c[K]);
  for (int k = K - 1; k >= 0; --k) {
    r = mul(r, d, K);
    r[0] += f.c[k];
  }
  return r;
}

Jet jet_inv(const Jet& J) { return compose(series_inv(Series::var(J.order(), J.value())), J); }

Jet jet_sqrt(const Jet& J) {
  Jet r = compose(series_pow(Series::var(J.order(), J.value()), 0.5), J);
  r[0] = std::sqrt(J.value());
  return r;
}

Jet jet_pow(const Jet& J, double q) { return compose(series_pow(Series::var(J.order(), J.value()), q), J); }

Jet jet_exp(const Jet& J) { return compose(series_exp(Series::var(J.order(), J.value())), J); }

Series psi_series(int K, double s0) {
  if (s0 <= 0) return Series(K);
  Series g = -1.0 * series_inv(Series::var(K, s0));
  if (-1.0 / s0 < -745.0) return Series(K);
  return series_exp(g);
}

Series smoothstep_series(int K, double s0) {
  if (s0 <= 0) return Series::cst(K, 1.0);
  if (s0 >= 1) return Series(K);
  Series A = psi_series(K, 1.0 - s0);
  for (int k = 1; k <= K; k += 2) A.c[k] = -A.c[k];
  Series B = psi_series(K, s0);
  return A * series_inv(A + B);
}

}  // namespace ci
