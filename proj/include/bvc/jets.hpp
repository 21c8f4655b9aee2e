#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bvc {

using cplx = std::complex<double>;

inline constexpr int kMaxJetOrder = 10;

namespace detail {
inline constexpr int tri_offset(int d) { return d * (d + 1) / 2; }
inline constexpr int tri_size(int order) { return tri_offset(order + 1); }
}  // namespace detail

// Truncated Taylor expansion of a smooth function of one complex variable,
// written in the Wirtinger increments (dz, dzbar):
//   u(z0 + h) = sum_{p+q <= order} c(p,q) h^p hbar^q.
// Smooth (not necessarily holomorphic) functions always admit such an
// expansion, and truncated arithmetic on the tables is exact, which is what
// the transpose-operator pipelines need: no finite differences anywhere.
class Jet2 {
 public:
  Jet2() : order_(0) { c_[0] = 0.0; }
  explicit Jet2(int order) : order_(order) {
    assert(order >= 0 && order <= kMaxJetOrder);
    c_.fill(cplx(0.0));
  }

  static Jet2 constant(cplx v, int order) {
    Jet2 j(order);
    j.c_[0] = v;
    return j;
  }
  // the identity chart z at base point z0
  static Jet2 variable(cplx z0, int order) {
    Jet2 j(order);
    j.c_[0] = z0;
    if (order >= 1) j.at(1, 0) = 1.0;
    return j;
  }
  // the conjugate chart zbar at base point z0
  static Jet2 variable_bar(cplx z0, int order) {
    Jet2 j(order);
    j.c_[0] = std::conj(z0);
    if (order >= 1) j.at(0, 1) = 1.0;
    return j;
  }

  int order() const { return order_; }
  cplx value() const { return c_[0]; }

  cplx coeff(int p, int q) const {
    if (p + q > order_) return 0.0;
    return c_[detail::tri_offset(p + q) + q];
  }
  cplx& at(int p, int q) {
    assert(p + q <= order_);
    return c_[detail::tri_offset(p + q) + q];
  }

  // d^{p+q} u / dz^p dzbar^q at the base point
  cplx wirtinger(int p, int q) const {
    double f = 1.0;
    for (int i = 2; i <= p; ++i) f *= i;
    for (int i = 2; i <= q; ++i) f *= i;
    return coeff(p, q) * f;
  }

  Jet2 operator+(const Jet2& o) const {
    Jet2 r(std::min(order_, o.order_));
    for (int d = 0; d <= r.order_; ++d)
      for (int q = 0; q <= d; ++q) r.at(d - q, q) = coeff(d - q, q) + o.coeff(d - q, q);
    return r;
  }
  Jet2 operator-(const Jet2& o) const {
    Jet2 r(std::min(order_, o.order_));
    for (int d = 0; d <= r.order_; ++d)
      for (int q = 0; q <= d; ++q) r.at(d - q, q) = coeff(d - q, q) - o.coeff(d - q, q);
    return r;
  }
  Jet2 operator*(const Jet2& o) const {
    Jet2 r(std::min(order_, o.order_));
    for (int d1 = 0; d1 <= order_ && d1 <= r.order_; ++d1)
      for (int q1 = 0; q1 <= d1; ++q1) {
        const cplx a = coeff(d1 - q1, q1);
        if (a == 0.0) continue;
        const int dmax = r.order_ - d1;
        for (int d2 = 0; d2 <= o.order_ && d2 <= dmax; ++d2)
          for (int q2 = 0; q2 <= d2; ++q2) {
            const cplx b = o.coeff(d2 - q2, q2);
            if (b == 0.0) continue;
            r.at(d1 - q1 + d2 - q2, q1 + q2) += a * b;
          }
      }
    return r;
  }
  Jet2 operator*(cplx s) const {
    Jet2 r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
  }
  Jet2 operator-() const { return (*this) * cplx(-1.0); }

  // Wirtinger derivative d/dzbar; drops one order.
  Jet2 dzbar() const {
    Jet2 r(std::max(0, order_ - 1));
    for (int d = 0; d <= r.order_; ++d)
      for (int q = 0; q <= d; ++q) r.at(d - q, q) = coeff(d - q, q + 1) * double(q + 1);
    return r;
  }
  Jet2 dz() const {
    Jet2 r(std::max(0, order_ - 1));
    for (int d = 0; d <= r.order_; ++d)
      for (int q = 0; q <= d; ++q) r.at(d - q, q) = coeff(d - q + 1, q) * double(d - q + 1);
    return r;
  }

  // Compose a univariate germ g (given by its Taylor coefficients around
  // this->value(): g(u0 + w) = sum taylor[m] w^m) with this jet.
  Jet2 compose1(const std::vector<cplx>& taylor) const {
    Jet2 w = *this;
    w.c_[0] = 0.0;  // nilpotent part
    Jet2 r = Jet2::constant(taylor.empty() ? cplx(0.0) : taylor[0], order_);
    Jet2 wp = Jet2::constant(1.0, order_);
    const int m_max = std::min<int>(order_, int(taylor.size()) - 1);
    for (int m = 1; m <= m_max; ++m) {
      wp = wp * w;
      r = r + wp * taylor[m];
    }
    return r;
  }

  Jet2 reciprocal() const {
    const cplx u0 = value();
    if (u0 == 0.0) throw std::domain_error("Jet2::reciprocal at zero");
    std::vector<cplx> t(order_ + 1);
    cplx p = 1.0 / u0;
    for (int m = 0; m <= order_; ++m) {
      t[m] = p * (m % 2 == 0 ? 1.0 : -1.0);
      p /= u0;
    }
    // t[m] = (-1)^m / u0^{m+1}
    return compose1(t);
  }

  Jet2 sqrt_jet() const {
    const cplx u0 = value();
    if (u0 == 0.0) throw std::domain_error("Jet2::sqrt at zero");
    std::vector<cplx> t(order_ + 1);
    const cplx s0 = std::sqrt(u0);
    t[0] = s0;
    // binomial series: sqrt(u0+w) = s0 * sum C(1/2,m) (w/u0)^m
    double binom = 1.0;
    cplx pw = 1.0;
    for (int m = 1; m <= order_; ++m) {
      binom *= (0.5 - (m - 1)) / m;
      pw /= u0;
      t[m] = s0 * binom * pw;
    }
    return compose1(t);
  }

 private:
  int order_;
  std::array<cplx, detail::tri_size(kMaxJetOrder)> c_;
};

// Univariate truncated Taylor arithmetic (real coefficients), used to derive
// exact derivative tables for the 1-D profiles (mollifier bump, smoothstep).
class Jet1 {
 public:
  explicit Jet1(int order) : c_(order + 1, 0.0) {}
  static Jet1 variable(double x0, int order) {
    Jet1 j(order);
    j.c_[0] = x0;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }
  static Jet1 constant(double v, int order) {
    Jet1 j(order);
    j.c_[0] = v;
    return j;
  }
  int order() const { return int(c_.size()) - 1; }
  double value() const { return c_[0]; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  Jet1 operator+(const Jet1& o) const {
    Jet1 r(order());
    for (int i = 0; i <= order(); ++i) r.c_[i] = c_[i] + o.c_[i];
    return r;
  }
  Jet1 operator-(const Jet1& o) const {
    Jet1 r(order());
    for (int i = 0; i <= order(); ++i) r.c_[i] = c_[i] - o.c_[i];
    return r;
  }
  Jet1 operator*(const Jet1& o) const {
    Jet1 r(order());
    for (int i = 0; i <= order(); ++i) {
      if (c_[i] == 0.0) continue;
      for (int j = 0; i + j <= order(); ++j) r.c_[i + j] += c_[i] * o.c_[j];
    }
    return r;
  }
  Jet1 operator*(double s) const {
    Jet1 r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
  }

  Jet1 reciprocal() const {
    if (c_[0] == 0.0) throw std::domain_error("Jet1::reciprocal at zero");
    Jet1 r(order());
    r.c_[0] = 1.0 / c_[0];
    for (int i = 1; i <= order(); ++i) {
      double acc = 0.0;
      for (int j = 1; j <= i; ++j) acc += c_[j] * r.c_[i - j];
      r.c_[i] = -acc / c_[0];
    }
    return r;
  }

  Jet1 exp_jet() const {
    // exp(u0 + w) = e^{u0} sum w^m / m!
    Jet1 w = *this;
    w.c_[0] = 0.0;
    Jet1 r = Jet1::constant(1.0, order());
    Jet1 wp = Jet1::constant(1.0, order());
    double fact = 1.0;
    for (int m = 1; m <= order(); ++m) {
      wp = wp * w;
      fact *= m;
      r = r + wp * (1.0 / fact);
    }
    return r * std::exp(c_[0]);
  }

  // derivative values u^{(m)}(x0), m = 0..order
  std::vector<double> derivatives() const {
    std::vector<double> d(order() + 1);
    double f = 1.0;
    for (int m = 0; m <= order(); ++m) {
      if (m >= 2) f *= m;
      d[m] = c_[m] * f;
    }
    return d;
  }

 private:
  std::vector<double> c_;
};

// Deterministic compensated (Neumaier) accumulator; fixed summation order
// makes every pairing bit-reproducible.
struct KahanSum {
  double s = 0.0, comp = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      comp += (s - t) + x;
    else
      comp += (x - t) + s;
    s = t;
  }
  double get() const { return s + comp; }
};

struct KahanSumC {
  KahanSum re, im;
  void add(cplx z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cplx get() const { return {re.get(), im.get()}; }
};

}  // namespace bvc
