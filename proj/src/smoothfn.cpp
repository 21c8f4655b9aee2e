#include "bvc/smoothfn.hpp"

#include <cmath>
#include <functional>

namespace bvc {

// --- 1-D profiles ------------------------------------------------------------

double mollifier(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

Jet1 mollifier_jet(double x, int order) {
  if (std::abs(x) >= 1.0) return Jet1(order);
  Jet1 xv = Jet1::variable(x, order);
  Jet1 one = Jet1::constant(1.0, order);
  Jet1 g = (one - xv * xv).reciprocal() * (-1.0);
  return g.exp_jet();
}

namespace {
// 32-point Gauss-Legendre nodes on [-1,1] (computed once)
struct GL32 {
  std::array<double, 32> x{}, w{};
  GL32() {
    const int n = 32;
    for (int i = 0; i < n; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      x[size_t(i)] = t;
      w[size_t(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

double gl32_integral(const std::function<double(double)>& f, double a, double b) {
  static const GL32 gl;
  double s = 0.0;
  const double mid = 0.5 * (a + b), hal = 0.5 * (b - a);
  for (int i = 0; i < 32; ++i) s += gl.w[size_t(i)] * f(mid + hal * gl.x[size_t(i)]);
  return s * hal;
}

// m(u) = exp(-1/u) on u > 0, identically 0 for u <= 0
double expm(double u) { return u <= 0.0 ? 0.0 : std::exp(-1.0 / u); }

Jet1 expm_jet(double u, int order) {
  if (u <= 0.0) return Jet1(order);
  Jet1 uv = Jet1::variable(u, order);
  return (uv.reciprocal() * (-1.0)).exp_jet();
}
}  // namespace

// Polynomial step of class C^6 (degree 13): exact plateaus, S(1/2) = 1/2,
// and a single polynomial transition piece, so knot-aligned quadrature panels
// integrate cutoff layers exactly. Transverse-operator powers consume up to
// six derivatives, all continuous.
namespace {
constexpr double kStepCoef[7] = {1716.0, -9009.0, 20020.0, -24024.0, 16380.0, -6006.0, 924.0};
}

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double s = 0.0;
  for (int n = 6; n >= 0; --n) s = s * u + kStepCoef[n];
  for (int i = 0; i < 7; ++i) s *= u;
  return s;
}

Jet1 smoothstep_jet(double u, int order) {
  if (u <= 0.0) return Jet1(order);
  if (u >= 1.0) return Jet1::constant(1.0, order);
  Jet1 uv = Jet1::variable(u, order);
  Jet1 s(order);
  for (int n = 6; n >= 0; --n) s = s * uv + Jet1::constant(kStepCoef[n], order);
  for (int i = 0; i < 7; ++i) s = s * uv;
  return s;
}

// --- SmoothFn ----------------------------------------------------------------

namespace {

struct ZeroFn final : SmoothFnImpl {
  cplx value(cplx) const override { return 0.0; }
  Jet2 jet(cplx, int order) const override { return Jet2(order); }
};

struct ConstFn final : SmoothFnImpl {
  cplx c;
  explicit ConstFn(cplx v) : c(v) {}
  cplx value(cplx) const override { return c; }
  Jet2 jet(cplx, int order) const override { return Jet2::constant(c, order); }
};

struct PolyFn final : SmoothFnImpl {
  std::vector<cplx> a;
  explicit PolyFn(std::vector<cplx> v) : a(std::move(v)) {}
  cplx value(cplx z) const override {
    cplx r = 0.0;
    for (size_t i = a.size(); i-- > 0;) r = r * z + a[i];
    return r;
  }
  Jet2 jet(cplx z, int order) const override {
    Jet2 zv = Jet2::variable(z, order);
    Jet2 r = Jet2(order);
    for (size_t i = a.size(); i-- > 0;) r = r * zv + Jet2::constant(a[i], order);
    return r;
  }
};

struct InvPoleFn final : SmoothFnImpl {
  cplx a;
  int k;
  InvPoleFn(cplx a_, int k_) : a(a_), k(k_) {}
  cplx value(cplx z) const override { return std::pow(a - z, -k); }
  Jet2 jet(cplx z, int order) const override {
    Jet2 base = (Jet2::constant(a, order) - Jet2::variable(z, order)).reciprocal();
    Jet2 r = Jet2::constant(1.0, order);
    for (int i = 0; i < k; ++i) r = r * base;
    return r;
  }
};

struct ZbarFn final : SmoothFnImpl {
  cplx value(cplx z) const override { return std::conj(z); }
  Jet2 jet(cplx z, int order) const override { return Jet2::variable_bar(z, order); }
};

struct OracleFn final : SmoothFnImpl {
  std::function<cplx(cplx)> v;
  std::function<Jet2(cplx, int)> j;
  OracleFn(std::function<cplx(cplx)> v_, std::function<Jet2(cplx, int)> j_)
      : v(std::move(v_)), j(std::move(j_)) {}
  cplx value(cplx z) const override { return v(z); }
  Jet2 jet(cplx z, int order) const override { return j(z, order); }
};

struct SumFn final : SmoothFnImpl {
  SmoothFn a, b;
  SumFn(SmoothFn a_, SmoothFn b_) : a(std::move(a_)), b(std::move(b_)) {}
  cplx value(cplx z) const override { return a(z) + b(z); }
  Jet2 jet(cplx z, int order) const override { return a.jet(z, order) + b.jet(z, order); }
};

struct ProdFn final : SmoothFnImpl {
  SmoothFn a, b;
  ProdFn(SmoothFn a_, SmoothFn b_) : a(std::move(a_)), b(std::move(b_)) {}
  cplx value(cplx z) const override { return a(z) * b(z); }
  Jet2 jet(cplx z, int order) const override { return a.jet(z, order) * b.jet(z, order); }
};

struct ScaleFn final : SmoothFnImpl {
  cplx s;
  SmoothFn a;
  ScaleFn(cplx s_, SmoothFn a_) : s(s_), a(std::move(a_)) {}
  cplx value(cplx z) const override { return s * a(z); }
  Jet2 jet(cplx z, int order) const override { return a.jet(z, order) * s; }
};

struct DzbarFn final : SmoothFnImpl {
  SmoothFn a;
  explicit DzbarFn(SmoothFn a_) : a(std::move(a_)) {}
  cplx value(cplx z) const override { return a.jet(z, 1).wirtinger(0, 1); }
  Jet2 jet(cplx z, int order) const override {
    return a.jet(z, std::min(order + 1, kMaxJetOrder)).dzbar();
  }
};

struct DzFn final : SmoothFnImpl {
  SmoothFn a;
  explicit DzFn(SmoothFn a_) : a(std::move(a_)) {}
  cplx value(cplx z) const override { return a.jet(z, 1).wirtinger(1, 0); }
  Jet2 jet(cplx z, int order) const override {
    return a.jet(z, std::min(order + 1, kMaxJetOrder)).dz();
  }
};

struct BoxBumpFn final : SmoothFnImpl {
  cplx c;
  double rx, ry;
  BoxBumpFn(cplx c_, double rx_, double ry_) : c(c_), rx(rx_), ry(ry_) {}
  cplx value(cplx z) const override {
    return mollifier((z.real() - c.real()) / rx) * mollifier((z.imag() - c.imag()) / ry);
  }
  Jet2 jet(cplx z, int order) const override {
    const double xs = (z.real() - c.real()) / rx;
    const double ys = (z.imag() - c.imag()) / ry;
    Jet1 bx = mollifier_jet(xs, order);
    Jet1 by = mollifier_jet(ys, order);
    // x = (z + zbar)/2, y = (z - zbar)/(2i); assemble the (dz,dzbar) table
    // from the real-partial table bx^(m) by^(n) / (rx^m ry^n m! n!).
    Jet2 r(order);
    // dx = (dz + dzbar)/2 / rx, dy = (dz - dzbar)/(2i) / ry as jets
    Jet2 dx(order), dy(order);
    if (order >= 1) {
      dx.at(1, 0) = 0.5 / rx;
      dx.at(0, 1) = 0.5 / rx;
      dy.at(1, 0) = cplx(0.0, -0.5) / ry;
      dy.at(0, 1) = cplx(0.0, 0.5) / ry;
    }
    Jet2 dxp = Jet2::constant(1.0, order);
    for (int m = 0; m <= order; ++m) {
      if (m > 0) dxp = dxp * dx;
      Jet2 dyp = Jet2::constant(1.0, order);
      for (int n = 0; m + n <= order; ++n) {
        if (n > 0) dyp = dyp * dy;
        const double cmn = bx[m] * by[n];  // Taylor coefficients already / m!n!
        if (cmn != 0.0) r = r + dxp * dyp * cmn;
      }
    }
    return r;
  }
};

struct Compose1DFn final : SmoothFnImpl {
  SmoothFn inner;
  double a, b;  // smoothstep((inner-a)/(b-a))
  Compose1DFn(SmoothFn in, double a_, double b_) : inner(std::move(in)), a(a_), b(b_) {}
  cplx value(cplx z) const override {
    const double u = (inner(z).real() - a) / (b - a);
    return smoothstep(u);
  }
  Jet2 jet(cplx z, int order) const override {
    const double uv = (inner(z).real() - a) / (b - a);
    if (uv <= 0.0) return Jet2(order);
    if (uv >= 1.0) return Jet2::constant(1.0, order);
    Jet2 in = inner.jet(z, order);
    const double u0 = (in.value().real() - a) / (b - a);
    Jet1 s = smoothstep_jet(u0, order);
    std::vector<cplx> taylor(order + 1);
    double scale = 1.0;
    for (int m = 0; m <= order; ++m) {
      taylor[size_t(m)] = s[m] * scale;
      scale /= (b - a);
    }
    return in.compose1(taylor);
  }
};

struct RadialBumpFn final : SmoothFnImpl {
  cplx c;
  double R;
  double norm;  // multiplies the profile
  RadialBumpFn(cplx c_, double R_, double norm_) : c(c_), R(R_), norm(norm_) {}
  // profile m(|z-c|^2/R^2) with m(s)=exp(-1/(1-s)) for s<1
  static double prof(double s) {
    if (s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s));
  }
  cplx value(cplx z) const override { return norm * prof(std::norm(z - c) / (R * R)); }
  Jet2 jet(cplx z, int order) const override {
    Jet2 w = Jet2::variable(z, order) - Jet2::constant(c, order);
    Jet2 wb = Jet2::variable_bar(z, order) - Jet2::constant(std::conj(c), order);
    Jet2 s = (w * wb) * (1.0 / (R * R));
    const double s0 = s.value().real();
    if (s0 >= 1.0) return Jet2(order);
    Jet1 sv = Jet1::variable(s0, order);
    Jet1 g = (Jet1::constant(1.0, order) - sv).reciprocal() * (-1.0);
    Jet1 pj = g.exp_jet();
    std::vector<cplx> taylor(order + 1);
    for (int m = 0; m <= order; ++m) taylor[size_t(m)] = pj[m];
    return s.compose1(taylor) * norm;
  }
};

}  // namespace

SmoothFn::SmoothFn() : p_(std::make_shared<ZeroFn>()) {}

SmoothFn SmoothFn::dzbar() const { return SmoothFn(std::make_shared<DzbarFn>(*this)); }
SmoothFn SmoothFn::dz() const { return SmoothFn(std::make_shared<DzFn>(*this)); }

SmoothFn operator+(const SmoothFn& a, const SmoothFn& b) {
  return SmoothFn(std::make_shared<SumFn>(a, b));
}
SmoothFn operator*(const SmoothFn& a, const SmoothFn& b) {
  return SmoothFn(std::make_shared<ProdFn>(a, b));
}
SmoothFn operator*(cplx s, const SmoothFn& a) {
  return SmoothFn(std::make_shared<ScaleFn>(s, a));
}

SmoothFn sf_const(cplx c) { return SmoothFn(std::make_shared<ConstFn>(c)); }
SmoothFn sf_poly(std::vector<cplx> coeffs) {
  return SmoothFn(std::make_shared<PolyFn>(std::move(coeffs)));
}
SmoothFn sf_inv_pole(cplx a, int k) { return SmoothFn(std::make_shared<InvPoleFn>(a, k)); }
SmoothFn sf_zbar() { return SmoothFn(std::make_shared<ZbarFn>()); }
SmoothFn sf_from(std::function<cplx(cplx)> value, std::function<Jet2(cplx, int)> jet) {
  return SmoothFn(std::make_shared<OracleFn>(std::move(value), std::move(jet)));
}
SmoothFn sf_box_bump(cplx center, double rx, double ry) {
  return SmoothFn(std::make_shared<BoxBumpFn>(center, rx, ry));
}
SmoothFn sf_radial_bump(cplx center, double radius) {
  return SmoothFn(std::make_shared<RadialBumpFn>(center, radius, 1.0));
}
SmoothFn sf_radial_bump_normalized(cplx center, double radius) {
  // integral of prof(|w|^2/R^2) over C = pi R^2 * int_0^1 prof(s) ds
  static const double unit = [] {
    double tot = 0.0;
    double a = 0.0;
    for (int m = 0; m < 48; ++m) {
      const double b = 1.0 - std::pow(0.5, m + 1);
      tot += gl32_integral([](double s) { return RadialBumpFn::prof(s); }, a, b);
      a = b;
    }
    return tot;
  }();
  const double integral = M_PI * radius * radius * unit;
  if (!(integral > 0.0)) throw std::runtime_error("bump normalization failure");
  return SmoothFn(std::make_shared<RadialBumpFn>(center, radius, 1.0 / integral));
}

SmoothFn sf_smoothstep_of(const SmoothFn& inner, double a, double b) {
  return SmoothFn(std::make_shared<Compose1DFn>(inner, a, b));
}

SmoothFn sf_plateau_below(const SmoothFn& s, double lo, double hi) {
  // smoothstep((hi - s)/(hi - lo)): 1 for s<=lo, 0 for s>=hi
  return sf_smoothstep_of(cplx(-1.0) * s, -hi, -lo);
}

// --- PeriodicPoU -------------------------------------------------------------

PeriodicPoU::PeriodicPoU(int count, double half_width) : count_(count), half_width_(half_width) {
  if (count < 1) throw std::invalid_argument("PeriodicPoU: count must be >= 1");
  if (count >= 2 && half_width * count <= M_PI)
    throw std::invalid_argument("PeriodicPoU: windows do not cover the circle");
}

double PeriodicPoU::center(int p) const { return 2.0 * M_PI * p / count_; }

namespace {
double wrap_angle(double d) {
  while (d > M_PI) d -= 2.0 * M_PI;
  while (d < -M_PI) d += 2.0 * M_PI;
  return d;
}
}  // namespace

Jet1 PeriodicPoU::weight_jet(int p, double t, int order) const {
  if (count_ == 1) return Jet1::constant(1.0, order);
  Jet1 num(order);
  Jet1 den(order);
  for (int q = 0; q < count_; ++q) {
    const double d = wrap_angle(t - center(q)) / half_width_;
    Jet1 mq = mollifier_jet(d, order) ;
    // chain rule for the inner linear map t -> (t - c)/h
    Jet1 scaled(order);
    double s = 1.0;
    for (int m = 0; m <= order; ++m) {
      scaled[m] = mq[m] * s;
      s /= half_width_;
    }
    den = den + scaled;
    if (q == p) num = scaled;
  }
  if (den.value() <= 0.0) throw std::runtime_error("PeriodicPoU: cover gap at t");
  return num * den.reciprocal();
}

double PeriodicPoU::weight(int p, double t) const {
  if (count_ == 1) return 1.0;
  const double d = wrap_angle(t - center(p)) / half_width_;
  if (std::abs(d) >= 1.0) return 0.0;
  double den = 0.0;
  for (int q = 0; q < count_; ++q) den += mollifier(wrap_angle(t - center(q)) / half_width_);
  return mollifier(d) / den;
}

std::vector<double> PeriodicPoU::derivs(int p, double t, int order) const {
  return weight_jet(p, t, order).derivatives();
}

}  // namespace bvc
