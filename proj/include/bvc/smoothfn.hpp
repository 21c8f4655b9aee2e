#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bvc/jets.hpp"

namespace bvc {

// 1-D profiles ---------------------------------------------------------------

// Standard mollifier profile m(x) = exp(-1/(1-x^2)) on (-1,1), 0 outside.
double mollifier(double x);
// Taylor coefficients of the mollifier at x (length order+1), exact.
Jet1 mollifier_jet(double x, int order);

// Smoothstep S with S==0 for u<=0, S==1 for u>=1, built from the integrated
// mollifier bump on (0,1). Plateaus are exact.
double smoothstep(double u);
Jet1 smoothstep_jet(double u, int order);

// Smooth scalar functions on one complex factor ------------------------------

struct SmoothFnImpl {
  virtual ~SmoothFnImpl() = default;
  virtual cplx value(cplx z) const = 0;
  virtual Jet2 jet(cplx z, int order) const = 0;
};

// Value-semantic handle to an immutable smooth function C -> C with exact
// derivative oracles of every order up to kMaxJetOrder.
class SmoothFn {
 public:
  SmoothFn();  // identically zero
  explicit SmoothFn(std::shared_ptr<const SmoothFnImpl> p) : p_(std::move(p)) {}

  cplx operator()(cplx z) const { return p_->value(z); }
  Jet2 jet(cplx z, int order) const { return p_->jet(z, order); }

  // Wirtinger derivative by table shift
  cplx deriv(cplx z, int p, int q) const { return jet(z, p + q).wirtinger(p, q); }

  SmoothFn dzbar() const;
  SmoothFn dz() const;

  friend SmoothFn operator+(const SmoothFn& a, const SmoothFn& b);
  friend SmoothFn operator*(const SmoothFn& a, const SmoothFn& b);
  friend SmoothFn operator*(cplx s, const SmoothFn& a);

 private:
  std::shared_ptr<const SmoothFnImpl> p_;
};

SmoothFn sf_const(cplx c);
// polynomial sum c_k z^k (holomorphic)
SmoothFn sf_poly(std::vector<cplx> coeffs);
// 1/(a - z)^k, holomorphic away from a
SmoothFn sf_inv_pole(cplx a, int k);
// conj(z) (the antiholomorphic coordinate)
SmoothFn sf_zbar();
// from arbitrary oracles
SmoothFn sf_from(std::function<cplx(cplx)> value, std::function<Jet2(cplx, int)> jet);

// Mollifier box bump: b((x-cx)/rx) * b((y-cy)/ry); vanishes with all
// derivatives outside the box.
SmoothFn sf_box_bump(cplx center, double rx, double ry);
// Radial mollifier bump, normalized so that its Lebesgue integral over C is 1.
SmoothFn sf_radial_bump_normalized(cplx center, double radius);
// Un-normalized radial bump m(|z-c|^2/R^2-ish): smooth, supported in the disc.
SmoothFn sf_radial_bump(cplx center, double radius);

// smoothstep((inner - a)/(b - a)) for a smooth real-valued inner function
SmoothFn sf_smoothstep_of(const SmoothFn& inner, double a, double b);

// Plateau cutoff in a smooth real quantity s(z): equals 1 where s <= lo,
// 0 where s >= hi (monotone transition in between).
SmoothFn sf_plateau_below(const SmoothFn& s, double lo, double hi);

// Smooth periodic partition of unity on the circle --------------------------

// count >= 1 windows centered at 2*pi*p/count with the given half-width
// (radians). Weights are mollifier bumps normalized pointwise, so the
// partition sums to 1 exactly wherever the cover is complete.
class PeriodicPoU {
 public:
  PeriodicPoU(int count, double half_width);
  int count() const { return count_; }
  double center(int p) const;
  double half_width() const { return half_width_; }
  double weight(int p, double t) const;               // u_p(t)
  std::vector<double> derivs(int p, double t, int order) const;  // d^m u_p/dt^m

 private:
  Jet1 weight_jet(int p, double t, int order) const;
  int count_;
  double half_width_;
};

}  // namespace bvc
