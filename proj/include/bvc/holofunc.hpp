#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bvc/geometry.hpp"
#include "bvc/smoothfn.hpp"

namespace bvc {

// One-variable holomorphic function with exact jets and growth metadata.
struct FactorFunction {
  SmoothFn fn;                        // holomorphic: jets carry only dz-columns
  int growth_order = 0;               // declared k in |f| <= C/dist^k
  double holo_margin = 1e300;         // holomorphic on a margin-neighborhood of the closure
  std::vector<cplx> singular_points;  // boundary singularities (quadrature hints)
  std::string desc = "f";

  cplx operator()(cplx z) const { return fn(z); }
};

FactorFunction ff_const(cplx c);
FactorFunction ff_monomial(int m);
FactorFunction ff_poly(std::vector<cplx> coeffs);
// 1/(pole - z)^k; growth order is k when the pole lies on the factor boundary,
// 0 when it lies strictly outside the closure.
FactorFunction ff_inv_pole(const PlanarDomain& dom, cplx pole, int k);

// Holomorphic function on a product domain, of declared polynomial growth.
struct HoloFunction {
  int arity = 1;
  std::function<cplx(const cplx*)> eval;
  int growth_order = 0;
  std::vector<FactorFunction> factors;             // nonempty iff tensor structure
  std::vector<std::vector<double>> singular_angles;  // per factor, boundary hints
  bool identically_zero = false;
  bool holomorphic = true;  // false only for injected-failure controls
  std::string desc = "f";

  bool tensor() const { return !factors.empty(); }
  cplx operator()(const std::vector<cplx>& z) const { return eval(z.data()); }
};

HoloFunction holo_const(const ProductDomain& dom, cplx c);
// tensor product: one factor function per domain factor
HoloFunction tensor(const ProductDomain& dom, std::vector<FactorFunction> fs);
// 1/(c - sum z_j)^k on the product
HoloFunction inv_plane(const ProductDomain& dom, cplx c, int k);
// g(z) = f(z - eps v)
HoloFunction translate(const HoloFunction& f, std::vector<cplx> v, double eps);
// g(z) = f(rho z); factors must be discs centered at the origin
HoloFunction dilate_disc(const ProductDomain& dom, const HoloFunction& f, double rho);
// failure injection: f + delta * conj(z_1)
HoloFunction zbar_perturb(const HoloFunction& f, double delta);

struct GrowthEstimateParams {
  double dist_hi = 1e-1;
  double dist_lo = 1e-4;
  int shells = 7;
  int samples_per_shell = 512;
  uint64_t seed = 1234;
};

// Least-squares slope of log sup-shell |f| against -log dist, over geometric
// shells with all factors held at the shell distance; clamped at 0.
double growth_order_estimate(const HoloFunction& f, const ProductDomain& dom,
                             const GrowthEstimateParams& params = {});

// Built-in registry ------------------------------------------------------------

struct BuiltinSpec {
  std::string name;
  std::string signature;
};
std::vector<BuiltinSpec> builtin_function_list();

// Construct a built-in by name: const(value), monomial(power), poly(coeffs...),
// inv_pole(pole, power), inv_plane(c, power), tensor of per-factor specs.
// Throws std::invalid_argument for unknown names or bad arity.
HoloFunction make_builtin_function(const ProductDomain& dom, const std::string& name,
                                   const std::vector<double>& params);

}  // namespace bvc
