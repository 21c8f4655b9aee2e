#include "bvc/holofunc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bvc {

FactorFunction ff_const(cplx c) {
  FactorFunction f;
  f.fn = sf_const(c);
  f.growth_order = 0;
  std::ostringstream os;
  os << "const(" << c.real() << (c.imag() ? "+i.." : "") << ")";
  f.desc = os.str();
  return f;
}

FactorFunction ff_monomial(int m) {
  if (m < 0) throw std::invalid_argument("ff_monomial: power must be >= 0");
  std::vector<cplx> c(size_t(m) + 1, 0.0);
  c.back() = 1.0;
  FactorFunction f;
  f.fn = sf_poly(std::move(c));
  f.growth_order = 0;
  f.desc = "z^" + std::to_string(m);
  return f;
}

FactorFunction ff_poly(std::vector<cplx> coeffs) {
  FactorFunction f;
  f.fn = sf_poly(std::move(coeffs));
  f.growth_order = 0;
  f.desc = "poly";
  return f;
}

FactorFunction ff_inv_pole(const PlanarDomain& dom, cplx pole, int k) {
  if (k < 1) throw std::invalid_argument("ff_inv_pole: power must be >= 1");
  const double rp = dom.r(pole);
  if (rp < -1e-9) throw std::invalid_argument("ff_inv_pole: pole inside the factor domain");
  FactorFunction f;
  f.fn = sf_inv_pole(pole, k);
  const bool on_boundary = std::abs(rp) < 1e-9;
  f.growth_order = on_boundary ? k : 0;
  f.holo_margin = on_boundary ? 0.0 : dom.dist(pole);
  if (on_boundary) f.singular_points = {pole};
  std::ostringstream os;
  os << "1/(" << pole.real() << (pole.imag() >= 0 ? "+" : "-") << std::abs(pole.imag()) << "i - z)^"
     << k;
  f.desc = os.str();
  return f;
}

HoloFunction holo_const(const ProductDomain& dom, cplx c) {
  HoloFunction f;
  f.arity = dom.n();
  f.eval = [c](const cplx*) { return c; };
  f.growth_order = 0;
  f.factors.assign(static_cast<size_t>(dom.n()), ff_const(1.0));
  f.factors[0] = ff_const(c);
  f.singular_angles.assign(static_cast<size_t>(dom.n()), {});
  f.identically_zero = (c == 0.0);
  std::ostringstream os;
  os << "const(" << c.real() << ")";
  f.desc = os.str();
  return f;
}

HoloFunction tensor(const ProductDomain& dom, std::vector<FactorFunction> fs) {
  if (int(fs.size()) != dom.n())
    throw std::invalid_argument("tensor: one factor function per domain factor required");
  HoloFunction f;
  f.arity = dom.n();
  f.factors = fs;
  f.eval = [fs](const cplx* z) {
    cplx r = 1.0;
    for (size_t j = 0; j < fs.size(); ++j) r *= fs[j](z[j]);
    return r;
  };
  f.growth_order = 0;
  for (const auto& g : fs) f.growth_order += g.growth_order;
  f.singular_angles.assign(static_cast<size_t>(dom.n()), {});
  std::string d;
  for (int j = 0; j < dom.n(); ++j) {
    if (j) d += " (x) ";
    d += fs[size_t(j)].desc;
    for (cplx p : fs[size_t(j)].singular_points)
      f.singular_angles[size_t(j)].push_back(dom.factor(j).angle_of(p));
  }
  f.desc = d;
  return f;
}

HoloFunction inv_plane(const ProductDomain& dom, cplx c, int k) {
  if (k < 1) throw std::invalid_argument("inv_plane: power must be >= 1");
  const int n = dom.n();
  HoloFunction f;
  f.arity = n;
  f.eval = [c, k, n](const cplx* z) {
    cplx s = c;
    for (int j = 0; j < n; ++j) s -= z[j];
    cplx r = 1.0;
    for (int i = 0; i < k; ++i) r *= s;
    return 1.0 / r;
  };
  // |c - sum z_j| >= sum_j dist_j >= dist, so the sharp growth order is k.
  f.growth_order = k;
  f.singular_angles.assign(static_cast<size_t>(n), {});
  // hint: boundary points where the plane {sum z = c} touches the closure;
  // for factor discs/ellipses this is the boundary point nearest to the
  // per-factor share of c.
  for (int j = 0; j < n; ++j) {
    const PlanarDomain& d = dom.factor(j);
    // direction of c as seen from this factor (real-axis share for real c)
    cplx dir = c;
    double best = 1e300;
    double bt = 0.0;
    for (int i = 0; i < 1024; ++i) {
      const double t = 2.0 * M_PI * i / 1024;
      const double val = -std::real(d.boundary(t) * std::conj(dir));
      if (val < best) {
        best = val;
        bt = t;
      }
    }
    f.singular_angles[size_t(j)].push_back(bt);
  }
  std::ostringstream os;
  os << "1/(" << c.real() << " - sum z)^" << k;
  f.desc = os.str();
  return f;
}

HoloFunction translate(const HoloFunction& f, std::vector<cplx> v, double eps) {
  if (int(v.size()) != f.arity) throw std::invalid_argument("translate: arity mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("translate: eps must be positive");
  HoloFunction g = f;
  auto base = f.eval;
  const int n = f.arity;
  g.eval = [base, v, eps, n](const cplx* z) {
    cplx buf[8];
    if (n > 8) throw std::runtime_error("translate: arity cap exceeded");
    for (int j = 0; j < n; ++j) buf[j] = z[j] - eps * v[size_t(j)];
    return base(buf);
  };
  g.factors.clear();  // translated function loses tensor bookkeeping unless v is per-factor
  g.desc = f.desc + " translated";
  return g;
}

HoloFunction dilate_disc(const ProductDomain& dom, const HoloFunction& f, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("dilate_disc: rho in (0,1) required");
  for (const auto& d : dom.factors())
    if (!d.is_disc() || std::abs(d.center()) != 0.0)
      throw std::invalid_argument("dilate_disc: all factors must be origin-centered discs");
  HoloFunction g = f;
  auto base = f.eval;
  const int n = f.arity;
  g.eval = [base, rho, n](const cplx* z) {
    cplx buf[8];
    if (n > 8) throw std::runtime_error("dilate_disc: arity cap exceeded");
    for (int j = 0; j < n; ++j) buf[j] = rho * z[j];
    return base(buf);
  };
  g.factors.clear();
  g.desc = f.desc + " dilated";
  return g;
}

HoloFunction zbar_perturb(const HoloFunction& f, double delta) {
  HoloFunction g = f;
  auto base = f.eval;
  g.eval = [base, delta](const cplx* z) { return base(z) + delta * std::conj(z[0]); };
  g.factors.clear();
  g.holomorphic = false;
  std::ostringstream os;
  os << f.desc << " + " << delta << "*zbar";
  g.desc = os.str();
  return g;
}

double growth_order_estimate(const HoloFunction& f, const ProductDomain& dom,
                             const GrowthEstimateParams& prm) {
  const int n = dom.n();
  std::mt19937_64 rng(prm.seed);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);

  std::vector<double> logd, logsup;
  for (int s = 0; s < prm.shells; ++s) {
    const double d =
        prm.dist_hi * std::pow(prm.dist_lo / prm.dist_hi, double(s) / (prm.shells - 1));
    double sup = 0.0;
    std::vector<cplx> z(static_cast<size_t>(n));
    auto record = [&](const std::vector<double>& angles) {
      for (int j = 0; j < n; ++j) {
        const PlanarDomain& fac = dom.factor(j);
        const double t = angles[size_t(j)];
        const cplx g = fac.boundary(t);
        z[size_t(j)] = g - d * fac.outward_normal(t);
      }
      const cplx val = f.eval(z.data());
      if (std::isfinite(std::abs(val))) sup = std::max(sup, std::abs(val));
    };
    std::vector<double> angles(static_cast<size_t>(n));
    for (int i = 0; i < prm.samples_per_shell; ++i) {
      for (int j = 0; j < n; ++j) angles[size_t(j)] = uni(rng);
      record(angles);
    }
    // structured samples at declared singular angles (all combinations)
    if (!f.singular_angles.empty()) {
      std::vector<std::vector<double>> hints(static_cast<size_t>(n));
      bool any = false;
      for (int j = 0; j < n; ++j) {
        hints[size_t(j)] = f.singular_angles[size_t(j)];
        if (hints[size_t(j)].empty()) hints[size_t(j)] = {0.0};
        else any = true;
      }
      if (any) {
        std::vector<size_t> idx(static_cast<size_t>(n), 0);
        while (true) {
          for (int j = 0; j < n; ++j) angles[size_t(j)] = hints[size_t(j)][idx[size_t(j)]];
          record(angles);
          int j = 0;
          for (; j < n; ++j) {
            if (++idx[size_t(j)] < hints[size_t(j)].size()) break;
            idx[size_t(j)] = 0;
          }
          if (j == n) break;
        }
      }
    }
    if (sup <= 0.0) throw std::runtime_error("growth_order_estimate: shell evaluation failed");
    logd.push_back(-std::log(d));
    logsup.push_back(std::log(sup));
  }
  // least squares slope
  const size_t m = logd.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sx += logd[i];
    sy += logsup[i];
    sxx += logd[i] * logd[i];
    sxy += logd[i] * logsup[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return std::max(0.0, slope);
}

// --- registry -----------------------------------------------------------------

std::vector<BuiltinSpec> builtin_function_list() {
  return {
      {"const", "const value=<c>"},
      {"monomial", "monomial power=<m> [factor=<j>]"},
      {"inv_pole", "inv_pole pole=<re,im> power=<k> [factor=<j>]"},
      {"inv_plane", "inv_plane c=<re> power=<k>"},
      {"tensor_inv_pole", "tensor_inv_pole power=<k per factor>"},
      {"zbar_perturb", "zbar_perturb delta=<d> (non-holomorphic control)"},
  };
}

HoloFunction make_builtin_function(const ProductDomain& dom, const std::string& name,
                                   const std::vector<double>& params) {
  auto factor_fill = [&](int which, FactorFunction g) {
    std::vector<FactorFunction> fs(static_cast<size_t>(dom.n()), ff_const(1.0));
    fs[size_t(which)] = std::move(g);
    return tensor(dom, std::move(fs));
  };
  if (name == "const") {
    return holo_const(dom, params.empty() ? 1.0 : params[0]);
  }
  if (name == "monomial") {
    const int m = params.empty() ? 1 : int(params[0]);
    const int j = params.size() > 1 ? int(params[1]) : 0;
    return factor_fill(j, ff_monomial(m));
  }
  if (name == "inv_pole") {
    if (params.size() < 3) throw std::invalid_argument("inv_pole: need pole re,im and power");
    const int j = params.size() > 3 ? int(params[3]) : 0;
    return factor_fill(j, ff_inv_pole(dom.factor(j), cplx(params[0], params[1]), int(params[2])));
  }
  if (name == "inv_plane") {
    if (params.size() < 2) throw std::invalid_argument("inv_plane: need c and power");
    return inv_plane(dom, params[0], int(params[1]));
  }
  if (name == "tensor_inv_pole") {
    const int k = params.empty() ? 1 : int(params[0]);
    std::vector<FactorFunction> fs;
    for (int j = 0; j < dom.n(); ++j) {
      const PlanarDomain& d = dom.factor(j);
      fs.push_back(ff_inv_pole(d, d.boundary(0.0), k));
    }
    return tensor(dom, std::move(fs));
  }
  if (name == "zbar_perturb") {
    const double delta = params.empty() ? 1e-2 : params[0];
    return zbar_perturb(holo_const(dom, 1.0), delta);
  }
  throw std::invalid_argument("unknown function name: " + name);
}

}  // namespace bvc
