#include "bvc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bvc {

namespace {

Jet2 abs_jet(cplx z, int order) {
  // |z| = sqrt(z zbar); valid away from the origin
  Jet2 w = Jet2::variable(z, order);
  Jet2 wb = Jet2::variable_bar(z, order);
  return (w * wb).sqrt_jet();
}

double refine_boundary_dist(const PlanarDomain& dom, cplx z, double t0, double span) {
  // golden-section refinement of t -> |gamma(t) - z| around t0
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = t0 - span, b = t0 + span;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  auto f = [&](double t) { return std::abs(dom.boundary(t) - z); };
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

}  // namespace

PlanarDomain PlanarDomain::unit_disc() { return disc(1.0); }

PlanarDomain PlanarDomain::disc(double R) {
  if (!(R > 0.0)) throw std::invalid_argument("disc: radius must be positive");
  PlanarDomain d;
  d.r_val_ = [R](cplx z) { return std::abs(z) - R; };
  d.r_grad_ = [R](cplx z) {
    (void)R;
    const double a = std::abs(z);
    if (a == 0.0) return cplx(0.0);
    return z / (2.0 * a);
  };
  d.r_jet_ = [R](cplx z, int order) {
    return abs_jet(z, order) - Jet2::constant(R, order);
  };
  d.gamma_ = [R](double t) { return R * std::exp(cplx(0.0, t)); };
  d.dgamma_ = [R](double t) { return cplx(0.0, R) * std::exp(cplx(0.0, t)); };
  d.angle_ = [](cplx z) {
    double a = std::atan2(z.imag(), z.real());
    return a < 0 ? a + 2.0 * M_PI : a;
  };
  d.center_ = 0.0;
  d.inradius_ = R;
  d.bbox_ = {-R, R, -R, R};
  d.band_width_ = 0.3 * R;
  d.is_disc_ = true;
  d.disc_radius_ = R;
  std::ostringstream os;
  if (R == 1.0)
    os << "unit_disc";
  else
    os << "disc r=" << R;
  d.name_ = os.str();
  return d;
}

PlanarDomain PlanarDomain::ellipse(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("ellipse: semi-axes must be positive");
  PlanarDomain d;
  d.r_val_ = [a, b](cplx z) {
    const double x = z.real() / a, y = z.imag() / b;
    return x * x + y * y - 1.0;
  };
  d.r_grad_ = [a, b](cplx z) {
    // dr/dzbar = (r_x + i r_y)/2
    return cplx(z.real() / (a * a), z.imag() / (b * b));
  };
  d.r_jet_ = [a, b](cplx z, int order) {
    Jet2 w = Jet2::variable(z, order);
    Jet2 wb = Jet2::variable_bar(z, order);
    Jet2 x = (w + wb) * 0.5;
    Jet2 y = (w - wb) * cplx(0.0, -0.5);
    Jet2 xs = x * (1.0 / a), ys = y * (1.0 / b);
    return xs * xs + ys * ys - Jet2::constant(1.0, order);
  };
  d.gamma_ = [a, b](double t) { return cplx(a * std::cos(t), b * std::sin(t)); };
  d.dgamma_ = [a, b](double t) { return cplx(-a * std::sin(t), b * std::cos(t)); };
  d.angle_ = [a, b](cplx z) {
    double t = std::atan2(z.imag() / b, z.real() / a);
    return t < 0 ? t + 2.0 * M_PI : t;
  };
  d.center_ = 0.0;
  d.inradius_ = std::min(a, b);
  d.bbox_ = {-a, a, -b, b};
  d.band_width_ = 0.45 * std::min(a, b) / std::max(a, b);  // in r-units
  d.is_disc_ = false;
  std::ostringstream os;
  os << "ellipse " << a << "," << b;
  d.name_ = os.str();
  return d;
}

cplx PlanarDomain::outward_normal(double t) const {
  cplx g = r_zbar(boundary(t));
  const double m = std::abs(g);
  if (m == 0.0) throw std::runtime_error("degenerate boundary gradient");
  return g / m;
}

double PlanarDomain::dist(cplx z) const {
  if (is_disc_) return std::abs(std::abs(z - center_) - disc_radius_);
  const int n = 512;
  double best = 1e300;
  double bt = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    const double d = std::abs(boundary(t) - z);
    if (d < best) {
      best = d;
      bt = t;
    }
  }
  return refine_boundary_dist(*this, z, bt, 2.0 * M_PI / n);
}

SmoothFn PlanarDomain::r_squared_fn() const {
  auto jet = r_jet_;
  auto val = r_val_;
  return sf_from([val](cplx z) { return cplx(val(z) * val(z)); },
                 [jet](cplx z, int order) {
                   Jet2 r = jet(z, order);
                   return r * r;
                 });
}

SmoothFn PlanarDomain::band_cutoff() const {
  const double bw = band_width_;
  const double lo = 0.4 * bw, hi = 0.9 * bw;
  return sf_plateau_below(r_squared_fn(), lo * lo, hi * hi);
}

SmoothFn PlanarDomain::closure_cutoff(double lo, double hi) const {
  if (!(0.0 < lo && lo < hi)) throw std::invalid_argument("closure_cutoff: need 0 < lo < hi");
  if (is_disc_) {
    // plateau in |z|^2, smooth at the center where r itself is not
    const double rl = disc_radius_ + lo, rh = disc_radius_ + hi;
    const cplx c = center_;
    SmoothFn dist2 = sf_from(
        [c](cplx z) { return cplx(std::norm(z - c)); },
        [c](cplx z, int order) {
          Jet2 w = Jet2::variable(z, order) - Jet2::constant(c, order);
          Jet2 wb = Jet2::variable_bar(z, order) - Jet2::constant(std::conj(c), order);
          return w * wb;
        });
    return sf_plateau_below(dist2, rl * rl, rh * rh);
  }
  auto val = r_val_;
  auto jet = r_jet_;
  SmoothFn rfn = sf_from([val](cplx z) { return cplx(val(z)); },
                         [jet](cplx z, int order) { return jet(z, order); });
  return sf_plateau_below(rfn, lo, hi);
}

double PlanarDomain::rho_of_r(double r_target) const {
  const cplx u = gamma_(0.0) - center_;
  auto g = [&](double rho) { return r_val_(center_ + rho * u); };
  double a = 0.0, b = 1.5;
  if (g(a) >= r_target) return 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (g(m) < r_target)
      a = m;
    else
      b = m;
  }
  return 0.5 * (a + b);
}

ProductDomain::ProductDomain(std::vector<PlanarDomain> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("ProductDomain: need at least one factor");
}

double ProductDomain::dist(const std::vector<cplx>& z) const {
  if (int(z.size()) != n()) throw std::invalid_argument("ProductDomain::dist: arity mismatch");
  double m = 1e300;
  for (int j = 0; j < n(); ++j) m = std::min(m, factors_[size_t(j)].dist(z[size_t(j)]));
  return m;
}

bool ProductDomain::contains(const std::vector<cplx>& z) const {
  for (int j = 0; j < n(); ++j)
    if (!factors_[size_t(j)].contains(z[size_t(j)])) return false;
  return true;
}

double ProductDomain::min_inradius() const {
  double m = 1e300;
  for (const auto& f : factors_) m = std::min(m, f.inradius());
  return m;
}

std::string ProductDomain::name() const {
  std::string s;
  for (int j = 0; j < n(); ++j) {
    if (j) s += " x ";
    s += factors_[size_t(j)].name();
  }
  return s;
}

// --- quadrature ---------------------------------------------------------------

std::vector<QNode1> gauss_legendre(int n) {
  static std::map<int, std::vector<QNode1>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<QNode1> r(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0.0, p0 = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    p0 = 1.0;
    p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    r[size_t(i)] = {t, 2.0 / ((1.0 - t * t) * dp * dp)};
  }
  cache[n] = r;
  return r;
}

namespace {
void append_panel(std::vector<QNode1>& out, double lo, double hi, int order) {
  if (!(hi > lo)) return;
  auto gl = gauss_legendre(order);
  for (const auto& g : gl)
    out.push_back({0.5 * (lo + hi) + 0.5 * (hi - lo) * g.x, 0.5 * (hi - lo) * g.w});
}
}  // namespace

std::vector<QNode1> composite_rule(double a, double b, int uniform_panels, int order,
                                   const std::vector<double>& grade_targets, int grade_depth) {
  // collect breakpoints: uniform grid refined geometrically toward each target
  std::vector<double> brk = {a, b};
  for (int i = 1; i < uniform_panels; ++i) brk.push_back(a + (b - a) * i / uniform_panels);
  const double L = (b - a) / std::max(1, uniform_panels);
  for (double t : grade_targets) {
    if (t < a - 1e-12 || t > b + 1e-12) continue;
    for (int m = 1; m <= grade_depth; ++m) {
      const double h = L * std::pow(0.5, m);
      if (t - h > a) brk.push_back(t - h);
      if (t + h < b) brk.push_back(t + h);
    }
    brk.push_back(std::clamp(t, a, b));
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end(),
                        [&](double x, double y) { return std::abs(x - y) < 1e-15 * (b - a); }),
            brk.end());
  std::vector<QNode1> out;
  for (size_t i = 0; i + 1 < brk.size(); ++i) append_panel(out, brk[i], brk[i + 1], order);
  return out;
}

QuadParams QuadParams::at_level(int level) {
  QuadParams p;
  p.panel_order = 5;
  switch (level) {
    case 1: p.uniform_angular_panels = 6; break;
    case 2: p.uniform_angular_panels = 12; break;
    case 3: p.uniform_angular_panels = 28; break;
    case 4: p.uniform_angular_panels = 56; break;
    default: p.uniform_angular_panels = 56 + 40 * (level - 4); break;
  }
  p.graded_depth_angular = 6 + 2 * level;
  p.radial_base_panels = 1 + level;
  p.radial_band_panels = 2 + 3 * level;
  p.graded_depth_radial = 4 + 3 * level;
  return p;
}

namespace {
std::vector<double> wrap_targets(const std::vector<double>& singular_angles) {
  // represent each singular angle and its 2pi-shifts inside [0, 2pi]
  std::vector<double> t;
  for (double s : singular_angles) {
    double w = std::fmod(s, 2.0 * M_PI);
    if (w < 0) w += 2.0 * M_PI;
    t.push_back(w);
    t.push_back(w - 2.0 * M_PI);
    t.push_back(w + 2.0 * M_PI);
  }
  return t;
}
}  // namespace

std::vector<FactorNode> interior_quadrature(const PlanarDomain& dom, int level,
                                            const std::vector<double>& singular_angles) {
  if (level < 1) throw std::invalid_argument("interior_quadrature: level >= 1 required");
  const QuadParams p = QuadParams::at_level(level);

  // radial rule on [0,1]: uniform core, panels knot-aligned with the cutoff
  // band (transverse-operator powers amplify that layer, so it is integrated
  // with aligned high-order panels), geometric tail toward 1
  std::vector<QNode1> rho;
  {
    const double bw = dom.band_width();
    const double rho_b0 = dom.rho_of_r(-0.97 * bw);
    const double rho_lo = dom.rho_of_r(-0.9 * bw);   // cutoff support knot
    const double rho_hi = dom.rho_of_r(-0.4 * bw);   // cutoff plateau knot
    const double rho_tail = dom.rho_of_r(-0.03 * bw);
    rho = composite_rule(0.0, rho_b0, p.radial_base_panels, p.panel_order + 2, {}, 0);
    append_panel(rho, rho_b0, rho_lo, p.panel_order + 3);
    for (int m = 0; m < p.radial_band_panels; ++m) {
      const double a = rho_lo + (rho_hi - rho_lo) * m / p.radial_band_panels;
      const double b = rho_lo + (rho_hi - rho_lo) * (m + 1) / p.radial_band_panels;
      append_panel(rho, a, b, p.panel_order + 3);
    }
    append_panel(rho, rho_hi, 0.5 * (rho_hi + rho_tail), p.panel_order + 2);
    append_panel(rho, 0.5 * (rho_hi + rho_tail), rho_tail, p.panel_order + 2);
    double a = rho_tail;
    for (int m = 0; m < p.graded_depth_radial; ++m) {
      const double b = 1.0 - (1.0 - rho_tail) * std::pow(0.5, m + 1);
      append_panel(rho, a, b, p.panel_order);
      a = b;
    }
    append_panel(rho, a, 1.0, p.panel_order);
  }
  auto th =
      composite_rule(0.0, 2.0 * M_PI, p.uniform_angular_panels, p.panel_order,
                     wrap_targets(singular_angles), p.graded_depth_angular);

  std::vector<FactorNode> nodes;
  nodes.reserve(rho.size() * th.size());
  const cplx c = dom.center();
  for (const auto& a : th) {
    const cplx g = dom.boundary(a.x);
    const cplx dg = dom.boundary_deriv(a.x);
    const cplx u = g - c;
    const double jac_t = std::imag(std::conj(u) * dg);
    if (!(jac_t > 0.0))
      throw std::runtime_error("interior_quadrature: parametrization inconsistent (not star-shaped ccw)");
    for (const auto& rr : rho) {
      const cplx z = c + rr.x * u;
      const double w = rr.w * a.w * rr.x * jac_t;
      nodes.push_back({z, w});
    }
  }
  return nodes;
}

std::vector<BoundaryNode> boundary_quadrature(const PlanarDomain& dom, int level,
                                              const std::vector<double>& singular_angles) {
  if (level < 1) throw std::invalid_argument("boundary_quadrature: level >= 1 required");
  const QuadParams p = QuadParams::at_level(level);
  auto th = composite_rule(0.0, 2.0 * M_PI, 2 * p.uniform_angular_panels, p.panel_order,
                           wrap_targets(singular_angles), p.graded_depth_angular);
  std::vector<BoundaryNode> nodes;
  nodes.reserve(th.size());
  for (const auto& a : th)
    nodes.push_back({a.x, dom.boundary(a.x), dom.boundary_deriv(a.x), a.w});
  return nodes;
}

// --- patches ------------------------------------------------------------------

PatchSet boundary_patches(const PlanarDomain& dom, int factor_index, int count, double overlap,
                          double min_margin) {
  if (count < 1) throw std::invalid_argument("boundary_patches: count >= 1 required");
  const double arc = 2.0 * M_PI / count;
  if (!(overlap > 0.0) || !(overlap >= 0.0 && overlap < arc + 1e-12))
    throw std::invalid_argument("boundary_patches: overlap must lie in (0, interval length)");
  const double hw = 0.5 * (arc + overlap);

  PatchSet ps{{}, PeriodicPoU(count, count == 1 ? 1.5 * M_PI : hw)};
  for (int p = 0; p < count; ++p) {
    BoundaryPatch bp;
    bp.factor_index = factor_index;
    bp.t_center = ps.pou.center(p);
    bp.half_width = count == 1 ? M_PI : hw;
    bp.v = dom.outward_normal(bp.t_center);

    // transversality margin over the patch
    double margin = 1e300;
    const int samples = 64;
    for (int i = 0; i <= samples; ++i) {
      const double t = bp.t_center + bp.half_width * (2.0 * i / samples - 1.0);
      margin = std::min(margin, std::real(bp.v * std::conj(dom.outward_normal(t))));
    }
    bp.margin = margin;
    if (margin < min_margin) {
      std::ostringstream os;
      os << "boundary_patches: no transversal with margin " << min_margin << " for patch " << p
         << " (got " << margin << "); patch too wide";
      throw std::runtime_error(os.str());
    }

    // eps_max: largest step along -v staying inside, checked on a sample grid
    double eps_max = 0.45 * dom.inradius();
    for (int i = 0; i <= samples; ++i) {
      const double t = bp.t_center + bp.half_width * (2.0 * i / samples - 1.0);
      const cplx z = dom.boundary(t);
      double ok = 0.0;
      for (int m = 1; m <= 48; ++m) {
        const double e = 0.45 * dom.inradius() * m / 48.0;
        if (dom.r(z - e * bp.v) < 0.0 && dom.r(z + e * bp.v) > 0.0)
          ok = e;
        else
          break;
      }
      eps_max = std::min(eps_max, ok);
    }
    if (!(eps_max > 0.0))
      throw std::runtime_error("boundary_patches: transversal does not enter the domain");
    bp.eps_max = eps_max;
    ps.patches.push_back(bp);
  }
  return ps;
}

}  // namespace bvc
