#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bvc/smoothfn.hpp"

namespace bvc {

struct Box {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
};

// A smoothly bounded planar domain given by a defining function r (negative
// inside, zero on the boundary, positive outside), its Wirtinger gradient,
// and a counterclockwise boundary parametrization on [0, 2pi).
class PlanarDomain {
 public:
  static PlanarDomain unit_disc();
  static PlanarDomain disc(double radius);
  static PlanarDomain ellipse(double a, double b);

  double r(cplx z) const { return r_val_(z); }
  cplx r_zbar(cplx z) const { return r_grad_(z); }
  Jet2 r_jet(cplx z, int order) const { return r_jet_(z, order); }

  cplx boundary(double t) const { return gamma_(t); }
  cplx boundary_deriv(double t) const { return dgamma_(t); }

  // angular chart: smooth near the boundary, matches the parametrization on it
  double angle_of(cplx z) const { return angle_(z); }

  // outward unit normal at a boundary point
  cplx outward_normal(double t) const;

  double dist(cplx z) const;  // Euclidean distance to the boundary curve
  bool contains(cplx z) const { return r(z) < 0.0; }

  cplx center() const { return center_; }
  double inradius() const { return inradius_; }
  Box bounding_box() const { return bbox_; }
  // width of the defining-function band used by cutoffs and the T field
  double band_width() const { return band_width_; }
  bool is_disc() const { return is_disc_; }
  double disc_radius() const { return disc_radius_; }
  const std::string& name() const { return name_; }

  // smooth function handles on this factor
  SmoothFn r_squared_fn() const;  // z -> r(z)^2 with jets
  SmoothFn band_cutoff() const;   // 1 on {|r| <= 0.4 bw}, 0 off {|r| >= 0.9 bw}
  // 1 on {r <= lo}, 0 on {r >= hi} (lo, hi in r-units, 0 < lo < hi):
  // a smooth cutoff identically 1 on a neighborhood of the closure
  SmoothFn closure_cutoff(double lo, double hi) const;
  // star-coordinate radius with r(center + rho (gamma(0) - center)) = r_target
  double rho_of_r(double r_target) const;

 private:
  PlanarDomain() = default;
  std::function<double(cplx)> r_val_;
  std::function<cplx(cplx)> r_grad_;
  std::function<Jet2(cplx, int)> r_jet_;
  std::function<cplx(double)> gamma_, dgamma_;
  std::function<double(cplx)> angle_;
  cplx center_;
  double inradius_ = 0.0;
  Box bbox_;
  double band_width_ = 0.0;
  bool is_disc_ = false;
  double disc_radius_ = 0.0;
  std::string name_;
};

class ProductDomain {
 public:
  explicit ProductDomain(std::vector<PlanarDomain> factors);
  int n() const { return int(factors_.size()); }
  const PlanarDomain& factor(int j) const { return factors_[size_t(j)]; }
  const std::vector<PlanarDomain>& factors() const { return factors_; }
  double dist(const std::vector<cplx>& z) const;
  bool contains(const std::vector<cplx>& z) const;
  double min_inradius() const;
  std::string name() const;

 private:
  std::vector<PlanarDomain> factors_;
};

// Quadrature ------------------------------------------------------------------

struct FactorNode {
  cplx z;
  double w;  // Lebesgue weight, positive
};
struct BoundaryNode {
  double t;
  cplx z;   // gamma(t)
  cplx dz;  // gamma'(t)
  double w;
};

struct QuadParams {
  int panel_order = 5;
  int uniform_angular_panels = 8;
  int graded_depth_angular = 8;
  int radial_base_panels = 2;
  int radial_band_panels = 6;   // uniform panels across the cutoff band
  int graded_depth_radial = 8;  // geometric tail toward the boundary
  static QuadParams at_level(int level);
};

// Interior rule in star coordinates z = c + rho (gamma(t) - c), geometrically
// graded toward the boundary and toward declared singular boundary angles.
// Nodes are strictly interior, weights positive.
std::vector<FactorNode> interior_quadrature(const PlanarDomain& dom, int level,
                                            const std::vector<double>& singular_angles = {});

std::vector<BoundaryNode> boundary_quadrature(const PlanarDomain& dom, int level,
                                              const std::vector<double>& singular_angles = {});

// 1-D Gauss-Legendre on [-1,1]
struct QNode1 {
  double x, w;
};
std::vector<QNode1> gauss_legendre(int n);
// composite rule on [a,b]: uniform panels plus geometric grading toward the
// given interior/endpoint targets
std::vector<QNode1> composite_rule(double a, double b, int uniform_panels, int order,
                                   const std::vector<double>& grade_targets, int grade_depth);

// Boundary patches ------------------------------------------------------------

struct BoundaryPatch {
  int factor_index = 0;
  double t_center = 0.0;
  double half_width = 0.0;  // interval is (t_center - hw, t_center + hw)
  cplx v;                   // constant outward transversal for the patch
  double margin = 0.0;      // min Re(v conj(n)) over the patch
  double eps_max = 0.0;     // largest verified inward step along -v
};

// Angular patch decomposition of one factor boundary: an exact partition of
// unity subordinate to overlapping arcs, each with an outward transversal.
struct PatchSet {
  std::vector<BoundaryPatch> patches;
  PeriodicPoU pou;
  double cutoff(int p, double t) const { return pou.weight(p, t); }
};

// Throws if some patch has no transversal with the required margin.
PatchSet boundary_patches(const PlanarDomain& dom, int factor_index, int count, double overlap,
                          double min_margin = 0.05);

}  // namespace bvc
