#include <cmath>
#include <random>

#include "bvc/geometry.hpp"
#include "doctest.h"

using namespace bvc;

TEST_CASE("planar domain invariants: sign of r, boundary trace, winding") {
  for (const PlanarDomain& d :
       {PlanarDomain::unit_disc(), PlanarDomain::disc(1.7), PlanarDomain::ellipse(1.2, 0.8)}) {
    // r < 0 on interior points reachable from the centroid
    for (double s : {0.1, 0.4, 0.8})
      for (int i = 0; i < 16; ++i) {
        const double t = 2.0 * M_PI * i / 16;
        const cplx z = d.center() + s * (d.boundary(t) - d.center());
        CHECK(d.r(z) < 0.0);
      }
    // r > 0 outside the bounding box edge
    Box b = d.bounding_box();
    CHECK(d.r(cplx(b.x1 * 1.5 + 0.5, 0.0)) > 0.0);
    CHECK(d.r(cplx(0.0, b.y1 * 1.5 + 0.5)) > 0.0);

    // boundary_param traces {r = 0}
    for (int i = 0; i < 64; ++i) {
      const double t = 2.0 * M_PI * i / 64;
      CHECK(std::abs(d.r(d.boundary(t))) < 1e-10);
    }

    // counterclockwise: winding of the parametrization about the centroid
    double wind = 0.0;
    const int n = 2048;
    for (int i = 0; i < n; ++i) {
      const double t0 = 2.0 * M_PI * i / n, t1 = 2.0 * M_PI * (i + 1) / n;
      wind += std::arg((d.boundary(t1) - d.center()) / (d.boundary(t0) - d.center()));
    }
    CHECK(wind / (2.0 * M_PI) == doctest::Approx(1.0).epsilon(1e-9));

    // gradient margin on the band
    for (int i = 0; i < 64; ++i) {
      const double t = 2.0 * M_PI * i / 64;
      for (double off : {-0.2, 0.0, 0.2}) {
        const cplx z = d.boundary(t) + off * d.band_width() * d.outward_normal(t);
        if (std::abs(d.r(z)) < d.band_width()) CHECK(std::abs(d.r_zbar(z)) > 0.05);
      }
    }
  }
}

TEST_CASE("dist_to_boundary examples") {
  ProductDomain disc({PlanarDomain::unit_disc()});
  CHECK(disc.dist({cplx(0.0, 0.0)}) == doctest::Approx(1.0));

  ProductDomain bidisc({PlanarDomain::unit_disc(), PlanarDomain::unit_disc()});
  CHECK(bidisc.dist({cplx(0.5, 0.0), cplx(0.0, 0.0)}) == doctest::Approx(0.5));

  // brute-force oracle: minimum over dense boundary samples
  const cplx z(0.9, 0.0);
  double brute = 1e300;
  PlanarDomain d = PlanarDomain::unit_disc();
  for (int i = 0; i < 1000000; ++i)
    brute = std::min(brute, std::abs(d.boundary(2.0 * M_PI * i / 1000000) - z));
  CHECK(std::abs(disc.dist({z}) - brute) < 1e-9);
  CHECK(std::abs(disc.dist({z}) - 0.1) < 1e-10);

  // product dist equals the min of per-factor distances (random points)
  ProductDomain de({PlanarDomain::unit_disc(), PlanarDomain::ellipse(1.2, 0.8)});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int i = 0; i < 25; ++i) {
    std::vector<cplx> z2 = {cplx(u(rng), u(rng)), 0.6 * cplx(u(rng), u(rng))};
    const double lhs = de.dist(z2);
    const double rhs = std::min(de.factor(0).dist(z2[0]), de.factor(1).dist(z2[1]));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("ellipse distance against a dense oracle") {
  PlanarDomain e = PlanarDomain::ellipse(1.3, 0.7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const cplx z(1.3 * 0.7 * u(rng), 0.7 * 0.7 * u(rng));
    double brute = 1e300;
    for (int j = 0; j < 200000; ++j)
      brute = std::min(brute, std::abs(e.boundary(2.0 * M_PI * j / 200000) - z));
    CHECK(e.dist(z) == doctest::Approx(brute).epsilon(1e-6));
  }
}

TEST_CASE("interior quadrature: disc area and moments") {
  PlanarDomain d = PlanarDomain::unit_disc();
  // constant -> pi
  auto nodes = interior_quadrature(d, 4);
  double area = 0.0;
  for (const auto& nd : nodes) {
    CHECK(nd.w > 0.0);
    CHECK(d.r(nd.z) < 0.0);
    area += nd.w;
  }
  CHECK(area == doctest::Approx(M_PI).epsilon(1e-10));

  // Re(z)^2 -> pi/4 (closed-form polar integral)
  double m2 = 0.0;
  for (const auto& nd : nodes) m2 += nd.z.real() * nd.z.real() * nd.w;
  CHECK(m2 == doctest::Approx(M_PI / 4).epsilon(1e-8));

  // integrand supported outside the disc -> 0
  double out = 0.0;
  for (const auto& nd : nodes)
    if (std::abs(nd.z - cplx(2.0, 0.0)) < 0.5) out += nd.w;
  CHECK(out == 0.0);
}

TEST_CASE("interior quadrature error decreases along the level ladder") {
  PlanarDomain d = PlanarDomain::ellipse(1.1, 0.9);
  // smooth test integrand with known reference from the top level
  auto integrate = [&](int level) {
    double s = 0.0;
    for (const auto& nd : interior_quadrature(d, level))
      s += std::exp(-std::norm(nd.z - cplx(0.3, 0.1))) * nd.w;
    return s;
  };
  const double ref = integrate(5);
  double prev = 1e300;
  for (int level = 1; level <= 3; ++level) {
    const double err = std::abs(integrate(level) - ref);
    CHECK(err < prev * 1.5 + 1e-15);
    prev = err;
  }
  CHECK(std::abs(integrate(3) - ref) < 1e-9);
}

TEST_CASE("boundary patches: margins, partition of unity, ray exit") {
  PlanarDomain d = PlanarDomain::unit_disc();
  PatchSet ps = boundary_patches(d, 0, 4, 0.35 * M_PI / 2);

  // margin >= cos(pi/4 + overlap/2) for radial transversals on arcs
  const double overlap = 0.35 * M_PI / 2;
  const double expect = std::cos(M_PI / 4 + overlap / 2);
  for (const auto& p : ps.patches) CHECK(p.margin >= expect - 1e-9);

  // partition of unity sums to 1 at boundary nodes
  for (int i = 0; i < 257; ++i) {
    const double t = 2.0 * M_PI * i / 257;
    double s = 0.0;
    for (int p = 0; p < 4; ++p) s += ps.cutoff(p, t);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }

  // the ray z + eps v exits; z - eps v enters, for eps in (0, eps_max]
  for (const auto& p : ps.patches) {
    CHECK(p.eps_max > 0.0);
    for (int i = 0; i <= 8; ++i) {
      const double t = p.t_center + p.half_width * (2.0 * i / 8.0 - 1.0);
      const cplx z = d.boundary(t);
      for (double e : {0.25 * p.eps_max, 0.5 * p.eps_max, p.eps_max}) {
        CHECK(d.r(z + e * p.v) > 0.0);
        CHECK(d.r(z - e * p.v) < 0.0);
      }
    }
  }

  // a single global patch admits no constant outward transversal
  CHECK_THROWS(boundary_patches(d, 0, 1, 0.5));

  // ellipse factor, count = 8 -> all patches valid
  PatchSet pe = boundary_patches(PlanarDomain::ellipse(1.2, 0.8), 0, 8, 0.35 * 2 * M_PI / 8);
  CHECK(pe.patches.size() == 8);
  for (const auto& p : pe.patches) CHECK(p.margin > 0.05);
}

TEST_CASE("gauss-legendre sanity") {
  auto gl = gauss_legendre(12);
  double s0 = 0.0, s2 = 0.0;
  for (auto& g : gl) {
    s0 += g.w;
    s2 += g.w * g.x * g.x;
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}
