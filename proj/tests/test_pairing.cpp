#include <cmath>
#include <random>

#include "bvc/pairing.hpp"
#include "doctest.h"

using namespace bvc;

namespace {
ProductDomain disc() { return ProductDomain({PlanarDomain::unit_disc()}); }
ProductDomain bidisc() {
  return ProductDomain({PlanarDomain::unit_disc(), PlanarDomain::unit_disc()});
}

// independent oracle: plain Cartesian midpoint quadrature over a box; accurate
// to near machine precision for compactly supported smooth integrands
template <class F>
cplx box_integral(F&& f, double x0, double x1, double y0, double y1, int n = 600) {
  KahanSumC acc;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx z(x0 + (x1 - x0) * (i + 0.5) / n, y0 + (y1 - y0) * (j + 0.5) / n);
      acc.add(f(z) * ((x1 - x0) / n) * ((y1 - y0) / n));
    }
  return acc.get();
}

// b(z_1)...b(z_n) dV as a test form (dz/dzbar monomial with the weight chosen
// so that its Lebesgue volume coefficient is exactly the product of bumps)
TestForm bump_volume_form(int n, std::vector<cplx> centers, double r) {
  TestForm phi;
  phi.n = n;
  phi.p = n;
  phi.q = n;
  std::vector<int> idx;
  for (int j = 0; j < n; ++j) idx.push_back(j);
  std::vector<SmoothFn> coef;
  for (int j = 0; j < n; ++j) coef.push_back(sf_box_bump(centers[size_t(j)], r, r));
  cplx w = 1.0;
  for (int j = 0; j < n; ++j) w /= cplx(0.0, -2.0);
  std::vector<int> keys;
  for (int j = 0; j < n; ++j) keys.push_back(2 * j);
  for (int j = 0; j < n; ++j) keys.push_back(2 * j + 1);
  const int sgn = sort_parity(keys);
  phi.add_monomial(idx, idx, w * double(sgn), coef);
  return phi;
}
}  // namespace

TEST_CASE("richardson: exact on polynomial ladders, cosine ladder") {
  std::vector<LadderEntry> lin, quad, cosl;
  for (int j = 0; j < 6; ++j) {
    const double h = 0.1 * std::pow(0.5, j);
    lin.push_back({h, 3.0 + 2.0 * h});
    quad.push_back({h, 1.0 + h + h * h});
    cosl.push_back({h, std::cos(h)});
  }
  PairingResult a = richardson(lin, 1);
  CHECK(std::abs(a.value - 3.0) < 1e-14);
  CHECK(a.converged);
  PairingResult b = richardson(quad, 1);
  CHECK(std::abs(b.value - 1.0) < 1e-12);
  PairingResult c = richardson(cosl, 1);
  CHECK(std::abs(c.value - 1.0) < 1e-10);

  CHECK_THROWS(richardson({{0.1, 1.0}, {0.05, 1.0}}, 1));  // too short
  std::vector<LadderEntry> bad = {{0.1, 1.0}, {0.05, 1.0}, {0.03, 1.0}};
  CHECK_THROWS(richardson(bad, 1));  // not geometric
}

TEST_CASE("volume coefficient convention: <ce 1, b dV> = int b") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction one = holo_const(d, 1.0);
  TestForm phi = bump_volume_form(1, {cplx(0.0, 0.0)}, 0.5);
  const cplx expect = box_integral(
      [&](cplx z) { return sf_box_bump(cplx(0.0, 0.0), 0.5, 0.5)(z); }, -0.5, 0.5, -0.5, 0.5);

  PairingResult ibp = eng.ce_pair_ibp(one, phi);
  CHECK(std::abs(ibp.value - expect) < 1e-8);

  PairingResult lim = eng.ce_pair_limit(one, phi, CeMode::PatchwiseTranslate);
  CHECK(std::abs(lim.value - expect) < 1e-8);
  CHECK(lim.converged);

  PairingResult dil = eng.ce_pair_limit(one, phi, CeMode::DiscDilate);
  CHECK(std::abs(dil.value - expect) < 1e-8);
}

TEST_CASE("extension by zero: exterior-supported forms pair to exact zero") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction f = make_builtin_function(d, "inv_pole", {1.0, 0.0, 1});
  TestForm phi = bump_volume_form(1, {cplx(1.8, 0.0)}, 0.5);
  CHECK(std::abs(eng.ce_pair_ibp(f, phi).value) < 1e-10);
  CHECK(std::abs(eng.ce_pair_limit(f, phi, CeMode::PatchwiseTranslate).value) < 1e-10);
}

TEST_CASE("ce of a boundary-singular function against an interior bump") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction f = make_builtin_function(d, "inv_pole", {1.0, 0.0, 1});
  TestForm phi = bump_volume_form(1, {cplx(0.0, 0.0)}, 0.5);
  const cplx expect = box_integral(
      [&](cplx z) { return sf_box_bump(cplx(0.0, 0.0), 0.5, 0.5)(z) / (1.0 - z); }, -0.5, 0.5,
      -0.5, 0.5);
  CHECK(std::abs(eng.ce_pair_ibp(f, phi).value - expect) < 1e-8);
  CHECK(std::abs(eng.ce_pair_limit(f, phi, CeMode::PatchwiseTranslate).value - expect) < 5e-7);
}

TEST_CASE("boundary-crossing bump: routes and modes agree; s and v independence") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction f = make_builtin_function(d, "inv_pole", {1.0, 0.0, 2});
  TestForm phi = bump_volume_form(1, {cplx(0.0, 1.0)}, 0.55);

  PairingResult ibp3 = eng.ce_pair_ibp(f, phi, std::vector<int>{3});
  PairingResult ibp4 = eng.ce_pair_ibp(f, phi, std::vector<int>{4});
  CHECK(std::abs(ibp3.value - ibp4.value) <= 1e-6 * (1.0 + std::abs(ibp3.value)));

  PairingResult lim = eng.ce_pair_limit(f, phi, CeMode::PatchwiseTranslate);
  CHECK(std::abs(lim.value - ibp3.value) <= 1e-4 * (1.0 + std::abs(ibp3.value)));

  PairingResult dil = eng.ce_pair_limit(f, phi, CeMode::DiscDilate);
  CHECK(std::abs(dil.value - ibp3.value) <= 1e-4 * (1.0 + std::abs(ibp3.value)));

  PairingOptions o6 = eng.options();
  o6.patch_count = 6;
  PairingEngine eng6(d, o6);
  PairingResult lim6 = eng6.ce_pair_limit(f, phi, CeMode::PatchwiseTranslate);
  CHECK(std::abs(lim6.value - lim.value) <= 1e-4 * (1.0 + std::abs(lim.value)));
}

TEST_CASE("bc pairings on the disc: closed forms and the geometric-series oracle") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction one = holo_const(d, 1.0);
  HoloFunction f = make_builtin_function(d, "inv_pole", {1.0, 0.0, 1});

  TestForm psi0;
  psi0.n = 1;
  psi0.p = 1;
  psi0.q = 0;
  psi0.add_monomial({0}, {}, 1.0, {d.factor(0).closure_cutoff(0.1, 0.25)});
  CHECK(std::abs(eng.bc_pair(one, psi0, BcRoute::DbarOfCe).value) < 1e-9);
  CHECK(std::abs(eng.bc_pair(one, psi0, BcRoute::BoundaryLimit).value) < 1e-9);

  TestForm psi1;
  psi1.n = 1;
  psi1.p = 1;
  psi1.q = 0;
  psi1.add_monomial({0}, {}, 1.0,
                    {d.factor(0).closure_cutoff(0.1, 0.25) * sf_zbar()});
  const cplx two_pi_i(0.0, 2.0 * M_PI);
  PairingResult r1 = eng.bc_pair(one, psi1, BcRoute::DbarOfCe);
  PairingResult r2 = eng.bc_pair(one, psi1, BcRoute::BoundaryLimit);
  CHECK(std::abs(r1.value - two_pi_i) < 1e-8);
  CHECK(std::abs(r2.value - two_pi_i) < 1e-8);

  // truncated geometric series oracle: only the n = 0 mode survives
  PairingResult p1 = eng.bc_pair(f, psi1, BcRoute::DbarOfCe);
  PairingResult p2 = eng.bc_pair(f, psi1, BcRoute::BoundaryLimit);
  CHECK(std::abs(p1.value - two_pi_i) < 2e-6);
  CHECK(std::abs(p2.value - two_pi_i) < 1e-5);
  CHECK(std::abs(p1.value - p2.value) <= 1e-5 * (1.0 + std::abs(p1.value)));
}

TEST_CASE("pairings are linear in both arguments") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction f1 = make_builtin_function(d, "inv_pole", {1.0, 0.0, 1});
  HoloFunction f2 = make_builtin_function(d, "monomial", {2});
  TestForm phiA = bump_volume_form(1, {cplx(0.3, 0.2)}, 0.45);
  TestForm phiB = bump_volume_form(1, {cplx(-0.2, 0.6)}, 0.5);

  const cplx a(0.7, -0.4), b(-1.3, 0.25);
  HoloFunction combo;
  combo.arity = 1;
  auto e1 = f1.eval, e2 = f2.eval;
  combo.eval = [e1, e2, a, b](const cplx* z) { return a * e1(z) + b * e2(z); };
  combo.growth_order = 1;
  combo.singular_angles = f1.singular_angles;
  combo.desc = "combo";
  const cplx lhs = eng.ce_pair_ibp(combo, phiA, std::vector<int>{2}).value;
  const cplx rhs = a * eng.ce_pair_ibp(f1, phiA, std::vector<int>{2}).value +
                   b * eng.ce_pair_ibp(f2, phiA, std::vector<int>{2}).value;
  CHECK(std::abs(lhs - rhs) < 1e-9 * (1.0 + std::abs(lhs)));

  TestForm phiC = form_add(form_scale(a, phiA), form_scale(b, phiB));
  const cplx l2 = eng.ce_pair_ibp(f1, phiC).value;
  const cplx r2 = a * eng.ce_pair_ibp(f1, phiA).value + b * eng.ce_pair_ibp(f1, phiB).value;
  CHECK(std::abs(l2 - r2) < 1e-9 * (1.0 + std::abs(l2)));
}

TEST_CASE("tensor ce factorizes into per-factor pairings (bidisc)") {
  auto d2 = bidisc();
  PairingOptions opt;
  opt.level = 1;
  opt.ibp_levels = 2;
  PairingEngine eng(d2, opt);
  HoloFunction f = make_builtin_function(d2, "tensor_inv_pole", {1});
  TestForm phi = bump_volume_form(2, {cplx(0.1, 0.0), cplx(-0.1, 0.1)}, 0.5);

  PairingResult r = eng.ce_pair_ibp(f, phi);

  auto d1 = disc();
  PairingEngine e1(d1);
  HoloFunction g = make_builtin_function(d1, "inv_pole", {1.0, 0.0, 1});
  const cplx v1 = e1.ce_pair_ibp(g, bump_volume_form(1, {cplx(0.1, 0.0)}, 0.5)).value;
  const cplx v2 = e1.ce_pair_ibp(g, bump_volume_form(1, {cplx(-0.1, 0.1)}, 0.5)).value;
  CHECK(std::abs(r.value - v1 * v2) < 1e-5 * (1.0 + std::abs(v1 * v2)));
}

TEST_CASE("face pairing: support rule and the per-factor series oracle") {
  auto d2 = bidisc();
  PairingOptions opt;
  opt.level = 1;
  PairingEngine eng(d2, opt);
  HoloFunction f = make_builtin_function(d2, "tensor_inv_pole", {1});

  FaceTestData far;
  far.n = 2;
  far.face = 0;
  {
    FaceTestTerm t;
    t.weight = 1.0;
    t.ang = [](double) { return cplx(1.0); };
    t.wcoef.resize(2);
    t.wcoef[1] = sf_box_bump(cplx(2.5, 0.0), 0.4, 0.4);
    far.terms.push_back(t);
  }
  CHECK(std::abs(eng.face_pair(f, 0, far).value) < 1e-8);

  FaceTestData u0;
  u0.n = 2;
  u0.face = 0;
  {
    FaceTestTerm t;
    t.weight = 1.0;
    t.ang = [](double) { return cplx(1.0); };
    t.wcoef.resize(2);
    t.wcoef[1] = sf_box_bump(cplx(0.2, -0.1), 0.45, 0.45);
    u0.terms.push_back(t);
  }
  const cplx wint = box_integral(
      [&](cplx w) { return sf_box_bump(cplx(0.2, -0.1), 0.45, 0.45)(w) / (1.0 - w); }, -0.3, 0.7,
      -0.6, 0.4);
  const cplx expect = 2.0 * M_PI * wint;
  PairingResult p0 = eng.face_pair(f, 0, u0);
  CHECK(std::abs(p0.value - expect) < 1e-4 * (1.0 + std::abs(expect)));

  FaceTestData um = u0;
  um.terms[0].ang = [](double t) { return std::exp(cplx(0.0, -2.0 * t)); };
  PairingResult pm = eng.face_pair(f, 0, um);
  CHECK(std::abs(pm.value - expect) < 1e-4 * (1.0 + std::abs(expect)));
}

TEST_CASE("silov pairing: zero modes, the -4 pi^2 double residue, factor split") {
  auto d2 = bidisc();
  PairingOptions opt;
  opt.level = 1;
  PairingEngine eng(d2, opt);
  SmoothFn chi = d2.factor(0).closure_cutoff(0.1, 0.25);

  HoloFunction one2 = holo_const(d2, 1.0);
  TestForm psi;
  psi.n = 2;
  psi.p = 2;
  psi.q = 0;
  psi.add_monomial({0, 1}, {}, 1.0, {chi, chi});
  CHECK(std::abs(eng.silov_pair(one2, psi).value) < 1e-9);

  HoloFunction f = make_builtin_function(d2, "tensor_inv_pole", {1});
  TestForm psib;
  psib.n = 2;
  psib.p = 2;
  psib.q = 0;
  psib.add_monomial({0, 1}, {}, 1.0, {chi * sf_zbar(), chi * sf_zbar()});
  PairingResult r = eng.silov_pair(f, psib);
  CHECK(std::abs(r.value - cplx(-4.0 * M_PI * M_PI, 0.0)) < 1e-4);

  HoloFunction g = tensor(d2, {ff_inv_pole(d2.factor(0), 1.0, 1), ff_const(1.0)});
  TestForm psic;
  psic.n = 2;
  psic.p = 2;
  psic.q = 0;
  psic.add_monomial({0, 1}, {}, 1.0, {chi * sf_zbar(), chi});
  CHECK(std::abs(eng.silov_pair(g, psic).value) < 1e-6);
}

TEST_CASE("cauchy reconstruction on disc and bidisc") {
  auto d = disc();
  PairingEngine eng(d);
  HoloFunction f = make_builtin_function(d, "inv_pole", {1.0, 0.0, 1});
  FaceDistributionProxy proxy{0, f};
  CHECK(std::abs(eng.cauchy_reconstruct(proxy, cplx(0.0, 0.0), {cplx(0.0, 0.0)}) - 1.0) < 1e-6);

  HoloFunction c = holo_const(d, cplx(2.5, -1.0));
  FaceDistributionProxy pc{0, c};
  CHECK(std::abs(eng.cauchy_reconstruct(pc, cplx(0.3, -0.2), {cplx(0.0, 0.0)}) -
                 cplx(2.5, -1.0)) < 1e-8);

  CHECK_THROWS(eng.cauchy_reconstruct(proxy, cplx(0.95, 0.0), {cplx(0.0, 0.0)}));

  auto d2 = bidisc();
  PairingOptions opt;
  opt.level = 1;
  PairingEngine eng2(d2, opt);
  HoloFunction h = make_builtin_function(d2, "inv_plane", {2.0, 1});
  FaceDistributionProxy p1{0, h};
  FaceDistributionProxy p2{1, h};
  const cplx r1 = eng2.cauchy_reconstruct(p1, cplx(0.0, 0.0), {cplx(0.0, 0.0), cplx(0.0, 0.0)});
  const cplx r2 = eng2.cauchy_reconstruct(p2, cplx(0.0, 0.0), {cplx(0.0, 0.0), cplx(0.0, 0.0)});
  CHECK(std::abs(r1 - 0.5) < 1e-4);
  CHECK(std::abs(r2 - 0.5) < 1e-4);
}

TEST_CASE("facewise decomposition: bc boundary route equals the sum of face pairings") {
  auto d2 = bidisc();
  PairingOptions opt;
  opt.level = 1;
  PairingEngine eng(d2, opt);
  HoloFunction f = make_builtin_function(d2, "inv_plane", {2.0, 1});
  SmoothFn chi = d2.factor(0).closure_cutoff(0.1, 0.25);

  TestForm psi;
  psi.n = 2;
  psi.p = 2;
  psi.q = 1;
  psi.add_monomial({0, 1}, {1}, 1.0, {chi * sf_zbar(), chi * sf_zbar()});
  psi.add_monomial({0, 1}, {0}, cplx(0.4, 0.2), {chi * sf_zbar(), chi * sf_zbar()});

  PairingResult ref = eng.bc_pair(f, psi, BcRoute::DbarOfCe);
  PairingResult lim = eng.bc_pair(f, psi, BcRoute::BoundaryLimit);
  CHECK(std::abs(ref.value - lim.value) <= 2e-4 * (1.0 + std::abs(ref.value)));

  cplx face_sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    FaceForm ff = pullback_to_face(psi, d2, k);
    if (ff.zero()) continue;
    face_sum += eng.face_pair(f, k, face_form_to_test_data(ff)).value;
  }
  CHECK(std::abs(ref.value - face_sum) <= 2e-4 * (1.0 + std::abs(ref.value)));
}
