#include <cmath>
#include <random>

#include "bvc/smoothfn.hpp"
#include "doctest.h"

using namespace bvc;

namespace {
// central finite difference of a SmoothFn in the Wirtinger sense
cplx fd_wirtinger(const SmoothFn& f, cplx z, int p, int q, double h = 1e-4) {
  auto dx = [&](auto&& g, cplx w) { return (g(w + h) - g(w - h)) / (2 * h); };
  auto dy = [&](auto&& g, cplx w) { return (g(w + cplx(0, h)) - g(w - cplx(0, h))) / (2 * h); };
  auto dzb = [&](cplx w) { return 0.5 * (dx(f, w) + cplx(0, 1) * dy(f, w)); };
  auto dzf = [&](cplx w) { return 0.5 * (dx(f, w) - cplx(0, 1) * dy(f, w)); };
  if (p == 1 && q == 0) return dzf(z);
  if (p == 0 && q == 1) return dzb(z);
  if (p == 1 && q == 1)
    return 0.5 * ((dzb(z + h) - dzb(z - h)) / (2 * h) -
                  cplx(0, 1) * (dzb(z + cplx(0, h)) - dzb(z - cplx(0, h))) / (2 * h));
  if (p == 2 && q == 0)
    return 0.5 * ((dzf(z + h) - dzf(z - h)) / (2 * h) -
                  cplx(0, 1) * (dzf(z + cplx(0, h)) - dzf(z - cplx(0, h))) / (2 * h));
  if (p == 0 && q == 2)
    return 0.5 * ((dzb(z + h) - dzb(z - h)) / (2 * h) +
                  cplx(0, 1) * (dzb(z + cplx(0, h)) - dzb(z - cplx(0, h))) / (2 * h));
  return 0.0;
}
}  // namespace

TEST_CASE("jet arithmetic reproduces polynomial identities") {
  const cplx z0(0.37, -0.21);
  Jet2 z = Jet2::variable(z0, 6);
  Jet2 zb = Jet2::variable_bar(z0, 6);
  Jet2 f = z * z * zb + z * 3.0 - zb * cplx(0.0, 2.0);
  CHECK(std::abs(f.wirtinger(1, 0) - (2.0 * z0 * std::conj(z0) + 3.0)) < 1e-14);
  CHECK(std::abs(f.wirtinger(0, 1) - (z0 * z0 - cplx(0.0, 2.0))) < 1e-14);
  CHECK(std::abs(f.wirtinger(1, 1) - 2.0 * z0) < 1e-14);
  CHECK(std::abs(f.wirtinger(2, 1) - 2.0) < 1e-14);
}

TEST_CASE("reciprocal and sqrt jets") {
  const cplx z0(1.2, 0.4);
  Jet2 z = Jet2::variable(z0, 5);
  Jet2 r = z.reciprocal();
  CHECK(std::abs(r.value() - 1.0 / z0) < 1e-14);
  CHECK(std::abs(r.wirtinger(1, 0) - (-1.0 / (z0 * z0))) < 1e-13);
  CHECK(std::abs(r.wirtinger(0, 1)) < 1e-14);

  Jet2 zb = Jet2::variable_bar(z0, 5);
  Jet2 mod = (z * zb).sqrt_jet();  // |z|
  CHECK(std::abs(mod.value() - std::abs(z0)) < 1e-14);
  CHECK(std::abs(mod.wirtinger(0, 1) - z0 / (2.0 * std::abs(z0))) < 1e-13);
}

TEST_CASE("mollifier profile jets match finite differences") {
  Jet1 j = mollifier_jet(0.3, 4);
  auto d = j.derivatives();
  CHECK(d[0] == doctest::Approx(mollifier(0.3)).epsilon(1e-14));
  const double h = 1e-5;
  const double fd1 = (mollifier(0.3 + h) - mollifier(0.3 - h)) / (2 * h);
  const double fd2 = (mollifier(0.3 + h) - 2 * mollifier(0.3) + mollifier(0.3 - h)) / (h * h);
  CHECK(d[1] == doctest::Approx(fd1).epsilon(1e-8));
  CHECK(d[2] == doctest::Approx(fd2).epsilon(1e-5));
}

TEST_CASE("smoothstep plateaus and derivatives") {
  CHECK(smoothstep(-0.2) == 0.0);
  CHECK(smoothstep(1.3) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  Jet1 j = smoothstep_jet(0.37, 3);
  auto d = j.derivatives();
  const double h = 1e-6;
  CHECK(d[1] ==
        doctest::Approx((smoothstep(0.37 + h) - smoothstep(0.37 - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("bump derivative oracles match central differences to 1e-6 relative") {
  SmoothFn b = sf_box_bump(cplx(0.1, -0.2), 0.6, 0.8);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int i = 0; i < 20; ++i) {
    const cplx z(0.1 + u(rng), -0.2 + u(rng));
    for (auto [p, q] :
         {std::pair<int, int>{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}}) {
      const cplx ex = b.deriv(z, p, q);
      const cplx fd = fd_wirtinger(b, z, p, q);
      const double scale = std::max(1e-3, std::abs(ex));
      CHECK(std::abs(ex - fd) / scale < 1e-5);
    }
  }
}

TEST_CASE("bump vanishes with all derivatives outside its box") {
  SmoothFn b = sf_box_bump(cplx(0.0, 0.0), 0.5, 0.5);
  for (cplx z : {cplx(0.5, 0.0), cplx(0.61, 0.1), cplx(-0.2, -0.55), cplx(2.0, 2.0)}) {
    CHECK(std::abs(b(z)) < 1e-14);
    Jet2 j = b.jet(z, 4);
    for (int p = 0; p <= 4; ++p)
      for (int q = 0; p + q <= 4; ++q) CHECK(std::abs(j.wirtinger(p, q)) < 1e-12);
  }
}

TEST_CASE("normalized radial bump integrates to one") {
  SmoothFn q = sf_radial_bump_normalized(cplx(0.2, 0.1), 0.3);
  const int n = 400;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx z(0.2 - 0.3 + 0.6 * (i + 0.5) / n, 0.1 - 0.3 + 0.6 * (j + 0.5) / n);
      sum += q(z).real() * (0.6 / n) * (0.6 / n);
    }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("periodic partition of unity sums to one exactly") {
  PeriodicPoU pou(5, 1.3 * M_PI / 5);
  for (int i = 0; i < 200; ++i) {
    const double t = 2.0 * M_PI * i / 200;
    double s = 0.0;
    for (int p = 0; p < 5; ++p) s += pou.weight(p, t);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  const double t0 = 0.9, h = 1e-6;
  auto d = pou.derivs(2, t0, 2);
  CHECK(d[1] ==
        doctest::Approx((pou.weight(2, t0 + h) - pou.weight(2, t0 - h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("compensated accumulation survives adversarial sums") {
  KahanSum k;
  k.add(1e16);
  for (int i = 0; i < 10000; ++i) k.add(1.0);
  k.add(-1e16);
  CHECK(k.get() == doctest::Approx(10000.0).epsilon(1e-12));
}
