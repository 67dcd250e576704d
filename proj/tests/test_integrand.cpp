#include <doctest.h>

#include <random>

#include "anisolab/integrand.hpp"
#include "oracles.hpp"

using namespace anisolab;

namespace {

Integrand square_crystal(double eps) {
  std::vector<Vec> normals = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<double> weights = {1, 1, 1, 1};
  return Integrand::smoothed_crystal(normals, weights, eps, 2);
}

std::vector<Vec> random_directions(int dim, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0, 1);
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < count) {
    Vec v{N(rng), N(rng), dim == 3 ? N(rng) : 0.0};
    if (norm(v) > 1e-3) out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("evaluate: closed-form values and gradients") {
  Integrand iso = Integrand::isotropic(2);
  auto [v, g, h] = iso.evaluate(Vec{3, 4});
  CHECK(v == doctest::Approx(5.0));
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));

  // ellipse a=2,b=1: F(nu) = sqrt(4 nu1^2 + nu2^2), hand-differentiated
  Integrand ell = Integrand::ellipse({2, 1});
  auto r = ell.evaluate(Vec{1, 0});
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(r.gradient[0] == doctest::Approx(2.0));
  CHECK(r.gradient[1] == doctest::Approx(0.0));

  // p-norm gradient against finite differences
  Integrand p4 = Integrand::pnorm(4.0, 3);
  for (const Vec& x : random_directions(3, 10, 42)) {
    Vec fd = oracle::fd_gradient([&](const Vec& y) { return p4.value(y); }, x, 3, 1e-6 * norm(x));
    Vec an = p4.gradient(x);
    CHECK(norm(fd - an) < 1e-6 * (1 + norm(an)));
  }
}

TEST_CASE("evaluate: homogeneity F(tv) = t F(v), gradient 0-homogeneous") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> T(0.1, 10.0);
  std::vector<Integrand> kinds = {Integrand::isotropic(2), Integrand::ellipse({2, 1}),
                                  Integrand::pnorm(3.0, 2), square_crystal(0.2)};
  for (const Integrand& F : kinds) {
    auto dirs = random_directions(2, 50, 99);
    for (const Vec& v : dirs) {
      double t = T(rng);
      CHECK(std::abs(F.value(v * t) - t * F.value(v)) <= 1e-12 * t * F.value(v));
      CHECK(norm(F.gradient(v * t) - F.gradient(v)) < 1e-9);
    }
  }
}

TEST_CASE("evaluate: errors on zero vector and crystalline limit") {
  Integrand iso = Integrand::isotropic(2);
  CHECK_THROWS_AS(iso.gradient(Vec{0, 0}), std::domain_error);
  Integrand cryst = square_crystal(0.0);
  CHECK(cryst.value(Vec{1, 0}) == doctest::Approx(1.0));
  CHECK(cryst.value(Vec{1, 1}) == doctest::Approx(2.0));  // sum of facet contributions
  CHECK_THROWS_AS(cryst.gradient(Vec{1, 0}), std::domain_error);
  CHECK_THROWS_AS(cryst.gauge_gradient(Vec{1, 0}), std::domain_error);
}

TEST_CASE("gauge: closed forms and the dense-sample sup oracle") {
  Integrand iso = Integrand::isotropic(2);
  CHECK(iso.gauge(Vec{3, 4}) == doctest::Approx(5.0));
  CHECK(iso.gauge(Vec{0, 0}) == 0.0);

  Integrand ell = Integrand::ellipse({2, 1});
  CHECK(ell.gauge(Vec{2, 0}) == doctest::Approx(1.0));  // F_* = sqrt(x1^2/4 + x2^2)
  for (const Vec& x : random_directions(2, 15, 3)) {
    double oracleVal =
        oracle::dense_gauge([&](const Vec& nu) { return ell.value(nu); }, x, 2);
    CHECK(ell.gauge(x) == doctest::Approx(oracleVal).epsilon(1e-8));
  }

  // numeric path (smoothed crystal) against the oracle
  Integrand sc = square_crystal(0.2);
  for (const Vec& x : random_directions(2, 10, 5)) {
    double oracleVal = oracle::dense_gauge([&](const Vec& nu) { return sc.value(nu); }, x, 2);
    CHECK(sc.gauge(x) == doctest::Approx(oracleVal).epsilon(1e-9));
  }
}

TEST_CASE("gauge_gradient: duality identities") {
  Integrand iso = Integrand::isotropic(2);
  Vec g = iso.gauge_gradient(Vec{0, 2});
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(1.0));

  Integrand ell = Integrand::ellipse({2, 1});
  Vec ge = ell.gauge_gradient(Vec{2, 0});
  CHECK(ge[0] == doctest::Approx(0.5));
  CHECK(ge[1] == doctest::Approx(0.0));
  CHECK(ell.value(ge) == doctest::Approx(1.0));  // F(grad F_*) = 1

  // smoothed crystal: numeric gradient matches finite differences of gauge()
  Integrand sc = square_crystal(0.1);
  for (const Vec& x : {Vec{1, 0.03}, Vec{0.6, 0.6}, Vec{-0.2, 1.1}}) {
    Vec fd = oracle::fd_gradient([&](const Vec& y) { return sc.gauge(y); }, x, 2, 1e-6);
    Vec an = sc.gauge_gradient(x);
    CHECK(norm(fd - an) < 1e-6);
    CHECK(sc.value(an) == doctest::Approx(1.0).epsilon(1e-10));
    // F_*(x) grad F(grad F_*(x)) = x
    Vec back = sc.gradient(an) * sc.gauge(x);
    CHECK(norm(back - x) < 1e-8 * (1 + norm(x)));
  }
}

TEST_CASE("duality roundtrip: hand-computed quadratic forms") {
  Integrand iso = Integrand::isotropic(2);
  CHECK(iso.duality_roundtrip_residual(Vec{1, 0}).vector_residual < 1e-13);

  Integrand ell = Integrand::ellipse({2, 1});
  Vec ch = ell.cahn_hoffman(Vec{1, 1});
  CHECK(ch[0] == doctest::Approx(4.0));
  CHECK(ch[1] == doctest::Approx(1.0));
  Vec back = ell.dual_cahn_hoffman(ch);
  CHECK(back[0] == doctest::Approx(1.0));
  CHECK(back[1] == doctest::Approx(1.0));
  CHECK(ell.duality_roundtrip_residual(Vec{1, 1}).vector_residual < 1e-12);
}

TEST_CASE("duality roundtrip: random property over smooth kinds") {
  std::vector<Integrand> kinds = {Integrand::isotropic(2), Integrand::ellipse({2, 1}),
                                  Integrand::pnorm(4.0, 2), square_crystal(0.2),
                                  Integrand::ellipse({1.5, 1, 0.8})};
  for (const Integrand& F : kinds) {
    double worstVec = 0, worstHess = 0;
    int count = F.kind() == IntegrandKind::SmoothedCrystalline ? 100 : 300;
    for (const Vec& z : random_directions(F.dim(), count, 17)) {
      auto r = F.duality_roundtrip_residual(z);
      worstVec = std::max(worstVec, r.vector_residual / norm(z));
      worstHess = std::max(worstHess, r.hessian_residual);
    }
    CAPTURE(kind_name(F.kind()));
    CHECK(worstVec <= 1e-6);
    CHECK(worstHess <= 1e-5);
  }
}

TEST_CASE("ellipticity estimates") {
  Integrand iso = Integrand::isotropic(2);
  auto b = iso.ellipticity_estimate(128);
  CHECK(b.mF == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.MF == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.lambda == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(b.Lambda == doctest::Approx(1.0).epsilon(1e-6));

  Integrand ell = Integrand::ellipse({2, 1});
  auto be = ell.ellipticity_estimate(2048);
  CHECK(be.mF == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(be.MF == doctest::Approx(2.0).epsilon(1e-5));

  CHECK_THROWS_AS(iso.ellipticity_estimate(16), std::invalid_argument);

  // estimates only tighten with more samples
  auto b1 = ell.ellipticity_estimate(256);
  auto b2 = ell.ellipticity_estimate(1024);
  CHECK(b2.mF <= b1.mF + 1e-15);
  CHECK(b2.MF >= b1.MF - 1e-15);
  CHECK(b2.lambda <= b1.lambda + 1e-15);
  CHECK(b2.Lambda >= b1.Lambda - 1e-15);
}

TEST_CASE("ellipticity degeneration of the smoothed square") {
  // lambda -> 0 while Lambda grows like 1/eps on the facets
  auto b4 = square_crystal(0.4).bounds();
  auto b2 = square_crystal(0.2).bounds();
  auto b1 = square_crystal(0.1).bounds();
  CHECK(b2.lambda < b4.lambda);
  CHECK(b1.lambda < b2.lambda);
  CHECK(b1.lambda > 0);
  CHECK(b2.Lambda > 1.5 * b4.Lambda);
  CHECK(b1.Lambda > 1.5 * b2.Lambda);
  CHECK(b1.Lambda == doctest::Approx(6.0 / 0.1).epsilon(0.2));
}

TEST_CASE("cahn_hoffman: values and the exact zero at the origin") {
  Integrand iso = Integrand::isotropic(2);
  Vec v = iso.cahn_hoffman(Vec{3, 4});
  CHECK(v[0] == doctest::Approx(3.0));
  CHECK(v[1] == doctest::Approx(4.0));
  Integrand ell = Integrand::ellipse({2, 1});
  Vec w = ell.cahn_hoffman(Vec{1, 1});
  CHECK(w[0] == doctest::Approx(4.0));
  CHECK(w[1] == doctest::Approx(1.0));
  for (const Integrand& F : {iso, ell, square_crystal(0.2)}) {
    Vec z = F.cahn_hoffman(Vec{0, 0});
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
  }
}

TEST_CASE("Fenchel inequality over random pairs") {
  std::vector<Integrand> kinds = {Integrand::isotropic(2), Integrand::ellipse({2, 1}),
                                  Integrand::pnorm(3.0, 2), square_crystal(0.2)};
  auto xs = random_directions(2, 100, 31);
  auto nus = random_directions(2, 100, 32);
  for (const Integrand& F : kinds) {
    for (const Vec& x : xs)
      for (const Vec& nu : nus) {
        double lhs = dot(x, nu);
        double rhs = F.gauge(x) * F.value(nu);
        CHECK(lhs <= rhs * (1 + 1e-10) + 1e-12);
      }
  }
}

TEST_CASE("biduality: numeric gauge of the gauge returns F") {
  Integrand sc = square_crystal(0.25);
  for (const Vec& nu : sphere_sample(2, 32)) {
    double bidual =
        oracle::dense_gauge([&](const Vec& x) { return sc.gauge(x); }, nu, 2, 4096);
    CHECK(std::abs(bidual - sc.value(nu)) <= 1e-4);
  }
  Integrand ell = Integrand::ellipse({2, 1});
  for (const Vec& nu : sphere_sample(2, 16)) {
    double bidual =
        oracle::dense_gauge([&](const Vec& x) { return ell.gauge(x); }, nu, 2, 4096);
    CHECK(std::abs(bidual - ell.value(nu)) <= 1e-4);
  }
}

TEST_CASE("extremal duality m_{F_*} = 1/M_F, M_{F_*} = 1/m_F") {
  for (const Integrand& F : {Integrand::ellipse({2, 1}), square_crystal(0.2)}) {
    double mstar = 1e300, Mstar = 0;
    for (const Vec& nu : sphere_sample(2, 4096)) {
      double g = F.gauge(nu);
      mstar = std::min(mstar, g);
      Mstar = std::max(Mstar, g);
    }
    CHECK(mstar == doctest::Approx(1.0 / F.bounds().MF).epsilon(1e-3));
    CHECK(Mstar == doctest::Approx(1.0 / F.bounds().mF).epsilon(1e-3));
  }
}

TEST_CASE("gradient is 0-homogeneous: hessian annihilates the base point") {
  for (const Integrand& F : {Integrand::ellipse({2, 1}), Integrand::pnorm(4.0, 2),
                             square_crystal(0.2)}) {
    for (const Vec& nu : random_directions(2, 100, 53)) {
      Vec g1 = F.gradient(nu);
      Vec g2 = F.gradient(nu * 1.0001);  // radial finite difference
      CHECK(norm(g2 - g1) <= 1e-8 * (1 + norm(g1)));
    }
  }
}

TEST_CASE("tabulated kind: spline of a smooth support function") {
  // tabulate the ellipse integrand and check values/gradients against it
  Integrand ell = Integrand::ellipse({2, 1});
  int n = 512;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    double th = 2 * M_PI * i / n;
    vals[i] = ell.value(Vec{std::cos(th), std::sin(th)});
  }
  Integrand tab = Integrand::tabulated(vals);
  for (const Vec& x : random_directions(2, 40, 8)) {
    CHECK(tab.value(x) == doctest::Approx(ell.value(x)).epsilon(1e-7));
    CHECK(norm(tab.gradient(x) - ell.gradient(x)) < 1e-5 * norm(ell.gradient(x)) + 1e-7);
  }
  CHECK(tab.gauge(Vec{2, 0}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("tabulated kind: non-convex table is rejected at construction") {
  int n = 64;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    double th = 2 * M_PI * i / n;
    vals[i] = 1.0 + 0.6 * std::cos(4 * th);  // f + f'' = 1 - 9 cos(4 th): not convex
  }
  CHECK_THROWS_AS(Integrand::tabulated(vals), std::invalid_argument);
}

TEST_CASE("build_family: smoothed squares and constants") {
  Integrand cryst = square_crystal(0.0);
  IntegrandFamily fam = build_family(cryst, {0.5, 0.25, 0.125});
  REQUIRE(fam.members.size() == 3);
  // pointwise convergence at nu = (1,0) to the crystalline value 1
  double prevErr = 1e300;
  for (const Integrand& m : fam.members) {
    double err = std::abs(m.value(Vec{1, 0}) - 1.0);
    CHECK(err < prevErr + 1e-12);
    prevErr = err;
  }
  CHECK(prevErr < 0.02);
  // uniform sphere bounds recorded
  CHECK(fam.uniform_m > 0);
  CHECK(fam.uniform_M >= fam.uniform_m);

  // eps = 1 member is strictly convex with a mild anisotropy ratio
  IntegrandFamily fam1 = build_family(cryst, {1.0});
  CHECK(fam1.members[0].bounds().mF / fam1.members[0].bounds().MF >= 0.7);
  CHECK(fam1.members[0].bounds().lambda > 0);

  // a smooth descriptor yields a constant family
  IntegrandFamily fiso = build_family(Integrand::isotropic(2), {0.4, 0.2});
  CHECK(fiso.members[0].value(Vec{0.3, 0.7}) ==
        doctest::Approx(fiso.members[1].value(Vec{0.3, 0.7})).epsilon(1e-14));

  CHECK_THROWS_AS(build_family(cryst, {0.2, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(build_family(cryst, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("scaled integrand") {
  Integrand ell = Integrand::ellipse({2, 1});
  Integrand s = ell.scaled(1.5);
  CHECK(s.value(Vec{1, 0}) == doctest::Approx(3.0));
  CHECK(s.gauge(Vec{2, 0}) == doctest::Approx(1.0 / 1.5));
  CHECK(s.bounds().MF == doctest::Approx(3.0).epsilon(1e-6));
}
