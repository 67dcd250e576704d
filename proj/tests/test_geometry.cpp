#include <doctest.h>

#include <random>

#include "anisolab/geometry.hpp"

using namespace anisolab;

TEST_CASE("symmetric eigenvalues 2x2/3x3") {
  Mat a;
  a.m[0][0] = 2;
  a.m[1][1] = 5;
  a.m[0][1] = a.m[1][0] = 1;
  auto ev = sym_eigenvalues(a, 2);
  // eigenvalues of [[2,1],[1,5]]: (7 +- sqrt(13))/2
  CHECK(ev[0] == doctest::Approx((7 - std::sqrt(13.0)) / 2).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx((7 + std::sqrt(13.0)) / 2).epsilon(1e-12));

  Mat b;
  b.m[0][0] = 2;
  b.m[1][1] = 3;
  b.m[2][2] = 4;
  b.m[0][1] = b.m[1][0] = 0.5;
  auto ev3 = sym_eigenvalues(b, 3);
  // characteristic roots of [[2,.5,0],[.5,3,0],[0,0,4]]
  double lo = 2.5 - std::sqrt(0.25 + 0.25), hi = 2.5 + std::sqrt(0.5);
  CHECK(ev3[0] == doctest::Approx(lo).epsilon(1e-10));
  CHECK(ev3[1] == doctest::Approx(hi).epsilon(1e-10));
  CHECK(ev3[2] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("halfspace cube fraction agrees with dense sampling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int dim : {2, 3}) {
    for (int trial = 0; trial < 40; ++trial) {
      double c = 0.6 * U(rng);
      Vec g{U(rng), U(rng), dim == 3 ? U(rng) : 0.0};
      double frac = halfspace_cube_fraction(c, g, dim);
      // brute-force oracle: sample the cube on a fine lattice
      int n = dim == 2 ? 400 : 64;
      long cnt = 0, tot = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (dim == 2) {
            double x = (i + 0.5) / n - 0.5, y = (j + 0.5) / n - 0.5;
            cnt += (c + g[0] * x + g[1] * y) <= 0;
            ++tot;
          } else {
            for (int k = 0; k < n; ++k) {
              double x = (i + 0.5) / n - 0.5, y = (j + 0.5) / n - 0.5, z = (k + 0.5) / n - 0.5;
              cnt += (c + g[0] * x + g[1] * y + g[2] * z) <= 0;
              ++tot;
            }
          }
        }
      double oracle = static_cast<double>(cnt) / tot;
      CHECK(frac == doctest::Approx(oracle).epsilon(0.02).scale(1.0));
    }
  }
}

TEST_CASE("tangent basis is orthonormal and orthogonal to nu") {
  for (int dim : {2, 3}) {
    for (const Vec& nu : sphere_sample(dim, 64)) {
      auto tb = tangent_basis(nu, dim);
      CHECK(std::abs(dot(tb[0], nu)) < 1e-12);
      CHECK(norm(tb[0]) == doctest::Approx(1.0).epsilon(1e-12));
      if (dim == 3) {
        CHECK(std::abs(dot(tb[1], nu)) < 1e-12);
        CHECK(std::abs(dot(tb[1], tb[0])) < 1e-12);
        CHECK(norm(tb[1]) == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("operator norm of a known matrix") {
  Mat m;
  m.m[0][0] = 3;
  m.m[1][1] = -4;
  CHECK(operator_norm(m, 2) == doctest::Approx(4.0).epsilon(1e-12));
}
