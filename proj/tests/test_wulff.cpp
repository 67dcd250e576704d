#include <doctest.h>

#include "anisolab/wulff.hpp"
#include "oracles.hpp"

using namespace anisolab;

namespace {
std::shared_ptr<Integrand> make(Integrand f) { return std::make_shared<Integrand>(std::move(f)); }
}  // namespace

TEST_CASE("build_wulff: unit disk") {
  auto F = make(Integrand::isotropic(2));
  WulffShape K = WulffShape::build(F, {.spacing = 1.0 / 128.0, .halfWidthFactor = 1.5});
  CHECK(K.volume == doctest::Approx(M_PI).epsilon(1e-3));
  // levelset is F_*(x) - 1: negative exactly inside
  CHECK(K.domain.phi.interp(Vec{0, 0}) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(K.domain.phi.interp(Vec{1.2, 0}) > 0);
  CHECK(moment_constant(K) == doctest::Approx(2 * M_PI).epsilon(1e-3));
}

TEST_CASE("build_wulff: ellipse semi-axes (2,1)") {
  auto F = make(Integrand::ellipse({2, 1}));
  WulffShape K = WulffShape::build(F, {.spacing = 1.0 / 128.0, .halfWidthFactor = 1.5});
  CHECK(K.volume == doctest::Approx(2 * M_PI).epsilon(5e-4));
  // C_K by the independent parametric quadrature of dH^1/|grad F_*|:
  // x(t) = (2 cos t, sin t), |x'| = sqrt(4 sin^2 + cos^2),
  // |grad F_*| = sqrt(cos^2/4 + sin^2)  (the ratio is the constant 2: C_K = 4 pi)
  double oracleCK = oracle::simpson(
      [](double t) {
        double s = std::sin(t), c = std::cos(t);
        return std::sqrt(4 * s * s + c * c) / std::sqrt(c * c / 4 + s * s);
      },
      0, 2 * M_PI, 4096);
  CHECK(oracleCK == doctest::Approx(4 * M_PI).epsilon(1e-12));
  CHECK(K.momentConstant == doctest::Approx(oracleCK).epsilon(1e-3));
}

TEST_CASE("build_wulff: smoothed square has the square's volume") {
  std::vector<Vec> normals = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  auto F = make(Integrand::smoothed_crystal(normals, {1, 1, 1, 1}, 0.05, 2));
  WulffShape K = WulffShape::build(F, {.spacing = 1.0 / 128.0, .halfWidthFactor = 1.5});
  CHECK(std::abs(K.volume - 4.0) / 4.0 < 0.02);
}

TEST_CASE("build_wulff: box too small is rejected") {
  auto F = make(Integrand::isotropic(2));
  CHECK_THROWS_AS(WulffShape::build(F, {.spacing = 1.0 / 32.0, .halfWidthFactor = 0.9}),
                  std::invalid_argument);
}

TEST_CASE("gauge moments of the unit disk") {
  auto F = make(Integrand::isotropic(2));
  WulffShape K = WulffShape::build(F, {.spacing = 1.0 / 128.0, .halfWidthFactor = 1.5});
  CHECK(K.gauge_moment(0.0) == doctest::Approx(M_PI).epsilon(1e-3));
  // int_{B_1} |x|^2 = 2 pi / 4 by polar integration
  CHECK(K.gauge_moment(2.0) == doctest::Approx(M_PI / 2).epsilon(1e-2));
  // gauge_moment(alpha) (n+1+alpha) stays equal to C_K within 1%
  for (double alpha : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    double prod = K.gauge_moment(alpha) * (2.0 + alpha);
    CHECK(prod == doctest::Approx(K.momentConstant).epsilon(1e-2));
  }
}

TEST_CASE("moment constant scaling matches the alpha = 0 moment identity") {
  // C_K = (n+1)|K_F| forces C(r K_F) = r^{n+1} C_K
  auto F = make(Integrand::ellipse({2, 1}));
  auto Fs = make(F->scaled(1.5));
  WulffShape K1 = WulffShape::build(F, {.spacing = 1.0 / 64.0, .halfWidthFactor = 1.5});
  WulffShape K2 = WulffShape::build(Fs, {.spacing = 1.0 / 64.0, .halfWidthFactor = 1.5});
  CHECK(K2.momentConstant == doctest::Approx(1.5 * 1.5 * K1.momentConstant).epsilon(5e-3));
  CHECK(K2.volume == doctest::Approx(1.5 * 1.5 * K1.volume).epsilon(5e-3));
}

TEST_CASE("wulff equality case of the isoperimetric inequality") {
  // F(K_F) = (n+1)|K_F| within quadrature tolerance
  auto F = make(Integrand::ellipse({2, 1}));
  WulffShape K = WulffShape::build(F, {.spacing = 1.0 / 128.0, .halfWidthFactor = 1.5});
  double energy = surface_energy(K.domain, *F);
  CHECK(energy == doctest::Approx(2.0 * K.volume).epsilon(2e-3));
}

TEST_CASE("3D wulff: unit ball constants") {
  auto F = make(Integrand::isotropic(3));
  WulffShape K = WulffShape::build(F, {.spacing = 1.0 / 24.0, .halfWidthFactor = 1.5});
  CHECK(K.volume == doctest::Approx(4.0 * M_PI / 3.0).epsilon(5e-3));
  CHECK(K.momentConstant == doctest::Approx(4.0 * M_PI).epsilon(2e-2));
  for (double alpha : {0.0, 1.0, 2.0}) {
    double prod = K.gauge_moment(alpha) * (3.0 + alpha);
    CHECK(prod == doctest::Approx(K.momentConstant).epsilon(2e-2));
  }
}
