#pragma once

#include <memory>

#include "anisolab/domain.hpp"
#include "anisolab/integrand.hpp"

namespace anisolab {

// Wulff shape K_F = {F_* < 1}: level-set grid of F_*(x) - 1 together with the
// geometric constants every other module checks against.
class WulffShape {
 public:
  std::shared_ptr<const Integrand> integrand;
  LevelSetDomain domain;   // phi = F_*(x) - 1 (not reinitialized: gauge values)
  double volume = 0;       // |K_F|
  double momentConstant = 0;  // C_K = int_{boundary} dH^n / |grad F_*|

  struct GridSpec {
    double spacing = 1.0 / 64.0;
    double halfWidthFactor = 1.5;  // box = [-f*MF, f*MF]^d
  };

  static WulffShape build(std::shared_ptr<const Integrand> F, const GridSpec& gs);

  // int_{K_F} F_*^alpha dx; equals C_K / (n+1+alpha)
  double gauge_moment(double alpha) const;
};

double moment_constant(const WulffShape& K);

}  // namespace anisolab
