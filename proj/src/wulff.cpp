#include "anisolab/wulff.hpp"

#include <cmath>
#include <stdexcept>

namespace anisolab {

WulffShape WulffShape::build(std::shared_ptr<const Integrand> F, const GridSpec& gs) {
  if (!F) throw std::invalid_argument("WulffShape::build: null integrand");
  if (gs.halfWidthFactor * F->bounds().MF <= F->bounds().MF)
    throw std::invalid_argument("WulffShape::build: box does not contain the MF ball");
  WulffShape K;
  K.integrand = F;

  const int dim = F->dim();
  const double h = gs.spacing;
  const double half = gs.halfWidthFactor * F->bounds().MF;

  int cellsHalf = static_cast<int>(std::ceil(half / h));
  if (cellsHalf % 2 != 0) ++cellsHalf;  // even cell counts for solver coarsening
  int nodes[3] = {2 * cellsHalf + 1, 2 * cellsHalf + 1, dim == 3 ? 2 * cellsHalf + 1 : 1};
  Vec origin{-cellsHalf * h, -cellsHalf * h, dim == 3 ? -cellsHalf * h : 0.0};

  LevelSetDomain d;
  d.dim = dim;
  d.spacing = h;
  d.phi = Grid(dim, nodes, h, origin);
  d.spec = ShapeSpec::wulff(Vec{}, 1.0);

  GaugeField gauge(*F);
  for (int k = 0; k < d.phi.n[2]; ++k)
    for (int j = 0; j < d.phi.n[1]; ++j)
      for (int i = 0; i < d.phi.n[0]; ++i)
        d.phi.at(i, j, k) = gauge.value(d.phi.pos(i, j, k)) - 1.0;

  K.domain = std::move(d);
  K.volume = anisolab::volume(K.domain);
  K.momentConstant = anisolab::moment_constant(K);
  return K;
}

double moment_constant(const WulffShape& K) {
  BoundaryMesh mesh = extract_boundary(K.domain);
  GaugeField gauge(*K.integrand);
  double acc = 0;
  for (size_t i = 0; i < mesh.points.size(); ++i) {
    double gn = gauge.gradient_norm(mesh.points[i]);
    acc += mesh.weights[i] / gn;
  }
  return acc;
}

double WulffShape::gauge_moment(double alpha) const {
  if (alpha < 0) throw std::invalid_argument("gauge_moment: alpha must be nonnegative");
  GaugeField gauge(*integrand);
  return domain_integral(domain, [&](const Vec& x) {
    double g = gauge.value(x);
    return alpha == 0.0 ? 1.0 : std::pow(g, alpha);
  });
}

}  // namespace anisolab
