#pragma once

#include <cstddef>
#include <vector>

#include "anisolab/geometry.hpp"

namespace anisolab {

// Uniform node-centered Cartesian grid. In 2D the z extent collapses (n[2]=1).
struct Grid {
  int dim = 2;
  int n[3] = {1, 1, 1};
  double h = 0;
  Vec origin;
  std::vector<double> a;

  Grid() = default;
  Grid(int dim_, const int nodes[3], double h_, const Vec& origin_) : dim(dim_), h(h_), origin(origin_) {
    n[0] = nodes[0];
    n[1] = nodes[1];
    n[2] = dim_ == 3 ? nodes[2] : 1;
    a.assign(static_cast<size_t>(n[0]) * n[1] * n[2], 0.0);
  }

  size_t size() const { return a.size(); }
  size_t idx(int i, int j, int k = 0) const {
    return (static_cast<size_t>(k) * n[1] + j) * n[0] + i;
  }
  Vec pos(int i, int j, int k = 0) const {
    return {origin[0] + i * h, origin[1] + j * h, dim == 3 ? origin[2] + k * h : 0.0};
  }

  double& at(int i, int j, int k = 0) { return a[idx(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return a[idx(i, j, k)]; }

  // bi/trilinear interpolation, clamped to the box
  double interp(const Vec& x) const;

  // central differences, one-sided at the box faces
  Vec node_gradient(int i, int j, int k = 0) const;
  std::vector<Vec> gradient_field() const;
};

// central divergence of a node vector field living on g's lattice
std::vector<double> divergence_field(const Grid& g, const std::vector<Vec>& v);

// interpolate a node vector field at a point
Vec interp_vector(const Grid& g, const std::vector<Vec>& v, const Vec& x);
double interp_scalar(const Grid& g, const std::vector<double>& f, const Vec& x);

}  // namespace anisolab
