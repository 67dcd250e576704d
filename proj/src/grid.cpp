#include "anisolab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace anisolab {

namespace {
struct CellLoc {
  int i[3];
  double t[3];
};

CellLoc locate(const Grid& g, const Vec& x) {
  CellLoc c{};
  for (int k = 0; k < 3; ++k) {
    if (k >= g.dim) {
      c.i[k] = 0;
      c.t[k] = 0;
      continue;
    }
    double s = (x[k] - g.origin[k]) / g.h;
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, g.n[k] - 2);
    c.i[k] = i;
    c.t[k] = std::clamp(s - i, 0.0, 1.0);
  }
  return c;
}
}  // namespace

double Grid::interp(const Vec& x) const {
  CellLoc c = locate(*this, x);
  double acc = 0;
  int kmax = dim == 3 ? 1 : 0;
  for (int dk = 0; dk <= kmax; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        double w = (di ? c.t[0] : 1 - c.t[0]) * (dj ? c.t[1] : 1 - c.t[1]) *
                   (dim == 3 ? (dk ? c.t[2] : 1 - c.t[2]) : 1.0);
        acc += w * at(c.i[0] + di, c.i[1] + dj, c.i[2] + dk);
      }
  return acc;
}

Vec Grid::node_gradient(int i, int j, int k) const {
  Vec g;
  int id[3] = {i, j, k};
  for (int ax = 0; ax < dim; ++ax) {
    int lo = id[ax] - 1, hi = id[ax] + 1;
    double denom = 2.0 * h;
    if (lo < 0) {
      lo = id[ax];
      denom = h;
    }
    if (hi > n[ax] - 1) {
      hi = id[ax];
      denom = hi == lo ? 1.0 : h;
    }
    int a[3] = {i, j, k}, b[3] = {i, j, k};
    a[ax] = hi;
    b[ax] = lo;
    g[ax] = (at(a[0], a[1], a[2]) - at(b[0], b[1], b[2])) / denom;
  }
  return g;
}

std::vector<Vec> Grid::gradient_field() const {
  std::vector<Vec> out(size());
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) out[idx(i, j, k)] = node_gradient(i, j, k);
  return out;
}

std::vector<double> divergence_field(const Grid& g, const std::vector<Vec>& v) {
  std::vector<double> out(g.size(), 0.0);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        double div = 0;
        int id[3] = {i, j, k};
        for (int ax = 0; ax < g.dim; ++ax) {
          int lo = id[ax] - 1, hi = id[ax] + 1;
          double denom = 2.0 * g.h;
          if (lo < 0) {
            lo = id[ax];
            denom = g.h;
          }
          if (hi > g.n[ax] - 1) {
            hi = id[ax];
            denom = hi == lo ? 1.0 : g.h;
          }
          int a[3] = {i, j, k}, b[3] = {i, j, k};
          a[ax] = hi;
          b[ax] = lo;
          div += (v[g.idx(a[0], a[1], a[2])][ax] - v[g.idx(b[0], b[1], b[2])][ax]) / denom;
        }
        out[g.idx(i, j, k)] = div;
      }
  return out;
}

Vec interp_vector(const Grid& g, const std::vector<Vec>& v, const Vec& x) {
  CellLoc c = locate(g, x);
  Vec acc;
  int kmax = g.dim == 3 ? 1 : 0;
  for (int dk = 0; dk <= kmax; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        double w = (di ? c.t[0] : 1 - c.t[0]) * (dj ? c.t[1] : 1 - c.t[1]) *
                   (g.dim == 3 ? (dk ? c.t[2] : 1 - c.t[2]) : 1.0);
        acc += v[g.idx(c.i[0] + di, c.i[1] + dj, c.i[2] + dk)] * w;
      }
  return acc;
}

double interp_scalar(const Grid& g, const std::vector<double>& f, const Vec& x) {
  CellLoc c = locate(g, x);
  double acc = 0;
  int kmax = g.dim == 3 ? 1 : 0;
  for (int dk = 0; dk <= kmax; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        double w = (di ? c.t[0] : 1 - c.t[0]) * (dj ? c.t[1] : 1 - c.t[1]) *
                   (g.dim == 3 ? (dk ? c.t[2] : 1 - c.t[2]) : 1.0);
        acc += w * f[g.idx(c.i[0] + di, c.i[1] + dj, c.i[2] + dk)];
      }
  return acc;
}

}  // namespace anisolab
