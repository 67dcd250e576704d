#include "anisolab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anisolab {

// ---------------------------------------------------------------------------
// shape specs

ShapeSpec ShapeSpec::ball(const Vec& c, double r) {
  ShapeSpec s;
  s.type = "ball";
  s.center = c;
  s.radius = r;
  return s;
}

ShapeSpec ShapeSpec::wulff(const Vec& c, double scale) {
  ShapeSpec s;
  s.type = "wulff";
  s.center = c;
  s.scale = scale;
  return s;
}

ShapeSpec ShapeSpec::ellipse(const Vec& c, const std::vector<double>& semiaxes) {
  ShapeSpec s;
  s.type = "ellipse";
  s.center = c;
  s.semiaxes = semiaxes;
  return s;
}

ShapeSpec ShapeSpec::unite(std::vector<ShapeSpec> parts) {
  ShapeSpec s;
  s.type = "union";
  s.parts = std::move(parts);
  return s;
}

ShapeSpec ShapeSpec::dumbbell(const Vec& c1, const Vec& c2, double neckWidth, double scale) {
  ShapeSpec s;
  s.type = "dumbbell";
  s.centers = {c1, c2};
  s.neck_width = neckWidth;
  s.scale = scale;
  return s;
}

ShapeSpec ShapeSpec::perturbed_wulff(const Vec& c, double amplitude, int mode, double scale) {
  ShapeSpec s;
  s.type = "perturbed_wulff";
  s.center = c;
  s.amplitude = amplitude;
  s.mode = mode;
  s.scale = scale;
  return s;
}

namespace {

void shape_bbox(const ShapeSpec& s, const Integrand* F, int dim, Vec& lo, Vec& hi) {
  auto expand = [&](const Vec& c, double r) {
    for (int k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], c[k] - r);
      hi[k] = std::max(hi[k], c[k] + r);
    }
  };
  if (s.type == "ball") {
    expand(s.center, s.radius);
  } else if (s.type == "wulff") {
    if (!F) throw std::invalid_argument("wulff shape needs an integrand");
    expand(s.center, s.scale * F->bounds().MF);
  } else if (s.type == "perturbed_wulff") {
    if (!F) throw std::invalid_argument("perturbed_wulff shape needs an integrand");
    expand(s.center, s.scale * (1.0 + std::abs(s.amplitude) + 0.05) * F->bounds().MF);
  } else if (s.type == "ellipse") {
    double r = 0;
    for (double a : s.semiaxes) r = std::max(r, a);
    expand(s.center, r);
  } else if (s.type == "union") {
    for (const auto& p : s.parts) shape_bbox(p, F, dim, lo, hi);
  } else if (s.type == "dumbbell") {
    if (!F) throw std::invalid_argument("dumbbell shape needs an integrand");
    expand(s.centers[0], s.scale * F->bounds().MF);
    expand(s.centers[1], s.scale * F->bounds().MF);
    expand((s.centers[0] + s.centers[1]) * 0.5,
           0.5 * norm(s.centers[1] - s.centers[0]) + s.neck_width);
  } else {
    throw std::invalid_argument("shape_bbox: unknown shape type '" + s.type + "'");
  }
}

struct ShapeEval {
  const Integrand* F;
  std::shared_ptr<GaugeField> gauge;
  int dim;

  double eval(const ShapeSpec& s, const Vec& x) const {
    if (s.type == "ball") return norm(x - s.center) - s.radius;
    if (s.type == "wulff") return gauge->value(x - s.center) - s.scale;
    if (s.type == "perturbed_wulff") {
      Vec r = x - s.center;
      double rho = std::hypot(r[0], r[1]);
      double rr = norm(r);
      double bump = 0;
      if (rr > 1e-12) {
        bump = std::cos(s.mode * std::atan2(r[1], r[0]));
        if (dim == 3) bump *= (rho * rho) / (rr * rr);  // vanish on the axis
      }
      return gauge->value(r) - s.scale * (1.0 + s.amplitude * bump);
    }
    if (s.type == "ellipse") {
      double q = 0;
      for (int k = 0; k < dim; ++k) {
        double t = (x[k] - s.center[k]) / s.semiaxes[k];
        q += t * t;
      }
      return std::sqrt(q) - 1.0;
    }
    if (s.type == "union") {
      double v = std::numeric_limits<double>::infinity();
      for (const auto& p : s.parts) v = std::min(v, eval(p, x));
      return v;
    }
    if (s.type == "dumbbell") {
      double v = std::min(gauge->value(x - s.centers[0]) - s.scale,
                          gauge->value(x - s.centers[1]) - s.scale);
      Vec axis = s.centers[1] - s.centers[0];
      double L = norm(axis);
      Vec u = axis * (1.0 / L);
      Vec r = x - s.centers[0];
      double t = dot(r, u);
      Vec perp = r - u * t;
      double neck = std::max(std::abs(t - 0.5 * L) - 0.5 * L, norm(perp) - 0.5 * s.neck_width);
      return std::min(v, neck);
    }
    throw std::invalid_argument("shape eval: unknown type '" + s.type + "'");
  }
};

bool needs_integrand(const ShapeSpec& s) {
  if (s.type == "wulff" || s.type == "dumbbell" || s.type == "perturbed_wulff") return true;
  if (s.type == "union")
    for (const auto& p : s.parts)
      if (needs_integrand(p)) return true;
  return false;
}

int spec_dim(const ShapeSpec& s, const Integrand* F) {
  if (F) return F->dim();
  if (s.type == "ellipse") return static_cast<int>(s.semiaxes.size());
  if (s.type == "union" && !s.parts.empty()) return spec_dim(s.parts.front(), F);
  return 2;
}

}  // namespace

// ---------------------------------------------------------------------------
// domain construction

LevelSetDomain LevelSetDomain::build(const ShapeSpec& s, const Integrand* F, double h,
                                     int reinitSweeps, double marginOverride) {
  if (!(h > 0)) throw std::invalid_argument("LevelSetDomain::build: spacing must be positive");
  if (needs_integrand(s) && !F)
    throw std::invalid_argument("LevelSetDomain::build: shape requires an integrand");
  int dim = spec_dim(s, F);
  Vec lo{1e300, 1e300, dim == 3 ? 1e300 : 0.0};
  Vec hi{-1e300, -1e300, dim == 3 ? -1e300 : 0.0};
  shape_bbox(s, F, dim, lo, hi);
  double margin = marginOverride > 0 ? marginOverride : std::max(6.0 * h, 0.45);
  int nodes[3] = {1, 1, 1};
  Vec origin;
  for (int k = 0; k < dim; ++k) {
    double a = h * std::floor((lo[k] - margin) / h);
    double b = h * std::ceil((hi[k] + margin) / h);
    int cells = static_cast<int>(std::llround((b - a) / h));
    if (cells % 2 != 0) {  // even cell counts keep the coarsening ladder exact
      cells += 1;
      b += h;
    }
    origin[k] = a;
    nodes[k] = cells + 1;
  }
  LevelSetDomain d;
  d.dim = dim;
  d.spacing = h;
  d.phi = Grid(dim, nodes, h, origin);
  d.spec = s;

  ShapeEval ev{F, nullptr, dim};
  if (needs_integrand(s)) ev.gauge = std::make_shared<GaugeField>(*F);
  for (int k = 0; k < d.phi.n[2]; ++k)
    for (int j = 0; j < d.phi.n[1]; ++j)
      for (int i = 0; i < d.phi.n[0]; ++i)
        d.phi.at(i, j, k) = ev.eval(s, d.phi.pos(i, j, k));

  if (reinitSweeps > 0) reinitialize(d.phi, reinitSweeps);

  bool any = false;
  for (double v : d.phi.a)
    if (v < 0) {
      any = true;
      break;
    }
  if (!any) throw std::runtime_error("LevelSetDomain::build: empty interior");
  return d;
}

LevelSetDomain LevelSetDomain::from_grid(Grid phi, int reinitSweeps) {
  LevelSetDomain d;
  d.dim = phi.dim;
  d.spacing = phi.h;
  d.phi = std::move(phi);
  if (reinitSweeps > 0) reinitialize(d.phi, reinitSweeps);
  return d;
}

// ---------------------------------------------------------------------------
// reinitialization

void reinitialize(Grid& phi, int sweeps) {
  const int dim = phi.dim;
  const double h = phi.h;
  const size_t N = phi.size();
  std::vector<double> phi0 = phi.a;
  std::vector<char> frozen(N, 0);

  auto neighbor = [&](int i, int j, int k, int ax, int dir, int& ii, int& jj, int& kk) {
    ii = i;
    jj = j;
    kk = k;
    if (ax == 0) ii = std::clamp(i + dir, 0, phi.n[0] - 1);
    if (ax == 1) jj = std::clamp(j + dir, 0, phi.n[1] - 1);
    if (ax == 2) kk = std::clamp(k + dir, 0, phi.n[2] - 1);
  };

  // Freeze a band around the interface at the normalized field phi0/|grad phi0|.
  // Dividing by a smooth positive factor keeps the zero set and the curvature
  // stencils exact; rebuilding the band with first-order Godunov sweeps would
  // leave O(h) kinks whose second differences never converge.
  const double band = 3.2 * h;
  for (int k = 0; k < phi.n[2]; ++k)
    for (int j = 0; j < phi.n[1]; ++j)
      for (int i = 0; i < phi.n[0]; ++i) {
        size_t id = phi.idx(i, j, k);
        double p = phi0[id];
        Vec g;
        for (int ax = 0; ax < dim; ++ax) {
          int i1, j1, k1, i2, j2, k2;
          neighbor(i, j, k, ax, +1, i1, j1, k1);
          neighbor(i, j, k, ax, -1, i2, j2, k2);
          g[ax] = (phi0[phi.idx(i1, j1, k1)] - phi0[phi.idx(i2, j2, k2)]) / (2.0 * h);
        }
        double gn = std::max(norm(g), 0.05);
        double d = p / gn;
        if (std::abs(d) <= band) {
          frozen[id] = 1;
          phi.a[id] = d;
        }
      }

  const double dtau = 0.45 * h;
  std::vector<double> next(N);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int k = 0; k < phi.n[2]; ++k)
      for (int j = 0; j < phi.n[1]; ++j)
        for (int i = 0; i < phi.n[0]; ++i) {
          size_t id = phi.idx(i, j, k);
          double p = phi.a[id];
          double p0 = phi0[id];
          if (frozen[id]) {
            next[id] = p;
            continue;
          }
          double g2 = 0;
          for (int ax = 0; ax < dim; ++ax) {
            int i1, j1, k1, i2, j2, k2;
            neighbor(i, j, k, ax, +1, i1, j1, k1);
            neighbor(i, j, k, ax, -1, i2, j2, k2);
            double fwd = (phi.a[phi.idx(i1, j1, k1)] - p) / h;
            double bwd = (p - phi.a[phi.idx(i2, j2, k2)]) / h;
            double up, dn;
            if (p0 > 0) {
              up = std::max(bwd, 0.0);
              dn = std::min(fwd, 0.0);
            } else {
              up = std::min(bwd, 0.0);
              dn = std::max(fwd, 0.0);
            }
            g2 += std::max(up * up, dn * dn);
          }
          double sgn = p0 / std::sqrt(p0 * p0 + h * h);
          next[id] = p - dtau * sgn * (std::sqrt(g2) - 1.0);
        }
    phi.a.swap(next);
  }
}

// ---------------------------------------------------------------------------
// boundary extraction

double BoundaryMesh::total_weight() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

namespace {

inline Vec edge_cross(const Vec& pa, const Vec& pb, double fa, double fb) {
  double t = fa / (fa - fb);
  return pa + (pb - pa) * t;
}

void add_segment(BoundaryMesh& mesh, const Grid& phi, const std::vector<Vec>& grad, const Vec& a,
                 const Vec& b) {
  double len = norm(b - a);
  if (len < 1e-14) return;
  Vec mid = (a + b) * 0.5;
  Vec n = interp_vector(phi, grad, mid);
  double nn = norm(n);
  if (nn < 1e-12) {
    Vec t = (b - a) * (1.0 / len);
    n = Vec{t[1], -t[0]};
    if (phi.interp(mid + n * (0.5 * phi.h)) < phi.interp(mid)) n = -n;
    nn = 1.0;
  }
  mesh.points.push_back(mid);
  mesh.normals.push_back(n * (1.0 / nn));
  mesh.weights.push_back(len);
}

void add_triangle(BoundaryMesh& mesh, const Grid& phi, const std::vector<Vec>& grad, const Vec& a,
                  const Vec& b, const Vec& c) {
  Vec ab = b - a, ac = c - a;
  Vec cr{ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2],
         ab[0] * ac[1] - ab[1] * ac[0]};
  double area = 0.5 * norm(cr);
  if (area < 1e-18) return;
  Vec cen = (a + b + c) * (1.0 / 3.0);
  Vec n = interp_vector(phi, grad, cen);
  double nn = norm(n);
  if (nn < 1e-12) {
    n = cr;
    nn = norm(cr);
  }
  mesh.points.push_back(cen);
  mesh.normals.push_back(n * (1.0 / nn));
  mesh.weights.push_back(area);
}

// tetrahedral decomposition sharing the 0-6 cube diagonal; face diagonals
// match between neighboring cells
constexpr int kTets[6][4] = {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6},
                             {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}};
constexpr int kCubeOff[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

}  // namespace

BoundaryMesh extract_boundary(const LevelSetDomain& d) {
  const Grid& phi = d.phi;
  BoundaryMesh mesh;
  std::vector<Vec> grad = phi.gradient_field();

  if (d.dim == 2) {
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) {
        double f[4] = {phi.at(i, j), phi.at(i + 1, j), phi.at(i + 1, j + 1), phi.at(i, j + 1)};
        Vec p[4] = {phi.pos(i, j), phi.pos(i + 1, j), phi.pos(i + 1, j + 1), phi.pos(i, j + 1)};
        bool in[4];
        int nin = 0;
        for (int c = 0; c < 4; ++c) {
          in[c] = f[c] < 0;
          nin += in[c];
        }
        if (nin == 0 || nin == 4) continue;
        Vec cross[4];
        bool has[4];
        for (int e = 0; e < 4; ++e) {
          int a = e, b = (e + 1) % 4;
          has[e] = in[a] != in[b];
          if (has[e]) cross[e] = edge_cross(p[a], p[b], f[a], f[b]);
        }
        int edges[4], ne = 0;
        for (int e = 0; e < 4; ++e)
          if (has[e]) edges[ne++] = e;
        if (ne == 2) {
          add_segment(mesh, phi, grad, cross[edges[0]], cross[edges[1]]);
        } else if (ne == 4) {
          // saddle: resolve pairing with the cell-center value
          double fc = 0.25 * (f[0] + f[1] + f[2] + f[3]);
          bool centerIn = fc < 0;
          if (in[0] == centerIn) {
            add_segment(mesh, phi, grad, cross[3], cross[0]);
            add_segment(mesh, phi, grad, cross[1], cross[2]);
          } else {
            add_segment(mesh, phi, grad, cross[0], cross[1]);
            add_segment(mesh, phi, grad, cross[2], cross[3]);
          }
        }
      }
  } else {
    for (int k = 0; k + 1 < phi.n[2]; ++k)
      for (int j = 0; j + 1 < phi.n[1]; ++j)
        for (int i = 0; i + 1 < phi.n[0]; ++i) {
          double f[8];
          Vec p[8];
          bool anyIn = false, anyOut = false;
          for (int c = 0; c < 8; ++c) {
            f[c] = phi.at(i + kCubeOff[c][0], j + kCubeOff[c][1], k + kCubeOff[c][2]);
            p[c] = phi.pos(i + kCubeOff[c][0], j + kCubeOff[c][1], k + kCubeOff[c][2]);
            (f[c] < 0 ? anyIn : anyOut) = true;
          }
          if (!anyIn || !anyOut) continue;
          for (const auto& tet : kTets) {
            double tf[4];
            Vec tp[4];
            int nin = 0;
            for (int c = 0; c < 4; ++c) {
              tf[c] = f[tet[c]];
              tp[c] = p[tet[c]];
              if (tf[c] < 0) ++nin;
            }
            if (nin == 0 || nin == 4) continue;
            int ins[4], outs[4], ni = 0, no = 0;
            for (int c = 0; c < 4; ++c)
              (tf[c] < 0 ? ins[ni++] : outs[no++]) = c;
            if (nin == 1 || nin == 3) {
              int apex = nin == 1 ? ins[0] : outs[0];
              int* ring = nin == 1 ? outs : ins;
              Vec q[3];
              for (int c = 0; c < 3; ++c)
                q[c] = edge_cross(tp[apex], tp[ring[c]], tf[apex], tf[ring[c]]);
              add_triangle(mesh, phi, grad, q[0], q[1], q[2]);
            } else {
              Vec q00 = edge_cross(tp[ins[0]], tp[outs[0]], tf[ins[0]], tf[outs[0]]);
              Vec q01 = edge_cross(tp[ins[0]], tp[outs[1]], tf[ins[0]], tf[outs[1]]);
              Vec q10 = edge_cross(tp[ins[1]], tp[outs[0]], tf[ins[1]], tf[outs[0]]);
              Vec q11 = edge_cross(tp[ins[1]], tp[outs[1]], tf[ins[1]], tf[outs[1]]);
              add_triangle(mesh, phi, grad, q00, q01, q11);
              add_triangle(mesh, phi, grad, q00, q11, q10);
            }
          }
        }
  }

  if (mesh.points.empty()) throw std::runtime_error("extract_boundary: empty boundary");
  return mesh;
}

// ---------------------------------------------------------------------------
// surface quantities

double surface_energy(const BoundaryMesh& mesh, const Integrand& F) {
  double s = 0;
  for (size_t i = 0; i < mesh.points.size(); ++i) s += F.value(mesh.normals[i]) * mesh.weights[i];
  return s;
}

double surface_energy(const LevelSetDomain& d, const Integrand& F) {
  return surface_energy(extract_boundary(d), F);
}

CurvatureField curvature_field(const LevelSetDomain& d, const Integrand& F) {
  const Grid& phi = d.phi;
  CurvatureField cf;
  cf.nodeGrad = phi.gradient_field();
  size_t N = phi.size();
  cf.chDirection.assign(N, Vec{});
  std::vector<char> bad(N, 0);
  for (size_t id = 0; id < N; ++id) {
    if (norm(cf.nodeGrad[id]) < 0.1) {
      bad[id] = 1;
      ++cf.excludedNodes;
    } else {
      cf.chDirection[id] = F.gradient(cf.nodeGrad[id]);
    }
  }
  // in-paint excluded nodes from valid neighbors
  std::vector<char> cur = bad;
  for (int pass = 0; pass < 100; ++pass) {
    bool changed = false;
    std::vector<char> nxt = cur;
    for (int k = 0; k < phi.n[2]; ++k)
      for (int j = 0; j < phi.n[1]; ++j)
        for (int i = 0; i < phi.n[0]; ++i) {
          size_t id = phi.idx(i, j, k);
          if (!cur[id]) continue;
          Vec acc;
          int cnt = 0;
          int deltas[3] = {1, phi.n[0], phi.n[0] * phi.n[1]};
          int coords[3] = {i, j, k};
          for (int ax = 0; ax < d.dim; ++ax)
            for (int dir = -1; dir <= 1; dir += 2) {
              int c = coords[ax] + dir;
              if (c < 0 || c >= phi.n[ax]) continue;
              size_t nb = id + dir * deltas[ax];
              if (!cur[nb]) {
                acc += cf.chDirection[nb];
                ++cnt;
              }
            }
          if (cnt > 0) {
            cf.chDirection[id] = acc * (1.0 / cnt);
            nxt[id] = 0;
            changed = true;
          }
        }
    cur.swap(nxt);
    if (!changed) break;
  }
  cf.nodeH = divergence_field(phi, cf.chDirection);
  return cf;
}

std::vector<double> aniso_mean_curvature(const CurvatureField& field, const Grid& phi,
                                         const BoundaryMesh& mesh) {
  std::vector<double> H(mesh.points.size());
  for (size_t i = 0; i < mesh.points.size(); ++i)
    H[i] = interp_scalar(phi, field.nodeH, mesh.points[i]);
  return H;
}

std::vector<double> aniso_mean_curvature(const LevelSetDomain& d, const Integrand& F,
                                         const BoundaryMesh& mesh) {
  CurvatureField cf = curvature_field(d, F);
  return aniso_mean_curvature(cf, d.phi, mesh);
}

double reference_curvature(const LevelSetDomain& d, const Integrand& F) {
  double vol = volume(d);
  if (vol <= 0) throw std::runtime_error("reference_curvature: zero volume");
  double n = d.dim - 1;
  return n * surface_energy(d, F) / (d.dim * vol);
}

double aniso_signed_distance(const LevelSetDomain& d, const Integrand& F,
                             const BoundaryMesh& mesh, const Vec& x) {
  GaugeField gf(F);
  bool in = d.phi.interp(x) < 0;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& y : mesh.points) {
    double v = in ? gf.value(y - x) : gf.value(x - y);
    best = std::min(best, v);
  }
  return in ? -best : best;
}

double aniso_signed_distance(const LevelSetDomain& d, const Integrand& F, const Vec& x) {
  return aniso_signed_distance(d, F, extract_boundary(d), x);
}

// ---------------------------------------------------------------------------
// bulk quantities

double cell_inside_fraction(const Grid& phi, int ci, int cj, int ck) {
  int kmax = phi.dim == 3 ? 1 : 0;
  double c = 0;
  Vec g;
  bool allNeg = true, allPos = true;
  double f[8];
  int m = 0;
  for (int dk = 0; dk <= kmax; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        double v = phi.at(ci + di, cj + dj, ck + dk);
        f[m++] = v;
        c += v;
        allNeg &= v < 0;
        allPos &= v >= 0;
      }
  if (allNeg) return 1.0;
  if (allPos) return 0.0;
  c /= m;
  // least-squares linear fit over the corners (per-axis mean differences)
  if (phi.dim == 2) {
    g[0] = 0.5 * ((f[1] + f[3]) - (f[0] + f[2]));
    g[1] = 0.5 * ((f[2] + f[3]) - (f[0] + f[1]));
  } else {
    g[0] = 0.25 * ((f[1] + f[3] + f[5] + f[7]) - (f[0] + f[2] + f[4] + f[6]));
    g[1] = 0.25 * ((f[2] + f[3] + f[6] + f[7]) - (f[0] + f[1] + f[4] + f[5]));
    g[2] = 0.25 * ((f[4] + f[5] + f[6] + f[7]) - (f[0] + f[1] + f[2] + f[3]));
  }
  return halfspace_cube_fraction(c, g, phi.dim);
}

double volume(const LevelSetDomain& d) {
  const Grid& phi = d.phi;
  double cellVol = std::pow(phi.h, d.dim);
  double acc = 0;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) acc += cell_inside_fraction(phi, i, j, k);
  return acc * cellVol;
}

Vec centroid(const LevelSetDomain& d) {
  const Grid& phi = d.phi;
  double cellVol = std::pow(phi.h, d.dim);
  double tot = 0;
  Vec acc;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) {
        double w = cell_inside_fraction(phi, i, j, k);
        if (w == 0) continue;
        Vec cc = phi.pos(i, j, k) + Vec{0.5 * phi.h, 0.5 * phi.h, d.dim == 3 ? 0.5 * phi.h : 0.0};
        acc += cc * (w * cellVol);
        tot += w * cellVol;
      }
  if (tot <= 0) throw std::runtime_error("centroid: empty domain");
  return acc * (1.0 / tot);
}

double diameter(const LevelSetDomain& d) {
  BoundaryMesh mesh = extract_boundary(d);
  const auto& pts = mesh.points;
  size_t N = pts.size();
  auto exact = [&](const std::vector<Vec>& q) {
    double best = 0;
    for (size_t i = 0; i < q.size(); ++i)
      for (size_t j = i + 1; j < q.size(); ++j) best = std::max(best, norm2(q[i] - q[j]));
    return std::sqrt(best);
  };
  if (N <= 6000) return exact(pts);
  // collect directional extreme points, then take exact pairs among them
  std::vector<Vec> cand;
  std::vector<char> taken(N, 0);
  for (const Vec& dir : sphere_sample(d.dim, 3000)) {
    size_t lo = 0, hi = 0;
    double plo = 1e300, phi2 = -1e300;
    for (size_t i = 0; i < N; ++i) {
      double p = dot(pts[i], dir);
      if (p < plo) {
        plo = p;
        lo = i;
      }
      if (p > phi2) {
        phi2 = p;
        hi = i;
      }
    }
    if (!taken[lo]) {
      taken[lo] = 1;
      cand.push_back(pts[lo]);
    }
    if (!taken[hi]) {
      taken[hi] = 1;
      cand.push_back(pts[hi]);
    }
  }
  return exact(cand);
}

double domain_integral(const LevelSetDomain& d, const std::function<double(const Vec&)>& f) {
  const Grid& phi = d.phi;
  double cellVol = std::pow(phi.h, d.dim);
  double acc = 0;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) {
        double w = cell_inside_fraction(phi, i, j, k);
        if (w == 0) continue;
        Vec cc = phi.pos(i, j, k) + Vec{0.5 * phi.h, 0.5 * phi.h, d.dim == 3 ? 0.5 * phi.h : 0.0};
        acc += w * cellVol * f(cc);
      }
  return acc;
}

double domain_integral_nodes(const LevelSetDomain& d, const std::vector<double>& nodeValues) {
  const Grid& phi = d.phi;
  double cellVol = std::pow(phi.h, d.dim);
  double acc = 0;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  int corners = 1 << d.dim;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) {
        double w = cell_inside_fraction(phi, i, j, k);
        if (w == 0) continue;
        double avg = 0;
        for (int c = 0; c < corners; ++c)
          avg += nodeValues[phi.idx(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))];
        acc += w * cellVol * avg / corners;
      }
  return acc;
}

double symmetric_difference(const LevelSetDomain& d,
                            const std::function<double(const Vec&)>& other) {
  const Grid& phi = d.phi;
  Grid o = phi;
  for (int k = 0; k < phi.n[2]; ++k)
    for (int j = 0; j < phi.n[1]; ++j)
      for (int i = 0; i < phi.n[0]; ++i) o.at(i, j, k) = other(phi.pos(i, j, k));
  double cellVol = std::pow(phi.h, d.dim);
  double acc = 0;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i)
        acc += std::abs(cell_inside_fraction(phi, i, j, k) - cell_inside_fraction(o, i, j, k));
  return acc * cellVol;
}

}  // namespace anisolab
