#include "anisolab/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace anisolab {

namespace {

// One quadrature cell of the discrete torsion energy. Corner gradients are
// assembled from the 2^(d-1) edge differences per axis; edges crossing the
// boundary carry a sub-cell stretch so u = 0 is enforced at the interface.
struct Cell {
  int i, j, k;
  size_t base;
  double weight;       // theta * h^d / 2^d
  double invAH[12];    // 1 / (alpha h) per edge
};

struct Discretization {
  const Grid* phi;
  int dim;
  double h;
  std::vector<Cell> cells;
  std::vector<char> free_;      // phi < 0
  std::vector<double> nodeWeight;  // sum of cell weights / h^d touching the node

  size_t nodes() const { return phi->size(); }
};

// 3D edge layout: 0-3 x-edges (bits: j,k), 4-7 y-edges (bits: i,k),
// 8-11 z-edges (bits: i,j). 2D uses entries 0,1 (x, bit j) and 4,5 (y, bit i).
inline int edge_index(int axis, int b0, int b1) { return 4 * axis + b0 + 2 * b1; }

Discretization discretize(const LevelSetDomain& d) {
  const Grid& phi = d.phi;
  Discretization ds;
  ds.phi = &phi;
  ds.dim = d.dim;
  ds.h = phi.h;
  ds.free_.assign(phi.size(), 0);
  for (size_t i = 0; i < phi.size(); ++i) ds.free_[i] = phi.a[i] < 0;
  ds.nodeWeight.assign(phi.size(), 0.0);

  const double cellVol = std::pow(phi.h, d.dim);
  const int corners = 1 << d.dim;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) {
        double theta = cell_inside_fraction(phi, i, j, k);
        if (theta <= 0) continue;
        Cell c;
        c.i = i;
        c.j = j;
        c.k = k;
        c.base = phi.idx(i, j, k);
        c.weight = theta * cellVol / corners;
        for (int e = 0; e < 12; ++e) c.invAH[e] = 0;
        for (int axis = 0; axis < d.dim; ++axis)
          for (int b1 = 0; b1 <= (d.dim == 3 ? 1 : 0); ++b1)
            for (int b0 = 0; b0 <= 1; ++b0) {
              if (d.dim == 2 && b1 == 1) continue;
              int oi = 0, oj = 0, ok = 0;
              if (axis == 0) {
                oj = b0;
                ok = b1;
              } else if (axis == 1) {
                oi = b0;
                ok = b1;
              } else {
                oi = b0;
                oj = b1;
              }
              int ai = i + oi, aj = j + oj, ak = k + ok;
              int bi = ai + (axis == 0), bj = aj + (axis == 1), bk = ak + (axis == 2);
              double fa = phi.at(ai, aj, ak), fb = phi.at(bi, bj, bk);
              double alpha = 1.0;
              if ((fa < 0) != (fb < 0)) {
                double neg = fa < 0 ? fa : fb;
                double pos = fa < 0 ? fb : fa;
                alpha = std::clamp(-neg / (pos - neg), 0.05, 1.0);
              }
              c.invAH[edge_index(axis, b0, b1)] = 1.0 / (alpha * phi.h);
            }
        ds.cells.push_back(c);
        for (int cc = 0; cc < corners; ++cc) {
          size_t id = phi.idx(i + (cc & 1), j + ((cc >> 1) & 1), k + ((cc >> 2) & 1));
          ds.nodeWeight[id] += theta / corners;
        }
      }
  return ds;
}

inline void corner_gradients(const Discretization& ds, const std::vector<double>& u, const Cell& c,
                             Vec g[8]) {
  const Grid& phi = *ds.phi;
  const size_t sx = 1, sy = phi.n[0];
  const size_t sz = static_cast<size_t>(phi.n[0]) * phi.n[1];
  if (ds.dim == 2) {
    double u00 = u[c.base], u10 = u[c.base + sx], u01 = u[c.base + sy], u11 = u[c.base + sy + sx];
    double dx0 = (u10 - u00) * c.invAH[edge_index(0, 0, 0)];
    double dx1 = (u11 - u01) * c.invAH[edge_index(0, 1, 0)];
    double dy0 = (u01 - u00) * c.invAH[edge_index(1, 0, 0)];
    double dy1 = (u11 - u10) * c.invAH[edge_index(1, 1, 0)];
    g[0] = Vec{dx0, dy0};
    g[1] = Vec{dx0, dy1};
    g[2] = Vec{dx1, dy0};
    g[3] = Vec{dx1, dy1};
  } else {
    double uc[8];
    for (int cc = 0; cc < 8; ++cc)
      uc[cc] = u[c.base + (cc & 1) * sx + ((cc >> 1) & 1) * sy + ((cc >> 2) & 1) * sz];
    double dx[4], dy[4], dz[4];
    for (int b1 = 0; b1 <= 1; ++b1)
      for (int b0 = 0; b0 <= 1; ++b0) {
        dx[b0 + 2 * b1] =
            (uc[1 + 2 * b0 + 4 * b1] - uc[2 * b0 + 4 * b1]) * c.invAH[edge_index(0, b0, b1)];
        dy[b0 + 2 * b1] =
            (uc[2 + b0 + 4 * b1] - uc[b0 + 4 * b1]) * c.invAH[edge_index(1, b0, b1)];
        dz[b0 + 2 * b1] =
            (uc[4 + b0 + 2 * b1] - uc[b0 + 2 * b1]) * c.invAH[edge_index(2, b0, b1)];
      }
    for (int cc = 0; cc < 8; ++cc) {
      int ci = cc & 1, cj = (cc >> 1) & 1, ck = (cc >> 2) & 1;
      g[cc] = Vec{dx[cj + 2 * ck], dy[ci + 2 * ck], dz[ci + 2 * cj]};
    }
  }
}

// scatter dE contributions of one cell given the per-corner flux vectors
inline void scatter_cell(const Discretization& ds, const Cell& c, const Vec v[8], bool withLinear,
                         std::vector<double>& grad) {
  const Grid& phi = *ds.phi;
  const size_t sx = 1, sy = phi.n[0];
  const size_t sz = static_cast<size_t>(phi.n[0]) * phi.n[1];
  const int corners = 1 << ds.dim;
  if (ds.dim == 2) {
    double fx0 = (v[0][0] + v[1][0]) * c.invAH[edge_index(0, 0, 0)];
    double fx1 = (v[2][0] + v[3][0]) * c.invAH[edge_index(0, 1, 0)];
    double fy0 = (v[0][1] + v[2][1]) * c.invAH[edge_index(1, 0, 0)];
    double fy1 = (v[1][1] + v[3][1]) * c.invAH[edge_index(1, 1, 0)];
    grad[c.base] += c.weight * (-fx0 - fy0);
    grad[c.base + sx] += c.weight * (fx0 - fy1);
    grad[c.base + sy] += c.weight * (-fx1 + fy0);
    grad[c.base + sy + sx] += c.weight * (fx1 + fy1);
  } else {
    // corner cc uses x-edge (cj,ck), y-edge (ci,ck), z-edge (ci,cj)
    for (int b1 = 0; b1 <= 1; ++b1)
      for (int b0 = 0; b0 <= 1; ++b0) {
        // x edges: from (0,b0,b1) to (1,b0,b1)
        double fx = (v[2 * b0 + 4 * b1][0] + v[1 + 2 * b0 + 4 * b1][0]) *
                    c.invAH[edge_index(0, b0, b1)] * c.weight;
        grad[c.base + b0 * sy + b1 * sz] -= fx;
        grad[c.base + sx + b0 * sy + b1 * sz] += fx;
        double fy = (v[b0 + 4 * b1][1] + v[2 + b0 + 4 * b1][1]) * c.invAH[edge_index(1, b0, b1)] *
                    c.weight;
        grad[c.base + b0 * sx + b1 * sz] -= fy;
        grad[c.base + sy + b0 * sx + b1 * sz] += fy;
        double fz = (v[b0 + 2 * b1][2] + v[4 + b0 + 2 * b1][2]) * c.invAH[edge_index(2, b0, b1)] *
                    c.weight;
        grad[c.base + b0 * sx + b1 * sy] -= fz;
        grad[c.base + sz + b0 * sx + b1 * sy] += fz;
      }
  }
  if (withLinear) {
    for (int cc = 0; cc < corners; ++cc) {
      size_t id = c.base + (cc & 1) * sx + ((cc >> 1) & 1) * sy + ((cc >> 2) & 1) * sz;
      grad[id] += c.weight;
    }
  }
}

double energy_of(const Discretization& ds, const Integrand& F, const std::vector<double>& u) {
  const int corners = 1 << ds.dim;
  const Grid& phi = *ds.phi;
  const size_t sx = 1, sy = phi.n[0];
  const size_t sz = static_cast<size_t>(phi.n[0]) * phi.n[1];
  double acc = 0;
  Vec g[8];
  for (const Cell& c : ds.cells) {
    corner_gradients(ds, u, c, g);
    double cellAcc = 0;
    for (int cc = 0; cc < corners; ++cc) {
      Vec v = F.cahn_hoffman(g[cc]);
      size_t id = c.base + (cc & 1) * sx + ((cc >> 1) & 1) * sy + ((cc >> 2) & 1) * sz;
      cellAcc += 0.5 * dot(g[cc], v) + u[id];  // F^2 = g . grad(F^2/2) by homogeneity
    }
    acc += c.weight * cellAcc;
  }
  return acc;
}

// gradient of the energy; returns the max scaled residual over free nodes
double gradient_of(const Discretization& ds, const Integrand& F, const std::vector<double>& u,
                   std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const int corners = 1 << ds.dim;
  Vec g[8], v[8];
  for (const Cell& c : ds.cells) {
    corner_gradients(ds, u, c, g);
    for (int cc = 0; cc < corners; ++cc) v[cc] = F.cahn_hoffman(g[cc]);
    scatter_cell(ds, c, v, true, grad);
  }
  double cellVol = std::pow(ds.h, ds.dim);
  double res = 0;
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!ds.free_[i]) {
      grad[i] = 0;
      continue;
    }
    double w = std::max(ds.nodeWeight[i], 0.05);
    res = std::max(res, std::abs(grad[i]) / (cellVol * w));
  }
  return res;
}

void hessvec(const Discretization& ds, const Integrand& F, const std::vector<double>& u,
             const std::vector<double>& w, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  const int corners = 1 << ds.dim;
  const double lamMax = F.bounds().LambdaStar;
  Vec g[8], gw[8], v[8];
  for (const Cell& c : ds.cells) {
    corner_gradients(ds, u, c, g);
    corner_gradients(ds, w, c, gw);
    for (int cc = 0; cc < corners; ++cc) {
      if (norm2(g[cc]) < 1e-280) {
        v[cc] = gw[cc] * lamMax;  // safe curvature bound at the nonsmooth point
      } else {
        v[cc] = F.cahn_hoffman_jacobian(g[cc]).apply(gw[cc]);
      }
    }
    scatter_cell(ds, c, v, false, out);
  }
  for (size_t i = 0; i < out.size(); ++i)
    if (!ds.free_[i]) out[i] = 0;
}

double estimate_lipschitz(const Discretization& ds, const Integrand& F,
                          const std::vector<double>& u, std::vector<double>& eigvec, int iters,
                          std::mt19937_64& rng) {
  size_t N = ds.nodes();
  if (eigvec.empty()) {
    eigvec.assign(N, 0.0);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (size_t i = 0; i < N; ++i)
      if (ds.free_[i]) eigvec[i] = U(rng);
  }
  std::vector<double> tmp(N, 0.0);
  double lam = 0;
  for (int it = 0; it < iters; ++it) {
    hessvec(ds, F, u, eigvec, tmp);
    double nn = 0;
    for (double x : tmp) nn += x * x;
    nn = std::sqrt(nn);
    if (nn < 1e-300) break;
    lam = nn;
    for (size_t i = 0; i < N; ++i) eigvec[i] = tmp[i] / nn;
  }
  // hessvec carries the quadrature volume factor; normalize to operator scale
  return lam;
}

struct LevelResult {
  std::vector<double> u;
  double energy;
  double residual;
  long iterations;
  int restarts;
  std::vector<double> energyTrace;
  std::vector<double> residualTrace;
};

LevelResult fista_solve(const Discretization& ds, const Integrand& F, std::vector<double> u0,
                        const SolverConfig& cfg) {
  size_t N = ds.nodes();
  LevelResult out;
  std::vector<double>& u = u0;
  std::vector<double> y = u, grad(N, 0.0), unew(N, 0.0);
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> eigvec;
  double L = estimate_lipschitz(ds, F, u, eigvec, 15, rng);
  if (L <= 0) L = 1;
  double step = 1.0 / (1.2 * L);
  double t = 1.0;
  double lastE = energy_of(ds, F, u);
  std::vector<double> snapshot = u;
  out.energyTrace.push_back(lastE);
  double res = 0;
  long iter = 0;
  for (; iter < cfg.maxIters; ++iter) {
    res = gradient_of(ds, F, y, grad);
    if (iter % 50 == 0) out.residualTrace.push_back(res);
    if (res <= cfg.tol) break;
    double dircheck = 0;
    for (size_t i = 0; i < N; ++i) {
      if (!ds.free_[i]) continue;
      double un = y[i] - step * grad[i];
      unew[i] = un;
      dircheck += grad[i] * (un - u[i]);
    }
    double tnew = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (dircheck > 0) {  // gradient-based adaptive restart
      t = 1.0;
      tnew = 1.0;
      ++out.restarts;
    }
    double beta = (t - 1.0) / tnew;
    for (size_t i = 0; i < N; ++i) {
      if (!ds.free_[i]) continue;
      double un = unew[i];
      y[i] = un + beta * (un - u[i]);
      u[i] = un;
    }
    t = tnew;
    if ((iter + 1) % cfg.energyCheckInterval == 0) {
      double E = energy_of(ds, F, u);
      if (E >= lastE) {
        // reject the stretch, shorten the step, restart momentum
        u = snapshot;
        y = u;
        t = 1.0;
        L *= 1.6;
        step = 1.0 / (1.2 * L);
        ++out.restarts;
      } else {
        lastE = E;
        snapshot = u;
        out.energyTrace.push_back(E);
      }
    }
    if ((iter + 1) % cfg.powerInterval == 0) {
      double Lnew = estimate_lipschitz(ds, F, u, eigvec, 4, rng);
      if (Lnew > L) {
        L = Lnew;
        step = 1.0 / (1.2 * L);
      }
    }
  }
  out.u = std::move(u);
  out.energy = energy_of(ds, F, out.u);
  out.residual = res;
  out.iterations = iter;
  return out;
}

Grid coarsen_injection(const Grid& fine) {
  int nodes[3] = {(fine.n[0] - 1) / 2 + 1, (fine.n[1] - 1) / 2 + 1,
                  fine.dim == 3 ? (fine.n[2] - 1) / 2 + 1 : 1};
  Grid c(fine.dim, nodes, fine.h * 2.0, fine.origin);
  for (int k = 0; k < c.n[2]; ++k)
    for (int j = 0; j < c.n[1]; ++j)
      for (int i = 0; i < c.n[0]; ++i)
        c.at(i, j, k) = fine.at(2 * i, 2 * j, fine.dim == 3 ? 2 * k : 0);
  return c;
}

int twopow_divisibility(int cells) {
  int v = 0;
  while (cells % 2 == 0 && cells > 16) {
    cells /= 2;
    ++v;
  }
  return v;
}

}  // namespace

double TorsionSolution::critical_fraction() const {
  long inCrit = 0, inFree = 0;
  for (size_t i = 0; i < freeMask.size(); ++i) {
    if (!freeMask[i]) continue;
    ++inFree;
    if (criticalSet[i]) ++inCrit;
  }
  return inFree > 0 ? static_cast<double>(inCrit) / inFree : 0.0;
}

double TorsionSolution::min_u() const {
  double m = 0;
  for (double v : u.a) m = std::min(m, v);
  return m;
}

TorsionSolution solve_torsion(const LevelSetDomain& d, const Integrand& F,
                              const SolverConfig& cfg) {
  if (!F.smooth_elliptic())
    throw std::domain_error("solve_torsion: integrand must be smooth elliptic");

  // cascadic initialization: inject phi onto coarser lattices, solve upward
  int levels = cfg.maxCoarseLevels;
  for (int ax = 0; ax < d.dim; ++ax)
    levels = std::min(levels, twopow_divisibility(d.phi.n[ax] - 1));
  std::vector<Grid> phis;
  phis.push_back(d.phi);
  for (int l = 0; l < levels; ++l) phis.push_back(coarsen_injection(phis.back()));

  std::vector<double> u;
  LevelResult lr;
  std::vector<double> fullEnergyTrace, fullResidualTrace;
  long totalIters = 0;
  int totalRestarts = 0;
  for (int l = static_cast<int>(phis.size()) - 1; l >= 0; --l) {
    LevelSetDomain dl;
    dl.dim = d.dim;
    dl.spacing = phis[l].h;
    dl.phi = phis[l];
    Discretization ds = discretize(dl);
    std::vector<double> u0(ds.nodes(), 0.0);
    if (!u.empty()) {
      // bilinear prolongation from the previous (coarser) level
      const Grid& cg = phis[l + 1];
      const Grid& fg = phis[l];
      for (int k = 0; k < fg.n[2]; ++k)
        for (int j = 0; j < fg.n[1]; ++j)
          for (int i = 0; i < fg.n[0]; ++i) {
            size_t id = fg.idx(i, j, k);
            if (!ds.free_[id]) continue;
            double acc = 0;
            int i0 = i / 2, j0 = j / 2, k0 = fg.dim == 3 ? k / 2 : 0;
            int i1 = std::min(i0 + (i % 2), cg.n[0] - 1);
            int j1 = std::min(j0 + (j % 2), cg.n[1] - 1);
            int k1 = fg.dim == 3 ? std::min(k0 + (k % 2), cg.n[2] - 1) : 0;
            int cnt = 0;
            for (int a = i0; a <= i1; ++a)
              for (int b = j0; b <= j1; ++b)
                for (int cidx = k0; cidx <= k1; ++cidx) {
                  acc += u[cg.idx(a, b, cidx)];
                  ++cnt;
                }
            u0[id] = acc / cnt;
          }
    }
    SolverConfig lvlCfg = cfg;
    if (l > 0) lvlCfg.tol = std::max(cfg.tol, 1e-7);
    lr = fista_solve(ds, F, std::move(u0), lvlCfg);
    u = lr.u;
    totalIters += lr.iterations;
    totalRestarts += lr.restarts;
    fullEnergyTrace.insert(fullEnergyTrace.end(), lr.energyTrace.begin(), lr.energyTrace.end());
    fullResidualTrace.insert(fullResidualTrace.end(), lr.residualTrace.begin(),
                             lr.residualTrace.end());
    if (l == 0 && lr.residual > cfg.tol && cfg.throwOnMaxIters) {
      throw SolveError("solve_torsion: no convergence within maxIters (residual " +
                           std::to_string(lr.residual) + ")",
                       fullResidualTrace);
    }
  }

  TorsionSolution sol;
  sol.u = d.phi;  // same lattice
  sol.u.a = std::move(u);
  sol.freeMask.assign(d.phi.size(), 0);
  for (size_t i = 0; i < d.phi.size(); ++i) sol.freeMask[i] = d.phi.a[i] < 0;
  sol.gradU = interface_aware_gradient(sol.u, sol.freeMask);
  sol.cahnHoffman.resize(sol.gradU.size());
  for (size_t i = 0; i < sol.gradU.size(); ++i)
    sol.cahnHoffman[i] = F.cahn_hoffman(sol.gradU[i]);
  sol.divCH = divergence_field(sol.u, sol.cahnHoffman);
  sol.energy = lr.energy;
  sol.residualNorm = lr.residual;
  sol.iterations = totalIters;
  sol.restarts = totalRestarts;
  sol.energyTrace = std::move(fullEnergyTrace);
  sol.residualTrace = std::move(fullResidualTrace);
  sol.supGrad = 0;
  for (size_t i = 0; i < sol.gradU.size(); ++i)
    if (sol.freeMask[i]) sol.supGrad = std::max(sol.supGrad, norm(sol.gradU[i]));
  sol.criticalSet.assign(sol.gradU.size(), 0);
  for (size_t i = 0; i < sol.gradU.size(); ++i)
    if (sol.freeMask[i] && norm(sol.gradU[i]) < 1e-3 * sol.supGrad) sol.criticalSet[i] = 1;
  return sol;
}

std::vector<Vec> interface_aware_gradient(const Grid& u, const std::vector<char>& interiorMask) {
  std::vector<Vec> out(u.size());
  for (int k = 0; k < u.n[2]; ++k)
    for (int j = 0; j < u.n[1]; ++j)
      for (int i = 0; i < u.n[0]; ++i) {
        size_t id = u.idx(i, j, k);
        Vec g;
        int coords[3] = {i, j, k};
        for (int ax = 0; ax < u.dim; ++ax) {
          int cm = coords[ax] - 1, cp = coords[ax] + 1;
          bool hasM = cm >= 0, hasP = cp <= u.n[ax] - 1;
          size_t idM = 0, idP = 0;
          if (hasM) {
            int a[3] = {i, j, k};
            a[ax] = cm;
            idM = u.idx(a[0], a[1], a[2]);
            hasM = interiorMask[idM] || interiorMask[id];
          }
          if (hasP) {
            int a[3] = {i, j, k};
            a[ax] = cp;
            idP = u.idx(a[0], a[1], a[2]);
            hasP = interiorMask[idP] || interiorMask[id];
          }
          if (hasM && hasP)
            g[ax] = (u.a[idP] - u.a[idM]) / (2.0 * u.h);
          else if (hasP)
            g[ax] = (u.a[idP] - u.a[id]) / u.h;
          else if (hasM)
            g[ax] = (u.a[id] - u.a[idM]) / u.h;
          else
            g[ax] = 0;
        }
        out[id] = g;
      }
  return out;
}

double weak_residual(const TorsionSolution& t, const LevelSetDomain& d, const Integrand& F,
                     int testFieldCount, unsigned seed) {
  (void)F;
  const Grid& phi = d.phi;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(phi.size()) - 1);
  std::uniform_real_distribution<double> rad(4.0 * phi.h, 0.25);
  double worst = 0;
  double cellVol = std::pow(phi.h, d.dim);
  for (int f = 0; f < testFieldCount; ++f) {
    Vec c;
    double rho = 0;
    bool found = false;
    for (int tries = 0; tries < 4000 && !found; ++tries) {
      int id = pick(rng);
      int i = id % phi.n[0];
      int j = (id / phi.n[0]) % phi.n[1];
      int k = id / (phi.n[0] * phi.n[1]);
      rho = rad(rng);
      if (phi.a[phi.idx(i, j, k)] < -1.3 * rho) {
        c = phi.pos(i, j, k);
        found = true;
      }
    }
    if (!found) continue;
    double num = 0, den = 0;
    int lo[3], hi[3];
    for (int ax = 0; ax < 3; ++ax) {
      if (ax >= d.dim) {
        lo[ax] = hi[ax] = 0;
        continue;
      }
      lo[ax] = std::max(0, static_cast<int>((c[ax] - rho - phi.origin[ax]) / phi.h) - 1);
      hi[ax] = std::min(phi.n[ax] - 1, static_cast<int>((c[ax] + rho - phi.origin[ax]) / phi.h) + 1);
    }
    for (int k = lo[2]; k <= hi[2]; ++k)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int i = lo[0]; i <= hi[0]; ++i) {
          Vec x = phi.pos(i, j, k);
          Vec r = (x - c) * (1.0 / rho);
          double r2 = norm2(r);
          if (r2 >= 1.0) continue;
          double b = std::pow(1.0 - r2, 3);
          Vec gb = r * (-6.0 * std::pow(1.0 - r2, 2) / rho);
          size_t id = phi.idx(i, j, k);
          num += cellVol * (dot(t.cahnHoffman[id], gb) + b);
          den += cellVol * b;
        }
    if (den > 0) worst = std::max(worst, std::abs(num) / den);
  }
  return worst;
}

LipschitzReport lipschitz_check(const TorsionSolution& t, const LevelSetDomain& d,
                                const Integrand& F) {
  LipschitzReport rep;
  rep.supGrad = t.supGrad;
  BoundaryMesh mesh = extract_boundary(d);
  std::vector<double> H = aniso_mean_curvature(d, F, mesh);
  double minH = *std::min_element(H.begin(), H.end());
  if (minH <= 0) {
    rep.applicable = false;
    return rep;
  }
  rep.applicable = true;
  rep.bound = 1.0 / (F.bounds().mF * minH);
  rep.satisfied = rep.supGrad <= rep.bound * (1.0 + 5.0 * d.spacing);
  return rep;
}

// gradient of a node vector field, interior-sided near the interface
std::vector<Mat> node_jacobian(const Grid& g, const std::vector<Vec>& v,
                               const std::vector<char>& interiorMask) {
  std::vector<Mat> out(g.size());
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        size_t id = g.idx(i, j, k);
        Mat J;
        int coords[3] = {i, j, k};
        for (int ax = 0; ax < g.dim; ++ax) {
          int cm = coords[ax] - 1, cp = coords[ax] + 1;
          bool hasM = cm >= 0, hasP = cp <= g.n[ax] - 1;
          size_t idM = 0, idP = 0;
          if (hasM) {
            int a[3] = {i, j, k};
            a[ax] = cm;
            idM = g.idx(a[0], a[1], a[2]);
            hasM = interiorMask.empty() || interiorMask[idM] || interiorMask[id];
          }
          if (hasP) {
            int a[3] = {i, j, k};
            a[ax] = cp;
            idP = g.idx(a[0], a[1], a[2]);
            hasP = interiorMask.empty() || interiorMask[idP] || interiorMask[id];
          }
          for (int comp = 0; comp < g.dim; ++comp) {
            double der = 0;
            if (hasM && hasP)
              der = (v[idP][comp] - v[idM][comp]) / (2.0 * g.h);
            else if (hasP)
              der = (v[idP][comp] - v[id][comp]) / g.h;
            else if (hasM)
              der = (v[id][comp] - v[idM][comp]) / g.h;
            J.m[comp][ax] = der;  // J[i][j] = d V_i / d x_j
          }
        }
        out[id] = J;
      }
  return out;
}

ReillyReport reilly_gap(const TorsionSolution& t, const LevelSetDomain& d, const Integrand& F) {
  ReillyReport rep;
  std::vector<Mat> J = node_jacobian(t.u, t.cahnHoffman, t.freeMask);
  std::vector<double> integrand(t.u.size(), 0.0);
  for (size_t i = 0; i < t.u.size(); ++i) {
    double div = trace(J[i], d.dim);
    Mat J2 = matmul(J[i], J[i], d.dim);
    integrand[i] = div * div - trace(J2, d.dim);
  }
  rep.lhs = domain_integral_nodes(d, integrand);

  BoundaryMesh mesh = extract_boundary(d);
  std::vector<double> H = aniso_mean_curvature(d, F, mesh);
  double rhs = 0;
  for (size_t i = 0; i < mesh.points.size(); ++i) {
    Vec gu = interp_vector(t.u, t.gradU, mesh.points[i]);
    double Fg = F.value(gu);
    rhs += H[i] * Fg * Fg * F.value(mesh.normals[i]) * mesh.weights[i];
  }
  rep.rhs = rhs;
  rep.gap = rep.lhs - rep.rhs;

  // cells whose stencil touches the critical set
  const Grid& phi = d.phi;
  int kmax = d.dim == 3 ? phi.n[2] - 1 : 1;
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j + 1 < phi.n[1]; ++j)
      for (int i = 0; i + 1 < phi.n[0]; ++i) {
        bool touch = false;
        for (int cc = 0; cc < (1 << d.dim) && !touch; ++cc)
          touch = t.criticalSet[phi.idx(i + (cc & 1), j + ((cc >> 1) & 1), k + ((cc >> 2) & 1))];
        if (touch) ++rep.flaggedCells;
      }
  return rep;
}

double boundary_identity_check(const TorsionSolution& t, const LevelSetDomain& d,
                               const Integrand& F) {
  BoundaryMesh mesh = extract_boundary(d);
  std::vector<double> H = aniso_mean_curvature(d, F, mesh);
  // node Hessian of u via differences of the interface-aware gradient
  std::vector<Mat> Hu = node_jacobian(t.u, t.gradU, t.freeMask);
  double worst = 0;
  for (size_t i = 0; i < mesh.points.size(); ++i) {
    Vec gu = interp_vector(t.u, t.gradU, mesh.points[i]);
    if (norm(gu) < 1e-8) continue;
    double lap = interp_scalar(t.u, t.divCH, mesh.points[i]);
    Vec gF = F.gradient(gu);
    // interpolate the node Hessian at the sample
    Mat acc;
    const Grid& g = t.u;
    {
      Vec x = mesh.points[i];
      int ci[3] = {0, 0, 0};
      double tt[3] = {0, 0, 0};
      for (int ax = 0; ax < d.dim; ++ax) {
        double s = (x[ax] - g.origin[ax]) / g.h;
        int ii = std::clamp(static_cast<int>(std::floor(s)), 0, g.n[ax] - 2);
        ci[ax] = ii;
        tt[ax] = std::clamp(s - ii, 0.0, 1.0);
      }
      int km = d.dim == 3 ? 1 : 0;
      for (int dk = 0; dk <= km; ++dk)
        for (int dj = 0; dj <= 1; ++dj)
          for (int di = 0; di <= 1; ++di) {
            double w = (di ? tt[0] : 1 - tt[0]) * (dj ? tt[1] : 1 - tt[1]) *
                       (d.dim == 3 ? (dk ? tt[2] : 1 - tt[2]) : 1.0);
            acc = acc + Hu[g.idx(ci[0] + di, ci[1] + dj, ci[2] + dk)] * w;
          }
    }
    double quad = dot(gF, acc.apply(gF));
    double resid = std::abs(lap - quad - F.value(gu) * H[i]);
    worst = std::max(worst, resid);
  }
  return worst;
}

double bernstein_divergence_check(const std::vector<Vec>& v, const LevelSetDomain& d,
                                  double divTolerance) {
  const Grid& phi = d.phi;
  std::vector<double> divV = divergence_field(phi, v);
  // constancy over nodes well inside the domain
  double mean = 0;
  long cnt = 0;
  for (size_t i = 0; i < phi.size(); ++i)
    if (phi.a[i] < -2.0 * phi.h) {
      mean += divV[i];
      ++cnt;
    }
  if (cnt == 0) throw std::runtime_error("bernstein_divergence_check: domain too thin");
  mean /= cnt;
  for (size_t i = 0; i < phi.size(); ++i)
    if (phi.a[i] < -2.0 * phi.h && std::abs(divV[i] - mean) > divTolerance)
      throw std::invalid_argument("bernstein_divergence_check: divergence not constant");

  std::vector<Mat> J = node_jacobian(phi, v, {});
  std::vector<Vec> S(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) S[i] = v[i] * divV[i] - J[i].apply(v[i]);
  std::vector<double> divS = divergence_field(phi, S);
  std::vector<double> rhsField(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) {
    Mat J2 = matmul(J[i], J[i], d.dim);
    rhsField[i] = divV[i] * divV[i] - trace(J2, d.dim);
  }
  double lhs = domain_integral_nodes(d, divS);
  double rhs = domain_integral_nodes(d, rhsField);
  return std::abs(lhs - rhs);
}

}  // namespace anisolab
