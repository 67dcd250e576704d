#include "anisolab/deficits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace anisolab {

// ---------------------------------------------------------------------------
// potentials

double Potential::value(const Vec& x) const {
  if (type == "constant") return constant;
  if (type == "linear") return dot(slope, x);
  if (type == "quadratic-well") return coeff * norm2(x - center);
  throw std::invalid_argument("Potential: unknown type '" + type + "'");
}

Vec Potential::gradient(const Vec& x) const {
  if (type == "constant") return Vec{};
  if (type == "linear") return slope;
  if (type == "quadratic-well") return (x - center) * (2.0 * coeff);
  throw std::invalid_argument("Potential: unknown type '" + type + "'");
}

Potential Potential::constant_g(double c) {
  Potential p;
  p.type = "constant";
  p.constant = c;
  return p;
}

Potential Potential::linear_g(const Vec& slope) {
  Potential p;
  p.type = "linear";
  p.slope = slope;
  return p;
}

Potential Potential::quadratic_well(const Vec& center, double coeff) {
  Potential p;
  p.type = "quadratic-well";
  p.center = center;
  p.coeff = coeff;
  return p;
}

// ---------------------------------------------------------------------------
// boundary analysis and scalar deficits

BoundaryAnalysis analyze_boundary(const LevelSetDomain& d, const Integrand& F) {
  BoundaryAnalysis b;
  b.dim = d.dim;
  b.mesh = extract_boundary(d);
  CurvatureField cf = curvature_field(d, F);
  b.excludedNodes = cf.excludedNodes;
  b.H = aniso_mean_curvature(cf, d.phi, b.mesh);
  b.Fnu.resize(b.mesh.points.size());
  double energy = 0;
  for (size_t i = 0; i < b.mesh.points.size(); ++i) {
    b.Fnu[i] = F.value(b.mesh.normals[i]);
    energy += b.Fnu[i] * b.mesh.weights[i];
  }
  b.energy = energy;
  b.vol = volume(d);
  double n = d.dim - 1;
  b.H0 = n * b.energy / (d.dim * b.vol);
  b.minH = *std::min_element(b.H.begin(), b.H.end());
  b.kappa = b.minH / b.H0;
  return b;
}

double delta_F(const BoundaryAnalysis& b) {
  double acc = 0;
  for (size_t i = 0; i < b.H.size(); ++i) {
    double r = b.H[i] / b.H0 - 1.0;
    acc += r * r * b.Fnu[i] * b.mesh.weights[i];
  }
  return std::sqrt(acc / b.energy);
}

double delta_F(const LevelSetDomain& d, const Integrand& F) {
  return delta_F(analyze_boundary(d, F));
}

double delta_star(const BoundaryAnalysis& b) {
  double worst = 0;
  for (double h : b.H) worst = std::max(worst, std::abs(h / b.H0 - 1.0));
  return worst;
}

EtaResult eta_F(const BoundaryAnalysis& b) {
  EtaResult r;
  if (b.minH <= 0) {
    r.status = EtaStatus::CurvatureNotPositive;
    return r;
  }
  double n = b.dim - 1;
  double integral = 0;
  for (size_t i = 0; i < b.H.size(); ++i)
    integral += n * b.Fnu[i] / b.H[i] * b.mesh.weights[i];
  r.status = EtaStatus::Ok;
  r.hkGap = integral - b.dim * b.vol;
  r.value = 1.0 - b.dim * b.vol / integral;
  return r;
}

EtaResult eta_F(const LevelSetDomain& d, const Integrand& F) {
  return eta_F(analyze_boundary(d, F));
}

// ---------------------------------------------------------------------------
// Heintze-Karcher identity

HkIdentity hk_identity_residual(const BoundaryAnalysis& b, const LevelSetDomain& d,
                                const Integrand& F, const TorsionSolution& t) {
  HkIdentity out;
  if (b.minH <= 0) return out;
  out.applicable = true;
  double n = b.dim - 1;

  double Q = 0;  // int F(nu)/H^F
  double R = 0;  // int H^F F(grad u)^2 F(nu)
  double P = 0;  // int F(grad u) F(nu)
  for (size_t i = 0; i < b.mesh.points.size(); ++i) {
    Vec gu = interp_vector(t.u, t.gradU, b.mesh.points[i]);
    double Fg = F.value(gu);
    double w = b.mesh.weights[i];
    Q += b.Fnu[i] / b.H[i] * w;
    R += b.H[i] * Fg * Fg * b.Fnu[i] * w;
    P += Fg * b.Fnu[i] * w;
  }

  // volume trace term: int tr((grad CH)^2) - (div CH)^2/(n+1)
  std::vector<Mat> J = node_jacobian(t.u, t.cahnHoffman, t.freeMask);
  std::vector<double> integrand(t.u.size(), 0.0);
  for (size_t i = 0; i < t.u.size(); ++i) {
    double div = trace(J[i], b.dim);
    integrand[i] = trace(matmul(J[i], J[i], b.dim), b.dim) - div * div / b.dim;
  }
  double T = domain_integral_nodes(d, integrand);

  out.lhs = (b.vol / b.dim) * (n * Q - b.dim * b.vol);
  out.rhs = Q * T + Q * R - P * P;
  double scale = (b.dim * b.vol) * (b.dim * b.vol);
  out.residual = std::abs(out.lhs - out.rhs) / scale;
  return out;
}

HkIdentity hk_identity_residual(const LevelSetDomain& d, const Integrand& F,
                                const TorsionSolution& t) {
  return hk_identity_residual(analyze_boundary(d, F), d, F, t);
}

// ---------------------------------------------------------------------------
// estimate suite

std::vector<EstimateEntry> estimate_suite(const LevelSetDomain& d, const Integrand& F,
                                          const TorsionSolution& t, double wulffVolume) {
  BoundaryAnalysis b = analyze_boundary(d, F);
  EtaResult eta = eta_F(b);
  double dF = delta_F(b);
  int dim = d.dim;
  double n = dim - 1;
  std::vector<EstimateEntry> out;

  std::vector<Mat> J = node_jacobian(t.u, t.cahnHoffman, t.freeMask);
  Mat idOverD = Mat::identity(dim) * (1.0 / dim);

  // estimate 1: (Lambda*/lambda*) |Omega| eta >= int |grad CH - Id/(n+1)|^2
  {
    EstimateEntry e;
    e.name = "estimate1";
    std::vector<double> f(t.u.size(), 0.0);
    for (size_t i = 0; i < t.u.size(); ++i) {
      double fr = frobenius(J[i] - idOverD, dim);
      f[i] = fr * fr;
    }
    e.rhs = domain_integral_nodes(d, f);
    e.applicable = eta.status == EtaStatus::Ok;
    if (e.applicable)
      e.deficitSide = F.bounds().LambdaStar / F.bounds().lambdaStar * b.vol * eta.value;
    out.push_back(e);
  }

  // estimate 1b: |Omega| eta / lambda*^2 >= int |Hess u - Hess(F_*^2/2)(gF(grad u))/(n+1)|^2
  {
    EstimateEntry e;
    e.name = "estimate1b";
    GaugeField gauge(F);
    std::vector<Mat> Hu = node_jacobian(t.u, t.gradU, t.freeMask);
    std::vector<double> f(t.u.size(), 0.0);
    for (size_t i = 0; i < t.u.size(); ++i) {
      if (!t.freeMask[i] || t.criticalSet[i]) continue;
      Mat B = gauge.ch_hessian(F.gradient(t.gradU[i]));
      double fr = frobenius(Hu[i] - B * (1.0 / dim), dim);
      f[i] = fr * fr;
    }
    e.rhs = domain_integral_nodes(d, f);
    e.applicable = eta.status == EtaStatus::Ok;
    if (e.applicable) {
      double ls = F.bounds().lambdaStar;
      e.deficitSide = b.vol * eta.value / (ls * ls);
    }
    out.push_back(e);
  }

  // estimate 2: (1/kappa)(|Omega|^{(n+2)/(n+1)}/|K|^{1/(n+1)})(eta + dF^2/kappa)
  //             >= int |(n/H0)/(n+1) - F(grad u)|^2 F(nu)
  {
    EstimateEntry e;
    e.name = "estimate2";
    double target = (n / b.H0) / dim;
    double rhs = 0;
    for (size_t i = 0; i < b.mesh.points.size(); ++i) {
      Vec gu = interp_vector(t.u, t.gradU, b.mesh.points[i]);
      double r = target - F.value(gu);
      rhs += r * r * b.Fnu[i] * b.mesh.weights[i];
    }
    e.rhs = rhs;
    e.applicable = eta.status == EtaStatus::Ok && dF < 0.5 && b.kappa > 0;
    if (e.applicable) {
      e.deficitSide = (1.0 / b.kappa) * std::pow(b.vol, (n + 2.0) / dim) /
                      std::pow(wulffVolume, 1.0 / dim) * (eta.value + dF * dF / b.kappa);
    }
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// moments and bubbles

MomentReport pohozaev_moments(const TorsionSolution& t, const LevelSetDomain& d,
                              const Integrand& F, const std::vector<double>& alphas) {
  MomentReport rep;
  rep.alphas = alphas;
  auto moment = [&](double a) {
    std::vector<double> f(t.u.size(), 0.0);
    for (size_t i = 0; i < t.u.size(); ++i) {
      double v = F.value(t.gradU[i]);
      f[i] = a == 0.0 ? 1.0 : std::pow(v, a);
    }
    return domain_integral_nodes(d, f);
  };
  double dim = d.dim;
  for (double a : alphas) {
    double Ma = moment(a);
    double Ma1 = moment(a + 1.0);
    rep.values.push_back(Ma);
    rep.recursion.push_back(std::abs((dim + a) * Ma / (dim * dim) - (dim + 1.0 + a) * Ma1 / dim));
  }
  return rep;
}

BubbleEstimate bubble_recovery(const MomentReport& moments, int dim, double momentConstant,
                               int maxBubbles) {
  if (moments.values.size() < 2)
    throw std::invalid_argument("bubble_recovery: need at least two moments");
  int nAlpha = static_cast<int>(moments.alphas.size());
  std::vector<double> target(nAlpha);
  double targetNorm = 0;
  for (int i = 0; i < nAlpha; ++i) {
    double a = moments.alphas[i];
    target[i] = moments.values[i] * std::pow(dim, a) * (dim + a) / momentConstant;
    targetNorm += target[i] * target[i];
  }
  targetNorm = std::sqrt(targetNorm);

  auto fit_residual = [&](const std::vector<double>& tlog) {
    double acc = 0;
    for (int i = 0; i < nAlpha; ++i) {
      double m = 0;
      for (double tj : tlog) m += std::exp((dim + moments.alphas[i]) * tj);
      double e = m - target[i];
      acc += e * e;
    }
    return acc;
  };

  // Levenberg-Marquardt on log radii; a handful of deterministic starts
  auto fit = [&](int L, std::vector<double>& bestT) {
    double bestR = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> starts;
    double base = std::log(std::max(1e-6, std::pow(std::max(target[0], 1e-12) / L, 1.0 / dim)));
    starts.push_back(std::vector<double>(L, base));
    if (L > 1) {
      std::vector<double> spread(L);
      for (int j = 0; j < L; ++j) spread[j] = base + 0.5 * (j - (L - 1) / 2.0);
      starts.push_back(spread);
      std::vector<double> wide(L);
      for (int j = 0; j < L; ++j) wide[j] = base + 1.1 * (j - (L - 1) / 2.0);
      starts.push_back(wide);
    }
    for (auto tlog : starts) {
      double lm = 1e-3;
      double r = fit_residual(tlog);
      for (int it = 0; it < 300; ++it) {
        // normal equations J^T J + lm I
        std::vector<std::vector<double>> A(L, std::vector<double>(L, 0.0));
        std::vector<double> g(L, 0.0);
        for (int i = 0; i < nAlpha; ++i) {
          double p = dim + moments.alphas[i];
          double m = 0;
          std::vector<double> Ji(L);
          for (int j = 0; j < L; ++j) {
            double ex = std::exp(p * tlog[j]);
            m += ex;
            Ji[j] = p * ex;
          }
          double e = m - target[i];
          for (int j = 0; j < L; ++j) {
            g[j] += Ji[j] * e;
            for (int k = 0; k < L; ++k) A[j][k] += Ji[j] * Ji[k];
          }
        }
        for (int j = 0; j < L; ++j) A[j][j] += lm * (A[j][j] + 1e-12);
        // solve A dt = -g (Gaussian elimination, L <= 4)
        std::vector<double> dt(L, 0.0);
        {
          std::vector<std::vector<double>> M = A;
          std::vector<double> rhs(L);
          for (int j = 0; j < L; ++j) rhs[j] = -g[j];
          for (int col = 0; col < L; ++col) {
            int piv = col;
            for (int row = col + 1; row < L; ++row)
              if (std::abs(M[row][col]) > std::abs(M[piv][col])) piv = row;
            std::swap(M[col], M[piv]);
            std::swap(rhs[col], rhs[piv]);
            if (std::abs(M[col][col]) < 1e-300) {
              M[col][col] = 1e-300;
            }
            for (int row = col + 1; row < L; ++row) {
              double f = M[row][col] / M[col][col];
              for (int c2 = col; c2 < L; ++c2) M[row][c2] -= f * M[col][c2];
              rhs[row] -= f * rhs[col];
            }
          }
          for (int row = L - 1; row >= 0; --row) {
            double s = rhs[row];
            for (int c2 = row + 1; c2 < L; ++c2) s -= M[row][c2] * dt[c2];
            dt[row] = s / M[row][row];
          }
        }
        std::vector<double> cand(L);
        for (int j = 0; j < L; ++j) cand[j] = std::clamp(tlog[j] + dt[j], -6.0, 3.0);
        double rc = fit_residual(cand);
        if (rc < r) {
          tlog = cand;
          r = rc;
          lm = std::max(lm * 0.5, 1e-12);
          if (r < 1e-26) break;
        } else {
          lm *= 4.0;
          if (lm > 1e10) break;
        }
      }
      if (r < bestR) {
        bestR = r;
        bestT = tlog;
      }
    }
    return bestR;
  };

  std::vector<double> resById(maxBubbles + 1, std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> radiiById(maxBubbles + 1);
  double bestRel = std::numeric_limits<double>::infinity();
  for (int L = 1; L <= maxBubbles; ++L) {
    std::vector<double> tlog;
    double r2 = fit(L, tlog);
    double rel = std::sqrt(r2) / std::max(targetNorm, 1e-300);
    resById[L] = rel;
    bestRel = std::min(bestRel, rel);
    radiiById[L].resize(L);
    for (int j = 0; j < L; ++j) radiiById[L][j] = std::exp(tlog[j]);
    std::sort(radiiById[L].rbegin(), radiiById[L].rend());
  }

  BubbleEstimate est;
  for (int L = 1; L <= maxBubbles; ++L) {
    if (resById[L] <= std::max(2.5e-2, 2.0 * bestRel)) {
      est.count = L;
      est.radii = radiiById[L];
      est.residual = resById[L];
      est.recovered = resById[L] <= 0.15;
      return est;
    }
  }
  est.count = maxBubbles;
  est.radii = radiiById[maxBubbles];
  est.residual = resById[maxBubbles];
  est.recovered = false;
  return est;
}

// ---------------------------------------------------------------------------
// Wulff deficit and asymmetry

double wulff_deficit(const LevelSetDomain& d, const Integrand& F, double wulffVolume) {
  double n = d.dim - 1;
  double e = surface_energy(d, F);
  double v = volume(d);
  return e / (d.dim * std::pow(wulffVolume, 1.0 / d.dim) * std::pow(v, n / d.dim)) - 1.0;
}

AsymmetryResult asymmetry_index(const LevelSetDomain& d, const Integrand& F,
                                const WulffShape& K) {
  double vol = volume(d);
  double s = std::pow(vol / K.volume, 1.0 / d.dim);
  GaugeField gauge(F);
  Vec kCentroid = centroid(K.domain);
  Vec p0 = centroid(d) - kCentroid * s;
  auto objective = [&](const Vec& p) {
    return symmetric_difference(d, [&](const Vec& x) { return gauge.value(x - p) - s; }) / vol;
  };
  Vec best = p0;
  double bestVal = objective(p0);
  double h = d.spacing;
  // centroid start, then three shrinking 5^d local grids
  for (double step : {2.0 * h, 1.0 * h, 0.4 * h}) {
    Vec center = best;
    int kr = d.dim == 3 ? 2 : 0;
    for (int dk = -kr; dk <= kr; ++dk)
      for (int dj = -2; dj <= 2; ++dj)
        for (int di = -2; di <= 2; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          Vec p = center + Vec{di * step, dj * step, d.dim == 3 ? dk * step : 0.0};
          double v = objective(p);
          if (v < bestVal) {
            bestVal = v;
            best = p;
          }
        }
  }
  return {bestVal, best};
}

// ---------------------------------------------------------------------------
// capillarity multiplier

MultiplierResult capillarity_multiplier(const BoundaryAnalysis& b, const LevelSetDomain& d,
                                        const Potential& g) {
  MultiplierResult out;
  double divTerm = domain_integral(d, [&](const Vec& x) {
    return d.dim * g.value(x) + dot(x, g.gradient(x));
  });
  out.ell = b.H0 + divTerm / (d.dim * b.vol);
  double acc = 0;
  for (size_t i = 0; i < b.mesh.points.size(); ++i) {
    double r = b.H[i] + g.value(b.mesh.points[i]) - out.ell;
    acc += r * r * b.Fnu[i] * b.mesh.weights[i];
  }
  out.criticalResidual = std::sqrt(acc / b.energy);
  return out;
}

MultiplierResult capillarity_multiplier(const LevelSetDomain& d, const Integrand& F,
                                        const Potential& g) {
  return capillarity_multiplier(analyze_boundary(d, F), d, g);
}

// ---------------------------------------------------------------------------
// full report

DeficitReport deficit_report(const LevelSetDomain& d, const Integrand& F, const WulffShape& K,
                             const TorsionSolution* t, const DeficitOptions& opts) {
  DeficitReport rep;
  BoundaryAnalysis b = analyze_boundary(d, F);
  rep.energy = b.energy;
  rep.vol = b.vol;
  rep.H0 = b.H0;
  rep.kappa = b.kappa;
  rep.deltaF = delta_F(b);
  rep.deltaStar = delta_star(b);
  rep.eta = eta_F(b);
  rep.deltaW = wulff_deficit(d, F, K.volume);
  if (opts.withDiameter) rep.diam = diameter(d);
  if (opts.withAsymmetry) rep.asymmetry = asymmetry_index(d, F, K);
  if (t) {
    rep.hk = hk_identity_residual(b, d, F, *t);
    rep.reilly = reilly_gap(*t, d, F);
    if (opts.withEstimates) rep.estimates = estimate_suite(d, F, *t, K.volume);
    rep.moments = pohozaev_moments(*t, d, F, opts.alphas);
    rep.bubbles = bubble_recovery(rep.moments, d.dim, K.momentConstant);
    rep.solverResidual = t->residualNorm;
    rep.criticalFraction = t->critical_fraction();
  }
  return rep;
}

}  // namespace anisolab
