#pragma once

// Test-side oracles, kept independent of the implementation paths they check:
// quadrature, dense-sample suprema, finite differences.

#include <cmath>
#include <functional>

#include "anisolab/geometry.hpp"

namespace oracle {

using anisolab::Vec;

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 != 0) ++n;
  double h = (b - a) / n, acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// sup over the sphere of x.nu / F(nu), dense scan + local golden refinement
inline double dense_gauge(const std::function<double(const Vec&)>& F, const Vec& x, int dim,
                          int samples = 8192) {
  double best = -1e300;
  double bestTh = 0;
  Vec bestNu;
  if (dim == 2) {
    for (int i = 0; i < samples; ++i) {
      double th = 2 * M_PI * i / samples;
      Vec nu{std::cos(th), std::sin(th)};
      double v = anisolab::dot(x, nu) / F(nu);
      if (v > best) {
        best = v;
        bestTh = th;
      }
    }
    auto g = [&](double th) {
      Vec nu{std::cos(th), std::sin(th)};
      return anisolab::dot(x, nu) / F(nu);
    };
    double lo = bestTh - 2 * M_PI / samples, hi = bestTh + 2 * M_PI / samples;
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
    double fc = g(c), fd = g(d);
    for (int it = 0; it < 80; ++it) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - phi * (hi - lo);
        fc = g(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + phi * (hi - lo);
        fd = g(d);
      }
    }
    return std::max(fc, fd);
  }
  for (const Vec& nu : anisolab::sphere_sample(3, samples)) {
    double v = anisolab::dot(x, nu) / F(nu);
    if (v > best) {
      best = v;
      bestNu = nu;
    }
  }
  // local hill climb
  double step = 0.02;
  Vec nu = bestNu;
  for (int it = 0; it < 400; ++it) {
    bool improved = false;
    for (int ax = 0; ax < 3; ++ax)
      for (int dir = -1; dir <= 1; dir += 2) {
        Vec cand = nu;
        cand[ax] += dir * step;
        cand = anisolab::normalized(cand);
        double v = anisolab::dot(x, cand) / F(cand);
        if (v > best) {
          best = v;
          nu = cand;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
    if (step < 1e-12) break;
  }
  return best;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, int dim,
                       double step) {
  Vec g;
  for (int i = 0; i < dim; ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (f(xp) - f(xm)) / (2 * step);
  }
  return g;
}

}  // namespace oracle
