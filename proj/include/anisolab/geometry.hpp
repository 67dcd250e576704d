#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Small fixed-size vector/matrix helpers for ambient dimension d = n+1 in {2,3}.
// Unused components are kept at zero so most operations need no explicit dim.

namespace anisolab {

struct Vec {
  double v[3] = {0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double x, double y) : v{x, y, 0.0} {}
  Vec(double x, double y, double z) : v{x, y, z} {}

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  Vec operator+(const Vec& o) const { return {v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}; }
  Vec operator-(const Vec& o) const { return {v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}; }
  Vec operator*(double s) const { return {v[0] * s, v[1] * s, v[2] * s}; }
  Vec operator-() const { return {-v[0], -v[1], -v[2]}; }
  Vec& operator+=(const Vec& o) {
    v[0] += o.v[0];
    v[1] += o.v[1];
    v[2] += o.v[2];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    v[0] -= o.v[0];
    v[1] -= o.v[1];
    v[2] -= o.v[2];
    return *this;
  }
  Vec& operator*=(double s) {
    v[0] *= s;
    v[1] *= s;
    v[2] *= s;
    return *this;
  }
};

inline Vec operator*(double s, const Vec& a) { return a * s; }

inline double dot(const Vec& a, const Vec& b) {
  return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2];
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm2(const Vec& a) { return dot(a, a); }

inline Vec normalized(const Vec& a) {
  double n = norm(a);
  if (n == 0.0) throw std::domain_error("normalized: zero vector");
  return a * (1.0 / n);
}

struct Mat {
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

  static Mat identity(int dim) {
    Mat I;
    for (int i = 0; i < dim; ++i) I.m[i][i] = 1.0;
    return I;
  }

  Vec apply(const Vec& x) const {
    Vec r;
    for (int i = 0; i < 3; ++i)
      r[i] = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
    return r;
  }

  Mat operator+(const Mat& o) const {
    Mat r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
  }
  Mat operator-(const Mat& o) const {
    Mat r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
    return r;
  }
  Mat operator*(double s) const {
    Mat r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
    return r;
  }
};

inline Mat outer(const Vec& a, const Vec& b) {
  Mat r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = a[i] * b[j];
  return r;
}

inline Mat matmul(const Mat& a, const Mat& b, int dim) {
  Mat r;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double s = 0;
      for (int k = 0; k < dim; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

inline double trace(const Mat& a, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i) s += a.m[i][i];
  return s;
}

inline double frobenius(const Mat& a, int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += a.m[i][j] * a.m[i][j];
  return std::sqrt(s);
}

// Eigenvalues of a symmetric dim x dim matrix (ascending). dim = 1, 2 or 3.
inline std::array<double, 3> sym_eigenvalues(const Mat& a, int dim) {
  std::array<double, 3> ev = {0, 0, 0};
  if (dim == 1) {
    ev[0] = a.m[0][0];
  } else if (dim == 2) {
    double tr = a.m[0][0] + a.m[1][1];
    double det = a.m[0][0] * a.m[1][1] - a.m[0][1] * a.m[1][0];
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    ev[0] = tr / 2.0 - disc;
    ev[1] = tr / 2.0 + disc;
  } else {
    // trigonometric method for 3x3 symmetric matrices
    double q = (a.m[0][0] + a.m[1][1] + a.m[2][2]) / 3.0;
    double p2 = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double x = a.m[i][j] - (i == j ? q : 0.0);
        p2 += x * x;
      }
    double p = std::sqrt(p2 / 6.0);
    if (p < 1e-300) {
      ev[0] = ev[1] = ev[2] = q;
      return ev;
    }
    Mat b;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b.m[i][j] = (a.m[i][j] - (i == j ? q : 0.0)) / p;
    double detb = b.m[0][0] * (b.m[1][1] * b.m[2][2] - b.m[1][2] * b.m[2][1]) -
                  b.m[0][1] * (b.m[1][0] * b.m[2][2] - b.m[1][2] * b.m[2][0]) +
                  b.m[0][2] * (b.m[1][0] * b.m[2][1] - b.m[1][1] * b.m[2][0]);
    double r = std::clamp(detb / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    ev[2] = q + 2.0 * p * std::cos(phi);
    ev[0] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    ev[1] = 3.0 * q - ev[0] - ev[2];
    std::sort(ev.begin(), ev.begin() + 3);
  }
  return ev;
}

// Spectral norm via eigenvalues of M^T M.
inline double operator_norm(const Mat& a, int dim) {
  Mat ata;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double s = 0;
      for (int k = 0; k < dim; ++k) s += a.m[k][i] * a.m[k][j];
      ata.m[i][j] = s;
    }
  auto ev = sym_eigenvalues(ata, dim);
  return std::sqrt(std::max(0.0, ev[dim - 1]));
}

// Orthonormal basis of the hyperplane orthogonal to unit vector nu.
inline std::array<Vec, 2> tangent_basis(const Vec& nu, int dim) {
  std::array<Vec, 2> t;
  if (dim == 2) {
    t[0] = Vec{-nu[1], nu[0]};
    return t;
  }
  Vec a = std::abs(nu[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
  t[0] = normalized(a - nu * dot(a, nu));
  t[1] = Vec{nu[1] * t[0][2] - nu[2] * t[0][1], nu[2] * t[0][0] - nu[0] * t[0][2],
             nu[0] * t[0][1] - nu[1] * t[0][0]};
  return t;
}

// Volume fraction of the unit cube [0,1]^d on the side {l(x) <= 0} of the
// linear function l(x) = c + g.(x - center). Used for cut-cell quadrature.
inline double halfspace_cube_fraction(double c, const Vec& g_in, int dim) {
  double g[3];
  double t = -c;  // solve sum g_k (x_k - 1/2) <= t
  for (int k = 0; k < dim; ++k) {
    g[k] = g_in[k];
    if (g[k] < 0) g[k] = -g[k];  // mirror x_k -> 1-x_k
    t += g[k] / 2.0;             // shift to corner coordinates
  }
  // now: fraction of [0,1]^d with sum g_k x_k <= t, g_k >= 0
  double G = 0;
  int active[3];
  int na = 0;
  for (int k = 0; k < dim; ++k) {
    if (g[k] > 1e-14) {
      active[na++] = k;
      G += g[k];
    }
  }
  if (na == 0) return t >= 0 ? 1.0 : 0.0;
  if (t <= 0) return 0.0;
  if (t >= G) return 1.0;
  // inclusion-exclusion over the active axes
  double denom = 1.0;
  for (int a = 0; a < na; ++a) denom *= g[active[a]];
  for (int a = 2; a <= na; ++a) denom *= a;  // na!
  double sum = 0.0;
  for (int mask = 0; mask < (1 << na); ++mask) {
    double s = t;
    int bits = 0;
    for (int a = 0; a < na; ++a)
      if (mask & (1 << a)) {
        s -= g[active[a]];
        ++bits;
      }
    if (s <= 0) continue;
    double term = 1.0;
    for (int a = 0; a < na; ++a) term *= s;
    sum += (bits % 2 == 0 ? term : -term);
  }
  return std::clamp(sum / denom, 0.0, 1.0);
}

// Quasi-uniform samples of the unit sphere. 2D: uniform angles with a golden
// offset (avoids axis alignment). 3D: Fibonacci lattice.
inline std::vector<Vec> sphere_sample(int dim, int count) {
  std::vector<Vec> pts;
  pts.reserve(count);
  if (dim == 2) {
    const double off = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < count; ++i) {
      double th = 2.0 * M_PI * (i + off) / count;
      pts.push_back(Vec{std::cos(th), std::sin(th)});
    }
  } else {
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / count;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = ga * i;
      pts.push_back(Vec{r * std::cos(th), r * std::sin(th), z});
    }
  }
  return pts;
}

}  // namespace anisolab
