#include "anisolab/integrand.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace anisolab {

namespace {

constexpr double kZoneFactor = 0.25;  // blend half-width = kZoneFactor * eps * |v|

// C^2 blend of max(t, 0) on |t| < z: derivative ramps along 3u^2 - 2u^3.
inline double blend_value(double t, double z) {
  if (t <= -z) return 0.0;
  if (t >= z) return t;
  double u = (t + z) / (2.0 * z);
  return 2.0 * z * (u * u * u - 0.5 * u * u * u * u);
}

inline double blend_dt(double t, double z) {
  if (t <= -z) return 0.0;
  if (t >= z) return 1.0;
  double u = (t + z) / (2.0 * z);
  return u * u * (3.0 - 2.0 * u);
}

// partial derivative with respect to the zone half-width z
inline double blend_dz(double t, double z) {
  if (t <= -z || t >= z) return 0.0;
  double u = (t + z) / (2.0 * z);
  return 2.0 * u * u * u - u * u * u * u - blend_dt(t, z) * (2.0 * u - 1.0);
}

double golden_maximize(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc > fd ? c : d;
}

}  // namespace

std::string kind_name(IntegrandKind k) {
  switch (k) {
    case IntegrandKind::Isotropic: return "isotropic";
    case IntegrandKind::Ellipse: return "ellipse";
    case IntegrandKind::PNorm: return "pnorm";
    case IntegrandKind::SmoothedCrystalline: return "smoothed-crystalline";
    case IntegrandKind::Tabulated: return "tabulated";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// PeriodicSpline

PeriodicSpline::PeriodicSpline(std::vector<double> values) : y_(std::move(values)) {
  int n = static_cast<int>(y_.size());
  if (n < 4) throw std::invalid_argument("PeriodicSpline: need at least 4 values");
  h_ = 2.0 * M_PI / n;
  // cyclic tridiagonal system for the nodal second derivatives:
  //   (m[i-1] + 4 m[i] + m[i+1]) * h/6 = (y[i+1] - 2 y[i] + y[i-1]) / h
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) {
    double ym = y_[(i + n - 1) % n], yp = y_[(i + 1) % n];
    rhs[i] = 6.0 * (yp - 2.0 * y_[i] + ym) / (h_ * h_);
  }
  // Sherman-Morrison for the cyclic terms
  std::vector<double> diag(n, 4.0), u(n, 0.0);
  const double gamma = -4.0;
  diag[0] -= gamma;
  diag[n - 1] -= 1.0 / gamma;
  u[0] = gamma;
  u[n - 1] = 1.0;
  auto thomas = [&](std::vector<double> b) {
    std::vector<double> c(n), x(n);
    c[0] = 1.0 / diag[0];
    x[0] = b[0] / diag[0];
    for (int i = 1; i < n; ++i) {
      double m = 1.0 / (diag[i] - c[i - 1]);
      c[i] = m;
      x[i] = (b[i] - x[i - 1]) * m;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
    return x;
  };
  auto x1 = thomas(rhs);
  auto x2 = thomas(u);
  double fact = (x1[0] + x1[n - 1] / gamma) / (1.0 + x2[0] + x2[n - 1] / gamma);
  m_.resize(n);
  for (int i = 0; i < n; ++i) m_[i] = x1[i] - fact * x2[i];
}

double PeriodicSpline::eval(double theta) const {
  int n = static_cast<int>(y_.size());
  double t = std::fmod(theta, 2.0 * M_PI);
  if (t < 0) t += 2.0 * M_PI;
  int i = std::min(static_cast<int>(t / h_), n - 1);
  double s = (t - i * h_) / h_;
  int j = (i + 1) % n;
  double a = 1.0 - s;
  return a * y_[i] + s * y_[j] +
         h_ * h_ / 6.0 * ((a * a * a - a) * m_[i] + (s * s * s - s) * m_[j]);
}

double PeriodicSpline::deriv(double theta) const {
  int n = static_cast<int>(y_.size());
  double t = std::fmod(theta, 2.0 * M_PI);
  if (t < 0) t += 2.0 * M_PI;
  int i = std::min(static_cast<int>(t / h_), n - 1);
  double s = (t - i * h_) / h_;
  int j = (i + 1) % n;
  double a = 1.0 - s;
  return (y_[j] - y_[i]) / h_ +
         h_ / 6.0 * ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * s * s - 1.0) * m_[j]);
}

double PeriodicSpline::deriv2(double theta) const {
  int n = static_cast<int>(y_.size());
  double t = std::fmod(theta, 2.0 * M_PI);
  if (t < 0) t += 2.0 * M_PI;
  int i = std::min(static_cast<int>(t / h_), n - 1);
  double s = (t - i * h_) / h_;
  int j = (i + 1) % n;
  return (1.0 - s) * m_[i] + s * m_[j];
}

// ---------------------------------------------------------------------------
// construction

Integrand Integrand::isotropic(int dim) {
  Integrand f;
  f.kind_ = IntegrandKind::Isotropic;
  f.dim_ = dim;
  f.finalize();
  return f;
}

Integrand Integrand::ellipse(const std::vector<double>& semiaxes) {
  Integrand f;
  f.kind_ = IntegrandKind::Ellipse;
  f.dim_ = static_cast<int>(semiaxes.size());
  if (f.dim_ != 2 && f.dim_ != 3) throw std::invalid_argument("ellipse: needs 2 or 3 semi-axes");
  for (double a : semiaxes)
    if (!(a > 0)) throw std::invalid_argument("ellipse: semi-axes must be positive");
  f.axes_ = semiaxes;
  f.finalize();
  return f;
}

Integrand Integrand::pnorm(double p, int dim) {
  Integrand f;
  f.kind_ = IntegrandKind::PNorm;
  f.dim_ = dim;
  if (!(p > 1.0)) throw std::invalid_argument("pnorm: exponent must exceed 1");
  f.p_ = p;
  f.finalize();
  return f;
}

Integrand Integrand::smoothed_crystal(const std::vector<Vec>& facetNormals,
                                      const std::vector<double>& weights, double eps, int dim) {
  Integrand f;
  f.kind_ = IntegrandKind::SmoothedCrystalline;
  f.dim_ = dim;
  if (facetNormals.size() < 3 || facetNormals.size() != weights.size())
    throw std::invalid_argument("smoothed_crystal: need matching normals/weights, at least 3");
  if (eps < 0) throw std::invalid_argument("smoothed_crystal: eps must be nonnegative");
  f.eps_ = eps;
  f.weights_ = weights;
  for (const Vec& n : facetNormals) f.normals_.push_back(normalized(n));
  for (double w : weights)
    if (!(w > 0)) throw std::invalid_argument("smoothed_crystal: weights must be positive");
  // positivity of the 1-homogeneous extension on a sphere sample
  for (const Vec& nu : sphere_sample(dim, dim == 2 ? 256 : 2048)) {
    if (f.raw_value(nu) <= 1e-12)
      throw std::invalid_argument("smoothed_crystal: facet set does not span positively");
  }
  f.finalize();
  return f;
}

Integrand Integrand::tabulated(const std::vector<double>& values) {
  Integrand f;
  f.kind_ = IntegrandKind::Tabulated;
  f.dim_ = 2;
  if (values.size() < 8) throw std::invalid_argument("tabulated: need at least 8 samples");
  double vmax = 0;
  for (double v : values) {
    if (!(v > 0)) throw std::invalid_argument("tabulated: support values must be positive");
    vmax = std::max(vmax, v);
  }
  f.table_ = values;
  f.spline_ = PeriodicSpline(values);
  // convexity of the 1-homogeneous extension: f + f'' >= 0
  int n = static_cast<int>(values.size());
  for (int i = 0; i < 8 * n; ++i) {
    double th = 2.0 * M_PI * i / (8.0 * n);
    if (f.spline_.eval(th) + f.spline_.deriv2(th) < -1e-8 * vmax)
      throw std::invalid_argument("tabulated: table is not convex (f + f'' < 0)");
  }
  f.finalize();
  return f;
}

void Integrand::finalize() {
  bounds_ = ellipticity_estimate(dim_ == 2 ? 2048 : 4096);
}

Integrand Integrand::scaled(double r) const {
  if (!(r > 0)) throw std::invalid_argument("scaled: factor must be positive");
  Integrand f = *this;
  f.scale_ *= r;
  f.bounds_.mF *= r;
  f.bounds_.MF *= r;
  f.bounds_.lambda *= r;
  f.bounds_.Lambda *= r;
  f.bounds_.lambdaStar *= r * r;
  f.bounds_.LambdaStar *= r * r;
  return f;
}

bool Integrand::smooth_elliptic() const {
  return !(kind_ == IntegrandKind::SmoothedCrystalline && eps_ == 0.0);
}

// ---------------------------------------------------------------------------
// raw evaluation (without the overall scale factor)

double Integrand::raw_value(const Vec& v) const {
  switch (kind_) {
    case IntegrandKind::Isotropic:
      return norm(v);
    case IntegrandKind::Ellipse: {
      double s = 0;
      for (int i = 0; i < dim_; ++i) s += axes_[i] * axes_[i] * v[i] * v[i];
      return std::sqrt(s);
    }
    case IntegrandKind::PNorm: {
      double s = 0;
      for (int i = 0; i < dim_; ++i) s += std::pow(std::abs(v[i]), p_);
      return std::pow(s, 1.0 / p_);
    }
    case IntegrandKind::SmoothedCrystalline: {
      double s = norm(v);
      if (s == 0) return 0.0;
      double z = kZoneFactor * eps_ * s;
      double tot = eps_ * eps_ / 16.0 * s;
      for (size_t i = 0; i < normals_.size(); ++i) {
        double t = dot(normals_[i], v);
        tot += weights_[i] * (eps_ > 0 ? blend_value(t, z) : std::max(t, 0.0));
      }
      return tot;
    }
    case IntegrandKind::Tabulated: {
      double s = std::hypot(v[0], v[1]);
      if (s == 0) return 0.0;
      return s * spline_.eval(std::atan2(v[1], v[0]));
    }
  }
  return 0;
}

Vec Integrand::raw_gradient(const Vec& v) const {
  switch (kind_) {
    case IntegrandKind::Isotropic:
      return v * (1.0 / norm(v));
    case IntegrandKind::Ellipse: {
      double f = raw_value(v);
      Vec g;
      for (int i = 0; i < dim_; ++i) g[i] = axes_[i] * axes_[i] * v[i] / f;
      return g;
    }
    case IntegrandKind::PNorm: {
      double f = raw_value(v);
      Vec g;
      for (int i = 0; i < dim_; ++i) {
        double a = std::abs(v[i]);
        g[i] = (v[i] >= 0 ? 1.0 : -1.0) * std::pow(a, p_ - 1.0) * std::pow(f, 1.0 - p_);
      }
      return g;
    }
    case IntegrandKind::SmoothedCrystalline: {
      double s = norm(v);
      double z = kZoneFactor * eps_ * s;
      Vec nu = v * (1.0 / s);
      Vec g = nu * (eps_ * eps_ / 16.0);
      for (size_t i = 0; i < normals_.size(); ++i) {
        double t = dot(normals_[i], v);
        g += normals_[i] * (weights_[i] * blend_dt(t, z));
        g += nu * (weights_[i] * blend_dz(t, z) * kZoneFactor * eps_);
      }
      return g;
    }
    case IntegrandKind::Tabulated: {
      double th = std::atan2(v[1], v[0]);
      double f = spline_.eval(th), fp = spline_.deriv(th);
      double s = std::hypot(v[0], v[1]);
      Vec nu{v[0] / s, v[1] / s};
      Vec tau{-nu[1], nu[0]};
      return nu * f + tau * fp;
    }
  }
  return {};
}

Mat Integrand::raw_hessian(const Vec& v) const {
  switch (kind_) {
    case IntegrandKind::Isotropic: {
      double s = norm(v);
      Vec nu = v * (1.0 / s);
      Mat h = Mat::identity(dim_) - outer(nu, nu);
      return h * (1.0 / s);
    }
    case IntegrandKind::Ellipse: {
      double f = raw_value(v);
      Vec av;
      Mat h;
      for (int i = 0; i < dim_; ++i) {
        av[i] = axes_[i] * axes_[i] * v[i];
        h.m[i][i] = axes_[i] * axes_[i] / f;
      }
      return h - outer(av, av) * (1.0 / (f * f * f));
    }
    case IntegrandKind::PNorm: {
      double f = raw_value(v);
      double fl = std::max(f, 1e-300);
      Mat h;
      Vec w;  // |v_i|^{p-1} s_i
      for (int i = 0; i < dim_; ++i) {
        double a = std::max(std::abs(v[i]), p_ < 2.0 ? 1e-14 * fl : 0.0);
        w[i] = (v[i] >= 0 ? 1.0 : -1.0) * std::pow(a, p_ - 1.0);
        h.m[i][i] = (p_ - 1.0) * std::pow(fl, 1.0 - p_) * std::pow(a, p_ - 2.0);
      }
      return h - outer(w, w) * ((p_ - 1.0) * std::pow(fl, 1.0 - 2.0 * p_));
    }
    case IntegrandKind::SmoothedCrystalline: {
      // central differences of the analytic gradient; the blend is C^2 so the
      // piecewise-third-derivative truncation stays tiny
      double s = norm(v);
      double step = 1e-6 * s;
      Mat h;
      for (int j = 0; j < dim_; ++j) {
        Vec vp = v, vm = v;
        vp[j] += step;
        vm[j] -= step;
        Vec gp = raw_gradient(vp), gm = raw_gradient(vm);
        for (int i = 0; i < dim_; ++i) h.m[i][j] = (gp[i] - gm[i]) / (2.0 * step);
      }
      for (int i = 0; i < dim_; ++i)
        for (int j = i + 1; j < dim_; ++j) {
          double a = 0.5 * (h.m[i][j] + h.m[j][i]);
          h.m[i][j] = h.m[j][i] = a;
        }
      return h;
    }
    case IntegrandKind::Tabulated: {
      double th = std::atan2(v[1], v[0]);
      double f = spline_.eval(th), fpp = spline_.deriv2(th);
      double s = std::hypot(v[0], v[1]);
      Vec tau{-v[1] / s, v[0] / s};
      return outer(tau, tau) * ((f + fpp) / s);
    }
  }
  return {};
}

double Integrand::value(const Vec& v) const { return scale_ * raw_value(v); }

Vec Integrand::gradient(const Vec& v) const {
  if (norm(v) == 0) throw std::domain_error("Integrand::gradient: zero vector");
  if (!smooth_elliptic())
    throw std::domain_error("crystalline integrand (eps = 0): use a smoothed family member");
  return raw_gradient(v) * scale_;
}

Mat Integrand::hessian(const Vec& v) const {
  if (norm(v) == 0) throw std::domain_error("Integrand::hessian: zero vector");
  if (!smooth_elliptic())
    throw std::domain_error("crystalline integrand (eps = 0): use a smoothed family member");
  return raw_hessian(v) * scale_;
}

EvalResult Integrand::evaluate(const Vec& v) const {
  return {value(v), gradient(v), hessian(v)};
}

Vec Integrand::cahn_hoffman(const Vec& v) const {
  if (norm(v) == 0) return Vec{};
  return gradient(v) * value(v);
}

Mat Integrand::cahn_hoffman_jacobian(const Vec& v) const {
  Vec g = gradient(v);
  return outer(g, g) + hessian(v) * value(v);
}

// ---------------------------------------------------------------------------
// gauge / dual

bool Integrand::closed_form_dual() const {
  return kind_ == IntegrandKind::Isotropic || kind_ == IntegrandKind::Ellipse ||
         kind_ == IntegrandKind::PNorm;
}

double Integrand::closed_dual_value(const Vec& x) const {
  switch (kind_) {
    case IntegrandKind::Isotropic:
      return norm(x) / scale_;
    case IntegrandKind::Ellipse: {
      double s = 0;
      for (int i = 0; i < dim_; ++i) s += x[i] * x[i] / (axes_[i] * axes_[i]);
      return std::sqrt(s) / scale_;
    }
    case IntegrandKind::PNorm: {
      double q = p_ / (p_ - 1.0);
      double s = 0;
      for (int i = 0; i < dim_; ++i) s += std::pow(std::abs(x[i]), q);
      return std::pow(s, 1.0 / q) / scale_;
    }
    default:
      break;
  }
  throw std::logic_error("closed_dual_value");
}

Vec Integrand::closed_dual_gradient(const Vec& x) const {
  switch (kind_) {
    case IntegrandKind::Isotropic:
      return x * (1.0 / (norm(x) * scale_));
    case IntegrandKind::Ellipse: {
      double fs = closed_dual_value(x) * scale_;
      Vec g;
      for (int i = 0; i < dim_; ++i) g[i] = x[i] / (axes_[i] * axes_[i] * fs * scale_);
      return g;
    }
    case IntegrandKind::PNorm: {
      double q = p_ / (p_ - 1.0);
      double fs = closed_dual_value(x) * scale_;  // raw q-norm
      Vec g;
      for (int i = 0; i < dim_; ++i) {
        double a = std::abs(x[i]);
        g[i] = (x[i] >= 0 ? 1.0 : -1.0) * std::pow(a, q - 1.0) * std::pow(fs, 1.0 - q) / scale_;
      }
      return g;
    }
    default:
      break;
  }
  throw std::logic_error("closed_dual_gradient");
}

Integrand::GaugeResult Integrand::numeric_gauge(const Vec& x, const Vec* warmStart) const {
  double xn = norm(x);
  if (xn == 0) return {0.0, Vec{}};
  Vec xd = x * (1.0 / xn);
  auto objective = [&](const Vec& nu) { return dot(xd, nu) / value(nu); };

  if (dim_ == 2) {
    auto objTh = [&](double th) { return objective(Vec{std::cos(th), std::sin(th)}); };
    int n = 1 << 10;
    double bestTh = 0, best = -std::numeric_limits<double>::infinity();
    if (warmStart && norm(*warmStart) > 0) {
      bestTh = std::atan2((*warmStart)[1], (*warmStart)[0]);
      best = objTh(bestTh);
      n = 256;  // guard scan: the maximizer can jump across facets
    }
    for (int i = 0; i < n; ++i) {
      double th = 2.0 * M_PI * i / n;
      double val = objTh(th);
      if (val > best) {
        best = val;
        bestTh = th;
      }
    }
    double d = 2.0 * M_PI / n;
    double th = golden_maximize(objTh, bestTh - d, bestTh + d, 60);
    if (smooth_elliptic()) {
      // Newton on g'(th): the golden bracket only localizes the maximizer to
      // O(sqrt(machine eps)) in angle, not enough for dual derivatives
      auto dg = [&](double a) {
        Vec nu{std::cos(a), std::sin(a)};
        Vec tau{-nu[1], nu[0]};
        double f = value(nu);
        Vec gf = raw_gradient(nu) * scale_;
        return dot(xd, tau) / f - dot(xd, nu) * dot(gf, tau) / (f * f);
      };
      for (int it = 0; it < 8; ++it) {
        double gp = dg(th);
        if (std::abs(gp) < 1e-15) break;
        double dth = 1e-6;
        double gpp = (dg(th + dth) - dg(th - dth)) / (2.0 * dth);
        if (!(gpp < -1e-300)) break;
        double stepN = std::clamp(gp / gpp, -d, d);
        th -= stepN;
      }
    }
    Vec nu{std::cos(th), std::sin(th)};
    return {xn * objective(nu), nu * (1.0 / value(nu))};
  }

  // 3D: Fibonacci scan then projected Newton ascent on the sphere
  Vec nu;
  double best = -std::numeric_limits<double>::infinity();
  if (warmStart && norm(*warmStart) > 0) {
    nu = normalized(*warmStart);
    best = objective(nu);
    for (const Vec& s : sphere_sample(3, 512)) {
      double val = objective(s);
      if (val > best) {
        best = val;
        nu = s;
      }
    }
  } else {
    for (const Vec& s : sphere_sample(3, 1 << 14)) {
      double val = objective(s);
      if (val > best) {
        best = val;
        nu = s;
      }
    }
  }
  bool smooth = smooth_elliptic();
  for (int it = 0; it < 80; ++it) {
    double f = value(nu);
    double g = dot(xd, nu) / f;
    Vec dgrad = xd * (1.0 / f);
    Mat dhess;
    if (smooth) {
      Vec gf = raw_gradient(nu) * scale_;
      dgrad -= gf * (dot(xd, nu) / (f * f));
      Mat hf = raw_hessian(nu) * scale_;
      dhess = (outer(xd, gf) + outer(gf, xd)) * (-1.0 / (f * f)) -
              hf * (dot(xd, nu) / (f * f)) + outer(gf, gf) * (2.0 * dot(xd, nu) / (f * f * f));
    }
    auto tb = tangent_basis(nu, 3);
    double g1 = dot(dgrad, tb[0]), g2 = dot(dgrad, tb[1]);
    double gn = std::hypot(g1, g2);
    if (gn < 1e-15) break;
    double s1 = 0, s2 = 0;
    bool newtonOk = false;
    if (smooth) {
      double radial = dot(dgrad, nu);
      double h11 = dot(tb[0], dhess.apply(tb[0])) - radial;
      double h22 = dot(tb[1], dhess.apply(tb[1])) - radial;
      double h12 = dot(tb[0], dhess.apply(tb[1]));
      double det = h11 * h22 - h12 * h12;
      if (det > 0 && h11 < 0) {  // negative definite: valid for ascent
        s1 = -(h22 * g1 - h12 * g2) / det;
        s2 = -(h11 * g2 - h12 * g1) / det;
        newtonOk = true;
      }
    }
    if (!newtonOk) {
      double step = 0.5;
      s1 = step * g1;
      s2 = step * g2;
    }
    double scale = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      Vec cand = normalized(nu + tb[0] * (s1 * scale) + tb[1] * (s2 * scale));
      double val = objective(cand);
      if (val > g) {
        nu = cand;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }
  return {xn * objective(nu), nu * (1.0 / value(nu))};
}

double Integrand::gauge(const Vec& x) const {
  if (norm(x) == 0) return 0.0;
  if (closed_form_dual()) return closed_dual_value(x);
  return numeric_gauge(x).value;
}

Vec Integrand::gauge_gradient(const Vec& x) const {
  if (norm(x) == 0) throw std::domain_error("gauge_gradient: zero vector");
  if (!smooth_elliptic())
    throw std::domain_error("crystalline integrand (eps = 0): use a smoothed family member");
  if (closed_form_dual()) return closed_dual_gradient(x);
  return numeric_gauge(x).maximizer;
}

Vec Integrand::dual_cahn_hoffman(const Vec& x) const {
  if (norm(x) == 0) return Vec{};
  if (closed_form_dual()) return closed_dual_gradient(x) * closed_dual_value(x);
  auto r = numeric_gauge(x);
  return r.maximizer * r.value;
}

Mat Integrand::closed_dual_ch_hessian(const Vec& x) const {
  switch (kind_) {
    case IntegrandKind::Isotropic:
      return Mat::identity(dim_) * (1.0 / (scale_ * scale_));
    case IntegrandKind::Ellipse: {
      Mat h;
      for (int i = 0; i < dim_; ++i) h.m[i][i] = 1.0 / (axes_[i] * axes_[i] * scale_ * scale_);
      return h;
    }
    case IntegrandKind::PNorm: {
      // q-norm G: Hess(G^2/2) = grad G x grad G + G Hess G
      double q = p_ / (p_ - 1.0);
      double G = closed_dual_value(x) * scale_;
      double Gl = std::max(G, 1e-300);
      Vec g;
      Mat h;
      Vec w;
      for (int i = 0; i < dim_; ++i) {
        double a = std::abs(x[i]);
        double af = std::max(a, q < 2.0 ? 1e-14 * Gl : 0.0);
        g[i] = (x[i] >= 0 ? 1.0 : -1.0) * std::pow(a, q - 1.0) * std::pow(Gl, 1.0 - q);
        w[i] = (x[i] >= 0 ? 1.0 : -1.0) * std::pow(af, q - 1.0);
        h.m[i][i] = (q - 1.0) * std::pow(Gl, 1.0 - q) * std::pow(af, q - 2.0);
      }
      Mat hg = h - outer(w, w) * ((q - 1.0) * std::pow(Gl, 1.0 - 2.0 * q));
      return (outer(g, g) + hg * G) * (1.0 / (scale_ * scale_));
    }
    default:
      break;
  }
  throw std::logic_error("closed_dual_ch_hessian");
}

Mat Integrand::dual_cahn_hoffman_hessian(const Vec& x) const {
  if (norm(x) == 0) throw std::domain_error("dual_cahn_hoffman_hessian: zero vector");
  if (closed_form_dual()) return closed_dual_ch_hessian(x);
  if (!smooth_elliptic())
    throw std::domain_error("crystalline integrand (eps = 0): use a smoothed family member");
  if (dim_ == 2) {
    // With w(th) = nu(th)/F(nu(th)) parametrizing {F = 1} and th* the
    // maximizer of x.w, the implicit function theorem gives
    //   Hess F_* = -w' x w' / (x.w''),  Hess(F_*^2/2) = w x w + F_* Hess F_*.
    auto r = numeric_gauge(x);
    Vec w = r.maximizer;
    double th = std::atan2(w[1], w[0]);
    Vec nu{std::cos(th), std::sin(th)};
    Vec tau{-nu[1], nu[0]};
    double f = value(nu);
    Vec gf = raw_gradient(nu) * scale_;
    Mat hf = raw_hessian(nu) * scale_;
    double fp = dot(gf, tau);
    double fpp = dot(tau, hf.apply(tau)) - f;  // d2/dth2 of F(nu(th)) minus Euler part
    Vec wp = tau * (1.0 / f) - nu * (fp / (f * f));
    Vec wpp = nu * (-1.0 / f) - tau * (2.0 * fp / (f * f)) - nu * (fpp / (f * f)) +
              nu * (2.0 * fp * fp / (f * f * f));
    double denom = dot(x, wpp);
    if (std::abs(denom) < 1e-300) throw std::runtime_error("dual hessian: degenerate contact");
    return outer(w, w) - outer(wp, wp) * (r.value / denom);
  }
  // 3D numeric fallback: central differences over the dual gradient
  double step = 2e-5 * norm(x);
  Vec warm = numeric_gauge(x).maximizer;
  Mat h;
  for (int j = 0; j < dim_; ++j) {
    Vec xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    auto rp = numeric_gauge(xp, &warm);
    auto rm = numeric_gauge(xm, &warm);
    Vec gp = rp.maximizer * rp.value;
    Vec gm = rm.maximizer * rm.value;
    for (int i = 0; i < dim_; ++i) h.m[i][j] = (gp[i] - gm[i]) / (2.0 * step);
  }
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      double a = 0.5 * (h.m[i][j] + h.m[j][i]);
      h.m[i][j] = h.m[j][i] = a;
    }
  return h;
}

Integrand::RoundtripResidual Integrand::duality_roundtrip_residual(const Vec& z) const {
  if (norm(z) == 0) throw std::domain_error("duality_roundtrip_residual: zero vector");
  Vec y = cahn_hoffman(z);
  Vec back = dual_cahn_hoffman(y);
  double vres = norm(back - z);
  Mat A = cahn_hoffman_jacobian(z);
  Mat B = dual_cahn_hoffman_hessian(gradient(z));
  Mat AB = matmul(A, B, dim_);
  double hres = operator_norm(AB - Mat::identity(dim_), dim_);
  return {vres, hres};
}

EllipticityBounds Integrand::ellipticity_estimate(int sampleCount) const {
  int minCount = dim_ == 2 ? 64 : 1024;
  if (sampleCount < minCount)
    throw std::invalid_argument("ellipticity_estimate: sample count too small");
  EllipticityBounds b;
  b.mF = std::numeric_limits<double>::infinity();
  b.lambda = std::numeric_limits<double>::infinity();
  b.lambdaStar = std::numeric_limits<double>::infinity();
  bool derivs = smooth_elliptic();
  // accumulate over a doubling ladder of sample sets so estimates only tighten
  std::vector<int> counts;
  for (int c = minCount; c < sampleCount; c *= 2) counts.push_back(c);
  counts.push_back(sampleCount);
  for (int count : counts) {
    for (const Vec& nu : sphere_sample(dim_, count)) {
      double f = value(nu);
      b.mF = std::min(b.mF, f);
      b.MF = std::max(b.MF, f);
      if (!derivs) continue;
      Mat H = hessian(nu);
      auto tb = tangent_basis(nu, dim_);
      int k = dim_ - 1;
      Mat T;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) T.m[i][j] = dot(tb[i], H.apply(tb[j]));
      auto ev = sym_eigenvalues(T, k);
      b.lambda = std::min(b.lambda, ev[0]);
      b.Lambda = std::max(b.Lambda, ev[k - 1]);
      Mat A = cahn_hoffman_jacobian(nu);
      auto eva = sym_eigenvalues(A, dim_);
      b.lambdaStar = std::min(b.lambdaStar, eva[0]);
      b.LambdaStar = std::max(b.LambdaStar, eva[dim_ - 1]);
    }
  }
  if (!derivs) {
    b.lambda = 0;
    b.Lambda = std::numeric_limits<double>::infinity();
    b.lambdaStar = 0;
    b.LambdaStar = std::numeric_limits<double>::infinity();
  }
  return b;
}

// ---------------------------------------------------------------------------
// GaugeField

GaugeField::GaugeField(const Integrand& F, int tableSize) : F_(F) {
  closed_ = F.closed_form_dual();
  if (!closed_ && F.dim() == 2) {
    std::vector<double> vals(tableSize);
    for (int i = 0; i < tableSize; ++i) {
      double th = 2.0 * M_PI * i / tableSize;
      vals[i] = F.numeric_gauge(Vec{std::cos(th), std::sin(th)}).value;
    }
    dir_ = PeriodicSpline(std::move(vals));
  }
}

double GaugeField::value(const Vec& x) const {
  if (closed_) return F_.closed_dual_value(x);
  double xn = norm(x);
  if (xn == 0) return 0.0;
  if (F_.dim() == 2) return xn * dir_.eval(std::atan2(x[1], x[0]));
  auto r = F_.numeric_gauge(x, hasWarm_ ? &warm_ : nullptr);
  warm_ = r.maximizer;
  hasWarm_ = true;
  return r.value;
}

Vec GaugeField::gradient(const Vec& x) const {
  if (closed_) return F_.closed_dual_gradient(x);
  double xn = norm(x);
  if (xn == 0) throw std::domain_error("GaugeField::gradient: zero vector");
  if (F_.dim() == 2) {
    double th = std::atan2(x[1], x[0]);
    double f = dir_.eval(th), fp = dir_.deriv(th);
    Vec nu{x[0] / xn, x[1] / xn};
    Vec tau{-nu[1], nu[0]};
    return nu * f + tau * fp;
  }
  auto r = F_.numeric_gauge(x, hasWarm_ ? &warm_ : nullptr);
  warm_ = r.maximizer;
  hasWarm_ = true;
  return r.maximizer;
}

double GaugeField::gradient_norm(const Vec& x) const { return norm(gradient(x)); }

Mat GaugeField::ch_hessian(const Vec& x) const {
  if (closed_) return F_.closed_dual_ch_hessian(x);
  if (F_.dim() == 2) {
    // W = F_*^2/2 = r^2 Q(theta), Q = q^2/2: in the (rhat, that) frame
    //   Hess W = [[2Q, Q'], [Q', Q'' + 2Q]]
    double th = std::atan2(x[1], x[0]);
    double q = dir_.eval(th), qp = dir_.deriv(th), qpp = dir_.deriv2(th);
    double Q = 0.5 * q * q, Qp = q * qp, Qpp = qp * qp + q * qpp;
    double r = std::hypot(x[0], x[1]);
    Vec rh{x[0] / r, x[1] / r};
    Vec tt{-rh[1], rh[0]};
    return outer(rh, rh) * (2.0 * Q) + (outer(rh, tt) + outer(tt, rh)) * Qp +
           outer(tt, tt) * (Qpp + 2.0 * Q);
  }
  return F_.dual_cahn_hoffman_hessian(x);
}

// ---------------------------------------------------------------------------
// families

IntegrandFamily build_family(const Integrand& limitDescriptor, const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw std::invalid_argument("build_family: empty epsilon list");
  for (size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0)) throw std::invalid_argument("build_family: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw std::invalid_argument("build_family: epsilons must be strictly decreasing");
  }
  for (const Vec& nu : sphere_sample(limitDescriptor.dim(), limitDescriptor.dim() == 2 ? 512 : 2048))
    if (limitDescriptor.value(nu) <= 0)
      throw std::invalid_argument("build_family: descriptor not positive on the sphere");

  IntegrandFamily fam{.members = {},
                      .epsilons = epsilons,
                      .limit = limitDescriptor,
                      .ellipticityTrace = {},
                      .uniform_m = 0,
                      .uniform_M = 0};
  for (double eps : epsilons) {
    if (limitDescriptor.kind() == IntegrandKind::SmoothedCrystalline) {
      Integrand m = Integrand::smoothed_crystal(limitDescriptor.facet_normals(),
                                                limitDescriptor.facet_weights(), eps,
                                                limitDescriptor.dim());
      fam.members.push_back(m.scaled(limitDescriptor.scale()));
    } else {
      fam.members.push_back(limitDescriptor);  // already smooth: constant family
    }
  }
  fam.uniform_m = std::numeric_limits<double>::infinity();
  for (const Integrand& m : fam.members) {
    fam.ellipticityTrace.push_back(m.bounds());
    fam.uniform_m = std::min(fam.uniform_m, m.bounds().mF);
    fam.uniform_M = std::max(fam.uniform_M, m.bounds().MF);
  }
  return fam;
}

}  // namespace anisolab
