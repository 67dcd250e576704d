#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "anisolab/geometry.hpp"

namespace anisolab {

enum class IntegrandKind {
  Isotropic,
  Ellipse,
  PNorm,
  SmoothedCrystalline,  // eps == 0 is the crystalline limit (no derivatives)
  Tabulated,            // 2D support function table over uniform angles
};

std::string kind_name(IntegrandKind k);

struct EllipticityBounds {
  double mF = 0, MF = 0;            // min/max of F on the sphere
  double lambda = 0, Lambda = 0;    // tangential Hessian bounds of F
  double lambdaStar = 0, LambdaStar = 0;  // Hessian bounds of F^2/2
};

struct EvalResult {
  double value;
  Vec gradient;
  Mat hessian;  // full Hessian of the one-homogeneous extension; annihilates v
};

// Periodic cubic spline on uniform angles [0, 2pi); used by the tabulated
// kind and by cached gauge direction tables.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  explicit PeriodicSpline(std::vector<double> values);
  double eval(double theta) const;
  double deriv(double theta) const;
  double deriv2(double theta) const;
  int size() const { return static_cast<int>(y_.size()); }
  bool empty() const { return y_.empty(); }

 private:
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
  double h_ = 0;
};

// Convex surface tension F: one-homogeneous convex extension of a positive
// function on S^n. Immutable after construction; all queries are const.
class Integrand {
 public:
  static Integrand isotropic(int dim);
  static Integrand ellipse(const std::vector<double>& semiaxes);
  static Integrand pnorm(double p, int dim);
  static Integrand smoothed_crystal(const std::vector<Vec>& facetNormals,
                                    const std::vector<double>& weights, double eps, int dim);
  // 2D only; values of F at size() uniform angles starting at theta=0
  static Integrand tabulated(const std::vector<double>& values);

  IntegrandKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool smooth_elliptic() const;
  const EllipticityBounds& bounds() const { return bounds_; }

  double value(const Vec& v) const;
  Vec gradient(const Vec& v) const;    // 0-homogeneous; v != 0
  Mat hessian(const Vec& v) const;     // -1-homogeneous; v != 0
  EvalResult evaluate(const Vec& v) const;

  // Cahn-Hoffman map grad(F^2/2): F(v) grad F(v) for v != 0, zero at v = 0.
  Vec cahn_hoffman(const Vec& v) const;
  // Hessian of F^2/2 at v != 0: gradF x gradF + F hessF.
  Mat cahn_hoffman_jacobian(const Vec& v) const;

  // Gauge F_*(x) = sup { x.nu : F(nu) < 1 }.
  double gauge(const Vec& x) const;
  // grad F_*; satisfies F(grad F_*) = 1. Requires a smooth elliptic kind.
  Vec gauge_gradient(const Vec& x) const;
  // grad(F_*^2/2) = F_* grad F_*
  Vec dual_cahn_hoffman(const Vec& x) const;
  // Hessian of F_*^2/2; closed form when available, otherwise finite
  // differences over the numeric gauge gradient.
  Mat dual_cahn_hoffman_hessian(const Vec& x) const;

  struct RoundtripResidual {
    double vector_residual;  // | grad(F_*^2/2)(grad(F^2/2)(z)) - z |
    double hessian_residual; // operator norm of Hess(F^2/2) Hess(F_*^2/2) - Id
  };
  RoundtripResidual duality_roundtrip_residual(const Vec& z) const;

  EllipticityBounds ellipticity_estimate(int sampleCount) const;

  // Scaled integrand r*F (Wulff shape scales to r*K_F).
  Integrand scaled(double r) const;

  // parameters (exposed for serialization)
  const std::vector<double>& semiaxes() const { return axes_; }
  double pnorm_exponent() const { return p_; }
  const std::vector<Vec>& facet_normals() const { return normals_; }
  const std::vector<double>& facet_weights() const { return weights_; }
  double smoothing_eps() const { return eps_; }
  const std::vector<double>& table_values() const { return table_; }
  double scale() const { return scale_; }

 private:
  Integrand() = default;
  void finalize();

  double raw_value(const Vec& v) const;
  Vec raw_gradient(const Vec& v) const;
  Mat raw_hessian(const Vec& v) const;
  bool closed_form_dual() const;
  double closed_dual_value(const Vec& x) const;
  Vec closed_dual_gradient(const Vec& x) const;
  Mat closed_dual_ch_hessian(const Vec& x) const;

  // numeric gauge: maximize x.nu / F(nu) over the sphere
  struct GaugeResult {
    double value;
    Vec maximizer;  // point of {F = 1} realizing the sup; equals grad F_*
  };
  GaugeResult numeric_gauge(const Vec& x, const Vec* warmStart = nullptr) const;

  IntegrandKind kind_ = IntegrandKind::Isotropic;
  int dim_ = 2;
  double scale_ = 1.0;  // overall multiplicative factor
  std::vector<double> axes_;
  double p_ = 2.0;
  std::vector<Vec> normals_;
  std::vector<double> weights_;
  double eps_ = 0.0;
  std::vector<double> table_;
  PeriodicSpline spline_;  // tabulated kind
  EllipticityBounds bounds_;

  friend class GaugeField;
};

// Warm-started evaluator of F_* and grad F_* for field sweeps over grids.
// For 2D integrands without a closed-form dual a direction table is built
// once and splined; in 3D each query refines from the previous maximizer.
class GaugeField {
 public:
  explicit GaugeField(const Integrand& F, int tableSize = 4096);
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;  // grad F_*
  double gradient_norm(const Vec& x) const;
  Mat ch_hessian(const Vec& x) const;  // Hessian of F_*^2/2

 private:
  const Integrand& F_;
  bool closed_;
  PeriodicSpline dir_;      // 2D: F_* on unit directions
  mutable Vec warm_{};      // 3D numeric path
  mutable bool hasWarm_ = false;
};

// Family of smooth elliptic integrands F_h converging to a (possibly
// crystalline) limit as eps_h -> 0.
struct IntegrandFamily {
  std::vector<Integrand> members;
  std::vector<double> epsilons;
  Integrand limit;                 // eps = 0 descriptor (value/gauge only)
  std::vector<EllipticityBounds> ellipticityTrace;
  double uniform_m = 0, uniform_M = 0;
};

// limitDescriptor must define a positive convex 1-homogeneous function;
// epsilons strictly decreasing and positive.
IntegrandFamily build_family(const Integrand& limitDescriptor, const std::vector<double>& epsilons);

}  // namespace anisolab
