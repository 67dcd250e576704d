#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anisolab/torsion.hpp"
#include "anisolab/wulff.hpp"

namespace anisolab {

// Confining potentials appearing in the capillarity energy.
struct Potential {
  std::string type = "constant";  // constant | linear | quadratic-well
  double constant = 0.0;
  Vec slope;       // linear: g = slope . x
  Vec center;      // quadratic well center
  double coeff = 1.0;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  static Potential constant_g(double c);
  static Potential linear_g(const Vec& slope);
  static Potential quadratic_well(const Vec& center, double coeff);
};

// Shared boundary quantities: mesh, curvature, weights, reference curvature.
struct BoundaryAnalysis {
  int dim = 2;
  BoundaryMesh mesh;
  std::vector<double> H;      // anisotropic mean curvature at samples
  std::vector<double> Fnu;    // F(nu) at samples
  double energy = 0;          // surface energy
  double vol = 0;
  double H0 = 0;              // n * energy / ((n+1) vol)
  double minH = 0;
  double kappa = 0;           // min H / H0
  int excludedNodes = 0;
};

BoundaryAnalysis analyze_boundary(const LevelSetDomain& d, const Integrand& F);

double delta_F(const BoundaryAnalysis& b);
double delta_F(const LevelSetDomain& d, const Integrand& F);
double delta_star(const BoundaryAnalysis& b);  // C^0 variant (convenience column)

enum class EtaStatus { Ok, CurvatureNotPositive };
struct EtaResult {
  EtaStatus status = EtaStatus::CurvatureNotPositive;
  double value = 0;
  double hkGap = 0;  // int n F(nu)/H^F - (n+1)|Omega|
};
EtaResult eta_F(const BoundaryAnalysis& b);
EtaResult eta_F(const LevelSetDomain& d, const Integrand& F);

struct HkIdentity {
  double lhs = 0;       // (|Omega|/(n+1)) * hkGap
  double rhs = 0;       // trace term + boundary variance term
  double residual = 0;  // |lhs-rhs| / ((n+1)|Omega|)^2
  bool applicable = false;
};
HkIdentity hk_identity_residual(const LevelSetDomain& d, const Integrand& F,
                                const TorsionSolution& t);
HkIdentity hk_identity_residual(const BoundaryAnalysis& b, const LevelSetDomain& d,
                                const Integrand& F, const TorsionSolution& t);

struct EstimateEntry {
  std::string name;
  double deficitSide = 0;  // C(n)-free left side
  double rhs = 0;          // computed integral
  bool applicable = false;
};
std::vector<EstimateEntry> estimate_suite(const LevelSetDomain& d, const Integrand& F,
                                          const TorsionSolution& t, double wulffVolume);

struct MomentReport {
  std::vector<double> alphas;
  std::vector<double> values;      // M_alpha = int F(grad u)^alpha
  std::vector<double> recursion;   // |(n+1+a) M_a/(n+1)^2 - (n+2+a) M_{a+1}/(n+1)|
};
MomentReport pohozaev_moments(const TorsionSolution& t, const LevelSetDomain& d,
                              const Integrand& F, const std::vector<double>& alphas);

struct BubbleEstimate {
  int count = 0;
  std::vector<double> radii;
  double residual = 0;      // relative moment-fit residual
  bool recovered = false;   // false: no bubble structure below threshold
};
BubbleEstimate bubble_recovery(const MomentReport& moments, int dim, double momentConstant,
                               int maxBubbles = 4);

double wulff_deficit(const LevelSetDomain& d, const Integrand& F, double wulffVolume);

struct AsymmetryResult {
  double index = 0;  // min over translations of |Omega sym-diff (p + s K)| / |Omega|
  Vec shift;
};
AsymmetryResult asymmetry_index(const LevelSetDomain& d, const Integrand& F,
                                const WulffShape& K);

struct MultiplierResult {
  double ell = 0;
  double criticalResidual = 0;  // F(nu)-weighted L2 of H^F + g - ell over the boundary
};
MultiplierResult capillarity_multiplier(const LevelSetDomain& d, const Integrand& F,
                                        const Potential& g);
MultiplierResult capillarity_multiplier(const BoundaryAnalysis& b, const LevelSetDomain& d,
                                        const Potential& g);

// full per-shape report
struct DeficitReport {
  double deltaF = 0;
  double deltaStar = 0;
  EtaResult eta;
  double deltaW = 0;
  HkIdentity hk;
  ReillyReport reilly;
  std::vector<EstimateEntry> estimates;
  MomentReport moments;
  BubbleEstimate bubbles;
  AsymmetryResult asymmetry;
  double kappa = 0;
  // geometry summary
  double energy = 0, vol = 0, diam = 0, H0 = 0;
  double solverResidual = 0;
  double criticalFraction = 0;
};

struct DeficitOptions {
  std::vector<double> alphas = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
  bool withAsymmetry = true;
  bool withDiameter = true;
  bool withEstimates = true;
};

DeficitReport deficit_report(const LevelSetDomain& d, const Integrand& F, const WulffShape& K,
                             const TorsionSolution* t, const DeficitOptions& opts = {});

}  // namespace anisolab
