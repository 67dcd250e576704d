#pragma once

#include <stdexcept>
#include <vector>

#include "anisolab/domain.hpp"

namespace anisolab {

struct SolverConfig {
  double tol = 1e-8;          // sup-norm of the scaled energy gradient
  int maxIters = 200000;
  int maxCoarseLevels = 3;    // cascadic initialization depth (0 = single level)
  int energyCheckInterval = 8;
  int powerInterval = 100;    // step re-estimation cadence
  unsigned seed = 12345;
  bool throwOnMaxIters = true;
};

struct SolveError : std::runtime_error {
  SolveError(const std::string& msg, std::vector<double> trace)
      : std::runtime_error(msg), residualTrace(std::move(trace)) {}
  std::vector<double> residualTrace;
};

struct TorsionSolution {
  Grid u;                          // nonpositive, zero outside the domain
  std::vector<Vec> gradU;          // node gradient, interior-sided near the boundary
  std::vector<Vec> cahnHoffman;    // grad(F^2/2)(grad u) per node
  std::vector<double> divCH;       // discrete Finsler laplacian
  std::vector<char> freeMask;      // interior nodes (phi < 0)
  std::vector<char> criticalSet;   // interior nodes with |grad u| < 1e-3 sup
  double energy = 0;
  double residualNorm = 0;
  double supGrad = 0;
  long iterations = 0;
  int restarts = 0;
  std::vector<double> energyTrace;
  std::vector<double> residualTrace;

  double critical_fraction() const;
  double min_u() const;
};

TorsionSolution solve_torsion(const LevelSetDomain& d, const Integrand& F,
                              const SolverConfig& cfg = {});

// max over random C^2 bumps of |int(grad_F u . grad b + b)| / ||b||_L1
double weak_residual(const TorsionSolution& t, const LevelSetDomain& d, const Integrand& F,
                     int testFieldCount, unsigned seed = 777);

struct LipschitzReport {
  double supGrad = 0;
  double bound = 0;
  bool satisfied = false;
  bool applicable = false;  // false when min H^F <= 0
};
LipschitzReport lipschitz_check(const TorsionSolution& t, const LevelSetDomain& d,
                                const Integrand& F);

struct ReillyReport {
  double lhs = 0;     // int (div CH)^2 - tr((grad CH)^2)
  double rhs = 0;     // int_bnd H^F F(grad u)^2 F(nu)
  double gap = 0;
  int flaggedCells = 0;  // stencils touching the critical set
};
ReillyReport reilly_gap(const TorsionSolution& t, const LevelSetDomain& d, const Integrand& F);

// max over boundary samples of |div CH - Hess u[gF, gF] - F(grad u) H^F|
double boundary_identity_check(const TorsionSolution& t, const LevelSetDomain& d,
                               const Integrand& F);

// divergence-free-structure identity for a constant-divergence field
double bernstein_divergence_check(const std::vector<Vec>& v, const LevelSetDomain& d,
                                  double divTolerance = 1e-6);

// node gradient of a scalar grid, preferring one-sided interior stencils at
// the interface so boundary traces are not smeared by the zero extension
std::vector<Vec> interface_aware_gradient(const Grid& u, const std::vector<char>& interiorMask);

// jacobian J[i][j] = dV_i/dx_j of a node vector field (same stencil policy;
// empty mask = plain central differences)
std::vector<Mat> node_jacobian(const Grid& g, const std::vector<Vec>& v,
                               const std::vector<char>& interiorMask);

}  // namespace anisolab
