#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anisolab/grid.hpp"
#include "anisolab/integrand.hpp"

namespace anisolab {

// Analytic shape description. Level-set fields are built from these at any
// spacing, which also powers the coarse levels of the torsion solver.
struct ShapeSpec {
  std::string type;  // ball | wulff | ellipse | union | dumbbell | perturbed_wulff | grid
  Vec center;
  double radius = 1.0;               // ball
  std::vector<double> semiaxes;      // ellipse
  double scale = 1.0;                // wulff, perturbed_wulff, dumbbell bubbles
  std::vector<ShapeSpec> parts;      // union
  std::vector<Vec> centers;          // dumbbell bubble centers
  double neck_width = 0.0;           // dumbbell
  double amplitude = 0.0;            // perturbed_wulff bump amplitude
  int mode = 2;                      // perturbed_wulff angular frequency
  std::string grid_header;           // raw import (path to header json)

  static ShapeSpec ball(const Vec& c, double r);
  static ShapeSpec wulff(const Vec& c, double scale = 1.0);
  static ShapeSpec ellipse(const Vec& c, const std::vector<double>& semiaxes);
  static ShapeSpec unite(std::vector<ShapeSpec> parts);
  static ShapeSpec dumbbell(const Vec& c1, const Vec& c2, double neckWidth, double scale = 1.0);
  static ShapeSpec perturbed_wulff(const Vec& c, double amplitude, int mode, double scale = 1.0);
};

struct BoundaryMesh {
  std::vector<Vec> points;
  std::vector<Vec> normals;       // outward unit normals
  std::vector<double> weights;    // element measures (length / area)
  double total_weight() const;
};

class LevelSetDomain {
 public:
  Grid phi;
  int dim = 2;
  double spacing = 0;
  std::optional<ShapeSpec> spec;  // retained when analytic (enables re-gridding)

  // Build from an analytic spec. The integrand is needed for wulff-type parts
  // (pass nullptr otherwise). 20 reinitialization sweeps by default.
  static LevelSetDomain build(const ShapeSpec& s, const Integrand* F, double h,
                              int reinitSweeps = 20, double marginOverride = -1.0);
  static LevelSetDomain from_grid(Grid phi, int reinitSweeps = 0);

  bool inside(const Vec& x) const { return phi.interp(x) < 0; }
};

// Sussman-style reinitialization with a subcell (Russo-Smereka) interface fix.
void reinitialize(Grid& phi, int sweeps);

BoundaryMesh extract_boundary(const LevelSetDomain& d);

double surface_energy(const LevelSetDomain& d, const Integrand& F);
double surface_energy(const BoundaryMesh& mesh, const Integrand& F);

// Node fields used for anisotropic curvature: V = grad F(grad phi) with
// low-gradient nodes in-painted, H = div V.
struct CurvatureField {
  std::vector<Vec> nodeGrad;
  std::vector<Vec> chDirection;  // grad F at grad phi (0-homogeneous)
  std::vector<double> nodeH;
  int excludedNodes = 0;
};

CurvatureField curvature_field(const LevelSetDomain& d, const Integrand& F);

// H^F sampled at the boundary mesh points. Throws on empty boundary;
// degenerate stencils are in-painted and counted in the field struct.
std::vector<double> aniso_mean_curvature(const LevelSetDomain& d, const Integrand& F,
                                         const BoundaryMesh& mesh);
std::vector<double> aniso_mean_curvature(const CurvatureField& field, const Grid& phi,
                                         const BoundaryMesh& mesh);

double reference_curvature(const LevelSetDomain& d, const Integrand& F);

double aniso_signed_distance(const LevelSetDomain& d, const Integrand& F, const Vec& x);
double aniso_signed_distance(const LevelSetDomain& d, const Integrand& F,
                             const BoundaryMesh& mesh, const Vec& x);

double volume(const LevelSetDomain& d);
double diameter(const LevelSetDomain& d);
Vec centroid(const LevelSetDomain& d);

// integral over the domain of a node-sampled function, cut cells weighted by
// their inside fraction
double domain_integral(const LevelSetDomain& d, const std::function<double(const Vec&)>& f);
double domain_integral_nodes(const LevelSetDomain& d, const std::vector<double>& nodeValues);

// |{phi<0} symmetric-difference {other<0}| on d's grid
double symmetric_difference(const LevelSetDomain& d, const std::function<double(const Vec&)>& other);

// per-cell inside fraction from the corner phi values (linear reconstruction)
double cell_inside_fraction(const Grid& phi, int ci, int cj, int ck);

}  // namespace anisolab
