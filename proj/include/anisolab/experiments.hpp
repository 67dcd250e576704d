#pragma once

#include <string>
#include <utility>
#include <vector>

#include "anisolab/io.hpp"

namespace anisolab {

struct ScenarioConfig {
  std::string scenario;  // wulff-validation | bubbling | degenerating-ellipticity | capillarity-flow
  json integrandSpec;
  json domainSpec;        // optional override of the scenario's default family
  json potentialSpec;     // capillarity-flow
  std::vector<double> sweep;
  std::vector<double> gridSpacings;
  std::string outJson, outCsv, outSvg;
  unsigned seed = 2026;
  int jobs = 1;
  // scenario knobs
  double floorDeltaF = 3e-2, floorEta = 3e-2, floorDeltaW = 2e-2, floorHk = 5e-2;
  double flowTol = 2e-2;
  int flowMaxSteps = 60000;
  double perturbAmplitude = 0.05;
  double deficitSchedule0 = 0.5;
};

ScenarioConfig load_scenario(const json& j);
json scenario_to_json(const ScenarioConfig& cfg);

struct ShapeResult {
  std::string label;
  double param = 0;
  DeficitReport report;
  bool flagged = false;
  std::string note;
  std::vector<std::pair<std::string, double>> extra;  // scenario-specific columns
};

struct TrendFit {
  std::string name;
  double slope = 0, intercept = 0;
};

struct Assertion {
  std::string name;
  bool passed = false;
  double value = 0, bound = 0;
};

struct RunReport {
  std::string scenario;
  std::vector<ShapeResult> perShape;
  std::vector<TrendFit> trends;
  std::vector<Assertion> assertions;
  std::string configHash;
  std::string version;
  bool all_passed() const;
};

RunReport run_wulff_validation(const ScenarioConfig& cfg);
RunReport run_bubbling(const ScenarioConfig& cfg);
RunReport run_degenerating_ellipticity(const ScenarioConfig& cfg);
RunReport run_capillarity_flow(const ScenarioConfig& cfg);
RunReport run_scenario(const ScenarioConfig& cfg);

void emit_report(const RunReport& rep, const ScenarioConfig& cfg);
json run_report_to_json(const RunReport& rep);
std::string run_report_csv(const RunReport& rep);
std::string run_report_svg(const RunReport& rep);

// log-log least squares of y against x
TrendFit fit_loglog(const std::string& name, const std::vector<double>& x,
                    const std::vector<double>& y);

// volume-preserving anisotropic curvature flow with confinement
struct FlowConfig {
  double dtFactor = 0.2;         // dt = dtFactor h^2 / curvature coefficient
  double tol = 2e-2;             // stop when the critical residual drops below
  int maxSteps = 60000;
  int reinitEvery = 5;
  int correctEvery = 10;         // volume drift correction cadence
  int checkEvery = 20;           // residual / topology cadence
  double driftAbort = 0.01;
};

struct FlowResult {
  LevelSetDomain domain;
  double ell = 0;
  double criticalResidual = 0;
  int steps = 0;
  double maxDrift = 0;
  bool converged = false;
  bool aborted = false;
  bool topologyChanged = false;
};

FlowResult capillarity_flow(LevelSetDomain init, const Integrand& F, const Potential& g,
                            const FlowConfig& fc);

// Wulff build memoized under ANISOLAB_CACHE (grid + constants reused on hits).
WulffShape build_wulff_cached(std::shared_ptr<const Integrand> F, const WulffShape::GridSpec& gs);

}  // namespace anisolab
