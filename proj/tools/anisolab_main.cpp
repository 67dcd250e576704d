#include <CLI11.hpp>
#include <chrono>
#include <iostream>

#include "anisolab/experiments.hpp"

using namespace anisolab;

namespace {

int cmd_wulff(const std::string& integrandPath, double spacing, const std::string& outPath) {
  auto F = std::make_shared<Integrand>(load_integrand_file(integrandPath));
  WulffShape K = build_wulff_cached(F, {.spacing = spacing, .halfWidthFactor = 1.5});
  json j;
  j["integrand"] = integrand_to_json(*F);
  j["spacing"] = spacing;
  j["volume"] = K.volume;
  j["moment_constant"] = K.momentConstant;
  json table = json::array();
  for (double alpha : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    json row;
    row["alpha"] = alpha;
    double m = K.gauge_moment(alpha);
    row["gauge_moment"] = m;
    row["times_n1_plus_alpha"] = m * (F->dim() + alpha);
    table.push_back(row);
  }
  j["moment_table"] = table;
  json b;
  b["mF"] = F->bounds().mF;
  b["MF"] = F->bounds().MF;
  b["lambda"] = F->bounds().lambda;
  b["Lambda"] = F->bounds().Lambda;
  b["lambda_star"] = F->bounds().lambdaStar;
  b["Lambda_star"] = F->bounds().LambdaStar;
  j["ellipticity"] = b;
  write_json_file(outPath, j);
  std::cout << "wulff: volume " << K.volume << ", C_K " << K.momentConstant << " -> " << outPath
            << "\n";
  return 0;
}

int cmd_torsion(const std::string& domainPath, const std::string& integrandPath, double spacing,
                const std::string& outPair, double tol) {
  auto comma = outPair.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error("torsion --out expects 'solution.bin,report.json'");
  std::string solPath = outPair.substr(0, comma);
  std::string repPath = outPair.substr(comma + 1);

  Integrand F = load_integrand_file(integrandPath);
  ShapeSpec shape = load_shape_file(domainPath);
  LevelSetDomain d = shape.type == "grid"
                         ? LevelSetDomain::from_grid(load_raw_grid(shape.grid_header), 20)
                         : LevelSetDomain::build(shape, &F, spacing);
  SolverConfig sc;
  sc.tol = tol;
  auto t0 = std::chrono::steady_clock::now();
  TorsionSolution t = solve_torsion(d, F, sc);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  save_solution(solPath, t.u);
  json j;
  j["energy"] = t.energy;
  j["residual"] = t.residualNorm;
  j["iterations"] = t.iterations;
  j["restarts"] = t.restarts;
  j["min_u"] = t.min_u();
  j["sup_grad"] = t.supGrad;
  j["critical_fraction"] = t.critical_fraction();
  write_json_file(repPath, j);
  std::cerr << "torsion: " << t.iterations << " iterations, " << ms << " ms\n";
  std::cout << "torsion: energy " << t.energy << ", residual " << t.residualNorm << " -> "
            << solPath << "\n";
  return 0;
}

int cmd_deficits(const std::string& domainPath, const std::string& integrandPath,
                 const std::string& torsionPath, double spacing, const std::string& outPath) {
  Integrand Fv = load_integrand_file(integrandPath);
  auto F = std::make_shared<Integrand>(Fv);
  ShapeSpec shape = load_shape_file(domainPath);
  TorsionSolution t;
  const TorsionSolution* tp = nullptr;
  LevelSetDomain d;
  if (!torsionPath.empty()) {
    Grid u = load_solution(torsionPath);
    if (shape.type == "grid") {
      d = LevelSetDomain::from_grid(load_raw_grid(shape.grid_header), 20);
    } else {
      d = LevelSetDomain::build(shape, F.get(), u.h);
    }
    if (u.n[0] != d.phi.n[0] || u.n[1] != d.phi.n[1] || u.n[2] != d.phi.n[2])
      throw std::runtime_error("deficits: solution grid does not match the domain grid");
    t.u = std::move(u);
    t.freeMask.assign(d.phi.size(), 0);
    for (size_t i = 0; i < d.phi.size(); ++i) t.freeMask[i] = d.phi.a[i] < 0;
    t.gradU = interface_aware_gradient(t.u, t.freeMask);
    t.cahnHoffman.resize(t.gradU.size());
    for (size_t i = 0; i < t.gradU.size(); ++i) t.cahnHoffman[i] = F->cahn_hoffman(t.gradU[i]);
    t.divCH = divergence_field(t.u, t.cahnHoffman);
    for (size_t i = 0; i < t.gradU.size(); ++i)
      if (t.freeMask[i]) t.supGrad = std::max(t.supGrad, norm(t.gradU[i]));
    t.criticalSet.assign(t.gradU.size(), 0);
    for (size_t i = 0; i < t.gradU.size(); ++i)
      if (t.freeMask[i] && norm(t.gradU[i]) < 1e-3 * t.supGrad) t.criticalSet[i] = 1;
    tp = &t;
  } else {
    d = LevelSetDomain::build(shape, F.get(), spacing);
  }
  WulffShape K = build_wulff_cached(F, {.spacing = d.spacing, .halfWidthFactor = 1.5});
  DeficitReport rep = deficit_report(d, *F, K, tp);
  json j = deficit_report_to_json(rep);
  std::string err;
  if (!validate_deficit_report(j, &err)) throw std::runtime_error("report validation: " + err);
  write_json_file(outPath, j);
  std::cout << "deficits: delta_F " << rep.deltaF << ", delta_W " << rep.deltaW << " -> "
            << outPath << "\n";
  return 0;
}

int cmd_run(const std::string& configPath, int jobs, bool svg) {
  json cj = read_json_file(configPath);
  ScenarioConfig cfg = load_scenario(cj);
  if (jobs > 0) cfg.jobs = jobs;
  if (svg && cfg.outSvg.empty()) cfg.outSvg = cfg.scenario + ".svg";
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep = run_scenario(cfg);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  emit_report(rep, cfg);
  std::cerr << "run " << cfg.scenario << ": wall " << ms << " ms\n";
  for (const auto& a : rep.assertions)
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << " (value " << a.value << ", bound "
              << a.bound << ")\n";
  if (!rep.all_passed()) {
    for (const auto& a : rep.assertions)
      if (!a.passed) std::cerr << "failing metric: " << a.name << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisolab: anisotropic isoperimetry laboratory"};
  app.require_subcommand(1);

  auto* wulff = app.add_subcommand("wulff", "build a Wulff shape and its constants");
  std::string wIntegrand, wOut = "wulff_report.json";
  double wSpacing = 1.0 / 64.0;
  wulff->add_option("--integrand", wIntegrand, "integrand spec json")->required();
  wulff->add_option("--spacing", wSpacing, "grid spacing");
  wulff->add_option("--out", wOut, "output report json");

  auto* torsion = app.add_subcommand("torsion", "solve the anisotropic torsion problem");
  std::string tDomain, tIntegrand, tOut = "solution.bin,torsion_report.json";
  double tSpacing = 1.0 / 64.0, tTol = 1e-6;
  torsion->add_option("--domain", tDomain, "domain spec json")->required();
  torsion->add_option("--integrand", tIntegrand, "integrand spec json")->required();
  torsion->add_option("--spacing", tSpacing, "grid spacing");
  torsion->add_option("--tol", tTol, "scaled gradient tolerance");
  torsion->add_option("--out", tOut, "output pair: solution.bin,report.json");

  auto* deficits = app.add_subcommand("deficits", "compute the deficit report for a shape");
  std::string dDomain, dIntegrand, dTorsion, dOut = "deficit_report.json";
  double dSpacing = 1.0 / 64.0;
  deficits->add_option("--domain", dDomain, "domain spec json")->required();
  deficits->add_option("--integrand", dIntegrand, "integrand spec json")->required();
  deficits->add_option("--torsion", dTorsion, "solution binary from the torsion solver");
  deficits->add_option("--spacing", dSpacing, "grid spacing (ignored with --torsion)");
  deficits->add_option("--out", dOut, "output report json");

  auto* run = app.add_subcommand("run", "run a scenario");
  std::string rScenario, rConfig;
  int rJobs = 0;
  bool rSvg = false;
  run->add_option("scenario", rScenario, "scenario name (must match the config)")->required();
  run->add_option("--config", rConfig, "scenario config json")->required();
  run->add_option("--jobs", rJobs, "sweep worker count");
  run->add_flag("--svg", rSvg, "emit an svg plot");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*wulff) return cmd_wulff(wIntegrand, wSpacing, wOut);
    if (*torsion) return cmd_torsion(tDomain, tIntegrand, tSpacing, tOut, tTol);
    if (*deficits) return cmd_deficits(dDomain, dIntegrand, dTorsion, dSpacing, dOut);
    if (*run) {
      json cj = read_json_file(rConfig);
      if (cj.value("scenario", "") != rScenario)
        throw std::runtime_error("config scenario does not match the requested scenario");
      return cmd_run(rConfig, rJobs, rSvg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
