#include "anisolab/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace anisolab {

namespace {

Vec vec_from_json(const json& j, int minSize = 2) {
  if (!j.is_array() || static_cast<int>(j.size()) < minSize || j.size() > 3)
    throw std::invalid_argument("expected a 2- or 3-vector");
  Vec v;
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// integrand

Integrand load_integrand(const json& j) {
  if (!j.contains("kind")) throw std::invalid_argument("integrand spec: missing 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  json params = j.value("params", json::object());
  int dim = j.value("dim", 2);
  if (dim != 2 && dim != 3) throw std::invalid_argument("integrand spec: dim must be 2 or 3");
  double scale = params.value("scale", 1.0);

  Integrand f = [&]() {
    if (kind == "isotropic") return Integrand::isotropic(dim);
    if (kind == "ellipse") {
      auto axes = params.at("semiaxes").get<std::vector<double>>();
      return Integrand::ellipse(axes);
    }
    if (kind == "pnorm") return Integrand::pnorm(params.at("p").get<double>(), dim);
    if (kind == "smoothed-crystalline") {
      std::vector<Vec> normals;
      for (const auto& n : params.at("normals")) normals.push_back(vec_from_json(n));
      auto weights = params.at("weights").get<std::vector<double>>();
      double eps = params.at("eps").get<double>();
      return Integrand::smoothed_crystal(normals, weights, eps, dim);
    }
    if (kind == "tabulated")
      return Integrand::tabulated(params.at("values").get<std::vector<double>>());
    throw std::invalid_argument("integrand spec: unknown kind '" + kind + "'");
  }();
  return scale == 1.0 ? f : f.scaled(scale);
}

Integrand load_integrand_file(const std::string& path) {
  return load_integrand(read_json_file(path));
}

json integrand_to_json(const Integrand& f) {
  json j;
  j["kind"] = kind_name(f.kind());
  j["dim"] = f.dim();
  json p = json::object();
  if (f.scale() != 1.0) p["scale"] = f.scale();
  switch (f.kind()) {
    case IntegrandKind::Isotropic:
      break;
    case IntegrandKind::Ellipse:
      p["semiaxes"] = f.semiaxes();
      break;
    case IntegrandKind::PNorm:
      p["p"] = f.pnorm_exponent();
      break;
    case IntegrandKind::SmoothedCrystalline: {
      json ns = json::array();
      for (const Vec& n : f.facet_normals()) ns.push_back(vec_to_json(n, f.dim()));
      p["normals"] = ns;
      p["weights"] = f.facet_weights();
      p["eps"] = f.smoothing_eps();
      break;
    }
    case IntegrandKind::Tabulated:
      p["values"] = f.table_values();
      break;
  }
  j["params"] = p;
  return j;
}

// ---------------------------------------------------------------------------
// shapes

ShapeSpec load_shape(const json& j) {
  ShapeSpec s;
  s.type = j.at("type").get<std::string>();
  if (s.type == "ball") {
    s.center = vec_from_json(j.at("center"));
    s.radius = j.at("radius").get<double>();
  } else if (s.type == "wulff") {
    s.center = j.contains("center") ? vec_from_json(j.at("center")) : Vec{};
    s.scale = j.value("scale", 1.0);
  } else if (s.type == "perturbed_wulff") {
    s.center = j.contains("center") ? vec_from_json(j.at("center")) : Vec{};
    s.scale = j.value("scale", 1.0);
    s.amplitude = j.at("amplitude").get<double>();
    s.mode = j.value("mode", 2);
  } else if (s.type == "ellipse") {
    s.center = j.contains("center") ? vec_from_json(j.at("center")) : Vec{};
    s.semiaxes = j.at("semiaxes").get<std::vector<double>>();
  } else if (s.type == "union") {
    for (const auto& part : j.at("parts")) s.parts.push_back(load_shape(part));
  } else if (s.type == "dumbbell") {
    const auto& cs = j.at("centers");
    if (cs.size() != 2) throw std::invalid_argument("dumbbell: needs exactly 2 centers");
    s.centers = {vec_from_json(cs[0]), vec_from_json(cs[1])};
    s.neck_width = j.at("neck_width").get<double>();
    s.scale = j.value("scale", 1.0);
  } else if (s.type == "grid") {
    s.grid_header = j.at("header").get<std::string>();
  } else {
    throw std::invalid_argument("domain spec: unknown type '" + s.type + "'");
  }
  return s;
}

ShapeSpec load_shape_file(const std::string& path) { return load_shape(read_json_file(path)); }

json shape_to_json(const ShapeSpec& s) {
  json j;
  j["type"] = s.type;
  if (s.type == "ball") {
    j["center"] = vec_to_json(s.center, 3);
    j["radius"] = s.radius;
  } else if (s.type == "wulff") {
    j["center"] = vec_to_json(s.center, 3);
    j["scale"] = s.scale;
  } else if (s.type == "perturbed_wulff") {
    j["center"] = vec_to_json(s.center, 3);
    j["scale"] = s.scale;
    j["amplitude"] = s.amplitude;
    j["mode"] = s.mode;
  } else if (s.type == "ellipse") {
    j["center"] = vec_to_json(s.center, static_cast<int>(s.semiaxes.size()));
    j["semiaxes"] = s.semiaxes;
  } else if (s.type == "union") {
    json parts = json::array();
    for (const auto& p : s.parts) parts.push_back(shape_to_json(p));
    j["parts"] = parts;
  } else if (s.type == "dumbbell") {
    j["centers"] = json::array({vec_to_json(s.centers[0], 3), vec_to_json(s.centers[1], 3)});
    j["neck_width"] = s.neck_width;
    j["scale"] = s.scale;
  } else if (s.type == "grid") {
    j["header"] = s.grid_header;
  }
  return j;
}

Potential load_potential(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "constant") return Potential::constant_g(j.value("value", 0.0));
  if (type == "linear") return Potential::linear_g(vec_from_json(j.at("slope")));
  if (type == "quadratic-well")
    return Potential::quadratic_well(j.contains("center") ? vec_from_json(j.at("center")) : Vec{},
                                     j.value("coeff", 1.0));
  throw std::invalid_argument("potential spec: unknown type '" + type + "'");
}

json potential_to_json(const Potential& g) {
  json j;
  j["type"] = g.type;
  if (g.type == "constant") j["value"] = g.constant;
  if (g.type == "linear") j["slope"] = vec_to_json(g.slope, 3);
  if (g.type == "quadratic-well") {
    j["center"] = vec_to_json(g.center, 3);
    j["coeff"] = g.coeff;
  }
  return j;
}

// ---------------------------------------------------------------------------
// binary grids

Grid load_raw_grid(const std::string& headerPath) {
  json h = read_json_file(headerPath);
  auto dims = h.at("dims").get<std::vector<int>>();
  if (dims.size() != 2 && dims.size() != 3)
    throw std::invalid_argument("raw grid header: dims must have 2 or 3 entries");
  if (h.value("dtype", "float64") != "float64")
    throw std::invalid_argument("raw grid header: only float64 supported");
  if (h.value("endianness", "little") != "little")
    throw std::invalid_argument("raw grid header: only little-endian supported");
  int dim = static_cast<int>(dims.size());
  int nodes[3] = {dims[0], dims[1], dim == 3 ? dims[2] : 1};
  Vec origin = vec_from_json(h.at("origin"));
  Grid g(dim, nodes, h.at("spacing").get<double>(), origin);

  std::string dataPath = h.at("data").get<std::string>();
  if (!dataPath.empty() && dataPath[0] != '/') {
    auto slash = headerPath.find_last_of('/');
    if (slash != std::string::npos) dataPath = headerPath.substr(0, slash + 1) + dataPath;
  }
  std::ifstream in(dataPath, std::ios::binary);
  if (!in) throw std::runtime_error("raw grid: cannot open " + dataPath);
  in.read(reinterpret_cast<char*>(g.a.data()), static_cast<std::streamsize>(g.a.size() * 8));
  if (static_cast<size_t>(in.gcount()) != g.a.size() * 8)
    throw std::runtime_error("raw grid: short read from " + dataPath);
  return g;
}

static const char kSolMagic[8] = {'A', 'N', 'I', 'S', 'O', 'S', 'O', 'L'};

void save_solution(const std::string& path, const Grid& u) {
  json h;
  h["dim"] = u.dim;
  h["dims"] = std::vector<int>{u.n[0], u.n[1], u.n[2]};
  h["spacing"] = u.h;
  h["origin"] = vec_to_json(u.origin, 3);
  h["count"] = u.a.size();
  std::string hs = h.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_solution: cannot open " + path);
  out.write(kSolMagic, 8);
  uint64_t len = hs.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  out.write(reinterpret_cast<const char*>(u.a.data()),
            static_cast<std::streamsize>(u.a.size() * 8));
}

Grid load_solution(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_solution: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kSolMagic, 8) != 0)
    throw std::runtime_error("load_solution: bad magic in " + path);
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  std::string hs(len, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(len));
  json h = json::parse(hs);
  auto dims = h.at("dims").get<std::vector<int>>();
  int nodes[3] = {dims[0], dims[1], dims[2]};
  Grid g(h.at("dim").get<int>(), nodes, h.at("spacing").get<double>(),
         vec_from_json(h.at("origin")));
  in.read(reinterpret_cast<char*>(g.a.data()), static_cast<std::streamsize>(g.a.size() * 8));
  if (static_cast<size_t>(in.gcount()) != g.a.size() * 8)
    throw std::runtime_error("load_solution: short read");
  return g;
}

// ---------------------------------------------------------------------------
// reports

json deficit_report_to_json(const DeficitReport& rep) {
  json j;
  j["delta_F"] = rep.deltaF;
  j["delta_star"] = rep.deltaStar;
  j["eta_F"] = rep.eta.status == EtaStatus::Ok ? json(rep.eta.value) : json(nullptr);
  j["eta_status"] = rep.eta.status == EtaStatus::Ok ? "ok" : "H^F not positive";
  j["hk_gap"] = rep.eta.status == EtaStatus::Ok ? json(rep.eta.hkGap) : json(nullptr);
  j["delta_W"] = rep.deltaW;
  j["kappa"] = rep.kappa;
  j["asymmetry"] = rep.asymmetry.index;
  json hk;
  hk["applicable"] = rep.hk.applicable;
  hk["lhs"] = rep.hk.lhs;
  hk["rhs"] = rep.hk.rhs;
  hk["residual"] = rep.hk.residual;
  j["hk_identity"] = hk;
  json reilly;
  reilly["lhs"] = rep.reilly.lhs;
  reilly["rhs"] = rep.reilly.rhs;
  reilly["gap"] = rep.reilly.gap;
  reilly["flagged_cells"] = rep.reilly.flaggedCells;
  j["reilly"] = reilly;
  json est = json::array();
  for (const auto& e : rep.estimates) {
    json je;
    je["name"] = e.name;
    je["applicable"] = e.applicable;
    je["deficit_side"] = e.deficitSide;
    je["rhs"] = e.rhs;
    est.push_back(je);
  }
  j["estimates"] = est;
  json mom;
  mom["alphas"] = rep.moments.alphas;
  mom["values"] = rep.moments.values;
  mom["recursion_residuals"] = rep.moments.recursion;
  j["moments"] = mom;
  json bub;
  bub["count"] = rep.bubbles.count;
  bub["radii"] = rep.bubbles.radii;
  bub["residual"] = rep.bubbles.residual;
  bub["recovered"] = rep.bubbles.recovered;
  j["bubbles"] = bub;
  json geo;
  geo["surface_energy"] = rep.energy;
  geo["volume"] = rep.vol;
  geo["diameter"] = rep.diam;
  geo["H0"] = rep.H0;
  j["geometry"] = geo;
  j["solver_residual"] = rep.solverResidual;
  j["critical_fraction"] = rep.criticalFraction;
  return j;
}

bool validate_deficit_report(const json& j, std::string* err) {
  auto fail = [&](const std::string& m) {
    if (err) *err = m;
    return false;
  };
  for (const char* key : {"delta_F", "delta_star", "eta_status", "delta_W", "kappa", "asymmetry",
                          "hk_identity", "reilly", "estimates", "moments", "bubbles", "geometry"})
    if (!j.contains(key)) return fail(std::string("missing key: ") + key);
  if (!j["delta_F"].is_number()) return fail("delta_F must be a number");
  if (!j["estimates"].is_array()) return fail("estimates must be an array");
  const json& mom = j["moments"];
  if (!mom.contains("alphas") || !mom.contains("values") ||
      mom["alphas"].size() != mom["values"].size())
    return fail("moments alphas/values mismatch");
  const json& geo = j["geometry"];
  for (const char* key : {"surface_energy", "volume", "diameter", "H0"})
    if (!geo.contains(key) || !geo[key].is_number())
      return fail(std::string("geometry missing ") + key);
  return true;
}

std::string deficit_csv_header() {
  return "label,delta_F,delta_star,eta_F,hk_gap,delta_W,kappa,asymmetry,hk_residual,"
         "reilly_lhs,reilly_rhs,reilly_gap,surface_energy,volume,diameter,H0,"
         "bubble_count,bubble_residual,solver_residual,critical_fraction";
}

std::string deficit_csv_row(const std::string& label, const DeficitReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << label << ',' << rep.deltaF << ',' << rep.deltaStar << ',';
  if (rep.eta.status == EtaStatus::Ok)
    os << rep.eta.value << ',' << rep.eta.hkGap << ',';
  else
    os << "nan,nan,";
  os << rep.deltaW << ',' << rep.kappa << ',' << rep.asymmetry.index << ',' << rep.hk.residual
     << ',' << rep.reilly.lhs << ',' << rep.reilly.rhs << ',' << rep.reilly.gap << ','
     << rep.energy << ',' << rep.vol << ',' << rep.diam << ',' << rep.H0 << ','
     << rep.bubbles.count << ',' << rep.bubbles.residual << ',' << rep.solverResidual << ','
     << rep.criticalFraction;
  return os.str();
}

// ---------------------------------------------------------------------------
// files

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string json_hash(const json& j) {
  std::string s = j.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace anisolab
