#include "feqi/harness.hpp"

#include "feqi/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace feqi {

const char* to_string(InterpolantKind kind) {
  switch (kind) {
    case InterpolantKind::Clement: return "clement";
    case InterpolantKind::ClementBC: return "clement_bc";
    case InterpolantKind::ScottZhang: return "scott_zhang";
  }
  return "?";
}

InterpolantKind interpolant_from_string(const std::string& s) {
  if (s == "clement") return InterpolantKind::Clement;
  if (s == "clement_bc") return InterpolantKind::ClementBC;
  if (s == "scott_zhang") return InterpolantKind::ScottZhang;
  throw Error(ErrorCode::InvalidConfig, "unknown interpolant '" + s + "'");
}

namespace {

const char* boundary_name(BoundaryKind b) {
  switch (b) {
    case BoundaryKind::None: return "none";
    case BoundaryKind::Full: return "full";
    case BoundaryKind::Facets: return "facets";
  }
  return "?";
}

BoundaryKind boundary_from_string(const std::string& s) {
  if (s == "none") return BoundaryKind::None;
  if (s == "full") return BoundaryKind::Full;
  if (s == "facets") return BoundaryKind::Facets;
  throw Error(ErrorCode::InvalidConfig, "unknown boundary '" + s + "' (none, full or facets)");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void StudyConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (mesh_file.empty() && (dim < 2 || dim > 3)) bad("generator meshes are unit_square or unit_cube");
  if (divisions < 1) bad("divisions must be positive");
  if (levels.empty()) bad("at least one level is required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0) bad("levels must be nonnegative");
    if (i > 0 && levels[i] <= levels[i - 1]) bad("levels must be increasing");
  }
  if (r < 1) bad("r must be at least 1");
  if (!proxy.empty()) {
    proxy_space(proxy);
    if (mesh_file.empty() && dim != 3) bad("proxy spaces need the unit cube");
    if (interpolant != InterpolantKind::ScottZhang) bad("proxy studies use scott_zhang");
  } else if (k < 0 || (mesh_file.empty() && k > dim)) {
    bad("form degree out of range");
  }
  if (!(p == 1.0 || p == 2.0 || p == kInfinity)) bad("p must be 1, 2 or inf");
  if (boundary == BoundaryKind::Facets && mesh_file.empty()) bad("boundary 'facets' needs a mesh file");
  if (boundary != BoundaryKind::None) {
    if (interpolant == InterpolantKind::Clement) bad("clement carries no boundary conditions; use clement_bc");
    if (target != "bc_trig" && target != "zero") bad("boundary conditions need a target with vanishing traces (bc_trig, zero)");
  }
  if (target != "trig" && target != "bc_trig" && target != "poly" && target != "broken_fe" && target != "zero") {
    throw Error(ErrorCode::UnknownTarget, "unknown target '" + target + "'");
  }
  if (quadrature_order < 0) bad("quadrature_order must be nonnegative");
}

int StudyConfig::expected_rate() const {
  Family f = family;
  int kk = k;
  if (!proxy.empty()) {
    const ProxySpace s = proxy_space(proxy);
    f = s.family;
    kk = s.k;
  }
  const int n = proxy.empty() ? dim : 3;
  if (kk == 0) f = Family::Full;
  if (kk == n) f = Family::Trimmed;
  return f == Family::Full ? r + 1 : r;
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
  StudyConfig c;
  try {
    const auto& m = j.at("mesh");
    if (m.contains("file")) {
      c.mesh_file = m["file"].get<std::string>();
    } else {
      const std::string g = m.value("generator", "unit_square");
      if (g == "unit_square") c.dim = 2;
      else if (g == "unit_cube") c.dim = 3;
      else throw Error(ErrorCode::InvalidConfig, "unknown generator '" + g + "'");
      c.divisions = m.value("divisions", 1);
    }
    if (m.contains("levels")) c.levels = m["levels"].get<std::vector<int>>();
    const auto& s = j.at("space");
    c.r = s.value("r", 1);
    if (s.contains("proxy")) {
      c.proxy = s["proxy"].get<std::string>();
      const ProxySpace ps = proxy_space(c.proxy);
      c.family = ps.family;
      c.k = ps.k;
    } else {
      c.family = family_from_string(s.value("family", "full"));
      c.k = s.value("k", 0);
    }
    c.interpolant = interpolant_from_string(j.value("interpolant", "scott_zhang"));
    if (j.contains("p")) {
      const auto& p = j["p"];
      if (p.is_string()) {
        if (p.get<std::string>() != "inf") throw Error(ErrorCode::InvalidConfig, "p must be a number or \"inf\"");
        c.p = kInfinity;
      } else {
        c.p = p.get<double>();
      }
    }
    c.boundary = boundary_from_string(j.value("boundary", "none"));
    if (j.contains("target")) {
      const auto& t = j["target"];
      if (t.is_string()) {
        c.target = t.get<std::string>();
      } else {
        c.target = t.value("name", "trig");
        c.seed = t.value("seed", 0u);
      }
    }
    c.seed = j.value("seed", c.seed);
    c.quadrature_order = j.value("quadrature_order", 0);
    c.constants = j.value("constants", false);
    c.output = j.value("output", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("study config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json StudyConfig::to_json() const {
  nlohmann::json j;
  if (mesh_file.empty()) {
    j["mesh"] = {{"generator", dim == 2 ? "unit_square" : "unit_cube"}, {"divisions", divisions}, {"levels", levels}};
  } else {
    j["mesh"] = {{"file", mesh_file}, {"levels", levels}};
  }
  if (proxy.empty()) j["space"] = {{"family", to_string(family)}, {"r", r}, {"k", k}};
  else j["space"] = {{"proxy", proxy}, {"r", r}};
  j["interpolant"] = to_string(interpolant);
  if (p == kInfinity) j["p"] = "inf";
  else j["p"] = p;
  j["boundary"] = boundary_name(boundary);
  j["target"] = {{"name", target}, {"seed", seed}};
  j["quadrature_order"] = quadrature_order;
  j["constants"] = constants;
  if (!output.empty()) j["output"] = output;
  return j;
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t m = h.size();
  if (m < 2 || e.size() != m) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(e[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    sx += std::log(h[i]);
    sy += std::log(e[i]);
  }
  sx /= m;
  sy /= m;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(h[i]) - sx;
    sxy += dx * (std::log(e[i]) - sy);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// Facets of `fine` whose centroid lies on one of the coarse facets.
std::vector<int> facets_on(const SimplicialComplex& fine, const SimplicialComplex& coarse,
                           const std::vector<std::vector<int>>& coarse_facets) {
  const int n = fine.dim();
  std::vector<SimplexGeometry> geo;
  std::vector<Eigen::MatrixXd> pinv;
  for (const auto& f : coarse_facets) {
    const int id = coarse.find(f);
    if (id < 0) throw Error(ErrorCode::InvalidConfig, "boundary facet is not a facet of the mesh");
    geo.push_back(coarse.geometry({n - 1, id}));
    pinv.push_back(geo.back().E.completeOrthogonalDecomposition().pseudoInverse());
  }
  const double scale = coarse.h_max();
  std::vector<int> out;
  for (int f : fine.boundary_facets()) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int v : fine.vertices_of({n - 1, f})) x += fine.vertex(v);
    x /= n;
    for (std::size_t i = 0; i < geo.size(); ++i) {
      const Eigen::VectorXd t = pinv[i] * (x - geo[i].origin);
      const double off = (geo[i].origin + geo[i].E * t - x).norm();
      if (off < 1e-10 * scale && t.minCoeff() > -1e-10 && t.sum() < 1 + 1e-10) {
        out.push_back(f);
        break;
      }
    }
  }
  return out;
}

SimplicialComplex level_mesh(const StudyConfig& c, const MeshFile* file, int level) {
  if (!file) return unit_domain(c.dim, c.divisions, level);
  SimplicialComplex m = file->mesh;
  for (int l = 0; l < level; ++l) m = refine_uniform(m).mesh;
  return m;
}

BoundarySubcomplex level_boundary(const StudyConfig& c, const SimplicialComplex& mesh, const MeshFile* file) {
  switch (c.boundary) {
    case BoundaryKind::None: return BoundarySubcomplex::empty(mesh);
    case BoundaryKind::Full: return BoundarySubcomplex::full_boundary(mesh);
    case BoundaryKind::Facets: return {mesh, facets_on(mesh, file->mesh, file->boundary_facets)};
  }
  return BoundarySubcomplex::empty(mesh);
}

std::vector<std::vector<int>> vertex_cells(const SimplicialComplex& mesh) {
  std::vector<std::vector<int>> out(mesh.num_vertices());
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.vertices_of({mesh.dim(), c})) out[v].push_back(c);
  return out;
}

// cells sharing a vertex with each cell
std::vector<std::vector<int>> touching_cells(const SimplicialComplex& mesh) {
  const auto vc = vertex_cells(mesh);
  std::vector<std::vector<int>> out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int v : mesh.vertices_of({mesh.dim(), c})) out[c].insert(out[c].end(), vc[v].begin(), vc[v].end());
    std::sort(out[c].begin(), out[c].end());
    out[c].erase(std::unique(out[c].begin(), out[c].end()), out[c].end());
  }
  return out;
}

double patch_norm(const std::vector<double>& per_cell, const std::vector<int>& patch, double p) {
  std::vector<double> v;
  v.reserve(patch.size());
  for (int c : patch) v.push_back(per_cell[c]);
  return combine_norms(v, p);
}

}  // namespace

RateReport run_study(const StudyConfig& config, const MeshCallback& on_mesh) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  std::optional<MeshFile> file;
  if (!config.mesh_file.empty()) file = read_mesh_json(config.mesh_file);
  const int n = file ? file->mesh.dim() : config.dim;
  if (!config.proxy.empty() && n != 3) throw Error(ErrorCode::WrongDimension, "proxy studies need a 3D mesh");
  if (config.k > n) throw Error(ErrorCode::InvalidConfig, "form degree exceeds the mesh dimension");

  Family family = config.family;
  int k = config.k;
  if (!config.proxy.empty()) {
    const ProxySpace s = proxy_space(config.proxy);
    family = s.family;
    k = s.k;
  }
  const SampledForm omega = manufactured_target(config.target, {n, k, config.r, config.seed});
  const int order = config.order();
  const double p = config.p;

  RateReport rep;
  rep.config = config;
  rep.expected = config.expected_rate();
  for (int level : config.levels) {
    const auto t0 = std::chrono::steady_clock::now();
    LevelResult lr;
    lr.level = level;
    try {
      const SimplicialComplex mesh = level_mesh(config, file ? &*file : nullptr, level);
      const BoundarySubcomplex U = level_boundary(config, mesh, file ? &*file : nullptr);
      if (on_mesh) on_mesh(level, mesh, U);
      lr.h = mesh.h_max();
      lr.cells = mesh.num_cells();

      std::vector<PolyForm> local;
      std::vector<double> cell_err, cell_derr;
      if (!config.proxy.empty()) {
        const ProxyReport pr = proxy_interpolate(from_form(omega), config.proxy, config.r, mesh, U, order);
        lr.dofs = static_cast<int>(pr.interpolant.dofs.size());
        lr.max_zeroed = pr.interpolant.max_zeroed;
        local = pr.interpolant.local;
        if (p == 2.0) {
          cell_err = pr.cell_error;
          cell_derr = pr.cell_derror;
        }
      }
      if (local.empty()) {
        const auto sys = build_biorthogonal(mesh, family, config.r, k);
        lr.dofs = sys.size();
        InterpolantResult res;
        switch (config.interpolant) {
          case InterpolantKind::Clement: res = clement(omega, sys); break;
          case InterpolantKind::ClementBC: res = clement_bc(omega, sys, U); break;
          case InterpolantKind::ScottZhang: res = scott_zhang(omega, sys, choose_anchors(mesh, U), U); break;
        }
        lr.max_zeroed = res.max_zeroed;
        local = std::move(res.local);
        if (config.constants) {
          lr.biorth = measure_constants(sys, p, 16, config.seed);
          if (k < n) lr.xi = xi_scaling(mesh, choose_anchors(mesh, U), family, config.r, k, p);
        }
      }
      if (cell_err.empty()) {
        cell_err = cell_errors(mesh, omega, local, p, order);
        cell_derr = cell_errors(mesh, omega, local, p, order, true);
      }
      lr.error = combine_norms(cell_err, p);
      lr.derror = combine_norms(cell_derr, p);
      for (double e : cell_err) lr.max_cell_error = std::max(lr.max_cell_error, e);

      // stability: |I w|_T against the norm of w on the cells touching T
      const int fk = omega.k;
      const std::vector<PolyForm> zero(mesh.num_cells(), PolyForm(n, fk));
      const auto w_norm = cell_errors(mesh, omega, zero, p, order);
      const auto dw_norm = cell_errors(mesh, omega, zero, p, order, true);
      const auto iw_norm = cell_errors(mesh, SampledForm::zero(n, fk), local, p, order);
      const auto touch = touching_cells(mesh);
      const bool with_d = config.interpolant == InterpolantKind::ScottZhang;
      for (int c = 0; c < mesh.num_cells(); ++c) {
        double den = patch_norm(w_norm, touch[c], p);
        if (with_d) den += patch_norm(dw_norm, touch[c], p);
        if (den > 1e-300) lr.stability = std::max(lr.stability, iw_norm[c] / den);
      }
    } catch (const Error& e) {
      std::string msg = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
      throw Error(e.code(), "level " + std::to_string(level) + ": " + msg);
    }
    lr.seconds = seconds_since(t0);
    rep.levels.push_back(lr);
  }

  std::vector<double> h, e, de;
  for (const auto& l : rep.levels) {
    h.push_back(l.h);
    e.push_back(l.error);
    de.push_back(l.derror);
  }
  rep.slope = fit_slope(h, e);
  rep.dslope = fit_slope(h, de);
  if (h.size() >= 3) {
    rep.slope_fine = fit_slope({h.begin() + 1, h.end()}, {e.begin() + 1, e.end()});
  } else {
    rep.slope_fine = std::numeric_limits<double>::quiet_NaN();
  }
  if (h.size() >= 2) {
    rep.slope_last = fit_slope({h.end() - 2, h.end()}, {e.end() - 2, e.end()});
  } else {
    rep.slope_last = std::numeric_limits<double>::quiet_NaN();
  }
  rep.seconds = seconds_since(t_start);
  return rep;
}

nlohmann::json RateReport::to_json() const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["expected_rate"] = expected;
  j["slope"] = number(slope);
  j["slope_fine"] = number(slope_fine);
  j["slope_last"] = number(slope_last);
  j["dslope"] = number(dslope);
  j["seconds"] = seconds;
  j["levels"] = nlohmann::json::array();
  for (const auto& l : levels) {
    nlohmann::json x{{"level", l.level},
                     {"h", l.h},
                     {"cells", l.cells},
                     {"dofs", l.dofs},
                     {"error", l.error},
                     {"max_cell_error", l.max_cell_error},
                     {"derror", l.derror},
                     {"stability", l.stability},
                     {"max_zeroed", l.max_zeroed},
                     {"seconds", l.seconds}};
    if (l.biorth) x["biorth_constants"] = {{"basis", l.biorth->basis}, {"operator", l.biorth->operator_}};
    if (l.xi) x["xi_scaling"] = {{"xi", l.xi->xi}, {"dxi", l.xi->dxi}};
    j["levels"].push_back(x);
  }
  return j;
}

void write_results_csv(const RateReport& report, std::ostream& out) {
  out << "level,h,error,slope\n";
  char buf[128];
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& l = report.levels[i];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,", l.level, l.h, l.error);
    out << buf;
    if (i > 0) {
      const auto& q = report.levels[i - 1];
      std::snprintf(buf, sizeof buf, "%.17g", std::log(q.error / l.error) / std::log(q.h / l.h));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace feqi
