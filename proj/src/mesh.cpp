#include "feqi/mesh.hpp"

#include "feqi/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace feqi {

std::uint64_t SimplicialComplex::key(const std::vector<int>& sorted) {
  std::uint64_t k = 0;
  for (int v : sorted) k = (k << 16) | static_cast<std::uint64_t>(v + 1);
  return k;
}

SimplicialComplex SimplicialComplex::build(const Eigen::MatrixXd& vertices,
                                           const std::vector<std::vector<int>>& cells) {
  SimplicialComplex c;
  c.m_n = static_cast<int>(vertices.rows());
  const int n = c.m_n;
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::WrongDimension, "ambient dimension must be 1..3");
  if (vertices.cols() >= 65535) throw Error(ErrorCode::InvalidConfig, "too many vertices");
  c.m_coords = vertices;
  c.m_simplices.assign(n + 1, {});
  c.m_index.assign(n + 1, {});
  c.m_containing.assign(n + 1, {});
  for (int v = 0; v < vertices.cols(); ++v) {
    c.m_index[0].emplace(key({v}), v);
    c.m_simplices[0].push_back({v});
  }
  for (const auto& cell : cells) {
    if (static_cast<int>(cell.size()) != n + 1) {
      throw Error(ErrorCode::NonconformingMesh, "cell does not have n+1 vertices");
    }
    std::vector<int> sorted = cell;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::DegenerateSimplex, "cell repeats a vertex");
    }
    for (int v : sorted) {
      if (v < 0 || v >= vertices.cols()) throw Error(ErrorCode::UnknownSimplex, "cell references unknown vertex");
    }
    if (c.m_index[n].count(key(sorted))) throw Error(ErrorCode::NonconformingMesh, "duplicate cell");
    std::vector<int> faces(Mask(1) << (n + 1), -1);
    for (Mask m = 1; m < (Mask(1) << (n + 1)); ++m) {
      std::vector<int> sub;
      for (int j : mask_elements(m)) sub.push_back(sorted[j]);
      const int d = popcount(m) - 1;
      auto [it, inserted] = c.m_index[d].emplace(key(sub), static_cast<int>(c.m_simplices[d].size()));
      if (inserted) c.m_simplices[d].push_back(sub);
      faces[m] = it->second;
    }
    c.m_cell_faces.push_back(std::move(faces));
    c.m_cell_order.push_back(cell);
  }
  for (int d = 0; d <= n; ++d) c.m_containing[d].assign(c.m_simplices[d].size(), {});
  for (int t = 0; t < c.num_cells(); ++t) {
    for (Mask m = 1; m < (Mask(1) << (n + 1)); ++m) {
      c.m_containing[popcount(m) - 1][c.m_cell_faces[t][m]].push_back(t);
    }
  }
  for (int v = 0; v < c.num_vertices(); ++v) {
    if (c.m_containing[0][v].empty()) throw Error(ErrorCode::NonconformingMesh, "vertex not used by any cell");
  }
  c.m_vertex_edges.assign(c.num_vertices(), {});
  if (n >= 1) {
    for (int e = 0; e < c.num_simplices(1); ++e) {
      for (int v : c.m_simplices[1][e]) c.m_vertex_edges[v].push_back(e);
    }
  }
  c.m_cell_sign.resize(c.num_cells());
  for (int t = 0; t < c.num_cells(); ++t) {
    const auto g = c.geometry({n, t});
    const double det = g.E.determinant();
    const double h = c.diameter({n, t});
    if (std::abs(det) <= 1e-12 * std::pow(h, n)) throw Error(ErrorCode::DegenerateSimplex, "cell has zero volume");
    c.m_cell_sign[t] = det > 0 ? 1 : -1;
  }
  c.check_conformity();
  c.check_face_connected();
  return c;
}

void SimplicialComplex::check_conformity() const {
  if (m_n < 1) return;
  for (int f = 0; f < num_simplices(m_n - 1); ++f) {
    const auto& cells = m_containing[m_n - 1][f];
    if (cells.size() > 2) throw Error(ErrorCode::NonconformingMesh, "facet shared by more than two cells");
    if (cells.size() == 2 && orientation(f, cells[0]) * orientation(f, cells[1]) != -1) {
      throw Error(ErrorCode::NonconformingMesh, "cells overlap across a shared facet");
    }
  }
}

void SimplicialComplex::check_face_connected() const {
  for (int d = 0; d + 2 <= m_n; ++d) {
    for (int s = 0; s < num_simplices(d); ++s) {
      const auto& cells = m_containing[d][s];
      if (cells.size() <= 1) continue;
      const auto facets = cofaces({d, s}, m_n - 1);
      std::vector<int> seen{cells.front()};
      std::deque<int> queue{cells.front()};
      while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        for (int f : facets) {
          const auto& fc = m_containing[m_n - 1][f];
          if (std::find(fc.begin(), fc.end(), t) == fc.end()) continue;
          for (int u : fc) {
            if (std::find(seen.begin(), seen.end(), u) == seen.end()) {
              seen.push_back(u);
              queue.push_back(u);
            }
          }
        }
      }
      if (seen.size() != cells.size()) throw Error(ErrorCode::NotFaceConnected, "simplex star is not face-connected");
    }
  }
}

int SimplicialComplex::find(const std::vector<int>& vertex_ids) const {
  std::vector<int> sorted = vertex_ids;
  std::sort(sorted.begin(), sorted.end());
  const int d = static_cast<int>(sorted.size()) - 1;
  if (d < 0 || d > m_n) return -1;
  auto it = m_index[d].find(key(sorted));
  return it == m_index[d].end() ? -1 : it->second;
}

SimplexRef SimplicialComplex::lookup(const std::vector<int>& vertex_ids) const {
  const int id = find(vertex_ids);
  if (id < 0) throw Error(ErrorCode::UnknownSimplex, "no simplex with these vertices");
  return {static_cast<int>(vertex_ids.size()) - 1, id};
}

SimplexRef SimplicialComplex::cell_face(int cell, Mask local) const {
  return {popcount(local) - 1, m_cell_faces[cell][local]};
}

SimplexRef SimplicialComplex::face_of(SimplexRef s, Mask local) const {
  const auto& v = vertices_of(s);
  std::vector<int> sub;
  for (int j : mask_elements(local)) sub.push_back(v[j]);
  return lookup(sub);
}

Mask SimplicialComplex::local_mask(SimplexRef host, SimplexRef sub) const {
  const auto& hv = vertices_of(host);
  const auto& sv = vertices_of(sub);
  Mask m = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < hv.size() && j < sv.size(); ++i) {
    if (hv[i] == sv[j]) {
      m |= Mask(1) << i;
      ++j;
    }
  }
  return j == sv.size() ? m : 0;
}

std::vector<int> SimplicialComplex::star_cells(SimplexRef s) const {
  std::vector<int> out;
  for (int v : vertices_of(s)) {
    const auto& c = m_containing[0][v];
    out.insert(out.end(), c.begin(), c.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Patch SimplicialComplex::patches(SimplexRef s) const {
  if (s.dim < 0 || s.dim > m_n || s.id < 0 || s.id >= num_simplices(s.dim)) {
    throw Error(ErrorCode::UnknownSimplex, "patches of unknown simplex");
  }
  Patch p;
  p.anchor = s;
  p.star_cells = star_cells(s);
  p.containing_cells = containing_cells(s);
  return p;
}

std::vector<int> SimplicialComplex::cofaces(SimplexRef s, int d) const {
  std::vector<int> out;
  for (int t : containing_cells(s)) {
    const Mask sm = local_mask({m_n, t}, s);
    for (Mask m : subsets(m_n + 1, d + 1)) {
      if ((m & sm) == sm) out.push_back(m_cell_faces[t][m]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SimplexGeometry SimplicialComplex::geometry(SimplexRef s) const {
  const auto& v = vertices_of(s);
  SimplexGeometry g;
  g.origin = m_coords.col(v[0]);
  g.E.resize(m_n, s.dim);
  for (int i = 1; i <= s.dim; ++i) g.E.col(i - 1) = m_coords.col(v[i]) - g.origin;
  return g;
}

int SimplicialComplex::orientation(int facet, int cell) const {
  const Mask m = local_mask({m_n, cell}, {m_n - 1, facet});
  if (m == 0) throw Error(ErrorCode::NotASubsimplex, "facet is not a face of the cell");
  const int j = std::countr_zero(~m & full_mask(m_n + 1));
  return ((j % 2 == 0) ? 1 : -1) * m_cell_sign[cell];
}

double SimplicialComplex::diameter(SimplexRef s) const {
  const auto& v = vertices_of(s);
  double h = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) h = std::max(h, (m_coords.col(v[i]) - m_coords.col(v[j])).norm());
  return h;
}

double SimplicialComplex::volume(SimplexRef s) const {
  if (s.dim == 0) return 1.0;
  const auto g = geometry(s);
  return std::sqrt(std::max(0.0, (g.E.transpose() * g.E).determinant())) / factorial(s.dim);
}

double SimplicialComplex::shape_measure(SimplexRef s) const {
  if (s.dim < 1) throw Error(ErrorCode::DegenerateSimplex, "shape measure needs dimension >= 1");
  const double vol = volume(s);
  if (vol <= 0.0) throw Error(ErrorCode::DegenerateSimplex, "zero-volume simplex");
  return std::pow(diameter(s), s.dim) / vol;
}

double SimplicialComplex::shape_measure() const {
  double mu = 0.0;
  for (int d = 1; d <= m_n; ++d)
    for (int i = 0; i < num_simplices(d); ++i) mu = std::max(mu, shape_measure({d, i}));
  return mu;
}

double SimplicialComplex::h_vertex(int v) const {
  double h = std::numeric_limits<double>::infinity();
  for (int e : m_vertex_edges[v]) h = std::min(h, diameter({1, e}));
  return h;
}

double SimplicialComplex::h_max() const {
  double h = 0.0;
  for (int t = 0; t < num_cells(); ++t) h = std::max(h, diameter({m_n, t}));
  return h;
}

std::vector<PathStep> SimplicialComplex::face_path(int T0, int T, SimplexRef s) const {
  const Mask s0 = local_mask({m_n, T0}, s);
  const Mask s1 = local_mask({m_n, T}, s);
  if (s0 == 0 || s1 == 0) throw Error(ErrorCode::NotASubsimplex, "face_path: S is not contained in both cells");
  if (T0 == T) return {};
  std::map<int, PathStep> pred;
  std::deque<int> queue{T0};
  pred[T0] = {-1, -1};
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    if (t == T) break;
    const Mask sm = local_mask({m_n, t}, s);
    for (int j = 0; j <= m_n; ++j) {
      const Mask fm = full_mask(m_n + 1) & ~(Mask(1) << j);
      if ((fm & sm) != sm) continue;
      const int f = m_cell_faces[t][fm];
      for (int u : m_containing[m_n - 1][f]) {
        if (u == t || pred.count(u)) continue;
        pred[u] = {t, f};
        queue.push_back(u);
      }
    }
  }
  if (!pred.count(T)) throw Error(ErrorCode::NotFaceConnected, "no face-connected path between the cells");
  std::vector<PathStep> path;
  for (int t = T; t != T0; t = pred[t].cell) path.push_back({t, pred[t].facet});
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<int> SimplicialComplex::boundary_facets() const {
  std::vector<int> out;
  for (int f = 0; f < num_simplices(m_n - 1); ++f) {
    if (m_containing[m_n - 1][f].size() == 1) out.push_back(f);
  }
  return out;
}

BoundarySubcomplex::BoundarySubcomplex(const SimplicialComplex& mesh, const std::vector<int>& facets)
    : m_facets(facets) {
  const int n = mesh.dim();
  m_flags.assign(n + 1, {});
  for (int d = 0; d <= n; ++d) m_flags[d].assign(mesh.num_simplices(d), 0);
  for (int f : facets) {
    const SimplexRef F{n - 1, f};
    const int nv = n;
    for (Mask m = 1; m < (Mask(1) << nv); ++m) {
      const SimplexRef sub = mesh.face_of(F, m);
      if (!m_flags[sub.dim][sub.id]) {
        m_flags[sub.dim][sub.id] = 1;
        ++m_count;
      }
    }
  }
  std::sort(m_facets.begin(), m_facets.end());
}

BoundarySubcomplex BoundarySubcomplex::full_boundary(const SimplicialComplex& mesh) {
  return {mesh, mesh.boundary_facets()};
}

AnchorChoice choose_anchors(const SimplicialComplex& mesh, const BoundarySubcomplex& U) {
  const int n = mesh.dim();
  AnchorChoice a;
  a.facet.assign(n + 1, {});
  a.cell.assign(n + 1, {});
  for (int d = 0; d <= n; ++d) {
    a.facet[d].assign(mesh.num_simplices(d), -1);
    a.cell[d].assign(mesh.num_simplices(d), -1);
    if (d == n) continue;
    for (int s = 0; s < mesh.num_simplices(d); ++s) {
      const SimplexRef S{d, s};
      int F = -1;
      if (d == n - 1) {
        F = s;
      } else {
        for (int f : mesh.cofaces(S, n - 1)) {
          if (U.contains(S) && !U.contains({n - 1, f})) continue;
          F = f;
          break;
        }
      }
      if (F < 0 || (U.contains(S) && !U.contains({n - 1, F}))) {
        throw Error(ErrorCode::NoAdmissibleAnchor, "no boundary facet contains a boundary simplex");
      }
      const auto& cells = mesh.containing_cells({n - 1, F});
      a.facet[d][s] = F;
      a.cell[d][s] = *std::min_element(cells.begin(), cells.end());
    }
  }
  return a;
}

Refinement refine_uniform(const SimplicialComplex& mesh) {
  const int n = mesh.dim();
  std::vector<Eigen::VectorXd> coords;
  for (int v = 0; v < mesh.num_vertices(); ++v) coords.push_back(mesh.vertex(v));
  std::vector<int> edge_mid(mesh.num_simplices(1), -1);
  for (int e = 0; e < mesh.num_simplices(1); ++e) {
    const auto& v = mesh.vertices_of({1, e});
    edge_mid[e] = static_cast<int>(coords.size());
    coords.push_back(0.5 * (mesh.vertex(v[0]) + mesh.vertex(v[1])));
  }
  auto mid = [&](int a, int b) { return edge_mid[mesh.find({a, b})]; };
  Refinement out;
  std::vector<std::vector<int>> cells;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const auto& x = mesh.cell_vertex_order(t);
    std::vector<std::vector<int>> children;
    if (n == 1) {
      const int m = mid(x[0], x[1]);
      children = {{x[0], m}, {m, x[1]}};
    } else if (n == 2) {
      const int m01 = mid(x[0], x[1]), m02 = mid(x[0], x[2]), m12 = mid(x[1], x[2]);
      children = {{x[0], m01, m02}, {m01, x[1], m12}, {m02, m12, x[2]}, {m01, m02, m12}};
    } else {
      const int m01 = mid(x[0], x[1]), m02 = mid(x[0], x[2]), m03 = mid(x[0], x[3]);
      const int m12 = mid(x[1], x[2]), m13 = mid(x[1], x[3]), m23 = mid(x[2], x[3]);
      children = {{x[0], m01, m02, m03},   {m01, x[1], m12, m13}, {m02, m12, x[2], m23},
                  {m03, m13, m23, x[3]},   {m01, m02, m03, m13},  {m01, m02, m12, m13},
                  {m02, m03, m13, m23},    {m02, m12, m13, m23}};
    }
    for (auto& c : children) {
      cells.push_back(std::move(c));
      out.parent.push_back(t);
    }
  }
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) X.col(i) = coords[i];
  out.mesh = SimplicialComplex::build(X, cells);
  return out;
}

SimplicialComplex unit_square(int divisions) {
  const int N = divisions;
  Eigen::MatrixXd X(2, (N + 1) * (N + 1));
  auto id = [N](int i, int j) { return i + (N + 1) * j; };
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) X.col(id(i, j)) << double(i) / N, double(j) / N;
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
    }
  }
  return SimplicialComplex::build(X, cells);
}

SimplicialComplex unit_cube(int divisions) {
  const int N = divisions;
  Eigen::MatrixXd X(3, (N + 1) * (N + 1) * (N + 1));
  auto id = [N](int i, int j, int k) { return i + (N + 1) * (j + (N + 1) * k); };
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j <= N; ++j)
      for (int i = 0; i <= N; ++i) X.col(id(i, j, k)) << double(i) / N, double(j) / N, double(k) / N;
  std::vector<std::vector<int>> cells;
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::vector<int> cell{id(c[0], c[1], c[2])};
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            cell.push_back(id(c[0], c[1], c[2]));
          }
          cells.push_back(cell);
        }
      }
    }
  }
  return SimplicialComplex::build(X, cells);
}

SimplicialComplex unit_domain(int n, int divisions, int levels) {
  SimplicialComplex m = (n == 2) ? unit_square(divisions)
                        : (n == 3) ? unit_cube(divisions)
                                   : throw Error(ErrorCode::WrongDimension, "unit_domain supports n = 2, 3");
  for (int l = 0; l < levels; ++l) m = refine_uniform(m).mesh;
  return m;
}

MeshFile read_mesh_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open mesh file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed mesh JSON: ") + e.what());
  }
  const int n = j.at("dim").get<int>();
  const auto verts = j.at("vertices").get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (static_cast<int>(verts[v].size()) != n) throw Error(ErrorCode::InvalidConfig, "vertex coordinate count");
    for (int i = 0; i < n; ++i) X(i, v) = verts[v][i];
  }
  MeshFile out{SimplicialComplex::build(X, j.at("cells").get<std::vector<std::vector<int>>>()), {}};
  if (j.contains("boundary_facets")) out.boundary_facets = j["boundary_facets"].get<std::vector<std::vector<int>>>();
  return out;
}

std::string mesh_to_json(const SimplicialComplex& mesh, const BoundarySubcomplex* U) {
  nlohmann::json j;
  j["dim"] = mesh.dim();
  std::vector<std::vector<double>> verts;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto x = mesh.vertex(v);
    verts.emplace_back(x.data(), x.data() + x.size());
  }
  j["vertices"] = verts;
  std::vector<std::vector<int>> cells;
  for (int t = 0; t < mesh.num_cells(); ++t) cells.push_back(mesh.cell_vertex_order(t));
  j["cells"] = cells;
  std::vector<std::vector<int>> bf;
  if (U) {
    for (int f : U->facets()) bf.push_back(mesh.vertices_of({mesh.dim() - 1, f}));
  }
  j["boundary_facets"] = bf;
  return j.dump();
}

}  // namespace feqi
