#pragma once

#include "feqi/combinatorics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace feqi {

/// Handle of a simplex inside a complex: its dimension and index in that
/// dimension's list.
struct SimplexRef {
  int dim = -1;
  int id = -1;
  bool valid() const { return dim >= 0 && id >= 0; }
  friend bool operator==(const SimplexRef&, const SimplexRef&) = default;
};

/// Affine parametrisation x = origin + E t of a simplex.
struct SimplexGeometry {
  Eigen::VectorXd origin;
  Eigen::MatrixXd E;  // n x d
};

/// One step of a face-connected path: the cell entered and the facet crossed.
struct PathStep {
  int cell;
  int facet;
};

struct Patch {
  SimplexRef anchor;
  std::vector<int> star_cells;        // cells meeting the anchor
  std::vector<int> containing_cells;  // cells containing the anchor
};

class BoundarySubcomplex;

/// Conforming simplicial complex of dimension n <= 3 with the full
/// subsimplex lattice. Simplices list their vertices in ascending order,
/// which also fixes their reference orientation. Immutable after build.
class SimplicialComplex {
 public:
  /// vertices: n x nv coordinates; cells: n+1 vertex ids each. The given
  /// vertex order of each cell is kept for refinement.
  static SimplicialComplex build(const Eigen::MatrixXd& vertices,
                                 const std::vector<std::vector<int>>& cells);

  int dim() const { return m_n; }
  int num_vertices() const { return static_cast<int>(m_coords.cols()); }
  int num_simplices(int d) const { return static_cast<int>(m_simplices[d].size()); }
  int num_cells() const { return num_simplices(m_n); }
  const Eigen::MatrixXd& coordinates() const { return m_coords; }
  Eigen::VectorXd vertex(int v) const { return m_coords.col(v); }

  const std::vector<int>& vertices_of(SimplexRef s) const { return m_simplices[s.dim][s.id]; }
  const std::vector<int>& cell_vertex_order(int cell) const { return m_cell_order[cell]; }

  /// Id of the simplex with the given (any order) vertex ids, or -1.
  int find(const std::vector<int>& vertex_ids) const;
  SimplexRef lookup(const std::vector<int>& vertex_ids) const;

  /// Subsimplex of `cell` given by a mask over the cell's ascending vertices.
  SimplexRef cell_face(int cell, Mask local) const;
  /// Subsimplex of `s` given by a mask over its ascending vertices.
  SimplexRef face_of(SimplexRef s, Mask local) const;
  /// Mask of `sub` inside `host` (ascending local positions), 0 if sub is not a face.
  Mask local_mask(SimplexRef host, SimplexRef sub) const;
  bool contains(SimplexRef host, SimplexRef sub) const { return local_mask(host, sub) != 0; }

  const std::vector<int>& containing_cells(SimplexRef s) const { return m_containing[s.dim][s.id]; }
  std::vector<int> star_cells(SimplexRef s) const;
  Patch patches(SimplexRef s) const;
  /// Simplices of dimension d containing s.
  std::vector<int> cofaces(SimplexRef s, int d) const;

  SimplexGeometry geometry(SimplexRef s) const;
  /// sign det E for cells (ambient orientation relative to ascending order).
  int cell_sign(int cell) const { return m_cell_sign[cell]; }
  /// o(F,T) for a facet F of cell T.
  int orientation(int facet, int cell) const;

  double diameter(SimplexRef s) const;
  double volume(SimplexRef s) const;
  /// h_S^d / vol(S) for d >= 1.
  double shape_measure(SimplexRef s) const;
  double shape_measure() const;
  /// Minimum length of the edges at vertex v.
  double h_vertex(int v) const;
  /// Diameter for d >= 1, h_vertex for vertices.
  double h(SimplexRef s) const { return s.dim == 0 ? h_vertex(s.id) : diameter(s); }
  double h_max() const;

  /// Face-connected cell path from T0 to T crossing facets that contain s.
  std::vector<PathStep> face_path(int T0, int T, SimplexRef s) const;

  /// Facets with exactly one containing cell.
  std::vector<int> boundary_facets() const;

 private:
  int m_n = 0;
  Eigen::MatrixXd m_coords;
  std::vector<std::vector<std::vector<int>>> m_simplices;  // [dim][id] -> vertices
  std::vector<std::unordered_map<std::uint64_t, int>> m_index;
  std::vector<std::vector<int>> m_cell_order;
  std::vector<std::vector<int>> m_cell_faces;  // [cell][mask] -> id in dim popcount-1
  std::vector<std::vector<std::vector<int>>> m_containing;  // [dim][id] -> cells
  std::vector<std::vector<int>> m_vertex_edges;
  std::vector<int> m_cell_sign;

  static std::uint64_t key(const std::vector<int>& sorted);
  void check_conformity() const;
  void check_face_connected() const;
};

/// Subcomplex U of the boundary carrying homogeneous boundary conditions.
class BoundarySubcomplex {
 public:
  BoundarySubcomplex() = default;
  /// Closure of the given facets (simplex ids of dimension n-1).
  BoundarySubcomplex(const SimplicialComplex& mesh, const std::vector<int>& facets);

  static BoundarySubcomplex empty(const SimplicialComplex& mesh) { return {mesh, {}}; }
  static BoundarySubcomplex full_boundary(const SimplicialComplex& mesh);

  bool contains(SimplexRef s) const { return !m_flags.empty() && m_flags[s.dim][s.id] != 0; }
  bool is_empty() const { return m_count == 0; }
  int size() const { return m_count; }
  const std::vector<int>& facets() const { return m_facets; }

 private:
  std::vector<std::vector<char>> m_flags;
  std::vector<int> m_facets;
  int m_count = 0;
};

/// Anchors F_S (a facet containing S) and T_S (a cell containing F_S).
struct AnchorChoice {
  std::vector<std::vector<int>> facet;  // [dim][id], -1 for cells
  std::vector<std::vector<int>> cell;
  int F(SimplexRef s) const { return facet[s.dim][s.id]; }
  int T(SimplexRef s) const { return cell[s.dim][s.id]; }
};

AnchorChoice choose_anchors(const SimplicialComplex& mesh, const BoundarySubcomplex& U);

/// Result of one uniform refinement: the fine complex and, per fine cell,
/// the coarse parent cell.
struct Refinement {
  SimplicialComplex mesh;
  std::vector<int> parent;
};

Refinement refine_uniform(const SimplicialComplex& mesh);

/// Unit square split into divisions^2 squares of two triangles each.
SimplicialComplex unit_square(int divisions = 1);
/// Unit cube split into divisions^3 cubes of six Kuhn tetrahedra each.
SimplicialComplex unit_cube(int divisions = 1);
/// Unit square/cube structured mesh refined `levels` times.
SimplicialComplex unit_domain(int n, int divisions, int levels);

/// JSON mesh format {"dim","vertices","cells","boundary_facets"}.
struct MeshFile {
  SimplicialComplex mesh;
  std::vector<std::vector<int>> boundary_facets;
};
MeshFile read_mesh_json(const std::string& path);
std::string mesh_to_json(const SimplicialComplex& mesh, const BoundarySubcomplex* U = nullptr);

}  // namespace feqi
