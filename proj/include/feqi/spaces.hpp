#pragma once

#include "feqi/mesh.hpp"
#include "feqi/polyform.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace feqi {

enum class Family { Full, Trimmed };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

/// Family with the forced identifications k = 0 => FULL, k = n => TRIMMED.
struct FamilySelector {
  Family family = Family::Full;
  int r = 1;
  int k = 0;
  static FamilySelector make(Family family, int r, int k, int n);
};

/// Orthonormal-coefficient basis of rank(span) for a list of forms sharing a
/// coordinate system; relative singular value threshold 1e-10.
std::vector<PolyForm> reduce_to_basis(const std::vector<PolyForm>& span, int maxdeg, double rel_tol = 1e-10);
/// Numerical rank of a list of forms.
int span_rank(const std::vector<PolyForm>& span, int maxdeg, double rel_tol = 1e-10);
/// Max over a in A of the relative least-squares residual of a against span(B).
double membership_residual(const std::vector<PolyForm>& A, const std::vector<PolyForm>& B);

/// Barycentric spanning set of P_r Lambda^k (FULL, r >= 0) or P_r^- Lambda^k
/// (TRIMMED, r >= 1) on the reference dim-simplex.
std::vector<PolyForm> spanning_set(int dim, Family family, int r, int k);

struct LocalBasis {
  int dim = 0;
  Family family = Family::Full;
  int r = 0;
  int k = 0;
  std::vector<PolyForm> forms;
  Eigen::MatrixXd gram;  // L2 Gram matrix on the reference simplex
  int size() const { return static_cast<int>(forms.size()); }
};

LocalBasis local_basis(int dim, Family family, int r, int k);

/// Mutual projection residual between P_{r-1} + kappa P_{r-1} Lambda^{k+1}
/// (kappa about the barycentre) and the Whitney-built TRIMMED space.
double koszul_space_equivalence(int dim, int r, int k);

struct RingBasis {
  int dim = 0;
  Family family = Family::Full;
  int r = 0;
  int k = 0;
  std::vector<PolyForm> forms;
  int size() const { return static_cast<int>(forms.size()); }
};

RingBasis ring_basis(int dim, Family family, int r, int k);

/// Max coefficient of the traces of w onto all proper faces of its host.
double max_proper_trace(const PolyForm& w);

/// Barycentric generator lambda^alpha dlambda_sigma or lambda^alpha phi_sigma,
/// written over the vertices of a reference simplex.
struct Generator {
  std::vector<int> alpha;
  std::vector<int> sigma;
  bool whitney = false;
};

/// Re-read a generator on a host simplex whose local vertices vertex_map[j]
/// correspond to the generator's vertices j.
PolyForm realize(const Generator& g, int host_dim, const std::vector<int>& vertex_map);

/// Expression of a list of bubbles on a dim-simplex in generators whose
/// barycentric support covers all vertices, so the expression extends by zero.
struct BubbleExtension {
  int dim = 0;
  int k = 0;
  std::vector<Generator> generators;
  Eigen::MatrixXd coefficients;  // generators x bubbles
  std::vector<PolyForm> extend(int host_dim, Mask face) const;
};

/// Covering generators for bubbles in FULL P_r Lambda^k or TRIMMED P_r^-.
std::vector<Generator> covering_generators(int dim, Family family, int r, int k);

/// Build the extension table; throws NotABubble when a form has a nonzero
/// proper trace or is outside the generator span.
BubbleExtension make_extension(const std::vector<PolyForm>& bubbles, Family family, int r);

/// Extension of one bubble from the face `face` of a host simplex.
PolyForm extend(const PolyForm& bubble, Family family, int r, int host_dim, Mask face);

/// Everything about (n, family, r, k) that is independent of the mesh: ring
/// bases per dimension, and their extensions into every face of the
/// reference n-simplex. Shared across cells because every simplex uses
/// ascending vertex order.
class ReferenceElement {
 public:
  static std::shared_ptr<const ReferenceElement> get(int n, Family family, int r, int k);

  int n() const { return m_n; }
  Family family() const { return m_family; }
  int r() const { return m_r; }
  int k() const { return m_k; }
  /// Polynomial degree bound of the space (coordinates use it).
  int max_degree() const { return m_r; }

  const RingBasis& ring(int m) const { return m_ring[m]; }
  int ring_size(int m) const { return m < m_k || m > m_n ? 0 : m_ring[m].size(); }
  const BubbleExtension& extension(int m) const { return m_ext[m]; }

  /// Extensions of ring(m) from the face `face` of a host of dimension host_dim.
  const std::vector<PolyForm>& extended(int host_dim, Mask face) const;

  /// Local dof layout of an n-cell: faces in (dimension, subset rank) order.
  int local_size() const { return m_local_size; }
  int local_offset(Mask face) const { return m_local_offset[face]; }
  const std::vector<Mask>& local_faces() const { return m_local_faces; }
  /// Forms of all local basis functions of the n-cell, in local order.
  const std::vector<PolyForm>& cell_basis() const { return m_cell_basis; }
  /// FormCoordinates matrix of cell_basis().
  const Eigen::MatrixXd& cell_matrix() const { return m_cell_matrix; }
  const FormCoordinates& coordinates() const { return m_coords; }

 private:
  ReferenceElement(int n, Family family, int r, int k);

  int m_n, m_r, m_k;
  Family m_family;
  std::vector<RingBasis> m_ring;
  std::vector<BubbleExtension> m_ext;
  mutable std::map<std::pair<int, Mask>, std::vector<PolyForm>> m_extended;
  mutable std::mutex m_guard;
  int m_local_size = 0;
  std::vector<int> m_local_offset;
  std::vector<Mask> m_local_faces;
  std::vector<PolyForm> m_cell_basis;
  Eigen::MatrixXd m_cell_matrix;
  FormCoordinates m_coords;
};

/// Global finite element space: direct sum of extended bubbles over all
/// simplices, with the simplices of U flagged as excluded.
class GlobalFESpace {
 public:
  /// Keeps a reference to the mesh, which must outlive the space.
  GlobalFESpace(const SimplicialComplex& mesh, const BoundarySubcomplex& U, Family family, int r, int k);
  GlobalFESpace(SimplicialComplex&&, const BoundarySubcomplex&, Family, int, int) = delete;

  const SimplicialComplex& mesh() const { return *m_mesh; }
  const ReferenceElement& reference() const { return *m_ref; }
  const BoundarySubcomplex& boundary() const { return m_U; }
  Family family() const { return m_ref->family(); }
  int r() const { return m_ref->r(); }
  int k() const { return m_ref->k(); }

  /// Number of global basis forms including excluded ones.
  int size() const { return m_size; }
  /// Dimension of the space with boundary conditions on U.
  int dimension() const { return m_size - m_excluded_count; }
  int offset(SimplexRef s) const { return m_offset[s.dim][s.id]; }
  int count(SimplexRef s) const { return m_ref->ring_size(s.dim); }
  bool excluded(SimplexRef s) const { return m_U.contains(s); }
  bool excluded_index(int g) const { return m_excluded[g] != 0; }
  /// Simplex owning the global index g.
  SimplexRef owner(int g) const { return m_owner[g]; }

  /// Global indices of the n-cell's local basis (local order).
  std::vector<int> local_dofs(int cell) const;
  Eigen::VectorXd gather(const Eigen::VectorXd& coeffs, int cell) const;
  /// Local form on the cell of a global coefficient vector.
  PolyForm restrict(const Eigen::VectorXd& coeffs, int cell) const;

 private:
  const SimplicialComplex* m_mesh;
  std::shared_ptr<const ReferenceElement> m_ref;
  BoundarySubcomplex m_U;
  std::vector<std::vector<int>> m_offset;
  std::vector<SimplexRef> m_owner;
  std::vector<char> m_excluded;
  int m_size = 0;
  int m_excluded_count = 0;
};

GlobalFESpace assemble_global(const SimplicialComplex& mesh, const BoundarySubcomplex& U, Family family, int r,
                              int k);
GlobalFESpace assemble_global(SimplicialComplex&&, const BoundarySubcomplex&, Family, int, int) = delete;

}  // namespace feqi
