#pragma once

#include "feqi/dofs.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>

namespace feqi {

/// phi_{S,i} as coefficient vectors over the geometric-decomposition basis of
/// the space without boundary conditions, indexed like that basis, together
/// with the dual functionals phi*_{S,i}.
class BiorthogonalSystem {
 public:
  BiorthogonalSystem(GlobalFESpace space, std::shared_ptr<const DualPairs> duals,
                     std::vector<Eigen::SparseVector<double>> phi);

  const GlobalFESpace& space() const { return m_space; }
  const SimplicialComplex& mesh() const { return m_space.mesh(); }
  const DualPairs& duals() const { return *m_duals; }
  int size() const { return m_space.size(); }
  int index(SimplexRef S, int i) const { return m_space.offset(S) + i; }
  const Eigen::SparseVector<double>& phi(int g) const { return m_phi[g]; }
  DofFunctional dof(int g) const;

  /// Local form of phi_g on a cell (zero outside the cells containing its simplex).
  PolyForm restrict(int g, int cell) const;
  /// Geometric-basis coefficients of sum_g c_g phi_g.
  Eigen::VectorXd to_geometric(const Eigen::VectorXd& c) const;

 private:
  GlobalFESpace m_space;
  std::shared_ptr<const DualPairs> m_duals;
  std::vector<Eigen::SparseVector<double>> m_phi;
};

BiorthogonalSystem build_biorthogonal(const SimplicialComplex& mesh, Family family, int r, int k);
BiorthogonalSystem build_biorthogonal(SimplicialComplex&&, Family, int, int) = delete;

/// Indices of the members attached to simplices outside U.
std::vector<int> restrict_bc(const BiorthogonalSystem& sys, const BoundarySubcomplex& U);

struct BiorthCheck {
  double duality = 0.0;         // max |phi*(phi) - delta|
  double locality = 0.0;        // max trace coefficient on faces not containing the simplex
  bool unit_triangular = true;  // change of basis is unit upper triangular in dimension order
  struct Entry {
    int row, col;
    double value;
  };
  std::vector<Entry> entries;  // nonzero entries of [phi*(phi)]
};

/// Recomputes every pairing by restriction to the cells, trace and exact integration.
BiorthCheck check_biorthogonal(const BiorthogonalSystem& sys, bool keep_entries = false);
void write_biorth_csv(const BiorthCheck& check, std::ostream& out);

struct BiorthConstants {
  double basis = 0.0;     // max h_S^{k-n/p} |phi_{S,i}|_{L^p(T)}
  double operator_ = 0.0; // max |phi*(w) phi|_{L^p(T)} / |w|_{L^p(T)} over w in the local space
};

/// p <= 0 means p = infinity. For p = 2 the operator constant is the exact
/// supremum; otherwise it is the max over `samples` random local forms.
BiorthConstants measure_constants(const BiorthogonalSystem& sys, double p, int samples = 16, unsigned seed = 0);

}  // namespace feqi
