#pragma once

#include "feqi/dofs.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace feqi {

/// Facet form on the reference (n-1)-simplex reproducing phi*_{S,i} on traces:
/// int_F xi ^ tr_F w = phi*_{S,i}(w) for w in P_r Lambda^k. `face` is the mask
/// of S inside the facet.
struct FacetDualForm {
  Mask face = 0;
  int index = 0;
  int R = 0;  // xi lies in b_F * P_R Lambda^{n-1-k}
  PolyForm xi;
  double residual = 0.0;
};

/// Extension of a facet form into the reference n-simplex from facet `facet`.
struct CellExtension {
  Mask facet = 0;
  Mask face = 0;
  int index = 0;
  PolyForm Xi;
  PolyForm dXi;
};

/// Throws MomentSystemRankDeficient when no R <= r + n + 2 reproduces the functional.
FacetDualForm build_xi(int n, Family family, int r, int k, Mask face, int index);
/// Throws NotABubble when xi has nonzero proper traces.
CellExtension build_Xi(int n, Mask facet, const FacetDualForm& xi);

/// Lazily filled tables of xi and Xi for (n, family, r, k), shared by all cells.
class FacetDualTable {
 public:
  static std::shared_ptr<const FacetDualTable> get(int n, Family family, int r, int k);

  int n() const { return m_n; }
  const DualPairs& duals() const { return *m_duals; }
  const FacetDualForm& xi(Mask face, int index) const;
  const CellExtension& Xi(Mask facet, Mask face, int index) const;

 private:
  FacetDualTable(int n, Family family, int r, int k);
  int m_n, m_r, m_k;
  Family m_family;
  std::shared_ptr<const DualPairs> m_duals;
  mutable std::recursive_mutex m_guard;
  mutable std::map<std::pair<Mask, int>, FacetDualForm> m_xi;
  mutable std::map<std::tuple<Mask, Mask, int>, CellExtension> m_Xi;
};

/// Mask of the vertices of `sub` counted inside `facet` (both local to a cell).
Mask relative_mask(Mask facet, Mask sub);

/// |o(F,T) int_F xi ^ tr_F w - int_T (dXi ^ w + (-1)^{n-k-1} Xi ^ dw)| for a
/// local polynomial form w on the cell (exact, in intrinsic orientation).
double ibp_check(const CellExtension& ext, const FacetDualForm& xi, const PolyForm& local);
/// Same identity for a sampled form, both sides by quadrature of the given order.
double ibp_check(const SimplicialComplex& mesh, int cell, const CellExtension& ext, const FacetDualForm& xi,
                 const SampledForm& omega, int order);

/// Values of w and dw at the quadrature points of one cell, in local components.
struct CellSamples {
  int cell = -1;
  int order = 0;
  std::vector<Eigen::VectorXd> w, dw;
};
CellSamples sample_cell(const SimplicialComplex& mesh, int cell, const SampledForm& omega, int order);
/// Samples of a local polynomial form of the cell.
CellSamples sample_local(int cell, const PolyForm& local, int order);

/// K_{S,i}: integration-by-parts representation over the anchor cell T_S for
/// dim S < n, the plain dof for dim S = n. Throws MissingExteriorDerivative.
class KFunctional {
 public:
  KFunctional(const SimplicialComplex& mesh, const AnchorChoice& anchors, Family family, int r, int k);
  KFunctional(SimplicialComplex&&, const AnchorChoice&, Family, int, int) = delete;
  KFunctional(const SimplicialComplex&, AnchorChoice&&, Family, int, int) = delete;

  int order() const { return m_order; }
  double operator()(SimplexRef S, int i, const SampledForm& omega) const;
  double operator()(SimplexRef S, int i, const CellSamples& samples) const;
  /// Exact value on a local polynomial form of the anchor cell.
  double exact(SimplexRef S, int i, const PolyForm& local_on_anchor) const;
  int anchor_cell(SimplexRef S) const;
  /// Facet/extension used for S.
  const CellExtension& extension(SimplexRef S, int i) const;

 private:
  const SimplicialComplex* m_mesh;
  const AnchorChoice* m_anchors;
  std::shared_ptr<const FacetDualTable> m_table;
  int m_n, m_k, m_order;
  struct Weights {
    Eigen::MatrixXd A, B;  // quadrature-weighted pairings against w and dw
    int sign = 1;
  };
  mutable std::mutex m_guard;
  mutable std::map<std::tuple<Mask, Mask, int>, Weights> m_weights;
  const Weights& weights(SimplexRef S, int i) const;
  std::pair<Mask, Mask> masks(SimplexRef S) const;
};

struct XiScaling {
  double xi = 0.0;   // max h_S^{n-k-1-n/q} |Xi|_{L^q(T)}
  double dxi = 0.0;  // max h_S^{n-k-n/q} |dXi|_{L^q(T)}
};
XiScaling xi_scaling(const SimplicialComplex& mesh, const AnchorChoice& anchors, Family family, int r, int k,
                     double q);

}  // namespace feqi
