#pragma once

#include "feqi/biorth.hpp"
#include "feqi/facetdual.hpp"

namespace feqi {

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;
  int cell = -1;  // cell holding the ball
};

Ball inscribed_ball(const SimplicialComplex& mesh, int cell);
/// 0.9 times the inscribed ball of the largest cell containing S (lowest id on ties).
Ball averaging_ball(const SimplicialComplex& mesh, SimplexRef S);

/// Componentwise averaged Taylor polynomial of a form over a ball. The
/// coefficients of dx_I are stored as polynomials in z = (x - center) / radius.
struct AveragedTaylor {
  Ball ball;
  PolyForm scaled;

  Eigen::VectorXd eval(const double* x) const;
  /// Local form on a cell (any cell, the polynomial is global).
  PolyForm on_cell(const SimplicialComplex& mesh, int cell) const;
};

/// Degree-r averaged Taylor polynomial with the normalized bump (1 - |z|^2)^4.
AveragedTaylor averaged_taylor(const SampledForm& omega, const Ball& ball, int r);
/// P_S omega, with the ball of averaging_ball(mesh, S).
AveragedTaylor averaged_taylor(const SampledForm& omega, const SimplicialComplex& mesh, SimplexRef S, int r);

/// Two-stage L2 projection Pi_T onto the local space of one cell: d Pi_T w is
/// the L2 projection of dw onto d(P Lambda^k(T)), completed by the L2
/// projection onto the closed forms.
class CellProjection {
 public:
  CellProjection(const SimplicialComplex& mesh, int cell, Family family, int r, int k, int order = 0);

  int cell() const { return m_cell; }
  int order() const { return m_order; }
  /// Throws MissingExteriorDerivative for k < n when omega has no d.
  PolyForm apply(const SampledForm& omega) const;
  PolyForm apply(const PolyForm& local) const;
  const std::vector<PolyForm>& basis() const { return m_basis; }

 private:
  int m_cell, m_n, m_k, m_order;
  CellFrame m_frame;
  std::vector<PolyForm> m_basis;
  std::vector<Eigen::MatrixXd> m_values, m_dvalues;  // Cartesian basis values per node
  Eigen::VectorXd m_weights;                         // node weights including |det|
  Eigen::MatrixXd m_M;                               // Cartesian mass matrix
  Eigen::MatrixXd m_N, m_Y;                          // kernel of d and a complement
  Eigen::LDLT<Eigen::MatrixXd> m_closed;             // N^T M N
  Eigen::LDLT<Eigen::MatrixXd> m_exact;              // Y^T Md Y
  PolyForm combine(const Eigen::MatrixXd& w, const Eigen::MatrixXd& dw) const;
};

PolyForm cell_projection(const SampledForm& omega, const SimplicialComplex& mesh, int cell, Family family, int r,
                         int k);

struct InterpolantResult {
  Eigen::VectorXd dofs;          // coefficient of each phi_{S,i}
  Eigen::VectorXd coefficients;  // same form over the geometric-decomposition basis
  std::vector<PolyForm> local;   // restriction to each cell
  std::vector<int> zeroed;       // dofs forced to zero on U
  double max_zeroed = 0.0;       // largest |K_{S,i}| before it was zeroed
};

/// Clement interpolant sum phi*_{S,i}(P_S w) phi_{S,i}.
InterpolantResult clement(const SampledForm& omega, const BiorthogonalSystem& sys);
/// Same sum over the simplices outside U.
InterpolantResult clement_bc(const SampledForm& omega, const BiorthogonalSystem& sys, const BoundarySubcomplex& U);
/// Scott-Zhang interpolant sum K_{S,i}(w) phi_{S,i}. A nonempty U declares
/// omega as boundary data: coefficients on U are recorded, then set to zero.
InterpolantResult scott_zhang(const SampledForm& omega, const BiorthogonalSystem& sys, const AnchorChoice& anchors,
                              const BoundarySubcomplex& U);

/// Interpolant result for given phi-coefficients.
InterpolantResult from_dofs(const BiorthogonalSystem& sys, Eigen::VectorXd dofs);

/// Per-cell L^p norms of omega - local (or of their exterior derivatives).
std::vector<double> cell_errors(const SimplicialComplex& mesh, const SampledForm& omega,
                                const std::vector<PolyForm>& local, double p, int order, bool derivative = false);

}  // namespace feqi
