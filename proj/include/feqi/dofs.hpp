#pragma once

#include "feqi/exterior.hpp"
#include "feqi/spaces.hpp"

#include <memory>

namespace feqi {

/// omega -> int_S weight ^ tr_S omega, with the weight in S's local coordinates.
struct DofFunctional {
  SimplexRef S;
  int index = 0;
  PolyForm weight;
};

/// Reference dual pair on an m-simplex: ring basis and Gram-adjusted weights.
struct DualPairTable {
  int m = 0;
  std::vector<PolyForm> ring;
  std::vector<PolyForm> weights;
  double condition = 1.0;  // condition number of the candidate Gram matrix
  int size() const { return static_cast<int>(ring.size()); }
};

struct DualPairs {
  int n = 0;
  Family family = Family::Full;
  int r = 1;
  int k = 0;
  std::vector<DualPairTable> by_dim;  // index m = 0..n; empty below k
  const DualPairTable& table(int m) const { return by_dim[m]; }
};

/// Candidate weight basis on an m-simplex for the dofs of (family, r, k):
/// P^-_{r+k-m} Lambda^{m-k} for FULL, P_{r+k-m-1} Lambda^{m-k} for TRIMMED.
std::vector<PolyForm> weight_space(int m, Family family, int r, int k);

/// Intrinsic pairing int_S eta ^ w on the reference simplex of S.
double pair(const PolyForm& eta, const PolyForm& w);

/// Cached per (n, family, r, k) after the forced family identification.
/// Throws SingularPairing when a Gram matrix is not square or not invertible.
std::shared_ptr<const DualPairs> build_dual_pairs(Family family, int r, int k, int n);

std::vector<DofFunctional> dof_space(const SimplicialComplex& mesh, SimplexRef S, Family family, int r, int k);

/// Apply to a form given in local coordinates of a cell containing S (exact).
double apply_dof(const DofFunctional& dof, const SimplicialComplex& mesh, int cell, const PolyForm& local);
/// Apply to a Cartesian polynomial form on the ambient space (exact).
double apply_dof(const DofFunctional& dof, const SimplicialComplex& mesh, const PolyForm& cartesian);
/// Apply to a sampled form by quadrature; throws TraceUnavailable when the form has no trace.
double apply_dof(const DofFunctional& dof, const SimplicialComplex& mesh, const SampledForm& omega, int order);

}  // namespace feqi
