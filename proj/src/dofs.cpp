#include "feqi/dofs.hpp"

#include "feqi/error.hpp"

#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace feqi {

std::vector<PolyForm> weight_space(int m, Family family, int r, int k) {
  if (k > m) return {};
  if (family == Family::Full) {
    const int s = r + k - m;
    if (s < 1) return {};
    return local_basis(m, Family::Trimmed, s, m - k).forms;
  }
  const int s = r + k - m - 1;
  if (s < 0) return {};
  return local_basis(m, Family::Full, s, m - k).forms;
}

double pair(const PolyForm& eta, const PolyForm& w) { return eta.wedge(w).integrate(); }

namespace {

DualPairTable make_table(int m, Family family, int r, int k, const RingBasis& ring) {
  DualPairTable t;
  t.m = m;
  t.ring = ring.forms;
  const auto cand = weight_space(m, family, r, k);
  if (cand.size() != t.ring.size()) {
    std::ostringstream msg;
    msg << "dof count " << cand.size() << " differs from ring dimension " << t.ring.size() << " on a " << m
        << "-simplex";
    throw Error(ErrorCode::SingularPairing, msg.str());
  }
  const int N = t.size();
  if (N == 0) return t;
  Eigen::MatrixXd G(N, N);
  for (int a = 0; a < N; ++a)
    for (int j = 0; j < N; ++j) G(a, j) = pair(cand[a], t.ring[j]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  const auto& sv = svd.singularValues();
  t.condition = sv(N - 1) > 0.0 ? sv(0) / sv(N - 1) : std::numeric_limits<double>::infinity();
  if (!(t.condition < 1e12)) {
    std::ostringstream msg;
    msg << "dof Gram matrix on a " << m << "-simplex is singular (condition " << t.condition << ")";
    throw Error(ErrorCode::SingularPairing, msg.str());
  }
  const Eigen::MatrixXd Y = G.inverse();
  for (int i = 0; i < N; ++i) {
    PolyForm w(m, m - k);
    for (int a = 0; a < N; ++a) w += cand[a] * Y(i, a);
    w.prune(1e-15);
    t.weights.push_back(std::move(w));
  }
  return t;
}

}  // namespace

std::shared_ptr<const DualPairs> build_dual_pairs(Family family, int r, int k, int n) {
  static std::mutex guard;
  static std::map<std::tuple<int, int, int, int>, std::shared_ptr<const DualPairs>> cache;
  const auto sel = FamilySelector::make(family, r, k, n);
  std::lock_guard lock(guard);
  auto& slot = cache[{n, static_cast<int>(sel.family), sel.r, sel.k}];
  if (slot) return slot;
  const auto ref = ReferenceElement::get(n, sel.family, sel.r, sel.k);
  auto dp = std::make_shared<DualPairs>();
  dp->n = n;
  dp->family = sel.family;
  dp->r = sel.r;
  dp->k = sel.k;
  dp->by_dim.resize(n + 1);
  for (int m = sel.k; m <= n; ++m) dp->by_dim[m] = make_table(m, sel.family, sel.r, sel.k, ref->ring(m));
  slot = dp;
  return slot;
}

std::vector<DofFunctional> dof_space(const SimplicialComplex& mesh, SimplexRef S, Family family, int r, int k) {
  if (k > S.dim) return {};
  const auto dp = build_dual_pairs(family, r, k, mesh.dim());
  std::vector<DofFunctional> out;
  const auto& t = dp->table(S.dim);
  for (int i = 0; i < t.size(); ++i) out.push_back({S, i, t.weights[i]});
  return out;
}

double apply_dof(const DofFunctional& dof, const SimplicialComplex& mesh, int cell, const PolyForm& local) {
  const Mask m = mesh.local_mask({mesh.dim(), cell}, dof.S);
  if (m == 0) throw Error(ErrorCode::NotASubsimplex, "dof simplex is not a face of the cell");
  return pair(dof.weight, local.trace(m));
}

double apply_dof(const DofFunctional& dof, const SimplicialComplex& mesh, const PolyForm& cartesian) {
  return pair(dof.weight, to_local(cartesian, mesh, dof.S));
}

double apply_dof(const DofFunctional& dof, const SimplicialComplex& mesh, const SampledForm& omega, int order) {
  return integrate_pairing(mesh, dof.S, dof.weight, omega, order);
}

}  // namespace feqi
