#include "feqi/facetdual.hpp"

#include "feqi/error.hpp"
#include "feqi/quadrature.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace feqi {

namespace {

/// Top-degree coefficient of a ^ b from component vectors (deg a + deg b = n).
double wedge_top(const Eigen::VectorXd& a, int deg_a, const Eigen::VectorXd& b, int n) {
  const auto& I = subsets(n, deg_a);
  const Mask all = full_mask(n);
  double v = 0.0;
  for (std::size_t c = 0; c < I.size(); ++c) {
    const Mask J = all & ~I[c];
    v += wedge_sign(I[c], J) * a(static_cast<int>(c)) * b(subset_rank(n, J));
  }
  return v;
}

/// (-1)^j for the vertex j missing from a facet mask of an n-simplex.
int facet_sign(int n, Mask facet) {
  const Mask miss = full_mask(n + 1) & ~facet;
  return (std::countr_zero(miss) % 2 == 0) ? 1 : -1;
}

}  // namespace

Mask relative_mask(Mask facet, Mask sub) {
  Mask out = 0;
  int pos = 0;
  for (int j = 0; j < 32 && (facet >> j); ++j) {
    if (!(facet & (Mask(1) << j))) continue;
    if (sub & (Mask(1) << j)) out |= Mask(1) << pos;
    ++pos;
  }
  return out;
}

FacetDualForm build_xi(int n, Family family, int r, int k, Mask face, int index) {
  const int nf = n - 1;
  const int m = popcount(face) - 1;
  if (k > m || nf < 0) throw Error(ErrorCode::DegreeMismatch, "facet dual forms need k <= dim S <= n-1");
  const auto duals = build_dual_pairs(family, r, k, n);
  const PolyForm& eta = duals->table(m).weights.at(index);
  const int q = nf - k;
  const auto rho = local_basis(nf, Family::Full, r, k).forms;
  Eigen::VectorXd t(static_cast<int>(rho.size()));
  for (std::size_t j = 0; j < rho.size(); ++j) t(static_cast<int>(j)) = pair(eta, rho[j].trace(face));
  const PolyForm bF = PolyForm::bary_monomial(nf, std::vector<int>(nf + 1, 1));
  double last = 0.0;
  for (int R = r; R <= r + n + 2; ++R) {
    std::vector<PolyForm> cand;
    for (const auto& b : local_basis(nf, Family::Full, R, q).forms) cand.push_back(bF.wedge(b));
    Eigen::MatrixXd A(t.size(), static_cast<int>(cand.size()));
    for (int j = 0; j < A.rows(); ++j)
      for (int a = 0; a < A.cols(); ++a) A(j, a) = pair(cand[a], rho[j]);
    const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(t);
    last = (A * x - t).norm();
    if (last <= 1e-10 * std::max(1.0, t.norm())) {
      FacetDualForm out;
      out.face = face;
      out.index = index;
      out.R = R;
      out.residual = last;
      out.xi = PolyForm(nf, q);
      for (int a = 0; a < A.cols(); ++a) out.xi += cand[a] * x(a);
      out.xi.prune(1e-15);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "facet moment system (" << t.size() << " moments, n=" << n << ", k=" << k << ") unsolved up to R="
      << r + n + 2 << ", residual " << last;
  throw Error(ErrorCode::MomentSystemRankDeficient, msg.str());
}

CellExtension build_Xi(int n, Mask facet, const FacetDualForm& xi) {
  CellExtension e;
  e.facet = facet;
  e.face = xi.face;
  e.index = xi.index;
  e.Xi = make_extension({xi.xi}, Family::Full, xi.R + n).extend(n, facet).front();
  e.dXi = e.Xi.d();
  return e;
}

std::shared_ptr<const FacetDualTable> FacetDualTable::get(int n, Family family, int r, int k) {
  static std::mutex guard;
  static std::map<std::tuple<int, int, int, int>, std::shared_ptr<const FacetDualTable>> cache;
  const auto sel = FamilySelector::make(family, r, k, n);
  std::lock_guard lock(guard);
  auto& slot = cache[{n, static_cast<int>(sel.family), sel.r, sel.k}];
  if (!slot) slot = std::shared_ptr<const FacetDualTable>(new FacetDualTable(n, sel.family, sel.r, sel.k));
  return slot;
}

FacetDualTable::FacetDualTable(int n, Family family, int r, int k)
    : m_n(n), m_r(r), m_k(k), m_family(family), m_duals(build_dual_pairs(family, r, k, n)) {}

const FacetDualForm& FacetDualTable::xi(Mask face, int index) const {
  std::lock_guard lock(m_guard);
  auto it = m_xi.find({face, index});
  if (it == m_xi.end()) it = m_xi.emplace(std::pair{face, index}, build_xi(m_n, m_family, m_r, m_k, face, index)).first;
  return it->second;
}

const CellExtension& FacetDualTable::Xi(Mask facet, Mask face, int index) const {
  std::lock_guard lock(m_guard);
  auto it = m_Xi.find({facet, face, index});
  if (it == m_Xi.end()) it = m_Xi.emplace(std::tuple{facet, face, index}, build_Xi(m_n, facet, xi(face, index))).first;
  return it->second;
}

double ibp_check(const CellExtension& ext, const FacetDualForm& xi, const PolyForm& local) {
  const int n = local.dim();
  const int k = local.degree();
  const double lhs = facet_sign(n, ext.facet) * pair(xi.xi, local.trace(ext.facet));
  const double s = (n - k - 1) % 2 == 0 ? 1.0 : -1.0;
  const double rhs = (ext.dXi.wedge(local) + s * ext.Xi.wedge(local.d())).integrate();
  return std::abs(lhs - rhs);
}

CellSamples sample_cell(const SimplicialComplex& mesh, int cell, const SampledForm& omega, int order) {
  if (!omega.has_d()) {
    throw Error(ErrorCode::MissingExteriorDerivative, "form '" + omega.name + "' has no exterior derivative");
  }
  const int n = mesh.dim();
  const auto frame = cell_frame(mesh, cell);
  const auto& rule = simplex_rule(n, order);
  CellSamples s;
  s.cell = cell;
  s.order = order;
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd x = frame.point(rule.points.col(q).data());
    s.w.push_back(frame.to_local[omega.k] * omega.eval(x.data()));
    s.dw.push_back(frame.to_local[omega.k + 1] * omega.eval_d(x.data()));
  }
  return s;
}

CellSamples sample_local(int cell, const PolyForm& local, int order) {
  const auto& rule = simplex_rule(local.dim(), order);
  const PolyForm dl = local.d();
  CellSamples s;
  s.cell = cell;
  s.order = order;
  for (int q = 0; q < rule.size(); ++q) {
    s.w.push_back(local.evaluate(rule.points.col(q).data()));
    s.dw.push_back(dl.evaluate(rule.points.col(q).data()));
  }
  return s;
}

double ibp_check(const SimplicialComplex& mesh, int cell, const CellExtension& ext, const FacetDualForm& xi,
                 const SampledForm& omega, int order) {
  const int n = mesh.dim();
  const int k = omega.k;
  const SimplexRef F = mesh.cell_face(cell, ext.facet);
  const double lhs = facet_sign(n, ext.facet) * integrate_pairing(mesh, F, xi.xi, omega, order);
  const CellSamples cs = sample_cell(mesh, cell, omega, order);
  const auto& rule = simplex_rule(n, order);
  const double s = (n - k - 1) % 2 == 0 ? 1.0 : -1.0;
  double rhs = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double* t = rule.points.col(q).data();
    rhs += rule.weights(q) *
           (wedge_top(ext.dXi.evaluate(t), n - k, cs.w[q], n) + s * wedge_top(ext.Xi.evaluate(t), n - k - 1, cs.dw[q], n));
  }
  return std::abs(lhs - rhs);
}

KFunctional::KFunctional(const SimplicialComplex& mesh, const AnchorChoice& anchors, Family family, int r, int k)
    : m_mesh(&mesh), m_anchors(&anchors) {
  m_n = mesh.dim();
  const auto sel = FamilySelector::make(family, r, k, m_n);
  m_k = sel.k;
  m_table = FacetDualTable::get(m_n, sel.family, sel.r, sel.k);
  // build every facet form now so the quadrature order covers the largest one
  int R = sel.r;
  for (int m = m_k; m < m_n; ++m) {
    const int c = m_table->duals().table(m).size();
    for (Mask face : subsets(m_n, m + 1))
      for (int i = 0; i < c; ++i) R = std::max(R, m_table->xi(face, i).R);
  }
  m_order = std::max(2 * sel.r + 6, R + m_n + sel.r);
}

std::pair<Mask, Mask> KFunctional::masks(SimplexRef S) const {
  const int T = m_anchors->T(S);
  const int F = m_anchors->F(S);
  if (T < 0 || F < 0) throw Error(ErrorCode::NoAdmissibleAnchor, "simplex has no anchor facet");
  const Mask fm = m_mesh->local_mask({m_n, T}, {m_n - 1, F});
  return {fm, relative_mask(fm, m_mesh->local_mask({m_n, T}, S))};
}

int KFunctional::anchor_cell(SimplexRef S) const {
  return S.dim == m_n ? S.id : m_anchors->T(S);
}

const CellExtension& KFunctional::extension(SimplexRef S, int i) const {
  const auto [fm, sf] = masks(S);
  return m_table->Xi(fm, sf, i);
}

const KFunctional::Weights& KFunctional::weights(SimplexRef S, int i) const {
  const auto [fm, sf] = masks(S);
  std::lock_guard lock(m_guard);
  auto& w = m_weights[{fm, sf, i}];
  if (w.A.size() == 0) {
    const auto& ext = m_table->Xi(fm, sf, i);
    const auto& rule = simplex_rule(m_n, m_order);
    const int nk = num_components(m_n, m_k), nk1 = num_components(m_n, m_k + 1);
    w.A = Eigen::MatrixXd::Zero(nk, rule.size());
    w.B = Eigen::MatrixXd::Zero(nk1, rule.size());
    const double s = (m_n - m_k - 1) % 2 == 0 ? 1.0 : -1.0;
    for (int q = 0; q < rule.size(); ++q) {
      const double* t = rule.points.col(q).data();
      const Eigen::VectorXd dX = ext.dXi.evaluate(t), X = ext.Xi.evaluate(t);
      for (int c = 0; c < nk; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(nk, c);
        w.A(c, q) = rule.weights(q) * wedge_top(dX, m_n - m_k, e, m_n);
      }
      for (int c = 0; c < nk1; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(nk1, c);
        w.B(c, q) = rule.weights(q) * s * wedge_top(X, m_n - m_k - 1, e, m_n);
      }
    }
    w.sign = facet_sign(m_n, fm);
  }
  return w;
}

double KFunctional::operator()(SimplexRef S, int i, const CellSamples& samples) const {
  if (S.dim == m_n) throw Error(ErrorCode::DegreeMismatch, "cell functionals need the sampled form itself");
  if (samples.cell != anchor_cell(S) || samples.order != m_order) {
    throw Error(ErrorCode::HostMismatch, "samples were taken on a different cell or order");
  }
  const Weights& w = weights(S, i);
  double v = 0.0;
  for (int q = 0; q < w.A.cols(); ++q) v += w.A.col(q).dot(samples.w[q]) + w.B.col(q).dot(samples.dw[q]);
  return w.sign * v;
}

double KFunctional::operator()(SimplexRef S, int i, const SampledForm& omega) const {
  if (S.dim == m_n) {
    const DofFunctional dof{S, i, m_table->duals().table(m_n).weights[i]};
    return apply_dof(dof, *m_mesh, omega, m_order);
  }
  return (*this)(S, i, sample_cell(*m_mesh, anchor_cell(S), omega, m_order));
}

double KFunctional::exact(SimplexRef S, int i, const PolyForm& local) const {
  if (S.dim == m_n) return pair(m_table->duals().table(m_n).weights[i], local);
  const auto [fm, sf] = masks(S);
  const auto& ext = m_table->Xi(fm, sf, i);
  const double s = (m_n - m_k - 1) % 2 == 0 ? 1.0 : -1.0;
  return facet_sign(m_n, fm) * (ext.dXi.wedge(local) + s * ext.Xi.wedge(local.d())).integrate();
}

XiScaling xi_scaling(const SimplicialComplex& mesh, const AnchorChoice& anchors, Family family, int r, int k,
                     double q) {
  XiScaling out;
  const int n = mesh.dim();
  const KFunctional K(mesh, anchors, family, r, k);
  const auto sel = FamilySelector::make(family, r, k, n);
  const auto duals = build_dual_pairs(family, r, k, n);
  const double nq = q > 0.0 ? n / q : 0.0;
  for (int m = sel.k; m < n; ++m) {
    const int c = duals->table(m).size();
    for (int s = 0; s < mesh.num_simplices(m) && c > 0; ++s) {
      const SimplexRef S{m, s};
      const double hS = m == 0 ? mesh.h_vertex(s) : mesh.diameter(S);
      const int T = K.anchor_cell(S);
      for (int i = 0; i < c; ++i) {
        const auto& ext = K.extension(S, i);
        out.xi = std::max(out.xi, std::pow(hS, n - sel.k - 1 - nq) * lp_norm(mesh, T, ext.Xi, q, K.order()));
        out.dxi = std::max(out.dxi, std::pow(hS, n - sel.k - nq) * lp_norm(mesh, T, ext.dXi, q, K.order()));
      }
    }
  }
  return out;
}

}  // namespace feqi
