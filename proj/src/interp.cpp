#include "feqi/interp.hpp"

#include "feqi/error.hpp"
#include "feqi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace feqi {

Ball inscribed_ball(const SimplicialComplex& mesh, int cell) {
  const int n = mesh.dim();
  const auto& verts = mesh.vertices_of({n, cell});
  Ball b;
  b.cell = cell;
  b.center = Eigen::VectorXd::Zero(n);
  double area = 0.0;
  for (int j = 0; j <= n; ++j) {
    const Mask facet = full_mask(n + 1) & ~(Mask(1) << j);
    const double a = mesh.volume(mesh.cell_face(cell, facet));
    b.center += a * mesh.vertex(verts[j]);
    area += a;
  }
  b.center /= area;
  b.radius = n * mesh.volume({n, cell}) / area;
  return b;
}

Ball averaging_ball(const SimplicialComplex& mesh, SimplexRef S) {
  const int n = mesh.dim();
  std::vector<int> cells = mesh.containing_cells(S);
  std::sort(cells.begin(), cells.end());
  int best = -1;
  double vmax = 0.0;
  for (int c : cells) {
    const double v = mesh.volume({n, c});
    if (best < 0 || v > vmax * (1.0 + 1e-12)) {
      vmax = v;
      best = c;
    }
  }
  if (best < 0) throw Error(ErrorCode::UnknownSimplex, "simplex has no containing cell");
  Ball b = inscribed_ball(mesh, best);
  b.radius *= 0.9;
  return b;
}

namespace {

// Averaged Taylor polynomial on the unit ball after integrating the
// derivatives onto the bump: coefficient of z^beta is int f(z) K_beta(z) dz.
struct TaylorKernel {
  const QuadratureRule* rule = nullptr;
  std::vector<Exponents> monomials;
  Eigen::MatrixXd weights;  // monomials x nodes
};

const TaylorKernel& taylor_kernel(int n, int r) {
  static std::mutex guard;
  static std::map<std::pair<int, int>, std::unique_ptr<TaylorKernel>> cache;
  std::lock_guard lock(guard);
  auto& slot = cache[{n, r}];
  if (slot) return *slot;
  auto K = std::make_unique<TaylorKernel>();
  const int degree = 8 + 2 * r + 2;
  K->rule = &unit_ball_rule(n, (degree + n) / 2 + 1, degree + 2);
  K->monomials = multi_indices_upto(n, r);

  Polynomial q = Polynomial::constant(n, 1.0);
  for (int i = 0; i < n; ++i) {
    Exponents e{};
    e[i] = 2;
    q -= Polynomial::monomial(n, e);
  }
  const Polynomial bump = (q * q) * (q * q);

  const auto& rule = *K->rule;
  std::vector<double> z(n);
  auto eval = [&](const Polynomial& p, int node) {
    for (int i = 0; i < n; ++i) z[i] = rule.points(i, node);
    return p.evaluate(z);
  };
  double mass = 0.0;
  for (int node = 0; node < rule.size(); ++node) mass += rule.weights(node) * eval(bump, node);

  K->weights.resize(static_cast<int>(K->monomials.size()), rule.size());
  for (std::size_t bi = 0; bi < K->monomials.size(); ++bi) {
    const Exponents& beta = K->monomials[bi];
    int bdeg = 0;
    double bfact = 1.0;
    for (int i = 0; i < n; ++i) {
      bdeg += beta[i];
      bfact *= factorial(beta[i]);
    }
    Polynomial kernel(n);
    for (const Exponents& alpha : K->monomials) {
      Exponents gamma{};
      bool ge = true;
      double gfact = 1.0;
      for (int i = 0; i < n; ++i) {
        gamma[i] = alpha[i] - beta[i];
        if (gamma[i] < 0) ge = false;
        else gfact *= factorial(gamma[i]);
      }
      if (!ge) continue;
      Polynomial term = bump * Polynomial::monomial(n, gamma);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < alpha[i]; ++j) term = term.partial(i);
      kernel += term * (1.0 / gfact);
    }
    kernel *= (bdeg % 2 == 0 ? 1.0 : -1.0) / bfact;
    for (int node = 0; node < rule.size(); ++node)
      K->weights(static_cast<int>(bi), node) = rule.weights(node) * eval(kernel, node) / mass;
  }
  slot = std::move(K);
  return *slot;
}

}  // namespace

Eigen::VectorXd AveragedTaylor::eval(const double* x) const {
  const int n = scaled.dim();
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = (x[i] - ball.center(i)) / ball.radius;
  return scaled.evaluate(z.data());
}

PolyForm AveragedTaylor::on_cell(const SimplicialComplex& mesh, int cell) const {
  const auto g = mesh.geometry({mesh.dim(), cell});
  const Eigen::MatrixXd A = g.E / ball.radius;
  const Eigen::VectorXd b = (g.origin - ball.center) / ball.radius;
  return scaled.pullback(A, b) * std::pow(ball.radius, scaled.degree());
}

AveragedTaylor averaged_taylor(const SampledForm& omega, const Ball& ball, int r) {
  const int n = omega.n;
  const auto& K = taylor_kernel(n, r);
  const auto& rule = *K.rule;
  const int nc = num_components(n, omega.k);
  Eigen::MatrixXd F(rule.size(), nc);
  Eigen::VectorXd x(n), v(nc);
  for (int q = 0; q < rule.size(); ++q) {
    x = ball.center + ball.radius * rule.points.col(q);
    omega.value(x.data(), v.data());
    F.row(q) = v.transpose();
  }
  const Eigen::MatrixXd coef = K.weights * F;
  std::vector<Polynomial> comps(nc, Polynomial(n));
  for (int c = 0; c < nc; ++c) {
    for (std::size_t b = 0; b < K.monomials.size(); ++b) {
      const double a = coef(static_cast<int>(b), c);
      if (a != 0.0) comps[c].push_raw(Polynomial::pack(K.monomials[b]), a);
    }
    comps[c].normalize();
  }
  return {ball, PolyForm::from_components(n, omega.k, std::move(comps))};
}

AveragedTaylor averaged_taylor(const SampledForm& omega, const SimplicialComplex& mesh, SimplexRef S, int r) {
  return averaged_taylor(omega, averaging_ball(mesh, S), r);
}

CellProjection::CellProjection(const SimplicialComplex& mesh, int cell, Family family, int r, int k, int order)
    : m_cell(cell), m_n(mesh.dim()) {
  const auto sel = FamilySelector::make(family, r, k, m_n);
  m_k = sel.k;
  m_order = order > 0 ? order : 2 * sel.r + 4;
  const auto ref = ReferenceElement::get(m_n, sel.family, sel.r, sel.k);
  m_basis = ref->cell_basis();
  const int N = static_cast<int>(m_basis.size());
  m_frame = cell_frame(mesh, cell);
  const CellFrame& frame = m_frame;
  const auto& rule = simplex_rule(m_n, m_order);
  std::vector<PolyForm> dbasis;
  for (const auto& b : m_basis) dbasis.push_back(b.d());
  const int nk = num_components(m_n, m_k), nk1 = num_components(m_n, m_k + 1);
  m_weights = rule.weights * std::abs(frame.det);
  m_M = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd Md = Eigen::MatrixXd::Zero(N, N);
  for (int q = 0; q < rule.size(); ++q) {
    const double* t = rule.points.col(q).data();
    Eigen::MatrixXd V(nk, N), dV(nk1, N);
    for (int j = 0; j < N; ++j) {
      V.col(j) = frame.to_cartesian[m_k] * m_basis[j].evaluate(t);
      if (nk1 > 0) dV.col(j) = frame.to_cartesian[m_k + 1] * dbasis[j].evaluate(t);
    }
    m_M += m_weights(q) * V.transpose() * V;
    if (nk1 > 0) Md += m_weights(q) * dV.transpose() * dV;
    m_values.push_back(std::move(V));
    m_dvalues.push_back(std::move(dV));
  }
  int rank = 0;
  Eigen::MatrixXd Vsvd = Eigen::MatrixXd::Identity(N, N);
  if (nk1 > 0) {
    const FormCoordinates fc(m_n, m_k + 1, std::max(sel.r, 1));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(fc.to_matrix(dbasis), Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double tol = 1e-10 * (s.size() > 0 ? s(0) : 0.0);
    while (rank < s.size() && s(rank) > tol) ++rank;
    Vsvd = svd.matrixV();
  }
  m_Y = Vsvd.leftCols(rank);
  m_N = Vsvd.rightCols(N - rank);
  m_closed.compute(m_N.transpose() * m_M * m_N);
  m_exact.compute(m_Y.transpose() * Md * m_Y);
}

PolyForm CellProjection::combine(const Eigen::MatrixXd& w, const Eigen::MatrixXd& dw) const {
  const int N = static_cast<int>(m_basis.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N), bd = Eigen::VectorXd::Zero(N);
  for (std::size_t q = 0; q < m_values.size(); ++q) {
    const int qi = static_cast<int>(q);
    b += m_weights(qi) * m_values[q].transpose() * w.col(qi);
    if (m_Y.cols() > 0) bd += m_weights(qi) * m_dvalues[q].transpose() * dw.col(qi);
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
  if (m_Y.cols() > 0) {
    const Eigen::VectorXd s = m_Y * m_exact.solve(m_Y.transpose() * bd);
    c = s;
    if (m_N.cols() > 0) c -= m_N * m_closed.solve(m_N.transpose() * (m_M * s));
  }
  if (m_N.cols() > 0) c += m_N * m_closed.solve(m_N.transpose() * b);
  PolyForm out(m_n, m_k);
  for (int j = 0; j < N; ++j) out += m_basis[j] * c(j);
  return out;
}

PolyForm CellProjection::apply(const SampledForm& omega) const {
  const bool need_d = m_Y.cols() > 0;
  if (need_d && !omega.has_d()) {
    throw Error(ErrorCode::MissingExteriorDerivative, "form '" + omega.name + "' has no exterior derivative");
  }
  const auto& rule = simplex_rule(m_n, m_order);
  Eigen::MatrixXd w(num_components(m_n, m_k), rule.size()), dw(num_components(m_n, m_k + 1), rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd x = m_frame.point(rule.points.col(q).data());
    w.col(q) = omega.eval(x.data());
    if (need_d) dw.col(q) = omega.eval_d(x.data());
  }
  return combine(w, dw);
}

PolyForm CellProjection::apply(const PolyForm& local) const {
  const auto& rule = simplex_rule(m_n, m_order);
  const PolyForm dl = local.d();
  Eigen::MatrixXd w(num_components(m_n, m_k), rule.size()), dw(num_components(m_n, m_k + 1), rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    const double* t = rule.points.col(q).data();
    w.col(q) = m_frame.to_cartesian[m_k] * local.evaluate(t);
    if (m_k < m_n) dw.col(q) = m_frame.to_cartesian[m_k + 1] * dl.evaluate(t);
  }
  return combine(w, dw);
}

PolyForm cell_projection(const SampledForm& omega, const SimplicialComplex& mesh, int cell, Family family, int r,
                         int k) {
  return CellProjection(mesh, cell, family, r, k).apply(omega);
}

InterpolantResult from_dofs(const BiorthogonalSystem& sys, Eigen::VectorXd dofs) {
  InterpolantResult out;
  out.coefficients = sys.to_geometric(dofs);
  out.dofs = std::move(dofs);
  const auto& mesh = sys.mesh();
  out.local.reserve(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) out.local.push_back(sys.space().restrict(out.coefficients, c));
  return out;
}

namespace {

InterpolantResult clement_sum(const SampledForm& omega, const BiorthogonalSystem& sys, const BoundarySubcomplex* U) {
  const auto& V = sys.space();
  const auto& mesh = sys.mesh();
  Eigen::VectorXd dofs = Eigen::VectorXd::Zero(sys.size());
  for (int m = V.k(); m <= mesh.dim(); ++m) {
    const int c = V.count({m, 0});
    if (c == 0) continue;
    for (int s = 0; s < mesh.num_simplices(m); ++s) {
      const SimplexRef S{m, s};
      if (U && U->contains(S)) continue;
      const AveragedTaylor P = averaged_taylor(omega, mesh, S, V.r());
      const PolyForm local = P.on_cell(mesh, P.ball.cell);
      for (int i = 0; i < c; ++i) {
        const int g = sys.index(S, i);
        dofs(g) = apply_dof(sys.dof(g), mesh, P.ball.cell, local);
      }
    }
  }
  return from_dofs(sys, std::move(dofs));
}

}  // namespace

InterpolantResult clement(const SampledForm& omega, const BiorthogonalSystem& sys) {
  return clement_sum(omega, sys, nullptr);
}

InterpolantResult clement_bc(const SampledForm& omega, const BiorthogonalSystem& sys, const BoundarySubcomplex& U) {
  return clement_sum(omega, sys, &U);
}

InterpolantResult scott_zhang(const SampledForm& omega, const BiorthogonalSystem& sys, const AnchorChoice& anchors,
                              const BoundarySubcomplex& U) {
  const auto& V = sys.space();
  const auto& mesh = sys.mesh();
  const int n = mesh.dim();
  const KFunctional K(mesh, anchors, V.family(), V.r(), V.k());
  Eigen::VectorXd dofs = Eigen::VectorXd::Zero(sys.size());

  std::map<int, std::vector<SimplexRef>> by_anchor;
  for (int m = V.k(); m < n; ++m) {
    if (V.count({m, 0}) == 0) continue;
    for (int s = 0; s < mesh.num_simplices(m); ++s) by_anchor[K.anchor_cell({m, s})].push_back({m, s});
  }
  for (const auto& [T, list] : by_anchor) {
    const CellSamples cs = sample_cell(mesh, T, omega, K.order());
    for (SimplexRef S : list)
      for (int i = 0; i < V.count(S); ++i) dofs(sys.index(S, i)) = K(S, i, cs);
  }
  for (int c = 0; c < mesh.num_cells() && V.count({n, 0}) > 0; ++c)
    for (int i = 0; i < V.count({n, c}); ++i) dofs(sys.index({n, c}, i)) = K({n, c}, i, omega);

  std::vector<int> zeroed;
  double max_zeroed = 0.0;
  for (int g = 0; g < sys.size(); ++g) {
    if (!U.contains(V.owner(g))) continue;
    max_zeroed = std::max(max_zeroed, std::abs(dofs(g)));
    dofs(g) = 0.0;
    zeroed.push_back(g);
  }
  InterpolantResult out = from_dofs(sys, std::move(dofs));
  out.zeroed = std::move(zeroed);
  out.max_zeroed = max_zeroed;
  return out;
}

std::vector<double> cell_errors(const SimplicialComplex& mesh, const SampledForm& omega,
                                const std::vector<PolyForm>& local, double p, int order, bool derivative) {
  const int n = mesh.dim();
  const int k = omega.k + (derivative ? 1 : 0);
  if (derivative && !omega.has_d()) {
    throw Error(ErrorCode::MissingExteriorDerivative, "form '" + omega.name + "' has no exterior derivative");
  }
  if (k > n) return std::vector<double>(mesh.num_cells(), 0.0);
  std::vector<Eigen::MatrixXd> conv(mesh.num_cells());
  std::vector<PolyForm> forms(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    conv[c] = compound(mesh.geometry({n, c}).E.inverse(), k).transpose();
    forms[c] = derivative ? local[c].d() : local[c];
  }
  const int nc = num_components(n, k);
  CellField f = [&](int cell, const double* t, const double* x, double* out) {
    if (derivative) omega.exterior_derivative(x, out);
    else omega.value(x, out);
    double v[kMaxDim];
    forms[cell].evaluate(t, v);
    const Eigen::MatrixXd& C = conv[cell];
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) out[i] -= C(i, j) * v[j];
  };
  return cell_lp_norms(mesh, all_cells(mesh), k, f, p, order);
}

}  // namespace feqi
