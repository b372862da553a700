#include "feqi/spaces.hpp"

#include "feqi/error.hpp"

#include <algorithm>
#include <cmath>

namespace feqi {

const char* to_string(Family f) { return f == Family::Full ? "full" : "trimmed"; }

Family family_from_string(const std::string& s) {
  if (s == "full" || s == "FULL" || s == "P") return Family::Full;
  if (s == "trimmed" || s == "TRIMMED" || s == "P-") return Family::Trimmed;
  throw Error(ErrorCode::InvalidConfig, "unknown family '" + s + "'");
}

FamilySelector FamilySelector::make(Family family, int r, int k, int n) {
  if (r < 1) throw Error(ErrorCode::InvalidConfig, "polynomial degree r must be >= 1");
  if (k < 0 || k > n) throw Error(ErrorCode::InvalidConfig, "form degree out of range");
  FamilySelector s{family, r, k};
  if (k == 0) s.family = Family::Full;
  if (k == n) s.family = Family::Trimmed;
  return s;
}

namespace {

int max_degree_of(const std::vector<PolyForm>& forms) {
  int d = 0;
  for (const auto& f : forms) d = std::max(d, f.poly_degree());
  return d;
}

}  // namespace

std::vector<PolyForm> reduce_to_basis(const std::vector<PolyForm>& span, int maxdeg, double rel_tol) {
  if (span.empty()) return {};
  const FormCoordinates fc(span.front().dim(), span.front().degree(), maxdeg);
  const Eigen::MatrixXd M = fc.to_matrix(span);
  if (M.rows() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  std::vector<PolyForm> out;
  if (sv.size() == 0 || sv(0) == 0.0) return out;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) out.push_back(fc.from_vector(svd.matrixU().col(i), 1e-15));
  }
  return out;
}

int span_rank(const std::vector<PolyForm>& span, int maxdeg, double rel_tol) {
  return static_cast<int>(reduce_to_basis(span, maxdeg, rel_tol).size());
}

double membership_residual(const std::vector<PolyForm>& A, const std::vector<PolyForm>& B) {
  if (A.empty()) return 0.0;
  const int maxdeg = std::max(max_degree_of(A), max_degree_of(B));
  const FormCoordinates fc(A.front().dim(), A.front().degree(), maxdeg);
  const Eigen::MatrixXd MA = fc.to_matrix(A);
  Eigen::MatrixXd Q(MA.rows(), 0);
  if (!B.empty()) {
    const Eigen::MatrixXd MB = fc.to_matrix(B);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(MB, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-12 * sv(0)) ++rank;
    Q = svd.matrixU().leftCols(rank);
  }
  double worst = 0.0;
  for (int j = 0; j < MA.cols(); ++j) {
    const Eigen::VectorXd a = MA.col(j);
    const double na = a.norm();
    if (na == 0.0) continue;
    const Eigen::VectorXd res = a - Q * (Q.transpose() * a);
    worst = std::max(worst, res.norm() / na);
  }
  return worst;
}

std::vector<PolyForm> spanning_set(int dim, Family family, int r, int k) {
  std::vector<PolyForm> out;
  if (k < 0 || k > dim) return out;
  if (family == Family::Full) {
    if (r < 0) return out;
    std::vector<PolyForm> wedges;
    for (Mask s : subsets(dim + 1, k)) wedges.push_back(PolyForm::dlambda_wedge(dim, mask_elements(s)));
    for (const auto& a : multi_indices_exact(dim + 1, r)) {
      const PolyForm m = PolyForm::bary_monomial(dim, a);
      for (const auto& w : wedges) out.push_back(m.wedge(w));
    }
    return out;
  }
  if (r < 1) return out;
  out = spanning_set(dim, Family::Full, r - 1, k);
  std::vector<PolyForm> whitney;
  for (Mask s : subsets(dim + 1, k + 1)) whitney.push_back(PolyForm::whitney(dim, mask_elements(s)));
  for (const auto& a : multi_indices_exact(dim + 1, r - 1)) {
    const PolyForm m = PolyForm::bary_monomial(dim, a);
    for (const auto& w : whitney) out.push_back(m.wedge(w));
  }
  return out;
}

LocalBasis local_basis(int dim, Family family, int r, int k) {
  LocalBasis b;
  b.dim = dim;
  b.family = family;
  b.r = r;
  b.k = k;
  b.forms = reduce_to_basis(spanning_set(dim, family, r, k), std::max(r, 0));
  const int N = b.size();
  b.gram.resize(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      double s = 0.0;
      for (int c = 0; c < b.forms[i].num_components(); ++c) {
        s += (b.forms[i].component(c) * b.forms[j].component(c)).integrate_reference_simplex();
      }
      b.gram(i, j) = b.gram(j, i) = s;
    }
  }
  return b;
}

double koszul_space_equivalence(int dim, int r, int k) {
  std::vector<PolyForm> kz = spanning_set(dim, Family::Full, r - 1, k);
  if (k + 1 <= dim) {
    const Eigen::VectorXd bary = Eigen::VectorXd::Constant(dim, 1.0 / (dim + 1));
    for (const auto& w : spanning_set(dim, Family::Full, r - 1, k + 1)) kz.push_back(w.koszul(bary));
  }
  const auto wh = spanning_set(dim, Family::Trimmed, r, k);
  return std::max(membership_residual(kz, wh), membership_residual(wh, kz));
}

namespace {

/// Proper faces of a dim-simplex of dimension >= k (traces onto smaller faces vanish).
std::vector<Mask> trace_faces(int dim, int k) {
  std::vector<Mask> out;
  for (int m = k; m < dim; ++m)
    for (Mask f : subsets(dim + 1, m + 1)) out.push_back(f);
  return out;
}

}  // namespace

RingBasis ring_basis(int dim, Family family, int r, int k) {
  RingBasis rb;
  rb.dim = dim;
  rb.family = family;
  rb.r = r;
  rb.k = k;
  const LocalBasis lb = local_basis(dim, family, r, k);
  if (lb.size() == 0) return rb;
  const int maxdeg = std::max(r, 0);
  std::vector<Eigen::MatrixXd> blocks;
  int rows = 0;
  for (Mask f : trace_faces(dim, k)) {
    const FormCoordinates fc(popcount(f) - 1, k, maxdeg);
    std::vector<PolyForm> tr;
    for (const auto& w : lb.forms) tr.push_back(w.trace(f));
    blocks.push_back(fc.to_matrix(tr));
    rows += static_cast<int>(blocks.back().rows());
  }
  Eigen::MatrixXd T(rows, lb.size());
  int row = 0;
  for (const auto& b : blocks) {
    T.middleRows(row, b.rows()) = b;
    row += static_cast<int>(b.rows());
  }
  Eigen::MatrixXd null;
  if (rows == 0) {
    null = Eigen::MatrixXd::Identity(lb.size(), lb.size());
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    null = svd.matrixV().rightCols(lb.size() - rank);
  }
  for (int i = 0; i < null.cols(); ++i) {
    PolyForm w(dim, k);
    for (int j = 0; j < lb.size(); ++j) w += lb.forms[j] * null(j, i);
    w.prune(1e-15);
    rb.forms.push_back(std::move(w));
  }
  return rb;
}

double max_proper_trace(const PolyForm& w) {
  double m = 0.0;
  for (Mask f : trace_faces(w.dim(), w.degree())) m = std::max(m, w.trace(f).max_abs_coef());
  return m;
}

PolyForm realize(const Generator& g, int host_dim, const std::vector<int>& vertex_map) {
  std::vector<int> alpha(host_dim + 1, 0);
  for (std::size_t j = 0; j < g.alpha.size(); ++j) alpha[vertex_map[j]] = g.alpha[j];
  std::vector<int> sigma;
  for (int s : g.sigma) sigma.push_back(vertex_map[s]);
  const PolyForm m = PolyForm::bary_monomial(host_dim, alpha);
  return m.wedge(g.whitney ? PolyForm::whitney(host_dim, sigma) : PolyForm::dlambda_wedge(host_dim, sigma));
}

std::vector<Generator> covering_generators(int dim, Family family, int r, int k) {
  std::vector<Generator> out;
  const Mask all = full_mask(dim + 1);
  auto support = [](const std::vector<int>& a) {
    Mask m = 0;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[j] > 0) m |= Mask(1) << j;
    return m;
  };
  auto add = [&](int deg, int wedge_size, bool whitney) {
    if (deg < 0) return;
    for (const auto& a : multi_indices_exact(dim + 1, deg)) {
      const Mask sa = support(a);
      for (Mask s : subsets(dim + 1, wedge_size)) {
        if ((sa | s) == all) out.push_back({a, mask_elements(s), whitney});
      }
    }
  };
  if (family == Family::Full) {
    add(r, k, false);
  } else {
    add(r - 1, k + 1, true);
    add(r - 1, k, false);
  }
  return out;
}

BubbleExtension make_extension(const std::vector<PolyForm>& bubbles, Family family, int r) {
  BubbleExtension ext;
  if (bubbles.empty()) return ext;
  ext.dim = bubbles.front().dim();
  ext.k = bubbles.front().degree();
  for (const auto& b : bubbles) {
    if (max_proper_trace(b) > 1e-9 * std::max(1.0, b.max_abs_coef())) {
      throw Error(ErrorCode::NotABubble, "form has a nonvanishing trace on a proper face");
    }
  }
  const auto gens = covering_generators(ext.dim, family, r, ext.k);
  const int maxdeg = std::max(max_degree_of(bubbles), r);
  const FormCoordinates fc(ext.dim, ext.k, maxdeg);
  std::vector<PolyForm> gforms;
  const std::vector<int> id = mask_elements(full_mask(ext.dim + 1));
  for (const auto& g : gens) gforms.push_back(realize(g, ext.dim, id));
  const Eigen::MatrixXd G = fc.to_matrix(gforms);
  const Eigen::MatrixXd B = fc.to_matrix(bubbles);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  const auto perm = qr.colsPermutation().indices();
  Eigen::MatrixXd Gs(G.rows(), rank);
  for (int j = 0; j < rank; ++j) {
    Gs.col(j) = G.col(perm(j));
    ext.generators.push_back(gens[perm(j)]);
  }
  const Eigen::MatrixXd C = Gs.colPivHouseholderQr().solve(B);
  const double res = (Gs * C - B).norm();
  if (!(res <= 1e-9 * std::max(1.0, B.norm()))) {
    throw Error(ErrorCode::NotABubble, "form is not in the span of extendable generators");
  }
  ext.coefficients = C;
  return ext;
}

std::vector<PolyForm> BubbleExtension::extend(int host_dim, Mask face) const {
  if (popcount(face) != dim + 1) throw Error(ErrorCode::NotASubsimplex, "face dimension does not match bubble");
  const auto map = mask_elements(face);
  std::vector<PolyForm> realized;
  for (const auto& g : generators) realized.push_back(realize(g, host_dim, map));
  std::vector<PolyForm> out;
  for (int b = 0; b < coefficients.cols(); ++b) {
    PolyForm w(host_dim, k);
    for (std::size_t g = 0; g < realized.size(); ++g) {
      if (coefficients(g, b) != 0.0) w += realized[g] * coefficients(g, b);
    }
    w.prune(1e-15);
    out.push_back(std::move(w));
  }
  return out;
}

PolyForm extend(const PolyForm& bubble, Family family, int r, int host_dim, Mask face) {
  return make_extension({bubble}, family, r).extend(host_dim, face).front();
}

std::shared_ptr<const ReferenceElement> ReferenceElement::get(int n, Family family, int r, int k) {
  static std::mutex guard;
  static std::map<std::tuple<int, int, int, int>, std::shared_ptr<const ReferenceElement>> cache;
  std::lock_guard lock(guard);
  auto& slot = cache[{n, static_cast<int>(family), r, k}];
  if (!slot) slot = std::shared_ptr<const ReferenceElement>(new ReferenceElement(n, family, r, k));
  return slot;
}

ReferenceElement::ReferenceElement(int n, Family family, int r, int k)
    : m_n(n), m_r(r), m_k(k), m_family(family), m_coords(n, k, r) {
  m_ring.resize(n + 1);
  m_ext.resize(n + 1);
  for (int m = k; m <= n; ++m) {
    m_ring[m] = ring_basis(m, family, r, k);
    if (m_ring[m].size() == 0) continue;
    m_ext[m] = make_extension(m_ring[m].forms, family, r);
    // use the generator expression as the ring basis so every restriction agrees exactly
    m_ring[m].forms = m_ext[m].extend(m, full_mask(m + 1));
  }
  m_local_offset.assign(Mask(1) << (n + 1), -1);
  for (int m = k; m <= n; ++m) {
    for (Mask f : subsets(n + 1, m + 1)) {
      m_local_offset[f] = m_local_size;
      m_local_faces.push_back(f);
      const auto& ext = extended(n, f);
      m_cell_basis.insert(m_cell_basis.end(), ext.begin(), ext.end());
      m_local_size += ring_size(m);
    }
  }
  m_cell_matrix = m_coords.to_matrix(m_cell_basis);
}

const std::vector<PolyForm>& ReferenceElement::extended(int host_dim, Mask face) const {
  std::lock_guard lock(m_guard);
  auto& slot = m_extended[{host_dim, face}];
  const int m = popcount(face) - 1;
  if (slot.empty() && ring_size(m) > 0) slot = m_ext[m].extend(host_dim, face);
  return slot;
}

GlobalFESpace::GlobalFESpace(const SimplicialComplex& mesh, const BoundarySubcomplex& U, Family family, int r,
                             int k)
    : m_mesh(&mesh), m_U(U) {
  const int n = mesh.dim();
  const auto sel = FamilySelector::make(family, r, k, n);
  m_ref = ReferenceElement::get(n, sel.family, sel.r, sel.k);
  m_offset.assign(n + 1, {});
  for (int d = 0; d <= n; ++d) {
    m_offset[d].assign(mesh.num_simplices(d), -1);
    const int c = m_ref->ring_size(d);
    if (c == 0) continue;
    for (int s = 0; s < mesh.num_simplices(d); ++s) {
      m_offset[d][s] = m_size;
      for (int i = 0; i < c; ++i) {
        m_owner.push_back({d, s});
        m_excluded.push_back(U.contains({d, s}) ? 1 : 0);
      }
      if (U.contains({d, s})) m_excluded_count += c;
      m_size += c;
    }
  }
}

std::vector<int> GlobalFESpace::local_dofs(int cell) const {
  std::vector<int> out;
  out.reserve(m_ref->local_size());
  for (Mask f : m_ref->local_faces()) {
    const SimplexRef s = m_mesh->cell_face(cell, f);
    const int c = count(s);
    for (int i = 0; i < c; ++i) out.push_back(offset(s) + i);
  }
  return out;
}

Eigen::VectorXd GlobalFESpace::gather(const Eigen::VectorXd& coeffs, int cell) const {
  const auto idx = local_dofs(cell);
  Eigen::VectorXd v(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) v(i) = coeffs(idx[i]);
  return v;
}

PolyForm GlobalFESpace::restrict(const Eigen::VectorXd& coeffs, int cell) const {
  return m_ref->coordinates().from_vector(m_ref->cell_matrix() * gather(coeffs, cell));
}

GlobalFESpace assemble_global(const SimplicialComplex& mesh, const BoundarySubcomplex& U, Family family, int r,
                              int k) {
  return GlobalFESpace(mesh, U, family, r, k);
}

}  // namespace feqi
