#include "feqi/polyform.hpp"

#include "feqi/error.hpp"

#include <algorithm>
#include <cmath>

namespace feqi {

PolyForm::PolyForm(int dim, int degree) : m_dim(dim), m_degree(degree) {
  if (dim < 0 || dim > kMaxDim || degree < 0) {
    throw Error(ErrorCode::WrongDimension, "PolyForm dimension/degree out of range");
  }
  m_comp.assign(degree <= dim ? subsets(dim, degree).size() : 0, Polynomial(dim));
}

PolyForm PolyForm::from_components(int dim, int degree, std::vector<Polynomial> comps) {
  PolyForm w(dim, degree);
  if (comps.size() != w.m_comp.size()) {
    throw Error(ErrorCode::DegreeMismatch, "component count does not match form degree");
  }
  w.m_comp = std::move(comps);
  return w;
}

PolyForm PolyForm::scalar(int dim, const Polynomial& p) {
  PolyForm w(dim, 0);
  w.m_comp[0] = p;
  return w;
}

PolyForm PolyForm::basis_form(int dim, Mask I, double c) {
  PolyForm w(dim, popcount(I));
  w.m_comp[subset_rank(dim, I)] = Polynomial::constant(dim, c);
  return w;
}

PolyForm PolyForm::lambda(int dim, int j) {
  std::vector<double> c(dim, 0.0);
  if (j == 0) {
    std::fill(c.begin(), c.end(), -1.0);
    return scalar(dim, Polynomial::affine(dim, 1.0, c));
  }
  c[j - 1] = 1.0;
  return scalar(dim, Polynomial::affine(dim, 0.0, c));
}

PolyForm PolyForm::dlambda(int dim, int j) { return lambda(dim, j).d(); }

PolyForm PolyForm::bary_monomial(int dim, const std::vector<int>& alpha) {
  Polynomial p = Polynomial::constant(dim, 1.0);
  for (int j = 0; j <= dim; ++j) {
    if (alpha[j] == 0) continue;
    const Polynomial l = lambda(dim, j).component(0);
    for (int e = 0; e < alpha[j]; ++e) p = p * l;
  }
  return scalar(dim, p);
}

PolyForm PolyForm::dlambda_wedge(int dim, const std::vector<int>& sigma) {
  PolyForm w = constant(dim, 1.0);
  for (int j : sigma) w = w.wedge(dlambda(dim, j));
  return w;
}

PolyForm PolyForm::whitney(int dim, const std::vector<int>& sigma) {
  const int k = static_cast<int>(sigma.size()) - 1;
  PolyForm w(dim, k);
  for (int i = 0; i <= k; ++i) {
    std::vector<int> rest;
    for (int j = 0; j <= k; ++j) {
      if (j != i) rest.push_back(sigma[j]);
    }
    PolyForm term = lambda(dim, sigma[i]).wedge(dlambda_wedge(dim, rest));
    if (i % 2 == 1) term *= -1.0;
    w += term;
  }
  return w;
}

int PolyForm::poly_degree() const {
  int d = -1;
  for (const auto& p : m_comp) d = std::max(d, p.degree());
  return d;
}

bool PolyForm::is_zero() const {
  return std::all_of(m_comp.begin(), m_comp.end(), [](const Polynomial& p) { return p.is_zero(); });
}

double PolyForm::max_abs_coef() const {
  double m = 0.0;
  for (const auto& p : m_comp) m = std::max(m, p.max_abs_coef());
  return m;
}

void PolyForm::prune(double tol) {
  for (auto& p : m_comp) p.prune(tol);
}

PolyForm& PolyForm::operator+=(const PolyForm& other) {
  if (other.m_dim != m_dim) throw Error(ErrorCode::HostMismatch, "adding forms on different hosts");
  if (other.m_degree != m_degree) throw Error(ErrorCode::DegreeMismatch, "adding forms of different degree");
  for (std::size_t c = 0; c < m_comp.size(); ++c) m_comp[c] += other.m_comp[c];
  return *this;
}

PolyForm& PolyForm::operator-=(const PolyForm& other) {
  if (other.m_dim != m_dim) throw Error(ErrorCode::HostMismatch, "subtracting forms on different hosts");
  if (other.m_degree != m_degree) throw Error(ErrorCode::DegreeMismatch, "subtracting forms of different degree");
  for (std::size_t c = 0; c < m_comp.size(); ++c) m_comp[c] -= other.m_comp[c];
  return *this;
}

PolyForm& PolyForm::operator*=(double s) {
  for (auto& p : m_comp) p *= s;
  return *this;
}

PolyForm PolyForm::wedge(const PolyForm& other) const {
  if (other.m_dim != m_dim) throw Error(ErrorCode::HostMismatch, "wedge of forms on different hosts");
  const int k = m_degree + other.m_degree;
  if (k > m_dim) throw Error(ErrorCode::DegreeOverflow, "wedge degree exceeds host dimension");
  PolyForm out(m_dim, k);
  const auto& A = subsets(m_dim, m_degree);
  const auto& B = subsets(m_dim, other.m_degree);
  for (std::size_t a = 0; a < A.size(); ++a) {
    if (m_comp[a].is_zero()) continue;
    for (std::size_t b = 0; b < B.size(); ++b) {
      const int s = wedge_sign(A[a], B[b]);
      if (s == 0 || other.m_comp[b].is_zero()) continue;
      out.m_comp[subset_rank(m_dim, A[a] | B[b])] += (m_comp[a] * other.m_comp[b]) * double(s);
    }
  }
  return out;
}

PolyForm PolyForm::d() const {
  PolyForm out(m_dim, m_degree + 1);
  if (m_degree >= m_dim) return out;
  const auto& I = subsets(m_dim, m_degree);
  for (std::size_t c = 0; c < I.size(); ++c) {
    if (m_comp[c].is_zero()) continue;
    for (int j = 0; j < m_dim; ++j) {
      const Mask jm = Mask(1) << j;
      const int s = wedge_sign(jm, I[c]);
      if (s == 0) continue;
      out.m_comp[subset_rank(m_dim, jm | I[c])] += m_comp[c].partial(j) * double(s);
    }
  }
  return out;
}

PolyForm PolyForm::koszul(const Eigen::VectorXd& base) const {
  if (m_degree == 0) throw Error(ErrorCode::DegreeMismatch, "koszul of a 0-form");
  PolyForm out(m_dim, m_degree - 1);
  const auto& I = subsets(m_dim, m_degree);
  for (std::size_t c = 0; c < I.size(); ++c) {
    if (m_comp[c].is_zero()) continue;
    const auto idx = mask_elements(I[c]);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      std::vector<double> lin(m_dim, 0.0);
      lin[idx[p]] = 1.0;
      const Polynomial x = Polynomial::affine(m_dim, -base(idx[p]), lin);
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      out.m_comp[subset_rank(m_dim, I[c] & ~(Mask(1) << idx[p]))] += (m_comp[c] * x) * sign;
    }
  }
  return out;
}

PolyForm PolyForm::pullback(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const {
  const int m = static_cast<int>(A.cols());
  PolyForm out(m, m_degree);
  if (m_degree > m) return out;
  const auto& I = subsets(m_dim, m_degree);
  const auto& J = subsets(m, m_degree);
  for (std::size_t c = 0; c < I.size(); ++c) {
    if (m_comp[c].is_zero()) continue;
    const Polynomial composed = m_comp[c].compose_affine(A, b);
    for (std::size_t j = 0; j < J.size(); ++j) {
      const double det = minor_det(A, I[c], J[j]);
      if (det != 0.0) out.m_comp[j] += composed * det;
    }
  }
  return out;
}

void face_embedding(int dim, const std::vector<int>& w, Eigen::MatrixXd& A, Eigen::VectorXd& b) {
  const int m = static_cast<int>(w.size()) - 1;
  A = Eigen::MatrixXd::Zero(dim, m);
  b = Eigen::VectorXd::Zero(dim);
  for (int j = 0; j <= m; ++j) {
    if (w[j] == 0) continue;
    const int row = w[j] - 1;
    if (j == 0) {
      b(row) = 1.0;
      A.row(row).setConstant(-1.0);
    } else {
      A(row, j - 1) = 1.0;
    }
  }
}

PolyForm PolyForm::trace(const std::vector<int>& w) const {
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] < 0 || w[j] > m_dim || (j > 0 && w[j] <= w[j - 1])) {
      throw Error(ErrorCode::NotASubsimplex, "face vertex list is not an ascending subset of the host");
    }
  }
  if (static_cast<int>(w.size()) == m_dim + 1) return *this;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  face_embedding(m_dim, w, A, b);
  return pullback(A, b);
}

PolyForm PolyForm::times(const Polynomial& p) const {
  PolyForm out = *this;
  for (auto& c : out.m_comp) c = c * p;
  return out;
}

Eigen::VectorXd PolyForm::evaluate(const double* t) const {
  Eigen::VectorXd v(m_comp.size());
  const std::span<const double> x(t, static_cast<std::size_t>(m_dim));
  for (std::size_t c = 0; c < m_comp.size(); ++c) v(c) = m_comp[c].evaluate(x);
  return v;
}

void PolyForm::evaluate(const double* t, double* out) const {
  const std::span<const double> x(t, static_cast<std::size_t>(m_dim));
  for (std::size_t c = 0; c < m_comp.size(); ++c) out[c] = m_comp[c].evaluate(x);
}

double PolyForm::integrate() const {
  if (m_degree != m_dim) throw Error(ErrorCode::DegreeMismatch, "integrand degree differs from simplex dimension");
  return m_comp[0].integrate_reference_simplex();
}

FormCoordinates::FormCoordinates(int dim, int k, int maxdeg)
    : m_dim(dim), m_k(k), m_maxdeg(std::max(maxdeg, 0)) {
  m_ncomp = k <= dim ? static_cast<int>(subsets(dim, k).size()) : 0;
  m_monomials = multi_indices_upto(dim, m_maxdeg);
  m_nmon = static_cast<int>(m_monomials.size());
  int grid = 1;
  for (int i = 0; i < dim; ++i) grid *= (m_maxdeg + 1);
  m_lookup.assign(grid, -1);
  for (int i = 0; i < m_nmon; ++i) m_lookup[lookup(m_monomials[i])] = i;
}

int FormCoordinates::lookup(const Exponents& a) const {
  int idx = 0;
  for (int i = m_dim - 1; i >= 0; --i) idx = idx * (m_maxdeg + 1) + a[i];
  return idx;
}

Eigen::VectorXd FormCoordinates::to_vector(const PolyForm& w) const {
  if (w.dim() != m_dim || w.degree() != m_k) {
    throw Error(ErrorCode::DegreeMismatch, "form does not match coordinate system");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size());
  for (int c = 0; c < m_ncomp; ++c) {
    for (const auto& t : w.component(c).terms()) {
      const auto a = Polynomial::unpack(t.key);
      int deg = 0;
      for (int i = 0; i < m_dim; ++i) deg += a[i];
      if (deg > m_maxdeg) throw Error(ErrorCode::DegreeOverflow, "form degree exceeds coordinate system");
      v(c * m_nmon + m_lookup[lookup(a)]) = t.coef;
    }
  }
  return v;
}

PolyForm FormCoordinates::from_vector(const Eigen::VectorXd& v, double drop_tol) const {
  std::vector<Polynomial> comps(m_ncomp, Polynomial(m_dim));
  for (int c = 0; c < m_ncomp; ++c) {
    for (int i = 0; i < m_nmon; ++i) {
      const double x = v(c * m_nmon + i);
      if (std::abs(x) > drop_tol) comps[c].push_raw(Polynomial::pack(m_monomials[i]), x);
    }
    comps[c].normalize();
  }
  return PolyForm::from_components(m_dim, m_k, std::move(comps));
}

Eigen::MatrixXd FormCoordinates::to_matrix(const std::vector<PolyForm>& forms) const {
  Eigen::MatrixXd M(size(), forms.size());
  for (std::size_t j = 0; j < forms.size(); ++j) M.col(j) = to_vector(forms[j]);
  return M;
}

}  // namespace feqi
