#include "feqi/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace feqi {

std::uint32_t Polynomial::pack(const Exponents& alpha) {
  return static_cast<std::uint32_t>(alpha[0]) | (static_cast<std::uint32_t>(alpha[1]) << 8) |
         (static_cast<std::uint32_t>(alpha[2]) << 16);
}

Exponents Polynomial::unpack(std::uint32_t key) {
  return {static_cast<int>(key & 0xFF), static_cast<int>((key >> 8) & 0xFF),
          static_cast<int>((key >> 16) & 0xFF)};
}

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  if (c != 0.0) p.m_terms.push_back({0, c});
  return p;
}

Polynomial Polynomial::monomial(int nvars, const Exponents& alpha, double c) {
  Polynomial p(nvars);
  if (c != 0.0) p.m_terms.push_back({pack(alpha), c});
  return p;
}

Polynomial Polynomial::affine(int nvars, double c0, std::span<const double> c) {
  Polynomial p(nvars);
  p.push_raw(0, c0);
  for (int i = 0; i < nvars; ++i) {
    Exponents a{};
    a[i] = 1;
    p.push_raw(pack(a), c[i]);
  }
  p.normalize();
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& t : m_terms) {
    const auto a = unpack(t.key);
    d = std::max(d, a[0] + a[1] + a[2]);
  }
  return d;
}

double Polynomial::coefficient(const Exponents& alpha) const {
  const auto key = pack(alpha);
  auto it = std::lower_bound(m_terms.begin(), m_terms.end(), key,
                             [](const Term& t, std::uint32_t k) { return t.key < k; });
  return (it != m_terms.end() && it->key == key) ? it->coef : 0.0;
}

double Polynomial::max_abs_coef() const {
  double m = 0.0;
  for (const auto& t : m_terms) m = std::max(m, std::abs(t.coef));
  return m;
}

void Polynomial::normalize() {
  std::sort(m_terms.begin(), m_terms.end(),
            [](const Term& a, const Term& b) { return a.key < b.key; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < m_terms.size();) {
    Term acc = m_terms[i++];
    while (i < m_terms.size() && m_terms[i].key == acc.key) acc.coef += m_terms[i++].coef;
    if (acc.coef != 0.0) m_terms[out++] = acc;
  }
  m_terms.resize(out);
}

void Polynomial::prune(double tol) {
  std::erase_if(m_terms, [tol](const Term& t) { return std::abs(t.coef) <= tol; });
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.m_terms.empty()) return *this;
  if (m_nvars < other.m_nvars) m_nvars = other.m_nvars;
  std::vector<Term> merged;
  merged.reserve(m_terms.size() + other.m_terms.size());
  auto a = m_terms.begin();
  auto b = other.m_terms.begin();
  while (a != m_terms.end() || b != other.m_terms.end()) {
    if (b == other.m_terms.end() || (a != m_terms.end() && a->key < b->key)) {
      merged.push_back(*a++);
    } else if (a == m_terms.end() || b->key < a->key) {
      merged.push_back(*b++);
    } else {
      const double c = a->coef + b->coef;
      if (c != 0.0) merged.push_back({a->key, c});
      ++a;
      ++b;
    }
  }
  m_terms = std::move(merged);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  Polynomial neg = other;
  neg *= -1.0;
  return *this += neg;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    m_terms.clear();
    return *this;
  }
  for (auto& t : m_terms) t.coef *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial p(std::max(a.nvars(), b.nvars()));
  if (a.is_zero() || b.is_zero()) return p;
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) p.push_raw(ta.key + tb.key, ta.coef * tb.coef);
  p.normalize();
  return p;
}

Polynomial Polynomial::partial(int var) const {
  Polynomial p(m_nvars);
  const std::uint32_t unit = 1U << (8 * var);
  for (const auto& t : m_terms) {
    const int e = static_cast<int>((t.key >> (8 * var)) & 0xFF);
    if (e > 0) p.push_raw(t.key - unit, t.coef * e);
  }
  p.normalize();
  return p;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& t : m_terms) {
    const auto a = unpack(t.key);
    double v = t.coef;
    for (int i = 0; i < m_nvars; ++i) {
      for (int e = 0; e < a[i]; ++e) v *= x[i];
    }
    total += v;
  }
  return total;
}

double Polynomial::integrate_reference_simplex() const {
  // int_{ref} x^a dx = a! / (|a| + d)!
  double total = 0.0;
  for (const auto& t : m_terms) {
    const auto a = unpack(t.key);
    double num = 1.0;
    int deg = 0;
    for (int i = 0; i < m_nvars; ++i) {
      num *= factorial(a[i]);
      deg += a[i];
    }
    total += t.coef * num / factorial(deg + m_nvars);
  }
  return total;
}

Polynomial Polynomial::compose_affine(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const {
  const int m = static_cast<int>(A.cols());
  Polynomial result(m);
  if (is_zero()) return result;
  // powers[i][e] = (A_i s + b_i)^e
  int maxexp = 0;
  for (const auto& t : m_terms) {
    const auto a = unpack(t.key);
    for (int i = 0; i < m_nvars; ++i) maxexp = std::max(maxexp, a[i]);
  }
  std::vector<std::vector<Polynomial>> powers(m_nvars);
  for (int i = 0; i < m_nvars; ++i) {
    std::vector<double> row(m);
    for (int j = 0; j < m; ++j) row[j] = A(i, j);
    const Polynomial lin = affine(m, b(i), row);
    powers[i].push_back(constant(m, 1.0));
    for (int e = 1; e <= maxexp; ++e) powers[i].push_back(powers[i].back() * lin);
  }
  for (const auto& t : m_terms) {
    const auto a = unpack(t.key);
    Polynomial term = constant(m, t.coef);
    for (int i = 0; i < m_nvars; ++i) {
      if (a[i] > 0) term = term * powers[i][a[i]];
    }
    for (const auto& tt : term.terms()) result.push_raw(tt.key, tt.coef);
  }
  result.normalize();
  return result;
}

}  // namespace feqi
