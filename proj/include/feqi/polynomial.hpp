#pragma once

#include "feqi/combinatorics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace feqi {

/// Sparse multivariate polynomial in at most kMaxDim variables.
///
/// Terms are kept sorted by packed exponent key, merged, and free of exact
/// zeros, so two polynomials with equal coefficients compare equal term by term.
class Polynomial {
 public:
  struct Term {
    std::uint32_t key;  // packed exponents, 8 bits per variable
    double coef;
  };

  explicit Polynomial(int nvars = 0) : m_nvars(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial monomial(int nvars, const Exponents& alpha, double c = 1.0);
  /// Affine function c0 + sum_i c[i] x_i.
  static Polynomial affine(int nvars, double c0, std::span<const double> c);

  static std::uint32_t pack(const Exponents& alpha);
  static Exponents unpack(std::uint32_t key);

  int nvars() const { return m_nvars; }
  const std::vector<Term>& terms() const { return m_terms; }
  bool is_zero() const { return m_terms.empty(); }
  int degree() const;  // -1 for the zero polynomial

  double coefficient(const Exponents& alpha) const;
  double max_abs_coef() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  Polynomial partial(int var) const;
  double evaluate(std::span<const double> x) const;

  /// Integral over the reference simplex {x_i >= 0, sum x_i <= 1}.
  double integrate_reference_simplex() const;

  /// Substitute x = A s + b, producing a polynomial in s (A is nvars x m).
  Polynomial compose_affine(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const;

  /// Drop terms with |coef| <= tol.
  void prune(double tol);

  /// Add coef * x^alpha without re-sorting; call normalize() afterwards.
  void push_raw(std::uint32_t key, double coef) { m_terms.push_back({key, coef}); }
  void normalize();

 private:
  int m_nvars;
  std::vector<Term> m_terms;
};

}  // namespace feqi
