#pragma once

#include "feqi/polynomial.hpp"

#include <Eigen/Dense>

#include <vector>

namespace feqi {

/// Polynomial differential k-form on a d-simplex.
///
/// Coordinates are the affine coordinates t_i = lambda_i (i = 1..d) of the
/// host; lambda_0 = 1 - sum t is eliminated both in coefficients and in
/// differentials, so the representation is canonical. Component `c` is the
/// coefficient of dt_I where I = subsets(d, k)[c] (bit j stands for t_{j+1}).
///
/// The same class doubles as a Cartesian polynomial form on R^n when the
/// variables are read as x_1..x_n.
class PolyForm {
 public:
  PolyForm() = default;
  PolyForm(int dim, int degree);

  static PolyForm from_components(int dim, int degree, std::vector<Polynomial> comps);
  static PolyForm scalar(int dim, const Polynomial& p);
  static PolyForm constant(int dim, double c) { return scalar(dim, Polynomial::constant(dim, c)); }
  /// Constant k-form dt_I.
  static PolyForm basis_form(int dim, Mask I, double c = 1.0);

  /// lambda_j (j = 0..dim) as a 0-form.
  static PolyForm lambda(int dim, int j);
  /// d lambda_j as a 1-form.
  static PolyForm dlambda(int dim, int j);
  /// lambda^alpha with alpha indexed over lambda_0..lambda_dim.
  static PolyForm bary_monomial(int dim, const std::vector<int>& alpha);
  /// d lambda_{s0} ^ ... ^ d lambda_{s_{k-1}} for an index list in any order.
  static PolyForm dlambda_wedge(int dim, const std::vector<int>& sigma);
  /// Whitney form of the vertex list sigma.
  static PolyForm whitney(int dim, const std::vector<int>& sigma);

  int dim() const { return m_dim; }
  int degree() const { return m_degree; }
  int num_components() const { return static_cast<int>(m_comp.size()); }
  const Polynomial& component(int c) const { return m_comp[c]; }
  Polynomial& component(int c) { return m_comp[c]; }
  const std::vector<Polynomial>& components() const { return m_comp; }

  /// Highest polynomial degree among the coefficients (-1 for zero).
  int poly_degree() const;
  bool is_zero() const;
  double max_abs_coef() const;
  void prune(double tol);

  PolyForm& operator+=(const PolyForm& other);
  PolyForm& operator-=(const PolyForm& other);
  PolyForm& operator*=(double s);
  friend PolyForm operator+(PolyForm a, const PolyForm& b) { return a += b; }
  friend PolyForm operator-(PolyForm a, const PolyForm& b) { return a -= b; }
  friend PolyForm operator*(PolyForm a, double s) { return a *= s; }
  friend PolyForm operator*(double s, PolyForm a) { return a *= s; }

  PolyForm wedge(const PolyForm& other) const;
  PolyForm d() const;
  /// Contraction with the field t - base.
  PolyForm koszul(const Eigen::VectorXd& base) const;
  /// Pullback along the affine map t = A s + b (A is dim x m).
  PolyForm pullback(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const;
  /// Trace onto the face spanned by the listed local vertices (ascending,
  /// values in 0..dim), expressed in the face's own affine coordinates.
  PolyForm trace(const std::vector<int>& face_vertices) const;
  PolyForm trace(Mask face) const { return trace(mask_elements(face)); }
  /// Multiply every coefficient by the scalar polynomial p.
  PolyForm times(const Polynomial& p) const;

  /// Component values at the point t.
  Eigen::VectorXd evaluate(const double* t) const;
  void evaluate(const double* t, double* out) const;
  /// Integral over the reference simplex in its coordinate orientation.
  double integrate() const;

 private:
  int m_dim = 0;
  int m_degree = 0;
  std::vector<Polynomial> m_comp;
};

inline PolyForm wedge(const PolyForm& a, const PolyForm& b) { return a.wedge(b); }

/// Affine map from the face coordinates of `face_vertices` into the host
/// coordinates: t = A s + b.
void face_embedding(int dim, const std::vector<int>& face_vertices, Eigen::MatrixXd& A,
                    Eigen::VectorXd& b);

/// Fixed coordinate system for polynomial k-forms of degree <= maxdeg, used to
/// move between PolyForm and dense coefficient vectors.
class FormCoordinates {
 public:
  FormCoordinates(int dim, int k, int maxdeg);

  int size() const { return m_ncomp * m_nmon; }
  int dim() const { return m_dim; }
  int degree() const { return m_k; }
  int max_poly_degree() const { return m_maxdeg; }

  Eigen::VectorXd to_vector(const PolyForm& w) const;
  PolyForm from_vector(const Eigen::VectorXd& v, double drop_tol = 0.0) const;
  Eigen::MatrixXd to_matrix(const std::vector<PolyForm>& forms) const;

 private:
  int m_dim, m_k, m_maxdeg, m_ncomp, m_nmon;
  std::vector<Exponents> m_monomials;
  std::vector<int> m_lookup;  // dense index over (maxdeg+1)^dim exponent grid
  int lookup(const Exponents& a) const;
};

}  // namespace feqi
