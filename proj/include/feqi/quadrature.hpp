#pragma once

#include <Eigen/Dense>

#include <vector>

namespace feqi {

/// Point set with weights; points are stored column-wise.
struct QuadratureRule {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Collapsed Gauss-Jacobi (conical product) rule on the reference d-simplex,
/// exact for polynomials of total degree <= order, positive weights summing
/// to 1/d!. Cached; thread-safe.
const QuadratureRule& simplex_rule(int dim, int order);

/// Grundmann-Moeller rule with the same exactness (mixed-sign weights).
const QuadratureRule& grundmann_moeller_rule(int dim, int order);

/// Principal lattice {j/m : |j| <= m} of the reference simplex, used for sup-norm sampling
/// (weights are all 1).
const QuadratureRule& simplex_lattice(int dim, int m);

/// Gauss-Legendre rule with n points on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Gauss-Jacobi rule with n points on [0, 1] for the weight (1 - u)^alpha.
QuadratureRule gauss_jacobi(int n, int alpha);

/// Product rule on the unit ball in R^dim (dim = 1, 2, 3) with `radial`
/// radial nodes; exact for polynomials of degree < min(2*radial, angular).
const QuadratureRule& unit_ball_rule(int dim, int radial, int angular);

}  // namespace feqi
