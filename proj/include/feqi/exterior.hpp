#pragma once

#include "feqi/mesh.hpp"
#include "feqi/polyform.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace feqi {

/// Number of components of a k-form on R^n.
inline int num_components(int n, int k) { return k <= n ? static_cast<int>(binomial(n, k)) : 0; }

/// Non-polynomial k-form on R^n given by Cartesian coefficient callables.
/// Components follow subsets(n, k) ordering of dx_I.
struct SampledForm {
  using Fn = std::function<void(const double* x, double* out)>;

  int n = 0;
  int k = 0;
  Fn value;
  Fn exterior_derivative;  // optional, components of d omega
  bool has_trace = true;   // false for forms without a meaningful trace
  std::string name;

  bool has_d() const { return static_cast<bool>(exterior_derivative); }
  Eigen::VectorXd eval(const double* x) const;
  Eigen::VectorXd eval_d(const double* x) const;

  static SampledForm zero(int n, int k);
  /// Wraps a Cartesian polynomial form (variables x_1..x_n); d is exact.
  static SampledForm from_polyform(const PolyForm& cartesian);
};

/// Max deviation between the supplied d and central differences of the
/// coefficients at `samples` random points of the unit box.
double check_exterior_derivative(const SampledForm& w, int samples, double step, std::mt19937_64& rng);

/// Affine frame x = origin + E t of an n-cell with cached compound matrices.
struct CellFrame {
  Eigen::VectorXd origin;
  Eigen::MatrixXd E;
  Eigen::MatrixXd Einv;
  double det = 0.0;
  std::vector<Eigen::MatrixXd> to_cartesian;  // [k]: t-components -> x-components
  std::vector<Eigen::MatrixXd> to_local;      // [k]: x-components -> t-components

  Eigen::VectorXd point(const double* t) const;
};

CellFrame cell_frame(const SimplicialComplex& mesh, int cell);

/// Matrix mapping Cartesian k-form components to the pulled-back components
/// on a simplex parametrised by x = origin + E t.
Eigen::MatrixXd pullback_matrix(const Eigen::MatrixXd& E, int k);

/// Local (cell coordinate) polynomial form -> Cartesian polynomial form.
PolyForm to_cartesian(const PolyForm& local, const CellFrame& frame);
/// Cartesian polynomial form -> local form on the simplex s.
PolyForm to_local(const PolyForm& cartesian, const SimplicialComplex& mesh, SimplexRef s);

/// Integral of a top-degree polynomial form on S (intrinsic orientation,
/// i.e. the orientation of S's ascending vertex order).
double integrate_poly(const PolyForm& w);
/// Ambient-orientation integral of a local top-degree form on an n-cell.
double integrate_poly_on_cell(const SimplicialComplex& mesh, int cell, const PolyForm& w);

/// Integral over S (intrinsic orientation) of eta ^ tr_S(omega), eta a local
/// form on S of degree dim S - k, by simplex quadrature.
double integrate_pairing(const SimplicialComplex& mesh, SimplexRef s, const PolyForm& eta,
                         const SampledForm& omega, int order);

/// Cartesian coefficients of some form at a point of a cell.
using CellField = std::function<void(int cell, const double* t, const double* x, double* out)>;

/// Per-cell L^p norms (p in {1, 2, inf}; pass p <= 0 for inf) of the
/// Euclidean coefficient norm of a k-form field.
std::vector<double> cell_lp_norms(const SimplicialComplex& mesh, const std::vector<int>& cells,
                                  int k, const CellField& field, double p, int order);
/// Combine per-cell norms into the norm over their union.
double combine_norms(const std::vector<double>& per_cell, double p);

double lp_norm(const SimplicialComplex& mesh, const std::vector<int>& cells, const SampledForm& w,
               double p, int order);
/// Norm of a local polynomial form living on one cell.
double lp_norm(const SimplicialComplex& mesh, int cell, const PolyForm& local, double p, int order);

/// L2(T) Gram matrix of local forms measured in the Cartesian metric.
Eigen::MatrixXd cartesian_mass_matrix(const SimplicialComplex& mesh, int cell, const std::vector<PolyForm>& forms,
                                      int order);

std::vector<int> all_cells(const SimplicialComplex& mesh);

constexpr double kInfinity = -1.0;  // p value selecting the max norm

}  // namespace feqi
