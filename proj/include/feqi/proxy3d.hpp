#pragma once

#include "feqi/interp.hpp"

#include <functional>
#include <string>

namespace feqi {

/// Vector-calculus proxies of k-forms on R^3.
enum class ProxyKind { Scalar = 0, Circulation = 1, Flux = 2, Density = 3 };

/// A scalar or vector field read as a k-form (k = kind). `derivative` is
/// grad, curl, div or nothing for densities.
struct ProxyField {
  using Fn = std::function<void(const double* x, double* out)>;
  ProxyKind kind = ProxyKind::Scalar;
  Fn value;
  Fn derivative;
  std::string name;

  int k() const { return static_cast<int>(kind); }
  /// Number of components of the field (1 or 3).
  int size() const { return kind == ProxyKind::Scalar || kind == ProxyKind::Density ? 1 : 3; }
  Eigen::VectorXd eval(const double* x) const;
};

/// Form components (subsets(3, k) order) of a proxy vector, and back.
/// Flux: u1 dx2^dx3 - u2 dx1^dx3 + u3 dx1^dx2.
Eigen::VectorXd proxy_to_form(ProxyKind kind, const Eigen::VectorXd& u);
Eigen::VectorXd form_to_proxy(ProxyKind kind, const Eigen::VectorXd& w);

SampledForm to_form(const ProxyField& u);
/// Throws WrongDimension unless omega lives on R^3.
ProxyField from_form(const SampledForm& omega);

/// ned1 = TRIMMED Lambda^1, ned2 = FULL Lambda^1, rt = TRIMMED Lambda^2,
/// bdm = FULL Lambda^2. Throws InvalidConfig for other names.
struct ProxySpace {
  Family family;
  int k;
};
ProxySpace proxy_space(const std::string& name);

/// Throws WrongDimension unless the mesh is three-dimensional.
GlobalFESpace space_by_name(const std::string& name, int r, const SimplicialComplex& mesh,
                            const BoundarySubcomplex& U);

struct ProxyReport {
  ProxyField field;                 // interpolated proxy field
  InterpolantResult interpolant;
  std::vector<double> cell_error;   // |u - Ju|_{L2(T)}
  std::vector<double> cell_derror;  // |curl/div (u - Ju)|_{L2(T)}
  double error = 0.0;
  double derror = 0.0;
};

/// Scott-Zhang interpolation of a proxy field into the named space.
ProxyReport proxy_interpolate(const ProxyField& u, const std::string& name, int r, const SimplicialComplex& mesh,
                              const BoundarySubcomplex& U, int order = 0);

}  // namespace feqi
