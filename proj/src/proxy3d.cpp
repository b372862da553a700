#include "feqi/proxy3d.hpp"

#include "feqi/error.hpp"
#include "feqi/targets.hpp"

#include <memory>

namespace feqi {

Eigen::VectorXd ProxyField::eval(const double* x) const {
  Eigen::VectorXd out(size());
  value(x, out.data());
  return out;
}

Eigen::VectorXd proxy_to_form(ProxyKind kind, const Eigen::VectorXd& u) {
  if (kind != ProxyKind::Flux) return u;
  Eigen::VectorXd w(3);
  w << u(2), -u(1), u(0);
  return w;
}

Eigen::VectorXd form_to_proxy(ProxyKind kind, const Eigen::VectorXd& w) {
  if (kind != ProxyKind::Flux) return w;
  Eigen::VectorXd u(3);
  u << w(2), -w(1), w(0);
  return u;
}

namespace {

ProxyKind next(ProxyKind kind) { return static_cast<ProxyKind>(static_cast<int>(kind) + 1); }

int proxy_size(ProxyKind kind) { return kind == ProxyKind::Scalar || kind == ProxyKind::Density ? 1 : 3; }

}  // namespace

SampledForm to_form(const ProxyField& u) {
  SampledForm w;
  w.n = 3;
  w.k = u.k();
  w.name = u.name;
  const ProxyKind kind = u.kind;
  const int m = u.size();
  w.value = [f = u.value, kind, m](const double* x, double* out) {
    Eigen::VectorXd v(m);
    f(x, v.data());
    const Eigen::VectorXd c = proxy_to_form(kind, v);
    std::copy(c.data(), c.data() + c.size(), out);
  };
  if (kind == ProxyKind::Density) {
    w.exterior_derivative = [](const double*, double*) {};
  } else if (u.derivative) {
    const ProxyKind dk = next(kind);
    const int dm = proxy_size(dk);
    w.exterior_derivative = [f = u.derivative, dk, dm](const double* x, double* out) {
      Eigen::VectorXd v(dm);
      f(x, v.data());
      const Eigen::VectorXd c = proxy_to_form(dk, v);
      std::copy(c.data(), c.data() + c.size(), out);
    };
  }
  return w;
}

ProxyField from_form(const SampledForm& omega) {
  if (omega.n != 3) throw Error(ErrorCode::WrongDimension, "vector proxies need forms on R^3");
  ProxyField u;
  u.kind = static_cast<ProxyKind>(omega.k);
  u.name = omega.name;
  const ProxyKind kind = u.kind;
  const int nc = num_components(3, omega.k);
  u.value = [f = omega.value, kind, nc](const double* x, double* out) {
    Eigen::VectorXd c(nc);
    f(x, c.data());
    const Eigen::VectorXd v = form_to_proxy(kind, c);
    std::copy(v.data(), v.data() + v.size(), out);
  };
  if (kind != ProxyKind::Density && omega.has_d()) {
    const ProxyKind dk = next(kind);
    const int nd = num_components(3, omega.k + 1);
    u.derivative = [f = omega.exterior_derivative, dk, nd](const double* x, double* out) {
      Eigen::VectorXd c(nd);
      f(x, c.data());
      const Eigen::VectorXd v = form_to_proxy(dk, c);
      std::copy(v.data(), v.data() + v.size(), out);
    };
  }
  return u;
}

ProxySpace proxy_space(const std::string& name) {
  if (name == "ned1") return {Family::Trimmed, 1};
  if (name == "ned2") return {Family::Full, 1};
  if (name == "rt") return {Family::Trimmed, 2};
  if (name == "bdm") return {Family::Full, 2};
  throw Error(ErrorCode::InvalidConfig, "unknown space '" + name + "' (expected ned1, ned2, rt or bdm)");
}

GlobalFESpace space_by_name(const std::string& name, int r, const SimplicialComplex& mesh,
                            const BoundarySubcomplex& U) {
  if (mesh.dim() != 3) throw Error(ErrorCode::WrongDimension, "named vector spaces live on tetrahedral meshes");
  const ProxySpace s = proxy_space(name);
  return GlobalFESpace(mesh, U, s.family, r, s.k);
}

ProxyReport proxy_interpolate(const ProxyField& u, const std::string& name, int r, const SimplicialComplex& mesh,
                              const BoundarySubcomplex& U, int order) {
  if (mesh.dim() != 3) throw Error(ErrorCode::WrongDimension, "named vector spaces live on tetrahedral meshes");
  const ProxySpace s = proxy_space(name);
  if (u.k() != s.k) throw Error(ErrorCode::DegreeMismatch, "field kind does not match the space '" + name + "'");
  if (order <= 0) order = 2 * r + 4;
  const SampledForm w = to_form(u);
  const auto sys = build_biorthogonal(mesh, s.family, r, s.k);
  const auto anchors = choose_anchors(mesh, U);
  ProxyReport rep;
  rep.interpolant = scott_zhang(w, sys, anchors, U);
  rep.field = from_form(piecewise_form(std::make_shared<const SimplicialComplex>(mesh), rep.interpolant.local, name));
  rep.cell_error = cell_errors(mesh, w, rep.interpolant.local, 2.0, order);
  rep.cell_derror = cell_errors(mesh, w, rep.interpolant.local, 2.0, order, true);
  rep.error = combine_norms(rep.cell_error, 2.0);
  rep.derror = combine_norms(rep.cell_derror, 2.0);
  return rep;
}

}  // namespace feqi
