#include "feqi/exterior.hpp"

#include "feqi/error.hpp"
#include "feqi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace feqi {

Eigen::VectorXd SampledForm::eval(const double* x) const {
  Eigen::VectorXd out(num_components(n, k));
  value(x, out.data());
  return out;
}

Eigen::VectorXd SampledForm::eval_d(const double* x) const {
  if (!has_d()) throw Error(ErrorCode::MissingExteriorDerivative, "form '" + name + "' has no exterior derivative");
  Eigen::VectorXd out(num_components(n, k + 1));
  exterior_derivative(x, out.data());
  return out;
}

SampledForm SampledForm::zero(int n, int k) {
  SampledForm w;
  w.n = n;
  w.k = k;
  const int nc = num_components(n, k), nd = num_components(n, k + 1);
  w.value = [nc](const double*, double* out) { std::fill(out, out + nc, 0.0); };
  w.exterior_derivative = [nd](const double*, double* out) { std::fill(out, out + nd, 0.0); };
  w.name = "zero";
  return w;
}

SampledForm SampledForm::from_polyform(const PolyForm& cartesian) {
  SampledForm w;
  w.n = cartesian.dim();
  w.k = cartesian.degree();
  const PolyForm dw = cartesian.d();
  w.value = [cartesian](const double* x, double* out) {
    const auto v = cartesian.evaluate(x);
    std::copy(v.data(), v.data() + v.size(), out);
  };
  w.exterior_derivative = [dw](const double* x, double* out) {
    const auto v = dw.evaluate(x);
    std::copy(v.data(), v.data() + v.size(), out);
  };
  w.name = "polynomial";
  return w;
}

double check_exterior_derivative(const SampledForm& w, int samples, double step, std::mt19937_64& rng) {
  if (!w.has_d()) throw Error(ErrorCode::MissingExteriorDerivative, "no exterior derivative to check");
  if (w.k == w.n) return 0.0;
  std::uniform_real_distribution<double> U(0.05, 0.95);
  const auto& I = subsets(w.n, w.k);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(w.n);
    for (int i = 0; i < w.n; ++i) x(i) = U(rng);
    Eigen::VectorXd fd = Eigen::VectorXd::Zero(num_components(w.n, w.k + 1));
    for (int j = 0; j < w.n; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += step;
      xm(j) -= step;
      const Eigen::VectorXd dj = (w.eval(xp.data()) - w.eval(xm.data())) / (2.0 * step);
      for (std::size_t c = 0; c < I.size(); ++c) {
        const int sg = wedge_sign(Mask(1) << j, I[c]);
        if (sg != 0) fd(subset_rank(w.n, I[c] | (Mask(1) << j))) += sg * dj(c);
      }
    }
    worst = std::max(worst, (fd - w.eval_d(x.data())).cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::VectorXd CellFrame::point(const double* t) const {
  return origin + E * Eigen::Map<const Eigen::VectorXd>(t, E.cols());
}

Eigen::MatrixXd pullback_matrix(const Eigen::MatrixXd& E, int k) {
  return compound(E, k).transpose();
}

CellFrame cell_frame(const SimplicialComplex& mesh, int cell) {
  const int n = mesh.dim();
  const auto g = mesh.geometry({n, cell});
  CellFrame f;
  f.origin = g.origin;
  f.E = g.E;
  f.Einv = g.E.inverse();
  f.det = g.E.determinant();
  for (int k = 0; k <= n; ++k) {
    f.to_cartesian.push_back(compound(f.Einv, k).transpose());
    f.to_local.push_back(compound(f.E, k).transpose());
  }
  return f;
}

PolyForm to_cartesian(const PolyForm& local, const CellFrame& frame) {
  return local.pullback(frame.Einv, -frame.Einv * frame.origin);
}

PolyForm to_local(const PolyForm& cartesian, const SimplicialComplex& mesh, SimplexRef s) {
  const auto g = mesh.geometry(s);
  return cartesian.pullback(g.E, g.origin);
}

double integrate_poly(const PolyForm& w) { return w.integrate(); }

double integrate_poly_on_cell(const SimplicialComplex& mesh, int cell, const PolyForm& w) {
  return mesh.cell_sign(cell) * w.integrate();
}

double integrate_pairing(const SimplicialComplex& mesh, SimplexRef s, const PolyForm& eta,
                         const SampledForm& omega, int order) {
  if (!omega.has_trace && s.dim < mesh.dim()) {
    throw Error(ErrorCode::TraceUnavailable, "form '" + omega.name + "' has no trace on lower-dimensional simplices");
  }
  const int m = s.dim;
  if (eta.dim() != m || eta.degree() + omega.k != m) {
    throw Error(ErrorCode::DegreeMismatch, "pairing degrees do not add up to the simplex dimension");
  }
  const auto g = mesh.geometry(s);
  const Eigen::MatrixXd P = pullback_matrix(g.E, omega.k);
  const auto& rule = simplex_rule(m, order);
  const auto& I = subsets(m, eta.degree());
  const auto& J = subsets(m, omega.k);
  double total = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double* t = rule.points.col(q).data();
    const Eigen::VectorXd x = g.origin + g.E * rule.points.col(q);
    const Eigen::VectorXd wl = P * omega.eval(x.data());
    const Eigen::VectorXd e = eta.evaluate(t);
    double v = 0.0;
    for (std::size_t a = 0; a < I.size(); ++a)
      for (std::size_t b = 0; b < J.size(); ++b) {
        const int sg = wedge_sign(I[a], J[b]);
        if (sg != 0) v += sg * e(a) * wl(b);
      }
    total += rule.weights(q) * v;
  }
  return total;
}

std::vector<double> cell_lp_norms(const SimplicialComplex& mesh, const std::vector<int>& cells, int k,
                                  const CellField& field, double p, int order) {
  const int n = mesh.dim();
  const auto& rule = p <= 0.0 ? simplex_lattice(n, std::max(order, 1)) : simplex_rule(n, order);
  const int nc = num_components(n, k);
  std::vector<double> out;
  out.reserve(cells.size());
  Eigen::VectorXd val(nc), x(n);
  for (int t : cells) {
    const auto g = mesh.geometry({n, t});
    const double jac = std::abs(g.E.determinant());
    double acc = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      for (int i = 0; i < n; ++i) {
        double xi = g.origin(i);
        for (int j = 0; j < n; ++j) xi += g.E(i, j) * rule.points(j, q);
        x(i) = xi;
      }
      field(t, rule.points.col(q).data(), x.data(), val.data());
      const double a = val.norm();
      if (p <= 0.0) {
        acc = std::max(acc, a);
      } else {
        acc += rule.weights(q) * jac * (p == 2.0 ? a * a : std::pow(a, p));
      }
    }
    out.push_back(p <= 0.0 ? acc : std::pow(acc, 1.0 / p));
  }
  return out;
}

double combine_norms(const std::vector<double>& per_cell, double p) {
  if (p <= 0.0) return per_cell.empty() ? 0.0 : *std::max_element(per_cell.begin(), per_cell.end());
  double s = 0.0;
  for (double v : per_cell) s += std::pow(v, p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(const SimplicialComplex& mesh, const std::vector<int>& cells, const SampledForm& w, double p,
               int order) {
  CellField f = [&w](int, const double*, const double* x, double* out) { w.value(x, out); };
  return combine_norms(cell_lp_norms(mesh, cells, w.k, f, p, order), p);
}

double lp_norm(const SimplicialComplex& mesh, int cell, const PolyForm& local, double p, int order) {
  const CellFrame frame = cell_frame(mesh, cell);
  const Eigen::MatrixXd& C = frame.to_cartesian[local.degree()];
  CellField f = [&local, &C](int, const double* t, const double*, double* out) {
    const Eigen::VectorXd v = C * local.evaluate(t);
    std::copy(v.data(), v.data() + v.size(), out);
  };
  return cell_lp_norms(mesh, {cell}, local.degree(), f, p, order).front();
}

Eigen::MatrixXd cartesian_mass_matrix(const SimplicialComplex& mesh, int cell, const std::vector<PolyForm>& forms,
                                      int order) {
  const int N = static_cast<int>(forms.size());
  if (N == 0) return Eigen::MatrixXd(0, 0);
  const CellFrame frame = cell_frame(mesh, cell);
  const Eigen::MatrixXd& C = frame.to_cartesian[forms.front().degree()];
  const auto& rule = simplex_rule(mesh.dim(), order);
  const double jac = std::abs(frame.det);
  Eigen::MatrixXd V(C.rows(), N);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  for (int q = 0; q < rule.size(); ++q) {
    for (int a = 0; a < N; ++a) V.col(a) = C * forms[a].evaluate(rule.points.col(q).data());
    M += rule.weights(q) * jac * V.transpose() * V;
  }
  return M;
}

std::vector<int> all_cells(const SimplicialComplex& mesh) {
  std::vector<int> c(mesh.num_cells());
  std::iota(c.begin(), c.end(), 0);
  return c;
}

}  // namespace feqi
