#include "feqi/error.hpp"
#include "feqi/interp.hpp"
#include "feqi/quadrature.hpp"
#include "feqi/targets.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace feqi;

namespace {

struct Case {
  Family family;
  int r, k;
};

// d of a sampled form as a sampled form of one degree higher
SampledForm derivative_of(const SampledForm& w) {
  SampledForm d;
  d.n = w.n;
  d.k = w.k + 1;
  d.value = w.exterior_derivative;
  d.name = "d" + w.name;
  return d;
}

Eigen::VectorXd random_vector(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = U(rng);
  return v;
}

double slope(const std::vector<double>& h, const std::vector<double>& e) {
  const int m = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST(Smoother, InscribedBallOfReferenceTriangle) {
  Eigen::MatrixXd X(2, 3);
  X << 0, 1, 0, 0, 0, 1;
  const auto mesh = SimplicialComplex::build(X, {{0, 1, 2}});
  const Ball b = inscribed_ball(mesh, 0);
  const double r = 1.0 / (2.0 + std::sqrt(2.0));
  EXPECT_NEAR(b.radius, r, 1e-14);
  EXPECT_NEAR(b.center(0), r, 1e-14);
  EXPECT_NEAR(b.center(1), r, 1e-14);
  EXPECT_NEAR(averaging_ball(mesh, {0, 1}).radius, 0.9 * r, 1e-14);
}

TEST(Smoother, ReproducesPolynomials) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 3; ++n)
    for (int r = 0; r <= 3; ++r)
      for (int k = 0; k <= n; ++k) {
        const PolyForm p = feqi::testing::random_form(n, k, r, rng);
        const SampledForm w = SampledForm::from_polyform(p);
        Ball ball;
        ball.center = Eigen::VectorXd::Constant(n, 0.4);
        ball.radius = 0.15;
        const AveragedTaylor P = averaged_taylor(w, ball, r);
        for (int s = 0; s < 10; ++s) {
          const Eigen::VectorXd x = ball.center + 0.3 * random_vector(n, rng);
          EXPECT_LT((P.eval(x.data()) - w.eval(x.data())).cwiseAbs().maxCoeff(), 1e-8) << n << r << k;
        }
      }
}

TEST(Smoother, ConstantFormIsExact) {
  const auto mesh = unit_domain(2, 1, 1);
  const SampledForm w = SampledForm::from_polyform(PolyForm::constant(2, 2.5));
  const AveragedTaylor P = averaged_taylor(w, mesh, {0, 4}, 2);
  const PolyForm local = P.on_cell(mesh, P.ball.cell);
  EXPECT_NEAR(local.component(0).coefficient({0, 0, 0}), 2.5, 1e-12);
  EXPECT_LT((local - PolyForm::constant(2, 2.5)).max_abs_coef(), 1e-12);
}

TEST(Smoother, CommutesWithExteriorDerivative) {
  const auto mesh = unit_domain(2, 1, 1);
  for (int k = 0; k <= 1; ++k) {
    const SampledForm w = feqi::testing::smooth_form_2d(k);
    for (int r = 1; r <= 3; ++r)
      for (int v = 0; v < mesh.num_simplices(0); ++v) {
        const AveragedTaylor P = averaged_taylor(w, mesh, {0, v}, r);
        const AveragedTaylor Q = averaged_taylor(derivative_of(w), P.ball, r - 1);
        const int c = P.ball.cell;
        EXPECT_LT((P.on_cell(mesh, c).d() - Q.on_cell(mesh, c)).max_abs_coef(), 1e-9) << k << r << v;
      }
  }
}

TEST(Smoother, PatchErrorDecaysAtOrderRPlusOne) {
  const SampledForm w = manufactured_target("trig", {2, 1, 1, 0});
  for (int r = 1; r <= 2; ++r) {
    std::vector<double> h, e;
    for (int level = 2; level <= 5; ++level) {
      const auto mesh = unit_domain(2, 1, level);
      // the vertex at (0.5, 0.5)
      int v = 0;
      for (int i = 0; i < mesh.num_vertices(); ++i)
        if ((mesh.vertex(i) - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-12) v = i;
      const AveragedTaylor P = averaged_taylor(w, mesh, {0, v}, r);
      const auto& cells = mesh.containing_cells({0, v});
      std::vector<PolyForm> local(mesh.num_cells(), PolyForm(2, 1));
      for (int c : cells) local[c] = P.on_cell(mesh, c);
      const auto all = cell_errors(mesh, w, local, 2.0, 2 * r + 6);
      std::vector<double> patch;
      double area = 0.0;
      for (int c : cells) {
        patch.push_back(all[c]);
        area += mesh.volume({2, c});
      }
      // root-mean-square error, so the shrinking patch does not add h^{n/2}
      h.push_back(mesh.h_max());
      e.push_back(combine_norms(patch, 2.0) / std::sqrt(area));
    }
    // the coarsest level is preasymptotic and left out of the fit
    h.erase(h.begin());
    e.erase(e.begin());
    EXPECT_NEAR(slope(h, e), r + 1, 0.15) << "r=" << r;
  }
}

TEST(CellProjection, IdempotentOnLocalSpace) {
  const auto mesh = unit_domain(3, 1, 0);
  std::mt19937_64 rng(5);
  for (Case c : {Case{Family::Full, 1, 0}, Case{Family::Trimmed, 1, 1}, Case{Family::Full, 2, 1},
                 Case{Family::Trimmed, 2, 2}, Case{Family::Full, 1, 2}, Case{Family::Trimmed, 2, 3}}) {
    const CellProjection P(mesh, 2, c.family, c.r, c.k);
    PolyForm w(3, c.k);
    for (const auto& b : P.basis()) w += b * random_vector(1, rng)(0);
    EXPECT_LT((P.apply(w) - w).max_abs_coef(), 1e-10);
    const SampledForm ws = piecewise_form(std::make_shared<const SimplicialComplex>(mesh),
                                          std::vector<PolyForm>(mesh.num_cells(), w), "w");
    EXPECT_LT((P.apply(ws) - w).max_abs_coef(), 1e-10);
  }
}

TEST(CellProjection, ClosedFormsGetThePlainProjection) {
  // omega = d(sin x e^y) is closed, so Pi_T is the L2 projection onto closed local forms
  const auto mesh = unit_domain(2, 1, 0);
  const SampledForm u = feqi::testing::smooth_form_2d(0);
  const SampledForm w = derivative_of(u);
  SampledForm wd = w;
  wd.exterior_derivative = [](const double*, double* o) { o[0] = 0.0; };
  for (Family f : {Family::Full, Family::Trimmed}) {
    const CellProjection P(mesh, 1, f, 2, 1);
    const PolyForm out = P.apply(wd);
    EXPECT_LT(out.d().max_abs_coef(), 1e-10);
    // the residual is L2-orthogonal to the closed local forms
    std::vector<PolyForm> dbasis;
    for (const auto& b : P.basis()) dbasis.push_back(b.d());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(FormCoordinates(2, 2, 2).to_matrix(dbasis));
    const Eigen::MatrixXd ker = lu.kernel();
    std::vector<PolyForm> closed;
    for (int j = 0; j < ker.cols(); ++j) {
      PolyForm z(2, 1);
      for (int i = 0; i < ker.rows(); ++i) z += P.basis()[i] * ker(i, j);
      closed.push_back(z);
    }
    ASSERT_GT(closed.size(), 0u);
    const auto errs = cell_errors(mesh, wd, std::vector<PolyForm>(mesh.num_cells(), out), 2.0, 10);
    const double base = errs[1];
    for (const auto& z : closed)
      for (double eps : {1e-3, -1e-3}) {
        const auto perturbed = cell_errors(mesh, wd, std::vector<PolyForm>(mesh.num_cells(), out + z * eps), 2.0, 10);
        EXPECT_GE(perturbed[1], base - 1e-12);
      }
  }
}

TEST(CellProjection, ExteriorDerivativeIsBestApproximation) {
  const auto mesh = unit_domain(2, 1, 0);
  for (int k = 0; k <= 1; ++k)
    for (Case c : {Case{Family::Full, 1, k}, Case{Family::Trimmed, 2, k}, Case{Family::Full, 2, k}}) {
      const SampledForm w = feqi::testing::smooth_form_2d(k);
      const int order = 2 * c.r + 4;
      const CellProjection P(mesh, 0, c.family, c.r, c.k, order);
      const PolyForm out = P.apply(w);
      std::vector<PolyForm> local(mesh.num_cells(), out);
      const double got = cell_errors(mesh, w, local, 2.0, order, true)[0];
      // oracle: weighted least squares of dw against d(basis) at the quadrature nodes
      const auto frame = cell_frame(mesh, 0);
      const auto& rule = simplex_rule(2, order);
      const int nd = num_components(2, k + 1);
      const int N = static_cast<int>(P.basis().size());
      Eigen::MatrixXd A(nd * rule.size(), N);
      Eigen::VectorXd b(nd * rule.size());
      for (int q = 0; q < rule.size(); ++q) {
        const double sw = std::sqrt(rule.weights(q) * std::abs(frame.det));
        const Eigen::VectorXd x = frame.point(rule.points.col(q).data());
        b.segment(q * nd, nd) = sw * w.eval_d(x.data());
        for (int j = 0; j < N; ++j)
          A.block(q * nd, j, nd, 1) = sw * frame.to_cartesian[k + 1] * P.basis()[j].d().evaluate(rule.points.col(q).data());
      }
      const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(b);
      const double best = (A * sol - b).norm();
      EXPECT_NEAR(got, best, 1e-10) << to_string(c.family) << c.r << k;
    }
}

TEST(CellProjection, NeedsExteriorDerivative) {
  const auto mesh = unit_domain(2, 1, 0);
  SampledForm w = feqi::testing::smooth_form_2d(1);
  w.exterior_derivative = nullptr;
  const CellProjection P(mesh, 0, Family::Trimmed, 1, 1);
  try {
    P.apply(w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingExteriorDerivative);
  }
  // top-degree forms need no derivative
  w = feqi::testing::smooth_form_2d(2);
  w.exterior_derivative = nullptr;
  EXPECT_NO_THROW(CellProjection(mesh, 0, Family::Trimmed, 1, 2).apply(w));
}

TEST(Interpolants, ReproduceGlobalFiniteElementForms) {
  std::mt19937_64 rng(11);
  std::vector<SimplicialComplex> meshes{unit_domain(2, 1, 1), unit_domain(3, 1, 0)};
  for (const auto& mesh : meshes) {
    const int n = mesh.dim();
    const auto U = BoundarySubcomplex::full_boundary(mesh);
    const auto none = BoundarySubcomplex::empty(mesh);
    const auto anchors = choose_anchors(mesh, none);
    const auto anchors_U = choose_anchors(mesh, U);
    for (Case c : {Case{Family::Full, 1, 0}, Case{Family::Full, 2, 0}, Case{Family::Trimmed, 1, 1},
                   Case{Family::Full, 1, 1}, Case{Family::Trimmed, 2, n - 1}, Case{Family::Trimmed, 1, n}}) {
      const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
      const Eigen::VectorXd a = random_vector(sys.size(), rng);
      const SampledForm u = fe_form(sys.space(), sys.to_geometric(a));
      const double tag = n * 100 + c.r * 10 + c.k;
      EXPECT_LT((clement(u, sys).dofs - a).cwiseAbs().maxCoeff(), 1e-8) << tag;
      EXPECT_LT((scott_zhang(u, sys, anchors, none).dofs - a).cwiseAbs().maxCoeff(), 1e-8) << tag;

      Eigen::VectorXd b = a;
      for (int g = 0; g < sys.size(); ++g)
        if (U.contains(sys.space().owner(g))) b(g) = 0.0;
      const SampledForm ub = fe_form(sys.space(), sys.to_geometric(b));
      EXPECT_LT((clement_bc(ub, sys, U).dofs - b).cwiseAbs().maxCoeff(), 1e-8) << tag;
      const auto sz = scott_zhang(ub, sys, anchors_U, U);
      EXPECT_LT((sz.dofs - b).cwiseAbs().maxCoeff(), 1e-8) << tag;
      EXPECT_LT(sz.max_zeroed, 1e-8) << tag;
    }
  }
}

TEST(Interpolants, ClementReproducesGlobalPolynomials) {
  const auto mesh = unit_domain(2, 1, 1);
  for (int r = 1; r <= 3; ++r)
    for (int k = 0; k <= 1; ++k) {
      const auto sys = build_biorthogonal(mesh, Family::Full, r, k);
      const SampledForm w = manufactured_target("poly", {2, k, r, 4});
      const auto res = clement(w, sys);
      const double err = combine_norms(cell_errors(mesh, w, res.local, 2.0, 2 * r + 2), 2.0);
      EXPECT_LT(err, 1e-8) << r << k;
    }
}

TEST(Interpolants, ClementBcWithoutBoundaryIsClement) {
  const auto mesh = unit_domain(2, 1, 1);
  const auto sys = build_biorthogonal(mesh, Family::Trimmed, 2, 1);
  const SampledForm w = manufactured_target("trig", {2, 1, 1, 0});
  const auto a = clement(w, sys);
  const auto b = clement_bc(w, sys, BoundarySubcomplex::empty(mesh));
  EXPECT_EQ((a.dofs - b.dofs).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Interpolants, ScottZhangIsIdempotent) {
  const auto mesh = unit_domain(2, 1, 1);
  const auto anchors = choose_anchors(mesh, BoundarySubcomplex::empty(mesh));
  const auto none = BoundarySubcomplex::empty(mesh);
  for (Case c : {Case{Family::Full, 2, 0}, Case{Family::Trimmed, 1, 1}, Case{Family::Full, 2, 1}}) {
    const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
    const SampledForm w = manufactured_target("trig", {2, c.k, 1, 0});
    const auto once = scott_zhang(w, sys, anchors, none);
    const auto twice = scott_zhang(fe_form(sys.space(), once.coefficients), sys, anchors, none);
    EXPECT_LT((once.dofs - twice.dofs).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Interpolants, BoundaryConditionsArePreserved) {
  const auto mesh = unit_domain(2, 1, 2);
  const auto U = BoundarySubcomplex::full_boundary(mesh);
  const auto anchors = choose_anchors(mesh, U);
  for (Case c : {Case{Family::Full, 1, 0}, Case{Family::Trimmed, 1, 1}, Case{Family::Full, 2, 1}}) {
    const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
    const SampledForm w = manufactured_target("bc_trig", {2, c.k, 1, 0});
    const auto a = clement_bc(w, sys, U);
    const auto b = scott_zhang(w, sys, anchors, U);
    EXPECT_LT(b.max_zeroed, 1e-6);
    EXPECT_FALSE(b.zeroed.empty());
    for (const auto* res : {&a, &b})
      for (int cell = 0; cell < mesh.num_cells(); ++cell)
        for (int m = c.k; m < 2; ++m)
          for (Mask F : subsets(3, m + 1))
            if (U.contains(mesh.cell_face(cell, F))) EXPECT_LT(res->local[cell].trace(F).max_abs_coef(), 1e-9);
  }
}

TEST(Interpolants, ClementIsLocal) {
  // changing omega away from the cells touching T leaves the result on T unchanged
  const auto mesh = unit_domain(2, 1, 2);
  auto shared = std::make_shared<const SimplicialComplex>(mesh);
  const auto sys = build_biorthogonal(mesh, Family::Full, 2, 1);
  const SampledForm w = manufactured_target("trig", {2, 1, 1, 0});
  const int T = 0;
  std::vector<char> near(mesh.num_cells(), 0);
  for (int v : mesh.vertices_of({2, T}))
    for (int c : mesh.containing_cells({0, mesh.find({v})})) near[c] = 1;
  std::mt19937_64 rng(2);
  std::vector<PolyForm> bump(mesh.num_cells(), PolyForm(2, 1));
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (!near[c]) bump[c] = feqi::testing::random_form(2, 1, 2, rng);
  const SampledForm extra = piecewise_form(shared, bump, "extra");
  SampledForm w2 = w;
  w2.value = [w, extra](const double* x, double* out) {
    double a[2], b[2];
    w.value(x, a);
    extra.value(x, b);
    out[0] = a[0] + b[0];
    out[1] = a[1] + b[1];
  };
  const auto r1 = clement(w, sys), r2 = clement(w2, sys);
  EXPECT_LT((r1.local[T] - r2.local[T]).max_abs_coef(), 1e-12);
  EXPECT_GT((r1.dofs - r2.dofs).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Interpolants, TopDegreeNeedsNoFacetMachinery) {
  const auto mesh = unit_domain(2, 1, 1);
  const auto none = BoundarySubcomplex::empty(mesh);
  const auto anchors = choose_anchors(mesh, none);
  const auto sys = build_biorthogonal(mesh, Family::Trimmed, 2, 2);
  SampledForm w = feqi::testing::smooth_form_2d(2);
  w.exterior_derivative = nullptr;
  const auto sz = scott_zhang(w, sys, anchors, none);
  const auto cl = clement(w, sys);
  EXPECT_EQ(sz.dofs.size(), sys.size());
  EXPECT_LT((sz.dofs - cl.dofs).cwiseAbs().maxCoeff(), 5e-2);
}

TEST(Interpolants, ScottZhangNeedsExteriorDerivative) {
  const auto mesh = unit_domain(2, 1, 0);
  const auto none = BoundarySubcomplex::empty(mesh);
  const auto anchors = choose_anchors(mesh, none);
  const auto sys = build_biorthogonal(mesh, Family::Trimmed, 1, 1);
  SampledForm w = feqi::testing::smooth_form_2d(1);
  w.exterior_derivative = nullptr;
  try {
    scott_zhang(w, sys, anchors, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingExteriorDerivative);
  }
}
