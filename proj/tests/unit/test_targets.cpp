#include "feqi/error.hpp"
#include "feqi/targets.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace feqi;

namespace {

// point of the unit box with coordinate `axis` pinned to `side`
std::vector<double> boundary_point(int n, int axis, double side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = U(rng);
  x[axis] = side;
  return x;
}

}  // namespace

TEST(Targets, BcTrigVanishesOnTheBoundary) {
  std::mt19937_64 rng(1);
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k <= n; ++k) {
      const auto w = manufactured_target("bc_trig", {n, k, 1, 0});
      for (int trial = 0; trial < 50; ++trial) {
        const auto x = boundary_point(n, trial % n, (trial / n) % 2, rng);
        EXPECT_LT(w.eval(x.data()).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  // left edge of the square, dense samples
  const auto w = manufactured_target("bc_trig", {2, 0, 1, 0});
  for (int i = 0; i <= 100; ++i) {
    const double x[2] = {0.0, i / 100.0};
    EXPECT_LT(std::abs(w.eval(x)(0)), 1e-12);
  }
}

TEST(Targets, BcTrigHasNonzeroNormalDerivative) {
  const auto w = manufactured_target("bc_trig", {2, 0, 1, 0});
  double worst = 0.0;
  for (int i = 1; i < 20; ++i) {
    const double x[2] = {0.0, i / 20.0};
    worst = std::max(worst, std::abs(w.eval_d(x)(0)));
  }
  EXPECT_GT(worst, 1e-2);
}

TEST(Targets, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (const char* name : {"trig", "bc_trig", "poly", "zero"}) {
        const auto w = manufactured_target(name, {n, k, 2, 3});
        EXPECT_EQ(w.n, n);
        EXPECT_EQ(w.k, k);
        EXPECT_LT(check_exterior_derivative(w, 20, 1e-5, rng), 1e-6) << name << " n=" << n << " k=" << k;
      }
}

TEST(Targets, PolyIsSeededAndOfDegreeR) {
  const auto a = manufactured_target("poly", {2, 1, 2, 7});
  const auto b = manufactured_target("poly", {2, 1, 2, 7});
  const auto c = manufactured_target("poly", {2, 1, 2, 8});
  const double x[2] = {0.3, 0.6};
  EXPECT_EQ((a.eval(x) - b.eval(x)).norm(), 0.0);
  EXPECT_GT((a.eval(x) - c.eval(x)).norm(), 1e-6);
  // a degree-2 polynomial has vanishing third differences along a line
  const double h = 0.1;
  Eigen::VectorXd third = Eigen::VectorXd::Zero(2);
  const double coef[4] = {-1, 3, -3, 1};
  for (int i = 0; i < 4; ++i) {
    const double y[2] = {0.1 + i * h, 0.2 + 0.5 * i * h};
    third += coef[i] * a.eval(y);
  }
  EXPECT_LT(third.norm(), 1e-12);
}

TEST(Targets, BrokenFeTangentialTraceContinuousAcrossCoarseFacets) {
  for (int n = 2; n <= 3; ++n) {
    const auto coarse = unit_domain(n, 1, 0);
    for (int k = 0; k <= 1; ++k) {
      const auto w = manufactured_target("broken_fe", {n, k, 1, 4});
      double jump = 0.0, djump = 0.0;
      const double eps = 1e-7;
      for (int f = 0; f < coarse.num_simplices(n - 1); ++f) {
        const auto& cells = coarse.containing_cells({n - 1, f});
        if (cells.size() != 2) continue;
        const auto g = coarse.geometry({n - 1, f});
        // facet barycentre and a unit normal
        Eigen::VectorXd x = g.origin + g.E * Eigen::VectorXd::Constant(n - 1, 1.0 / n);
        Eigen::MatrixXd Q = g.E.fullPivHouseholderQr().matrixQ();
        Eigen::VectorXd nu = Q.col(n - 1);
        const Eigen::VectorXd xp = x + eps * nu, xm = x - eps * nu;
        const Eigen::VectorXd vp = w.eval(xp.data()), vm = w.eval(xm.data());
        if (k == 0) {
          jump = std::max(jump, std::abs(vp(0) - vm(0)));
        } else {
          for (int t = 0; t < n - 1; ++t) jump = std::max(jump, std::abs((vp - vm).dot(g.E.col(t))));
        }
        // one-sided normal derivatives of the first coefficient
        const Eigen::VectorXd xpp = x + 1e-3 * nu, xmm = x - 1e-3 * nu;
        const double dp = (w.eval(xpp.data())(0) - vp(0)) / (1e-3 - eps);
        const double dm = (vm(0) - w.eval(xmm.data())(0)) / (1e-3 - eps);
        djump = std::max(djump, std::abs(dp - dm));
      }
      EXPECT_LT(jump, 1e-5) << "n=" << n << " k=" << k;
      EXPECT_GT(djump, 1e-2) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Targets, PiecewiseFormMatchesLocalForms) {
  const auto mesh = unit_domain(2, 1, 1);
  const GlobalFESpace V(mesh, BoundarySubcomplex::empty(mesh), Family::Full, 2, 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd c(V.size());
  for (int i = 0; i < c.size(); ++i) c(i) = U(rng);
  const auto w = fe_form(V, c);
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const CellFrame fr = cell_frame(mesh, cell);
    const double t[2] = {0.2, 0.3};
    const Eigen::VectorXd x = fr.point(t);
    const Eigen::VectorXd expect = fr.to_cartesian[1] * V.restrict(c, cell).evaluate(t);
    EXPECT_LT((w.eval(x.data()) - expect).norm(), 1e-12);
    const Eigen::VectorXd dexpect = fr.to_cartesian[2] * V.restrict(c, cell).d().evaluate(t);
    EXPECT_LT((w.eval_d(x.data()) - dexpect).norm(), 1e-12);
  }
}

TEST(Targets, PiecewiseFormsDoNotShareLookupState) {
  // forms are created and destroyed in turn (addresses may repeat); each
  // lookup must land in a cell of its own mesh
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int round = 0; round < 8; ++round) {
    auto mesh = std::make_shared<const SimplicialComplex>(unit_domain(2, 1, 3 - round % 4));
    std::vector<PolyForm> local;
    for (int c = 0; c < mesh->num_cells(); ++c) local.push_back(PolyForm::constant(2, c));
    const auto w = piecewise_form(mesh, std::move(local), "cell id");
    for (int s = 0; s < 20; ++s) {
      const double x[2] = {U(rng), U(rng)};
      const double v = w.eval(x)(0);
      const int c = static_cast<int>(std::lround(v));
      ASSERT_GE(c, 0);
      ASSERT_LT(c, mesh->num_cells());
      const CellFrame fr = cell_frame(*mesh, c);
      const Eigen::VectorXd t = fr.Einv * (Eigen::Map<const Eigen::VectorXd>(x, 2) - fr.origin);
      EXPECT_GE(std::min(t.minCoeff(), 1.0 - t.sum()), -1e-12);
    }
  }
}

TEST(Targets, Errors) {
  try {
    manufactured_target("gauss", {2, 0, 1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownTarget);
  }
  try {
    manufactured_target("trig", {2, 3, 1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongDimension);
  }
}
