#include "feqi/error.hpp"
#include "feqi/exterior.hpp"
#include "feqi/quadrature.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace feqi;
using feqi::testing::coef_diff;
using feqi::testing::random_form;

TEST(Wedge, BasisProducts) {
  const PolyForm a = PolyForm::dlambda(2, 1).wedge(PolyForm::dlambda(2, 2));
  EXPECT_NEAR(a.component(0).coefficient({0, 0, 0}), 1.0, 1e-15);
  const PolyForm b = PolyForm::dlambda(2, 2).wedge(PolyForm::dlambda(2, 1));
  EXPECT_LT(coef_diff(b, a * -1.0), 1e-15);
}

TEST(Wedge, HandExpansion) {
  const PolyForm l0 = PolyForm::lambda(2, 0), l1 = PolyForm::lambda(2, 1);
  const PolyForm lhs = l0.wedge(PolyForm::dlambda(2, 1)).wedge(l1.wedge(PolyForm::dlambda(2, 2)));
  const PolyForm rhs = (l0.wedge(l1)).wedge(PolyForm::dlambda(2, 1).wedge(PolyForm::dlambda(2, 2)));
  EXPECT_LT(coef_diff(lhs, rhs), 1e-14);
}

TEST(Wedge, GradedAnticommutativity) {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int l = 0; k + l <= n; ++l) {
        const auto a = random_form(n, k, 2, rng), b = random_form(n, l, 2, rng);
        EXPECT_LT(coef_diff(a.wedge(b), b.wedge(a) * ((k * l) % 2 ? -1.0 : 1.0)), 1e-12);
      }
}

TEST(Wedge, Errors) {
  EXPECT_THROW(PolyForm::dlambda(2, 1).wedge(PolyForm::dlambda(3, 1)), Error);
  try {
    PolyForm::dlambda(1, 1).wedge(PolyForm::dlambda(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegreeOverflow);
  }
}

TEST(ExteriorDerivative, Examples) {
  EXPECT_LT(coef_diff(PolyForm::lambda(2, 1).d(), PolyForm::basis_form(2, 0b01)), 1e-15);
  const PolyForm dl0 = PolyForm::lambda(3, 0).d();
  EXPECT_LT(coef_diff(dl0, (PolyForm::basis_form(3, 0b001) + PolyForm::basis_form(3, 0b010) +
                            PolyForm::basis_form(3, 0b100)) * -1.0),
            1e-15);
  const PolyForm w = PolyForm::lambda(2, 1).wedge(PolyForm::dlambda(2, 2));
  EXPECT_LT(coef_diff(w.d(), PolyForm::basis_form(2, 0b11)), 1e-15);
}

TEST(ExteriorDerivative, DSquaredVanishes) {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 0; r <= 4; ++r) {
        const auto w = random_form(n, k, r, rng);
        EXPECT_LT(w.d().d().max_abs_coef(), 1e-12);
      }
}

TEST(ExteriorDerivative, Leibniz) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int l = 0; k + l <= n; ++l) {
        const auto a = random_form(n, k, 3, rng), b = random_form(n, l, 2, rng);
        const PolyForm lhs = a.wedge(b).d();
        PolyForm rhs(n, k + l + 1);
        if (k + l + 1 <= n) rhs = a.d().wedge(b) + a.wedge(b.d()) * ((k % 2) ? -1.0 : 1.0);
        EXPECT_LT(coef_diff(lhs, rhs), 1e-12);
      }
}

TEST(Trace, VanishingCoordinateAndTopDrop) {
  const PolyForm l2 = PolyForm::lambda(2, 2);
  EXPECT_TRUE(l2.trace({0, 1}).is_zero());
  const PolyForm area = PolyForm::dlambda(2, 1).wedge(PolyForm::dlambda(2, 2));
  EXPECT_EQ(area.trace({0, 2}).num_components(), 0);
  EXPECT_THROW(l2.trace({2, 1}), Error);
}

TEST(Trace, LambdaRelabelling) {
  // lambda_j on face {1, 3} of a tetrahedron becomes the face's own coordinates
  const std::vector<int> face{1, 3};
  EXPECT_LT(coef_diff(PolyForm::lambda(3, 1).trace(face), PolyForm::lambda(1, 0)), 1e-15);
  EXPECT_LT(coef_diff(PolyForm::lambda(3, 3).trace(face), PolyForm::lambda(1, 1)), 1e-15);
  EXPECT_TRUE(PolyForm::lambda(3, 0).trace(face).is_zero());
}

TEST(Trace, NaturalityWithDAndWedgeAndFunctoriality) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    for (int n = 2; n <= 3; ++n) {
      for (int k = 0; k < n; ++k) {
        const auto w = random_form(n, k, 3, rng);
        for (Mask f = 1; f < (Mask(1) << (n + 1)); ++f) {
          const auto fv = mask_elements(f);
          if (static_cast<int>(fv.size()) - 1 < k) continue;
          EXPECT_LT(coef_diff(w.trace(fv).d(), w.d().trace(fv)), 1e-12);
          for (Mask g = 1; g < (Mask(1) << fv.size()); ++g) {
            std::vector<int> gv_host, gv_face = mask_elements(g);
            for (int j : gv_face) gv_host.push_back(fv[j]);
            EXPECT_LT(coef_diff(w.trace(fv).trace(gv_face), w.trace(gv_host)), 1e-12);
          }
        }
        const auto v = random_form(n, n - 1 - k, 2, rng);
        const std::vector<int> facet = mask_elements(full_mask(n + 1) & ~Mask(2));
        EXPECT_LT(coef_diff(w.wedge(v).trace(facet), w.trace(facet).wedge(v.trace(facet))), 1e-12);
      }
    }
  }
}

TEST(Koszul, Examples) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const PolyForm k1 = PolyForm::basis_form(2, 0b01).koszul(zero);
  EXPECT_NEAR(k1.component(0).coefficient({1, 0, 0}), 1.0, 1e-15);
  const PolyForm k2 = PolyForm::basis_form(2, 0b11).koszul(zero);
  // x1 dx2 - x2 dx1
  EXPECT_NEAR(k2.component(1).coefficient({1, 0, 0}), 1.0, 1e-15);
  EXPECT_NEAR(k2.component(0).coefficient({0, 1, 0}), -1.0, 1e-15);
}

TEST(Koszul, SquareVanishesAndHomotopy) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 2; n <= 3; ++n) {
    Eigen::VectorXd base(n);
    for (int i = 0; i < n; ++i) base(i) = U(rng);
    for (int k = 1; k <= n; ++k) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto w = random_form(n, k, 3, rng);
        if (k >= 2) {
          EXPECT_LT(w.koszul(base).koszul(base).max_abs_coef(), 1e-12);
        }
      }
      for (int r = 0; r <= 3; ++r) {
        // homogeneous of degree r about `base`: shift a homogeneous form
        PolyForm h(n, k);
        const auto& I = subsets(n, k);
        for (const auto& a : multi_indices_upto(n, r)) {
          if (a[0] + a[1] + a[2] != r) continue;
          for (std::size_t c = 0; c < I.size(); ++c) h.component(c) += Polynomial::monomial(n, a, U(rng));
        }
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
        const PolyForm hb = h.pullback(A, -base);  // h(x - base)
        PolyForm lhs = hb.koszul(base).d();
        if (k < n) lhs += hb.d().koszul(base);
        EXPECT_LT(coef_diff(lhs, hb * double(r + k)), 1e-11);
      }
    }
  }
}

TEST(Koszul, AgreesWithCartesianContraction) {
  // Koszul in local coordinates about the barycentre equals the Cartesian
  // contraction with x - x_bary, pulled back
  std::mt19937_64 rng(6);
  Eigen::MatrixXd E(3, 3);
  E << 1.0, 0.3, -0.2, 0.1, 0.8, 0.4, -0.3, 0.2, 1.1;
  Eigen::VectorXd o(3);
  o << 0.2, -0.1, 0.5;
  CellFrame frame;
  frame.E = E;
  frame.Einv = E.inverse();
  frame.origin = o;
  for (int k = 1; k <= 3; ++k) {
    const auto w = random_form(3, k, 2, rng);
    const Eigen::VectorXd tb = Eigen::VectorXd::Constant(3, 0.25);
    const Eigen::VectorXd xb = o + E * tb;
    const PolyForm cart = to_cartesian(w, frame);
    const PolyForm back = cart.koszul(xb).pullback(E, o);
    EXPECT_LT(coef_diff(back, w.koszul(tb)), 1e-11);
  }
}

TEST(Integrate, BarycentricMonomials) {
  // unit triangle: area 1/2, int lambda_0 = 1/6, int lambda_0 lambda_1 = 1/24
  const PolyForm vol = PolyForm::basis_form(2, 0b11);
  EXPECT_NEAR(vol.integrate(), 0.5, 1e-15);
  EXPECT_NEAR(PolyForm::lambda(2, 0).wedge(vol).integrate(), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(PolyForm::bary_monomial(2, {1, 1, 0}).wedge(vol).integrate(), 1.0 / 24.0, 1e-15);
  EXPECT_THROW(PolyForm::lambda(2, 0).integrate(), Error);
}

TEST(Integrate, MonteCarloCrossCheck) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const PolyForm f = PolyForm::bary_monomial(2, {1, 1, 0});
  double acc = 0.0;
  int inside = 0;
  const int N = 400000;
  for (int i = 0; i < N; ++i) {
    const double t[2] = {U(rng), U(rng)};
    if (t[0] + t[1] > 1.0) continue;
    ++inside;
    acc += f.evaluate(t)(0);
  }
  EXPECT_NEAR(acc / N, 1.0 / 24.0, 5e-4);
  EXPECT_NEAR(double(inside) / N, 0.5, 5e-3);
}

TEST(Quadrature, SimplexRulesExactness) {
  for (int n = 1; n <= 3; ++n) {
    for (int order = 1; order <= 9; ++order)
      for (const QuadratureRule* rp : {&simplex_rule(n, order), &grundmann_moeller_rule(n, order)}) {
      const auto& rule = *rp;
      for (const auto& a : multi_indices_upto(n, order)) {
        double q = 0.0;
        for (int i = 0; i < rule.size(); ++i) {
          double v = rule.weights(i);
          for (int j = 0; j < n; ++j) v *= std::pow(rule.points(j, i), a[j]);
          q += v;
        }
        double exact = 1.0;
        int deg = 0;
        for (int j = 0; j < n; ++j) {
          exact *= factorial(a[j]);
          deg += a[j];
        }
        exact /= factorial(deg + n);
        EXPECT_NEAR(q, exact, 1e-13) << "n=" << n << " order=" << order;
      }
    }
  }
  for (int n = 1; n <= 3; ++n)
    EXPECT_GT(simplex_rule(n, 8).weights.minCoeff(), 0.0);
}

namespace {
// collapsed tensor Gauss oracle on the unit triangle
double nested_gauss_triangle(const std::function<double(double, double)>& f, int m) {
  const auto gx = gauss_legendre(m, 0.0, 1.0);
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = gx.points(0, i);
    const auto gy = gauss_legendre(m, 0.0, 1.0 - x);
    for (int j = 0; j < m; ++j) s += gx.weights(i) * gy.weights(j) * f(x, gy.points(0, j));
  }
  return s;
}
}  // namespace

TEST(Quadrature, SmoothIntegrandAgainstNestedGauss) {
  const double pi = std::numbers::pi;
  auto f = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  const double oracle = nested_gauss_triangle(f, 30);
  double prev_err = 1e300;
  for (int order : {6, 10, 14}) {
    const auto& rule = simplex_rule(2, order);
    double q = 0.0;
    for (int i = 0; i < rule.size(); ++i) q += rule.weights(i) * f(rule.points(0, i), rule.points(1, i));
    const double err = std::abs(q - oracle);
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-8);
}

TEST(Quadrature, GaussLegendreAndBall) {
  const auto g = gauss_legendre(5, 0.0, 2.0);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += g.weights(i) * std::pow(g.points(0, i), 9);
  EXPECT_NEAR(s, std::pow(2.0, 10) / 10.0, 1e-10);
  const double pi = std::numbers::pi;
  const auto& b2 = unit_ball_rule(2, 6, 12);
  EXPECT_NEAR(b2.weights.sum(), pi, 1e-13);
  const auto& b3 = unit_ball_rule(3, 6, 12);
  EXPECT_NEAR(b3.weights.sum(), 4.0 * pi / 3.0, 1e-13);
  double z2 = 0.0;
  for (int i = 0; i < b3.size(); ++i) z2 += b3.weights(i) * b3.points(2, i) * b3.points(2, i);
  EXPECT_NEAR(z2, 4.0 * pi / 15.0, 1e-13);
}

TEST(LpNorm, ExamplesAndHomogeneity) {
  const auto mesh = unit_square(1);
  const auto cells = all_cells(mesh);
  EXPECT_NEAR(lp_norm(mesh, cells, SampledForm::zero(2, 1), 2.0, 4), 0.0, 1e-15);
  SampledForm dx;
  dx.n = 2;
  dx.k = 1;
  dx.value = [](const double*, double* out) {
    out[0] = 1.0;
    out[1] = 0.0;
  };
  EXPECT_NEAR(lp_norm(mesh, cells, dx, 2.0, 2), 1.0, 1e-14);
  EXPECT_NEAR(lp_norm(mesh, cells, dx, 1.0, 2), 1.0, 1e-14);
  EXPECT_NEAR(lp_norm(mesh, cells, dx, kInfinity, 2), 1.0, 1e-14);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto w = random_form(2, 1, 2, rng);
    const double c = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const double a = lp_norm(mesh, 0, w, 2.0, 6), b = lp_norm(mesh, 0, w * c, 2.0, 6);
    EXPECT_NEAR(b, std::abs(c) * a, 1e-12 * (1.0 + b));
  }
}

TEST(SampledForm, FiniteDifferenceCheckOfPolynomialD) {
  std::mt19937_64 rng(9);
  const auto w = random_form(3, 1, 3, rng);
  const auto s = SampledForm::from_polyform(w);
  EXPECT_LT(check_exterior_derivative(s, 10, 1e-5, rng), 1e-5);
}
