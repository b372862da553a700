#include "feqi/biorth.hpp"
#include "feqi/error.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace feqi;

namespace {

SimplicialComplex reference_triangle() {
  Eigen::MatrixXd X(2, 3);
  X << 0, 1, 0, 0, 0, 1;
  return SimplicialComplex::build(X, {{0, 1, 2}});
}

SimplicialComplex skew_triangle() {
  Eigen::MatrixXd X(2, 3);
  X << 0.1, 1.3, 0.4, -0.2, 0.3, 1.1;
  return SimplicialComplex::build(X, {{0, 1, 2}});
}

struct Case {
  Family family;
  int r, k;
};

}  // namespace

TEST(Dofs, CountsMatchRingDimensions) {
  for (int n = 1; n <= 3; ++n)
    for (int r = 1; r <= 3; ++r)
      for (int k = 0; k <= n; ++k)
        for (Family f : {Family::Full, Family::Trimmed}) {
          const auto sel = FamilySelector::make(f, r, k, n);
          for (int m = k; m <= n; ++m) {
            EXPECT_EQ(static_cast<int>(weight_space(m, sel.family, r, k).size()),
                      ring_basis(m, sel.family, r, k).size())
                << n << r << k << m;
          }
        }
}

TEST(Dofs, UnisolventOnReferenceSimplices) {
  for (int n = 1; n <= 3; ++n)
    for (int r = 1; r <= 3; ++r)
      for (int k = 0; k <= n; ++k)
        for (Family f : {Family::Full, Family::Trimmed}) {
          const auto dp = build_dual_pairs(f, r, k, n);
          for (int m = dp->k; m <= n; ++m) {
            const auto& t = dp->table(m);
            for (int i = 0; i < t.size(); ++i)
              for (int j = 0; j < t.size(); ++j)
                EXPECT_NEAR(pair(t.weights[i], t.ring[j]), i == j ? 1.0 : 0.0, 1e-10);
          }
        }
}

TEST(Dofs, Examples) {
  const auto tri = reference_triangle();
  // vertex dof of P1 is point evaluation
  const auto v = dof_space(tri, {0, 1}, Family::Full, 1, 0);
  ASSERT_EQ(v.size(), 1u);
  const PolyForm x = PolyForm::scalar(2, Polynomial::affine(2, 0.25, std::vector<double>{2.0, -1.0}));
  EXPECT_NEAR(apply_dof(v[0], tri, x), 2.25, 1e-14);
  // edge dof of lowest-order Whitney forms has a constant weight
  const auto e = dof_space(tri, {1, 0}, Family::Trimmed, 1, 1);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].weight.poly_degree(), 0);
  EXPECT_TRUE(dof_space(tri, {2, 0}, Family::Full, 1, 0).empty());
  EXPECT_TRUE(dof_space(tri, {2, 0}, Family::Full, 1, 1).empty());
  EXPECT_EQ(dof_space(tri, {2, 0}, Family::Full, 2, 1).size(), 3u);
  EXPECT_EQ(dof_space(tri, {1, 0}, Family::Full, 2, 0).size(), 1u);
  EXPECT_NEAR(apply_dof(e[0], tri, PolyForm(2, 1)), 0.0, 0.0);
}

TEST(Dofs, EdgeDofIsTangentialIntegral) {
  // weight * length-normalised integral: value on the Whitney form of the edge
  // equals 1 and on the other edges' Whitney forms equals 0
  const auto tri = skew_triangle();
  const auto frame = cell_frame(tri, 0);
  for (int e = 0; e < 3; ++e) {
    const auto dofs = dof_space(tri, {1, e}, Family::Trimmed, 1, 1);
    for (int f = 0; f < 3; ++f) {
      const Mask fm = tri.local_mask({2, 0}, {1, f});
      const PolyForm w = PolyForm::whitney(2, mask_elements(fm));
      // tangential integral of the Whitney form along its own edge is 1
      const double ref = f == e ? 1.0 : 0.0;
      const double scale = pair(dofs[0].weight, PolyForm::whitney(1, {0, 1}));
      EXPECT_NEAR(apply_dof(dofs[0], tri, to_cartesian(w, frame)) / scale, ref, 1e-12);
    }
  }
}

TEST(Dofs, AffineInvariance) {
  std::mt19937_64 rng(3);
  const auto tri = skew_triangle();
  const auto frame = cell_frame(tri, 0);
  for (Case c : {Case{Family::Full, 2, 0}, Case{Family::Trimmed, 2, 1}, Case{Family::Full, 2, 1}}) {
    for (int d = c.k; d <= 2; ++d)
      for (int s = 0; s < tri.num_simplices(d); ++s)
        for (const auto& dof : dof_space(tri, {d, s}, c.family, c.r, c.k)) {
          const PolyForm L = feqi::testing::random_form(2, c.k, c.r, rng);
          EXPECT_NEAR(apply_dof(dof, tri, 0, L), apply_dof(dof, tri, to_cartesian(L, frame)), 1e-10);
        }
  }
}

TEST(Dofs, SampledMatchesExact) {
  const auto tri = skew_triangle();
  const auto frame = cell_frame(tri, 0);
  std::mt19937_64 rng(4);
  const PolyForm cart = to_cartesian(feqi::testing::random_form(2, 1, 2, rng), frame);
  const auto w = SampledForm::from_polyform(cart);
  for (int e = 0; e < 3; ++e)
    for (const auto& dof : dof_space(tri, {1, e}, Family::Full, 2, 1))
      EXPECT_NEAR(apply_dof(dof, tri, w, 8), apply_dof(dof, tri, cart), 1e-12);
  auto rough = w;
  rough.has_trace = false;
  const auto dofs = dof_space(tri, {1, 0}, Family::Full, 2, 1);
  try {
    apply_dof(dofs[0], tri, rough, 8);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::TraceUnavailable);
  }
}

TEST(Dofs, GlobalCountMatchesSpaceDimension) {
  const auto sq = unit_domain(2, 1, 2);
  const auto U = BoundarySubcomplex::full_boundary(sq);
  for (Case c : {Case{Family::Full, 2, 0}, Case{Family::Trimmed, 1, 1}, Case{Family::Full, 1, 1},
                 Case{Family::Trimmed, 2, 2}}) {
    int count = 0;
    for (int d = 0; d <= 2; ++d)
      for (int s = 0; s < sq.num_simplices(d); ++s)
        if (!U.contains({d, s})) count += static_cast<int>(dof_space(sq, {d, s}, c.family, c.r, c.k).size());
    EXPECT_EQ(count, assemble_global(sq, U, c.family, c.r, c.k).dimension());
  }
}

TEST(Biorth, LowestOrderIsGeometricBasis) {
  const auto sq = unit_square(2);
  for (Case c : {Case{Family::Full, 1, 0}, Case{Family::Trimmed, 1, 1}}) {
    const auto sys = build_biorthogonal(sq, c.family, c.r, c.k);
    for (int g = 0; g < sys.size(); ++g) {
      EXPECT_EQ(sys.phi(g).nonZeros(), 1);
      EXPECT_EQ(sys.phi(g).coeff(g), 1.0);
    }
  }
}

TEST(Biorth, QuadraticLagrangeOnOneTriangle) {
  const auto tri = skew_triangle();
  const auto sys = build_biorthogonal(tri, Family::Full, 2, 0);
  ASSERT_EQ(sys.size(), 6);
  const auto frame = cell_frame(tri, 0);
  Eigen::MatrixXd D(6, 6);
  for (int g = 0; g < 6; ++g) {
    const PolyForm cart = to_cartesian(sys.restrict(g, 0), frame);
    for (int h = 0; h < 6; ++h) D(h, g) = apply_dof(sys.dof(h), tri, cart);
  }
  EXPECT_LT((D - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  // vertex functions were corrected by the edge bubbles
  EXPECT_GT(sys.phi(0).nonZeros(), 1);
}

TEST(Biorth, DualityLocalityAndTriangularity) {
  std::vector<SimplicialComplex> meshes{unit_domain(2, 1, 1), unit_domain(2, 1, 2), unit_domain(3, 1, 1)};
  for (const auto& mesh : meshes) {
    const int n = mesh.dim();
    for (int k = 0; k <= n; ++k)
      for (int r = 1; r <= (n == 2 ? 3 : 2); ++r)
        for (Family f : {Family::Full, Family::Trimmed}) {
          const auto sys = build_biorthogonal(mesh, f, r, k);
          const auto chk = check_biorthogonal(sys);
          EXPECT_LT(chk.duality, 1e-9) << n << k << r;
          EXPECT_LT(chk.locality, 1e-9) << n << k << r;
          EXPECT_TRUE(chk.unit_triangular);
        }
  }
}

TEST(Biorth, RestrictBoundaryConditions) {
  const auto sq0 = unit_domain(2, 1, 0);
  const auto sq1 = unit_domain(2, 1, 1);
  const auto U0 = BoundarySubcomplex::full_boundary(sq0);
  const auto U1 = BoundarySubcomplex::full_boundary(sq1);
  EXPECT_TRUE(restrict_bc(build_biorthogonal(sq0, Family::Full, 1, 0), U0).empty());
  EXPECT_EQ(restrict_bc(build_biorthogonal(sq1, Family::Full, 1, 0), U1).size(), 1u);
  const auto ned = build_biorthogonal(sq0, Family::Trimmed, 1, 1);
  const auto kept = restrict_bc(ned, U0);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_FALSE(U0.contains(ned.space().owner(kept[0])));
  EXPECT_EQ(restrict_bc(ned, BoundarySubcomplex::empty(sq0)).size(), static_cast<std::size_t>(ned.size()));
  // every retained member has vanishing traces on U
  for (Case c : {Case{Family::Full, 2, 0}, Case{Family::Full, 2, 1}, Case{Family::Trimmed, 2, 1}}) {
    const auto sys = build_biorthogonal(sq1, c.family, c.r, c.k);
    const auto idx = restrict_bc(sys, U1);
    EXPECT_EQ(static_cast<int>(idx.size()), assemble_global(sq1, U1, c.family, c.r, c.k).dimension());
    for (int g : idx)
      for (int cell = 0; cell < sq1.num_cells(); ++cell) {
        const PolyForm L = sys.restrict(g, cell);
        for (int m = c.k; m < 2; ++m)
          for (Mask F : subsets(3, m + 1))
            if (U1.contains(sq1.cell_face(cell, F))) EXPECT_LT(L.trace(F).max_abs_coef(), 1e-10);
      }
  }
}

TEST(Biorth, ConstantsOfHatFunctions) {
  const auto tri = reference_triangle();
  const auto sys = build_biorthogonal(tri, Family::Full, 1, 0);
  const auto c = measure_constants(sys, 2.0);
  // |hat|_{L2} = sqrt(|T|/6), h_V = 1; point value bound sqrt(e^T M^{-1} e) = sqrt(18)
  EXPECT_NEAR(c.basis, std::sqrt(1.0 / 12.0), 1e-12);
  EXPECT_NEAR(c.operator_, std::sqrt(18.0 / 12.0), 1e-10);
  const auto inf = measure_constants(sys, kInfinity);
  EXPECT_NEAR(inf.basis, 1.0, 1e-12);
}

TEST(Biorth, ConstantsLevelIndependent) {
  for (Case c : {Case{Family::Full, 2, 0}, Case{Family::Trimmed, 1, 1}, Case{Family::Full, 1, 1}}) {
    std::vector<double> b, o;
    for (int level = 0; level <= 2; ++level) {
      const auto mesh = unit_domain(2, 1, level);
      const auto m = measure_constants(build_biorthogonal(mesh, c.family, c.r, c.k), 2.0);
      b.push_back(m.basis);
      o.push_back(m.operator_);
    }
    for (int l = 1; l <= 2; ++l) {
      EXPECT_NEAR(b[l] / b[0], 1.0, 0.05);
      EXPECT_NEAR(o[l] / o[0], 1.0, 0.05);
    }
  }
}

TEST(Biorth, CsvDump) {
  const auto tri = reference_triangle();
  const auto sys = build_biorthogonal(tri, Family::Trimmed, 1, 1);
  const auto chk = check_biorthogonal(sys, true);
  EXPECT_EQ(chk.entries.size(), 3u);
  std::ostringstream out;
  write_biorth_csv(chk, out);
  EXPECT_EQ(out.str().substr(0, 14), "row,col,value\n");
}
