#include "feqi/error.hpp"
#include "feqi/spaces.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace feqi;

namespace {

// closed-form dimension counts of the two families
int dim_full(int n, int r, int k) {
  if (r < 0 || k < 0 || k > n) return 0;
  return static_cast<int>(binomial(r + n, r + k) * binomial(r + k, k));
}

int dim_trimmed(int n, int r, int k) {
  if (r < 1 || k < 0 || k > n) return 0;
  return static_cast<int>(binomial(r + k - 1, k) * binomial(n + r, n - k));
}

// bubble counts by the duality of the two families
int ring_full(int m, int r, int k) { return k == m ? dim_full(m, r, k) : dim_trimmed(m, r + k - m, m - k); }
int ring_trimmed(int m, int r, int k) { return k == m ? dim_trimmed(m, r, k) : dim_full(m, r + k - m - 1, m - k); }

}  // namespace

TEST(Spaces, DimensionsMatchClosedForms) {
  for (int n = 1; n <= 3; ++n)
    for (int r = 1; r <= 3; ++r)
      for (int k = 0; k <= n; ++k) {
        EXPECT_EQ(local_basis(n, Family::Full, r, k).size(), dim_full(n, r, k)) << n << r << k;
        EXPECT_EQ(local_basis(n, Family::Trimmed, r, k).size(), dim_trimmed(n, r, k)) << n << r << k;
      }
  EXPECT_EQ(local_basis(2, Family::Trimmed, 1, 1).size(), 3);
  EXPECT_EQ(local_basis(3, Family::Trimmed, 1, 1).size(), 6);
  EXPECT_EQ(local_basis(3, Family::Trimmed, 1, 2).size(), 4);
  EXPECT_EQ(local_basis(3, Family::Full, 1, 2).size(), 12);
}

TEST(Spaces, InclusionChain) {
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 1; r <= 2; ++r) {
        const auto pm = spanning_set(n, Family::Trimmed, r, k);
        const auto p = spanning_set(n, Family::Full, r, k);
        const auto pm1 = spanning_set(n, Family::Trimmed, r + 1, k);
        EXPECT_LT(membership_residual(pm, p), 1e-10);
        EXPECT_LT(membership_residual(p, pm1), 1e-10);
        EXPECT_LT(membership_residual(spanning_set(n, Family::Full, r - 1, k), pm), 1e-10);
      }
}

TEST(Spaces, ExteriorDerivativeMapsIntoFamilies) {
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k < n; ++k)
      for (int r = 1; r <= 2; ++r) {
        std::vector<PolyForm> dp, dpm;
        for (const auto& w : spanning_set(n, Family::Full, r, k)) dp.push_back(w.d());
        for (const auto& w : spanning_set(n, Family::Trimmed, r, k)) dpm.push_back(w.d());
        EXPECT_LT(membership_residual(dp, spanning_set(n, Family::Trimmed, r, k + 1)), 1e-10);
        EXPECT_LT(membership_residual(dpm, spanning_set(n, Family::Full, r - 1, k + 1)), 1e-10);
      }
}

TEST(Spaces, KoszulConstructionAgrees) {
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 1; r <= 3; ++r) EXPECT_LT(koszul_space_equivalence(n, r, k), 1e-9) << n << r << k;
}

TEST(Spaces, RingDimensionsAndTraces) {
  for (int m = 1; m <= 3; ++m)
    for (int k = 0; k <= m; ++k)
      for (int r = 1; r <= 3; ++r) {
        const auto bf = ring_basis(m, Family::Full, r, k);
        const auto bt = ring_basis(m, Family::Trimmed, r, k);
        EXPECT_EQ(bf.size(), ring_full(m, r, k)) << m << r << k;
        EXPECT_EQ(bt.size(), ring_trimmed(m, r, k)) << m << r << k;
        for (const auto& w : bf.forms) EXPECT_LT(max_proper_trace(w), 1e-10);
        for (const auto& w : bt.forms) EXPECT_LT(max_proper_trace(w), 1e-10);
      }
  EXPECT_EQ(ring_basis(2, Family::Full, 3, 0).size(), 1);
}

TEST(Spaces, GeometricDecompositionCountsAddUp) {
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 1; r <= 3; ++r)
        for (Family f : {Family::Full, Family::Trimmed}) {
          const auto ref = ReferenceElement::get(n, f, r, k);
          int total = 0;
          for (int m = k; m <= n; ++m) total += static_cast<int>(binomial(n + 1, m + 1)) * ref->ring_size(m);
          const int expected = f == Family::Full ? dim_full(n, r, k) : dim_trimmed(n, r, k);
          EXPECT_EQ(total, expected);
          EXPECT_EQ(ref->local_size(), expected);
          // the extended bubbles form a basis of the local space
          EXPECT_EQ(span_rank(ref->cell_basis(), r), expected);
          EXPECT_LT(membership_residual(ref->cell_basis(), local_basis(n, f, r, k).forms), 1e-10);
        }
}

TEST(Spaces, ExtensionTraceProperties) {
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k < n; ++k)
      for (int r = 1; r <= 3; ++r)
        for (Family fam : {Family::Full, Family::Trimmed}) {
          const auto ref = ReferenceElement::get(n, fam, r, k);
          for (int m = k; m < n; ++m) {
            if (ref->ring_size(m) == 0) continue;
            for (Mask S : subsets(n + 1, m + 1)) {
              const auto& ext = ref->extended(n, S);
              for (int i = 0; i < ref->ring_size(m); ++i) {
                EXPECT_LT(feqi::testing::coef_diff(ext[i].trace(S), ref->ring(m).forms[i]), 1e-10);
                // vanishes on every face of dimension >= k not containing S
                for (int q = k; q < n; ++q)
                  for (Mask F : subsets(n + 1, q + 1))
                    if ((F & S) != S) EXPECT_LT(ext[i].trace(F).max_abs_coef(), 1e-10);
              }
            }
          }
        }
}

TEST(Spaces, NotABubble) {
  try {
    make_extension({PolyForm::lambda(2, 0)}, Family::Full, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotABubble);
  }
}

TEST(Spaces, ForcedFamilyIdentification) {
  EXPECT_EQ(FamilySelector::make(Family::Trimmed, 2, 0, 3).family, Family::Full);
  EXPECT_EQ(FamilySelector::make(Family::Full, 2, 3, 3).family, Family::Trimmed);
  EXPECT_EQ(FamilySelector::make(Family::Full, 2, 1, 3).family, Family::Full);
  EXPECT_THROW(FamilySelector::make(Family::Full, 0, 1, 3), Error);
  EXPECT_EQ(family_from_string("trimmed"), Family::Trimmed);
  EXPECT_THROW(family_from_string("nedelec"), Error);
}

TEST(GlobalSpace, DimensionsOnTwoTriangleSquare) {
  const auto sq = unit_square(1);
  const auto none = BoundarySubcomplex::empty(sq);
  const auto U = BoundarySubcomplex::full_boundary(sq);
  EXPECT_EQ(assemble_global(sq, none, Family::Full, 1, 0).dimension(), 4);
  EXPECT_EQ(assemble_global(sq, none, Family::Trimmed, 1, 1).dimension(), 5);
  EXPECT_EQ(assemble_global(sq, none, Family::Trimmed, 1, 2).dimension(), 2);
  EXPECT_EQ(assemble_global(sq, U, Family::Full, 1, 0).dimension(), 0);
  EXPECT_EQ(assemble_global(sq, U, Family::Trimmed, 1, 1).dimension(), 1);
  EXPECT_EQ(assemble_global(sq, U, Family::Trimmed, 1, 2).dimension(), 2);
  EXPECT_EQ(assemble_global(sq, none, Family::Full, 2, 0).dimension(), 9);
}

TEST(GlobalSpace, TracesAgreeAcrossSharedFacets) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const auto& mesh : {unit_square(2), unit_cube(1)}) {
    const int n = mesh.dim();
    for (int k = 0; k < n; ++k)
      for (Family f : {Family::Full, Family::Trimmed}) {
        const GlobalFESpace V(mesh, BoundarySubcomplex::empty(mesh), f, 2, k);
        Eigen::VectorXd c(V.size());
        for (int i = 0; i < c.size(); ++i) c(i) = U(rng);
        int shared = 0;
        for (int F = 0; F < mesh.num_simplices(n - 1); ++F) {
          const auto& cells = mesh.containing_cells({n - 1, F});
          if (cells.size() != 2) continue;
          ++shared;
          const PolyForm a = V.restrict(c, cells[0]).trace(mesh.local_mask({n, cells[0]}, {n - 1, F}));
          const PolyForm b = V.restrict(c, cells[1]).trace(mesh.local_mask({n, cells[1]}, {n - 1, F}));
          EXPECT_LT(feqi::testing::coef_diff(a, b), 1e-10);
        }
        EXPECT_GT(shared, 0);
      }
  }
}
