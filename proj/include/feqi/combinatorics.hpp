#pragma once

// Small combinatorial helpers shared by the polynomial and mesh layers:
// subsets encoded as bit masks, multi-indices, factorials, and minors.

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

namespace feqi {

constexpr int kMaxDim = 3;

/// Subset of {0, ..., 31} stored as a bit mask.
using Mask = std::uint32_t;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline int popcount(Mask m) { return std::popcount(m); }

inline Mask full_mask(int n) { return n >= 32 ? ~Mask(0) : ((Mask(1) << n) - 1); }

/// Elements of a mask in increasing order.
std::vector<int> mask_elements(Mask m);

Mask mask_from(const std::vector<int>& elements);

/// All k-element subsets of {0..n-1}, sorted by numeric mask value.
const std::vector<Mask>& subsets(int n, int k);

/// Position of `m` in subsets(n, popcount(m)).
int subset_rank(int n, Mask m);

/// Sign of e_a ^ e_b relative to e_{a|b}; 0 when a and b overlap.
int wedge_sign(Mask a, Mask b);

double factorial(int n);
double binomial(int n, int k);

/// Multi-index with up to kMaxDim entries.
using Exponents = std::array<int, kMaxDim>;

/// All multi-indices over `nvars` variables with total degree <= maxdeg
/// (graded, then lexicographic).
std::vector<Exponents> multi_indices_upto(int nvars, int maxdeg);

/// All multi-indices over `nvars` variables with total degree == deg.
/// nvars may exceed kMaxDim here; the result uses std::vector entries.
std::vector<std::vector<int>> multi_indices_exact(int nvars, int deg);

/// Determinant of the square submatrix A[rows, cols] (rows/cols given as masks).
double minor_det(const Eigen::MatrixXd& A, Mask rows, Mask cols);

/// k-th compound matrix: entry (I, J) = det A[I, J] for k-subsets I of rows and
/// J of columns, indexed by subset rank.
Eigen::MatrixXd compound(const Eigen::MatrixXd& A, int k);

}  // namespace feqi
