#include "feqi/combinatorics.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace feqi {

std::vector<int> mask_elements(Mask m) {
  std::vector<int> out;
  for (int i = 0; m != 0; ++i, m >>= 1) {
    if (m & 1U) out.push_back(i);
  }
  return out;
}

Mask mask_from(const std::vector<int>& elements) {
  Mask m = 0;
  for (int e : elements) m |= Mask(1) << e;
  return m;
}

const std::vector<Mask>& subsets(int n, int k) {
  constexpr int kTable = 8;
  static const auto table = [] {
    std::vector<std::vector<Mask>> t((kTable + 1) * (kTable + 1));
    for (int m = 0; m <= kTable; ++m)
      for (Mask s = 0; s < (Mask(1) << m); ++s) t[m * (kTable + 1) + popcount(s)].push_back(s);
    return t;
  }();
  if (n >= 0 && n <= kTable && k >= 0 && k <= kTable) return table[n * (kTable + 1) + k];
  static std::mutex guard;
  static std::map<std::pair<int, int>, std::vector<Mask>> cache;
  std::lock_guard lock(guard);
  auto [it, inserted] = cache.try_emplace({n, k});
  if (inserted) {
    for (Mask m = 0; m < (Mask(1) << n); ++m) {
      if (popcount(m) == k) it->second.push_back(m);
    }
  }
  return it->second;
}

int subset_rank(int n, Mask m) {
  const auto& list = subsets(n, popcount(m));
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == m) return static_cast<int>(i);
  }
  return -1;
}

int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  // count pairs (i in a, j in b) with i > j
  int inversions = 0;
  for (Mask bb = b; bb != 0; bb &= bb - 1) {
    const int j = std::countr_zero(bb);
    inversions += popcount(a & ~full_mask(j + 1));
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

std::vector<Exponents> multi_indices_upto(int nvars, int maxdeg) {
  std::vector<Exponents> out;
  for (int deg = 0; deg <= maxdeg; ++deg) {
    for (const auto& e : multi_indices_exact(nvars, deg)) {
      Exponents a{};
      for (int i = 0; i < nvars; ++i) a[i] = e[i];
      out.push_back(a);
    }
  }
  return out;
}

std::vector<std::vector<int>> multi_indices_exact(int nvars, int deg) {
  std::vector<std::vector<int>> out;
  if (nvars == 0) {
    if (deg == 0) out.emplace_back();
    return out;
  }
  std::vector<int> cur(nvars, 0);
  // recursive fill, first variable gets the largest share first
  auto rec = [&](auto&& self, int var, int remaining) -> void {
    if (var == nvars - 1) {
      cur[var] = remaining;
      out.push_back(cur);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      cur[var] = e;
      self(self, var + 1, remaining - e);
    }
  };
  rec(rec, 0, deg);
  return out;
}

double minor_det(const Eigen::MatrixXd& A, Mask rows, Mask cols) {
  int r[32], c[32];
  int k = 0, kc = 0;
  for (int i = 0; rows != 0; ++i, rows >>= 1)
    if (rows & 1U) r[k++] = i;
  for (int j = 0; cols != 0; ++j, cols >>= 1)
    if (cols & 1U) c[kc++] = j;
  auto a = [&](int i, int j) { return A(r[i], c[j]); };
  switch (k) {
    case 0: return 1.0;
    case 1: return a(0, 0);
    case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default: break;
  }
  Eigen::MatrixXd sub(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub(i, j) = a(i, j);
  return sub.determinant();
}

Eigen::MatrixXd compound(const Eigen::MatrixXd& A, int k) {
  const auto& rs = subsets(static_cast<int>(A.rows()), k);
  const auto& cs = subsets(static_cast<int>(A.cols()), k);
  Eigen::MatrixXd C(rs.size(), cs.size());
  for (std::size_t i = 0; i < rs.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j) C(i, j) = minor_det(A, rs[i], cs[j]);
  return C;
}

}  // namespace feqi
