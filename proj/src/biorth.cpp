#include "feqi/biorth.hpp"

#include "feqi/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

namespace feqi {

BiorthogonalSystem::BiorthogonalSystem(GlobalFESpace space, std::shared_ptr<const DualPairs> duals,
                                       std::vector<Eigen::SparseVector<double>> phi)
    : m_space(std::move(space)), m_duals(std::move(duals)), m_phi(std::move(phi)) {}

DofFunctional BiorthogonalSystem::dof(int g) const {
  const SimplexRef S = m_space.owner(g);
  const int i = g - m_space.offset(S);
  return {S, i, m_duals->table(S.dim).weights[i]};
}

PolyForm BiorthogonalSystem::restrict(int g, int cell) const {
  const auto& ref = m_space.reference();
  const auto idx = m_space.local_dofs(cell);
  Eigen::VectorXd local = Eigen::VectorXd::Zero(static_cast<int>(idx.size()));
  bool any = false;
  for (Eigen::SparseVector<double>::InnerIterator it(m_phi[g]); it; ++it) {
    const auto pos = std::find(idx.begin(), idx.end(), static_cast<int>(it.index()));
    if (pos == idx.end()) continue;
    local(static_cast<int>(pos - idx.begin())) = it.value();
    any = true;
  }
  if (!any) return PolyForm(mesh().dim(), m_space.k());
  return ref.coordinates().from_vector(ref.cell_matrix() * local);
}

Eigen::VectorXd BiorthogonalSystem::to_geometric(const Eigen::VectorXd& c) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (int g = 0; g < size(); ++g) {
    if (c(g) == 0.0) continue;
    for (Eigen::SparseVector<double>::InnerIterator it(m_phi[g]); it; ++it) out(it.index()) += c(g) * it.value();
  }
  return out;
}

BiorthogonalSystem build_biorthogonal(const SimplicialComplex& mesh, Family family, int r, int k) {
  const int n = mesh.dim();
  GlobalFESpace V(mesh, BoundarySubcomplex::empty(mesh), family, r, k);
  const auto duals = build_dual_pairs(family, r, k, n);
  const auto& ref = V.reference();
  const int kk = V.k();

  // phi*_{T',l}(Ext psi_{S,i}) depends only on dim T' and the position of S in T'
  std::map<std::pair<int, Mask>, Eigen::MatrixXd> coef;
  auto coefficients = [&](int dimT, Mask sub) -> const Eigen::MatrixXd& {
    auto& slot = coef[{dimT, sub}];
    if (slot.size() == 0) {
      const auto& ext = ref.extended(dimT, sub);
      const auto& w = duals->table(dimT).weights;
      slot.resize(static_cast<int>(ext.size()), static_cast<int>(w.size()));
      for (std::size_t i = 0; i < ext.size(); ++i)
        for (std::size_t l = 0; l < w.size(); ++l) slot(i, l) = pair(w[l], ext[i]);
    }
    return slot;
  };

  std::vector<Eigen::SparseVector<double>> phi(V.size(), Eigen::SparseVector<double>(V.size()));
  for (int m = n; m >= kk; --m) {
    const int cS = ref.ring_size(m);
    if (cS == 0) continue;
    for (int s = 0; s < mesh.num_simplices(m); ++s) {
      const SimplexRef S{m, s};
      const int base = V.offset(S);
      for (int i = 0; i < cS; ++i) {
        Eigen::SparseVector<double> v(V.size());
        v.insert(base + i) = 1.0;
        for (int d = m + 1; d <= n; ++d) {
          const int cT = ref.ring_size(d);
          if (cT == 0) continue;
          for (int t : mesh.cofaces(S, d)) {
            const SimplexRef T{d, t};
            const Eigen::MatrixXd& C = coefficients(d, mesh.local_mask(T, S));
            for (int l = 0; l < cT; ++l) {
              if (C(i, l) != 0.0) v -= C(i, l) * phi[V.offset(T) + l];
            }
          }
        }
        v.prune(0.0, 1e-15);
        phi[base + i] = std::move(v);
      }
    }
  }
  return BiorthogonalSystem(std::move(V), duals, std::move(phi));
}

std::vector<int> restrict_bc(const BiorthogonalSystem& sys, const BoundarySubcomplex& U) {
  std::vector<int> out;
  for (int g = 0; g < sys.size(); ++g)
    if (!U.contains(sys.space().owner(g))) out.push_back(g);
  return out;
}

BiorthCheck check_biorthogonal(const BiorthogonalSystem& sys, bool keep_entries) {
  BiorthCheck out;
  const auto& mesh = sys.mesh();
  const auto& V = sys.space();
  const int n = mesh.dim();
  const int k = V.k();
  for (int g = 0; g < sys.size(); ++g) {
    const SimplexRef S = V.owner(g);
    for (Eigen::SparseVector<double>::InnerIterator it(sys.phi(g)); it; ++it) {
      const SimplexRef T = V.owner(static_cast<int>(it.index()));
      if (it.index() == g ? it.value() != 1.0 : T.dim <= S.dim) out.unit_triangular = false;
    }
    std::map<int, double> row_values;  // by dof index
    for (int cell : mesh.containing_cells(S)) {
      const PolyForm L = sys.restrict(g, cell);
      const Mask sm = mesh.local_mask({n, cell}, S);
      for (int m = k; m <= n; ++m) {
        for (Mask F : subsets(n + 1, m + 1)) {
          const PolyForm tr = L.trace(F);
          if ((F & sm) != sm) out.locality = std::max(out.locality, tr.max_abs_coef());
          const SimplexRef Fs = mesh.cell_face(cell, F);
          const auto& w = sys.duals().table(m).weights;
          for (std::size_t j = 0; j < w.size(); ++j) {
            const int row = V.offset(Fs) + static_cast<int>(j);
            const double val = pair(w[j], tr);
            out.duality = std::max(out.duality, std::abs(val - (row == g ? 1.0 : 0.0)));
            row_values[row] = val;
          }
        }
      }
    }
    if (keep_entries) {
      for (const auto& [row, val] : row_values)
        if (std::abs(val) > 1e-13) out.entries.push_back({row, g, val});
    }
  }
  return out;
}

void write_biorth_csv(const BiorthCheck& check, std::ostream& out) {
  out << "row,col,value\n";
  out.precision(17);
  for (const auto& e : check.entries) out << e.row << ',' << e.col << ',' << e.value << '\n';
}

BiorthConstants measure_constants(const BiorthogonalSystem& sys, double p, int samples, unsigned seed) {
  BiorthConstants out;
  const auto& mesh = sys.mesh();
  const auto& V = sys.space();
  const int n = mesh.dim();
  const int order = 2 * V.r() + 4;
  const auto& basis = V.reference().cell_basis();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01;
  const double scale_exp = V.k() - (p > 0.0 ? n / p : 0.0);
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    Eigen::MatrixXd Minv;
    std::vector<PolyForm> trial;
    std::vector<double> trial_norm;
    if (p == 2.0) {
      Minv = cartesian_mass_matrix(mesh, cell, basis, 2 * V.r()).inverse();
    } else {
      for (int s = 0; s < samples; ++s) {
        PolyForm w(n, V.k());
        for (const auto& b : basis) w += b * N01(rng);
        trial_norm.push_back(lp_norm(mesh, cell, w, p, order));
        trial.push_back(std::move(w));
      }
    }
    for (int m = V.k(); m <= n; ++m) {
      const int c = V.count({m, 0});
      if (c == 0) continue;
      for (Mask F : subsets(n + 1, m + 1)) {
        const SimplexRef S = mesh.cell_face(cell, F);
        const double hS = m == 0 ? mesh.h_vertex(S.id) : mesh.diameter(S);
        for (int i = 0; i < c; ++i) {
          const int g = sys.index(S, i);
          const DofFunctional dof = sys.dof(g);
          const double nphi = lp_norm(mesh, cell, sys.restrict(g, cell), p, order);
          out.basis = std::max(out.basis, std::pow(hS, scale_exp) * nphi);
          double sup = 0.0;
          if (p == 2.0) {
            Eigen::VectorXd gv(static_cast<int>(basis.size()));
            for (std::size_t j = 0; j < basis.size(); ++j) gv(j) = apply_dof(dof, mesh, cell, basis[j]);
            sup = std::sqrt(std::max(0.0, gv.dot(Minv * gv)));
          } else {
            for (std::size_t s = 0; s < trial.size(); ++s)
              if (trial_norm[s] > 0.0) sup = std::max(sup, std::abs(apply_dof(dof, mesh, cell, trial[s])) / trial_norm[s]);
          }
          out.operator_ = std::max(out.operator_, sup * nphi);
        }
      }
    }
  }
  return out;
}

}  // namespace feqi
