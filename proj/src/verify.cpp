#include "feqi/harness.hpp"

#include "feqi/error.hpp"
#include "feqi/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

namespace feqi {

bool CriterionResult::passed() const {
  return !metrics.empty() && std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.ok(); });
}

nlohmann::json CriterionResult::to_json() const {
  nlohmann::json j{{"id", id}, {"title", title}, {"passed", passed()}, {"seconds", seconds}, {"notes", notes}};
  j["metrics"] = nlohmann::json::array();
  for (const auto& m : metrics) {
    j["metrics"].push_back({{"name", m.name},
                            {"value", std::isfinite(m.value) ? nlohmann::json(m.value) : nlohmann::json(nullptr)},
                            {"lo", m.lo},
                            {"hi", m.hi},
                            {"ok", m.ok()}});
  }
  return j;
}

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "algebra") return {1, 2};
  if (suite == "biorth") return {3};
  if (suite == "facetdual") return {4};
  if (suite == "interp") return {5, 6, 7, 8};
  if (suite == "proxy") return {9};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9};
  throw Error(ErrorCode::InvalidConfig, "unknown suite '" + suite + "' (algebra, biorth, facetdual, interp, proxy)");
}

namespace {

using Rng = std::mt19937_64;

PolyForm random_form(int dim, int k, int deg, Rng& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const FormCoordinates fc(dim, k, deg);
  Eigen::VectorXd v(fc.size());
  for (int i = 0; i < v.size(); ++i) v(i) = U(rng);
  return fc.from_vector(v);
}

double diff(const PolyForm& a, const PolyForm& b) { return (a - b).max_abs_coef(); }

// residual below hi (worst value reported)
Metric below(std::string name, double value, double hi) { return {std::move(name), value, 0.0, hi}; }
Metric within(std::string name, double value, double lo, double hi) { return {std::move(name), value, lo, hi}; }

void say(const VerifyOptions& o, const std::string& line) {
  if (o.log) *o.log << "  " << line << std::endl;
}

// ---------------------------------------------------------------- criterion 1

// int_face tr dw - sum_j (-1)^j int_{face without j} tr w over every (k+1)-face
double stokes_residual(const PolyForm& w) {
  const int n = w.dim(), k = w.degree();
  double worst = 0.0;
  const PolyForm dw = w.d();
  for (Mask face : subsets(n + 1, k + 2)) {
    const auto fv = mask_elements(face);
    const double lhs = dw.trace(fv).integrate();
    double rhs = 0.0;
    for (int j = 0; j <= k + 1; ++j) {
      std::vector<int> sub = fv;
      sub.erase(sub.begin() + j);
      double v;
      if (k == 0) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
        if (sub[0] > 0) t(sub[0] - 1) = 1.0;
        v = w.evaluate(t.data())(0);
      } else {
        v = w.trace(sub).integrate();
      }
      rhs += (j % 2 ? -1.0 : 1.0) * v;
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

CriterionResult algebra_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "algebra: d d = 0, Leibniz, Stokes, trace naturality, Koszul";
  Rng rng(opt.seed + 1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  constexpr int kTrials = 50;
  double dd = 0, leibniz = 0, stokes = 0, nat = 0, kk = 0, homotopy = 0;
  int forms = 0;
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 0; r <= 3; ++r)
        for (int trial = 0; trial < kTrials; ++trial, ++forms) {
          const PolyForm w = random_form(n, k, r, rng);
          dd = std::max(dd, w.d().d().max_abs_coef());
          const int l = trial % (n - k + 1);
          const PolyForm v = random_form(n, l, r, rng);
          PolyForm rhs(n, k + l + 1);
          if (k + l < n) rhs = w.d().wedge(v) + w.wedge(v.d()) * (k % 2 ? -1.0 : 1.0);
          leibniz = std::max(leibniz, diff(w.wedge(v).d(), rhs));
          if (k < n) stokes = std::max(stokes, stokes_residual(w));
          for (Mask f = 1; f < (Mask(1) << (n + 1)); ++f) {
            const auto fv = mask_elements(f);
            if (static_cast<int>(fv.size()) - 1 < k) continue;
            nat = std::max(nat, diff(w.trace(fv).d(), w.d().trace(fv)));
            if (k + l <= static_cast<int>(fv.size()) - 1)
              nat = std::max(nat, diff(w.wedge(v).trace(fv), w.trace(fv).wedge(v.trace(fv))));
          }
          if (k >= 1) {
            Eigen::VectorXd base(n);
            for (int i = 0; i < n; ++i) base(i) = U(rng);
            if (k >= 2) kk = std::max(kk, w.koszul(base).koszul(base).max_abs_coef());
            // (d kappa + kappa d) h = (r + k) h for h homogeneous of degree r about base
            PolyForm h(n, k);
            const auto& I = subsets(n, k);
            for (const auto& a : multi_indices_upto(n, r)) {
              int deg = 0;
              for (int i = 0; i < n; ++i) deg += a[i];
              if (deg != r) continue;
              for (std::size_t c = 0; c < I.size(); ++c) h.component(c) += Polynomial::monomial(n, a, U(rng));
            }
            const PolyForm hb = h.pullback(Eigen::MatrixXd::Identity(n, n), -base);
            PolyForm lhs = hb.koszul(base).d();
            if (k < n) lhs += hb.d().koszul(base);
            homotopy = std::max(homotopy, diff(lhs, hb * double(r + k)));
          }
        }
  res.metrics = {below("d d", dd, tol::algebra),           below("Leibniz", leibniz, tol::algebra),
                 below("Stokes on simplex", stokes, tol::algebra), below("trace naturality", nat, tol::algebra),
                 below("kappa kappa", kk, tol::algebra),         below("Koszul homotopy", homotopy, tol::algebra)};
  res.notes.push_back(std::to_string(forms) + " random forms, n in {2,3}, k <= n, r <= 3");
  return res;
}

// ---------------------------------------------------------------- criterion 2

double binom(int a, int b) {
  if (b < 0 || a < b) return 0.0;
  double v = 1.0;
  for (int i = 1; i <= b; ++i) v = v * (a - b + i) / i;
  return v;
}

// closed forms of dim P_r Lambda^k and P_r^- Lambda^k on an n-simplex
int closed_form_dim(int n, Family f, int r, int k) {
  if (f == Family::Full) return static_cast<int>(std::lround(binom(r + n, r + k) * binom(r + k, k)));
  return static_cast<int>(std::lround(binom(r + k - 1, k) * binom(n + r, n - k)));
}

CriterionResult space_suite(const VerifyOptions&) {
  CriterionResult res;
  res.title = "spaces: dimensions, inclusion chain, Koszul construction";
  int mismatches = 0, checked = 0;
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 0; r <= 3; ++r)
        for (Family f : {Family::Full, Family::Trimmed}) {
          if (f == Family::Trimmed && r == 0) continue;
          const auto span = spanning_set(n, f, r, k);
          const int rank = span_rank(span, r);
          const int size = local_basis(n, f, r, k).size();
          ++checked;
          if (rank != closed_form_dim(n, f, r, k) || size != rank) ++mismatches;
        }
  double chain = 0, dsame = 0, dinto = 0, koszul = 0;
  for (int n = 2; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 0; r <= 2; ++r) {
        const auto p = spanning_set(n, Family::Full, r, k);
        const auto pm1 = spanning_set(n, Family::Trimmed, r + 1, k);
        const auto p1 = spanning_set(n, Family::Full, r + 1, k);
        chain = std::max({chain, membership_residual(p, pm1), membership_residual(pm1, p1)});
        if (k < n) {
          std::vector<PolyForm> dp, dpm;
          for (const auto& w : p1) dp.push_back(w.d());
          for (const auto& w : pm1) dpm.push_back(w.d());
          dsame = std::max({dsame, membership_residual(dp, dpm), membership_residual(dpm, dp)});
          dinto = std::max(dinto, membership_residual(dp, spanning_set(n, Family::Full, r, k + 1)));
        }
      }
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k)
      for (int r = 1; r <= 3; ++r) koszul = std::max(koszul, koszul_space_equivalence(n, r, k));
  res.metrics = {within("dimension mismatches", mismatches, 0, 0),
                 below("P_r in P-_{r+1} in P_{r+1}", chain, tol::membership),
                 below("d P_{r+1} = d P-_{r+1}", dsame, tol::membership),
                 below("d P_{r+1} in P_r", dinto, tol::membership),
                 below("Koszul vs Whitney", koszul, tol::membership)};
  res.notes.push_back(std::to_string(checked) + " local spaces against rank and closed-form dimensions");
  return res;
}

// ---------------------------------------------------------------- criterion 3

struct Config {
  Family family;
  int r, k;
};

std::string label(int n, const Config& c) {
  return std::string(to_string(c.family)) + " n=" + std::to_string(n) + " r=" + std::to_string(c.r) +
         " k=" + std::to_string(c.k);
}

std::vector<Config> all_configs(int n, int rmax, bool top = true) {
  std::vector<Config> out;
  for (int r = 1; r <= rmax; ++r)
    for (int k = 0; k <= (top ? n : n - 1); ++k)
      for (Family f : {Family::Full, Family::Trimmed}) {
        if ((k == 0 && f == Family::Trimmed) || (k == n && f == Family::Full)) continue;  // identified
        out.push_back({f, r, k});
      }
  return out;
}

double variation(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0 ? *hi / *lo - 1.0 : INFINITY;
}

CriterionResult biorth_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "biorthogonal system: duality, locality, level-independent constants";
  double duality = 0, locality = 0, var_basis = 0, var_op = 0;
  bool triangular = true;
  for (int n = 2; n <= 3; ++n)
    for (const Config& c : all_configs(n, 2)) {
      std::vector<double> basis, op;
      for (int level = 1; level <= 3; ++level) {
        const auto mesh = unit_domain(n, 1, level);
        const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
        const bool dump = !opt.dump_biorth.empty() && n == 2 && level == 1 && c.r == 1 && c.k == 1 &&
                          c.family == Family::Trimmed;
        const auto chk = check_biorthogonal(sys, dump);
        if (dump) {
          std::ofstream out(opt.dump_biorth);
          if (!out) throw Error(ErrorCode::Io, "cannot write " + opt.dump_biorth);
          write_biorth_csv(chk, out);
          res.notes.push_back("[phi*(phi)] of TRIMMED r=1 k=1 on the level-1 square written to " + opt.dump_biorth);
        }
        duality = std::max(duality, chk.duality);
        locality = std::max(locality, chk.locality);
        triangular = triangular && chk.unit_triangular;
        const auto m = measure_constants(sys, 2.0);
        basis.push_back(m.basis);
        op.push_back(m.operator_);
      }
      var_basis = std::max(var_basis, variation(basis));
      var_op = std::max(var_op, variation(op));
      say(opt, label(n, c) + ": basis constants " + std::to_string(basis[0]) + " .. " + std::to_string(basis[2]));
    }
  res.metrics = {below("max |[phi*(phi)] - I|", duality, tol::duality),
                 below("locality trace residual", locality, tol::duality),
                 within("unit triangular change of basis", triangular ? 1 : 0, 1, 1),
                 below("basis constant variation", var_basis, tol::constant_variation),
                 below("operator constant variation", var_op, tol::constant_variation)};
  res.notes.push_back("unit square and unit cube, levels 1..3, r <= 2, all k, both families");
  return res;
}

// ---------------------------------------------------------------- criterion 4

CriterionResult facetdual_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "facet-dual forms: moment identity, integration by parts, scaling";
  Rng rng(opt.seed + 4);
  double moment = 0, ibp_poly = 0, ibp_smooth = 0, ratio_lo = INFINITY, ratio_hi = 0;
  for (int n = 2; n <= 3; ++n)
    for (const Config& c : all_configs(n, n == 2 ? 3 : 2, false)) {
      const auto table = FacetDualTable::get(n, c.family, c.r, c.k);
      const auto cell_space = local_basis(n, Family::Full, c.r, c.k).forms;
      for (Mask fm : subsets(n + 1, n))
        for (int m = c.k; m < n; ++m) {
          const auto& weights = table->duals().table(m).weights;
          for (Mask sm : subsets(n + 1, m + 1)) {
            if ((sm & fm) != sm) continue;
            for (std::size_t i = 0; i < weights.size(); ++i) {
              const auto& xi = table->xi(relative_mask(fm, sm), static_cast<int>(i));
              for (const auto& w : cell_space)
                moment = std::max(moment, std::abs(pair(xi.xi, w.trace(fm)) - pair(weights[i], w.trace(sm))));
            }
          }
        }
      // integration by parts on random local forms of the cell space
      for (int trial = 0; trial < 10; ++trial) {
        const PolyForm w = random_form(n, c.k, c.r, rng);
        for (Mask fm : subsets(n + 1, n))
          for (int m = c.k; m < n; ++m)
            for (Mask sf : subsets(n, m + 1))
              for (int i = 0; i < table->duals().table(m).size(); ++i)
                ibp_poly = std::max(ibp_poly, ibp_check(table->Xi(fm, sf, i), table->xi(sf, i), w));
      }
    }
  // smooth forms at order 2r + 6
  struct SmoothCase {
    int n, level;
    int cells;  // leading cells checked
  };
  for (const SmoothCase sc : {SmoothCase{2, 3, 1 << 30}, SmoothCase{3, 3, 96}}) {
    const auto mesh = unit_domain(sc.n, 1, sc.level);
    for (const Config& c : all_configs(sc.n, sc.n == 2 ? 3 : 2, false)) {
      const auto table = FacetDualTable::get(sc.n, c.family, c.r, c.k);
      const SampledForm w = manufactured_target("trig", {sc.n, c.k, c.r, opt.seed});
      const int order = 2 * c.r + 6;
      for (int cell = 0; cell < std::min(sc.cells, mesh.num_cells()); ++cell)
        for (Mask fm : subsets(sc.n + 1, sc.n))
          for (int m = c.k; m < sc.n; ++m)
            for (Mask sf : subsets(sc.n, m + 1))
              for (int i = 0; i < table->duals().table(m).size(); ++i)
                ibp_smooth =
                    std::max(ibp_smooth, ibp_check(mesh, cell, table->Xi(fm, sf, i), table->xi(sf, i), w, order));
    }
  }
  // Xi scaling across levels
  for (int n = 2; n <= 3; ++n)
    for (const Config& c : all_configs(n, 2, false)) {
      std::vector<XiScaling> s;
      for (int level = 1; level <= 3; ++level) {
        const auto mesh = unit_domain(n, 1, level);
        s.push_back(xi_scaling(mesh, choose_anchors(mesh, BoundarySubcomplex::empty(mesh)), c.family, c.r, c.k, 2.0));
      }
      for (int l = 1; l <= 2; ++l)
        for (double q : {s[l].xi / s[l - 1].xi, s[l].dxi / s[l - 1].dxi}) {
          ratio_lo = std::min(ratio_lo, q);
          ratio_hi = std::max(ratio_hi, q);
        }
    }
  res.metrics = {below("moment identity", moment, tol::moment),
                 below("integration by parts (polynomial)", ibp_poly, tol::ibp_poly),
                 below("integration by parts (smooth, order 2r+6)", ibp_smooth, tol::ibp_smooth),
                 within("min level-to-level Xi scaling ratio", ratio_lo, 0.5, 2.0),
                 within("max level-to-level Xi scaling ratio", ratio_hi, 0.5, 2.0)};
  res.notes.push_back("smooth checks use trig forms on level-3 meshes (96 leading cells in 3D); Xi scaling over levels 1..3");
  return res;
}

// ---------------------------------------------------------------- criterion 5

Eigen::VectorXd random_coefficients(const GlobalFESpace& V, const BoundarySubcomplex& U, Rng& rng) {
  std::uniform_real_distribution<double> D(-1.0, 1.0);
  Eigen::VectorXd c(V.size());
  for (int g = 0; g < V.size(); ++g) c(g) = U.contains(V.owner(g)) ? 0.0 : D(rng);
  return c;
}

CriterionResult reproduction_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "interpolants reproduce finite element forms";
  Rng rng(opt.seed + 5);
  double cl = 0, clbc = 0, sz = 0, szbc = 0, kmat = 0;
  for (int n = 2; n <= 3; ++n) {
    const auto mesh = unit_domain(n, 1, n == 2 ? 1 : 0);
    const auto empty = BoundarySubcomplex::empty(mesh);
    const auto full = BoundarySubcomplex::full_boundary(mesh);
    const auto anchors = choose_anchors(mesh, empty);
    const auto anchors_bc = choose_anchors(mesh, full);
    for (const Config& c : all_configs(n, n == 2 ? 3 : 2)) {
      const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
      const GlobalFESpace& V = sys.space();
      const Eigen::VectorXd a = random_coefficients(V, empty, rng);
      const SampledForm w = fe_form(V, a);
      cl = std::max(cl, (clement(w, sys).coefficients - a).cwiseAbs().maxCoeff());
      sz = std::max(sz, (scott_zhang(w, sys, anchors, empty).coefficients - a).cwiseAbs().maxCoeff());
      const Eigen::VectorXd b = random_coefficients(V, full, rng);
      const SampledForm wb = fe_form(V, b);
      clbc = std::max(clbc, (clement_bc(wb, sys, full).coefficients - b).cwiseAbs().maxCoeff());
      szbc = std::max(szbc, (scott_zhang(wb, sys, anchors_bc, full).coefficients - b).cwiseAbs().maxCoeff());
      if (c.k == n) continue;
      // K_{S,i} on the biorthogonal basis of its anchor cell
      const KFunctional K(mesh, anchors, c.family, c.r, c.k);
      for (int g = 0; g < sys.size(); ++g) {
        const SimplexRef S = V.owner(g);
        if (S.dim == n) continue;
        const int i = g - V.offset(S);
        const int T = K.anchor_cell(S);
        for (int h = 0; h < sys.size(); ++h) {
          const PolyForm L = sys.restrict(h, T);
          if (L.is_zero() && g != h) continue;
          kmat = std::max(kmat, std::abs(K(S, i, sample_local(T, L, K.order())) - (g == h ? 1.0 : 0.0)));
        }
      }
    }
  }
  res.metrics = {below("clement coefficient residual", cl, tol::reproduction),
                 below("clement_bc coefficient residual", clbc, tol::reproduction),
                 below("scott_zhang coefficient residual", sz, tol::reproduction),
                 below("scott_zhang (U = boundary) coefficient residual", szbc, tol::reproduction),
                 below("K matrix on the biorthogonal basis - I", kmat, tol::reproduction)};
  res.notes.push_back("unit square level 1 (r <= 3) and unit cube level 0 (r <= 2), all k, both families");
  return res;
}

// ---------------------------------------------------------------- criterion 6

struct RateCase {
  int n;
  Config c;
  InterpolantKind interp;
  bool bc;
};

std::string rate_label(const RateCase& rc) {
  return label(rc.n, rc.c) + " " + to_string(rc.interp) + (rc.bc ? " bc_trig" : " trig");
}

StudyConfig rate_config(int n, const Config& c, InterpolantKind interp, bool bc, unsigned seed) {
  StudyConfig s;
  s.dim = n;
  s.levels = n == 2 ? std::vector<int>{3, 4, 5, 6} : std::vector<int>{2, 3, 4, 5};
  s.family = c.family;
  s.r = c.r;
  s.k = c.k;
  s.interpolant = interp;
  s.boundary = bc ? BoundaryKind::Full : BoundaryKind::None;
  s.target = bc ? "bc_trig" : "trig";
  s.seed = seed;
  return s;
}

void add_rate_metrics(CriterionResult& res, const RateReport& rep, const std::string& name, const VerifyOptions& opt) {
  const double m = rep.expected;
  res.metrics.push_back(within(name + " slope (m=" + std::to_string(rep.expected) + ")", rep.slope, m - tol::rate,
                               m + tol::rate));
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: slope %.3f (without coarsest %.3f, last two %.3f), finest error %.3e, %.1fs", name.c_str(),
                rep.slope, rep.slope_fine, rep.slope_last, rep.levels.back().error, rep.seconds);
  res.notes.push_back(buf);
  say(opt, buf);
}

CriterionResult rate_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "convergence rates, p = 2, 4 uniform levels";
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RateCase> cases;
  auto add = [&](int n, Config c) {
    for (InterpolantKind i : {InterpolantKind::Clement, InterpolantKind::ClementBC, InterpolantKind::ScottZhang})
      cases.push_back({n, c, i, false});
    if (c.k < n)
      for (InterpolantKind i : {InterpolantKind::ClementBC, InterpolantKind::ScottZhang}) cases.push_back({n, c, i, true});
  };
  for (int r = 1; r <= 2; ++r)
    for (Config c : {Config{Family::Full, r, 0}, Config{Family::Trimmed, r, 1}, Config{Family::Full, r, 1},
                     Config{Family::Trimmed, r, 2}})
      add(2, c);
  for (Config c : {Config{Family::Full, 1, 0}, Config{Family::Trimmed, 1, 1}, Config{Family::Trimmed, 1, 2}}) add(3, c);
  for (const RateCase& rc : cases) {
    const RateReport rep = run_study(rate_config(rc.n, rc.c, rc.interp, rc.bc, opt.seed));
    add_rate_metrics(res, rep, rate_label(rc), opt);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.metrics.push_back(below("runtime [s]", seconds, tol::rate_seconds));
  res.notes.push_back("square levels 3..6, cube levels 2..5; least-squares slope over all four levels");
  return res;
}

// ---------------------------------------------------------------- criterion 7

CriterionResult bc_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "boundary conditions preserved on U";
  double trace = 0, zeroed = 0;
  for (int n = 2; n <= 3; ++n) {
    const auto mesh = unit_domain(n, 1, 2);
    const auto U = BoundarySubcomplex::full_boundary(mesh);
    const auto anchors = choose_anchors(mesh, U);
    for (const Config& c : all_configs(n, 2, false)) {
      const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
      const SampledForm w = manufactured_target("bc_trig", {n, c.k, c.r, opt.seed});
      const InterpolantResult out[2] = {clement_bc(w, sys, U), scott_zhang(w, sys, anchors, U)};
      zeroed = std::max(zeroed, out[1].max_zeroed);
      {
        char buf[96];
        std::snprintf(buf, sizeof buf, ": max zeroed %.2e", out[1].max_zeroed);
        say(opt, label(n, c) + buf);
      }
      for (const auto& res_i : out)
        for (int cell = 0; cell < mesh.num_cells(); ++cell)
          for (int m = c.k; m < n; ++m)
            for (Mask F : subsets(n + 1, m + 1))
              if (U.contains(mesh.cell_face(cell, F))) trace = std::max(trace, res_i.local[cell].trace(F).max_abs_coef());
    }
  }
  res.metrics = {below("max trace on U simplices", trace, tol::bc_trace),
                 below("max |K_{S,i}| for S in U before zeroing", zeroed, tol::bc_zeroed)};
  res.notes.push_back("bc_trig targets, U = whole boundary, unit square and unit cube level 2, r <= 2");
  return res;
}

// ---------------------------------------------------------------- criterion 8

std::vector<std::vector<int>> touching(const SimplicialComplex& mesh) {
  std::vector<std::vector<int>> vc(mesh.num_vertices()), out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.vertices_of({mesh.dim(), c})) vc[v].push_back(c);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int v : mesh.vertices_of({mesh.dim(), c})) out[c].insert(out[c].end(), vc[v].begin(), vc[v].end());
    std::sort(out[c].begin(), out[c].end());
    out[c].erase(std::unique(out[c].begin(), out[c].end()), out[c].end());
  }
  return out;
}

CriterionResult broken_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "broken Bramble-Hilbert bound with a mesh-independent constant";
  for (int n = 2; n <= 3; ++n) {
    const std::vector<Config> configs =
        n == 2 ? std::vector<Config>{{Family::Full, 1, 0}, {Family::Trimmed, 1, 1}, {Family::Full, 1, 1},
                                     {Family::Trimmed, 1, 2}}
               : std::vector<Config>{{Family::Full, 1, 0}, {Family::Trimmed, 1, 1}, {Family::Trimmed, 1, 2}};
    for (const Config& c : configs) {
      const SampledForm w = manufactured_target("broken_fe", {n, c.k, c.r, opt.seed});
      std::vector<double> C;
      for (int level = 1; level <= 3; ++level) {
        const auto mesh = unit_domain(n, 1, level);
        const auto empty = BoundarySubcomplex::empty(mesh);
        const auto sys = build_biorthogonal(mesh, c.family, c.r, c.k);
        const InterpolantResult J = scott_zhang(w, sys, choose_anchors(mesh, empty), empty);
        const int order = 2 * c.r + 4;
        const auto err = cell_errors(mesh, w, J.local, 2.0, order);
        std::vector<PolyForm> best;
        for (int cell = 0; cell < mesh.num_cells(); ++cell)
          best.push_back(CellProjection(mesh, cell, c.family, c.r, c.k, order).apply(w));
        const auto best_err = cell_errors(mesh, w, best, 2.0, order);
        const auto best_derr = cell_errors(mesh, w, best, 2.0, order, true);
        const auto touch = touching(mesh);
        double worst = 0.0;
        for (int cell = 0; cell < mesh.num_cells(); ++cell) {
          double rhs = 0.0;
          for (int t : touch[cell]) rhs += best_err[t] + mesh.diameter({n, t}) * best_derr[t];
          if (rhs > 0) worst = std::max(worst, err[cell] / rhs);
        }
        C.push_back(worst);
      }
      double var = 1.0;
      for (std::size_t l = 1; l < C.size(); ++l) var = std::max({var, C[l] / C[l - 1], C[l - 1] / C[l]});
      const std::string name = label(n, c);
      res.metrics.push_back(within(name + " C level-to-level factor", var, 1.0, tol::broken_variation));
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: C = %.4f, %.4f, %.4f on levels 1..3", name.c_str(), C[0], C[1], C[2]);
      res.notes.push_back(buf);
      say(opt, buf);
    }
  }
  return res;
}

// ---------------------------------------------------------------- criterion 9

SimplicialComplex one_tet() {
  Eigen::MatrixXd X(3, 4);
  X << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  return SimplicialComplex::build(X, {{0, 1, 2, 3}});
}

// central-difference grad / curl / div of a proxy field against its derivative
double fd_residual(const ProxyField& u, Rng& rng) {
  std::uniform_real_distribution<double> U(0.1, 0.9);
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    double x[3] = {U(rng), U(rng), U(rng)};
    Eigen::Matrix3d J;  // J(i, j) = d u_i / d x_j
    J.setZero();
    for (int j = 0; j < 3; ++j) {
      double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
      xp[j] += h;
      xm[j] -= h;
      const Eigen::VectorXd d = (u.eval(xp) - u.eval(xm)) / (2 * h);
      for (int i = 0; i < d.size(); ++i) J(i, j) = d(i);
    }
    Eigen::VectorXd fd;
    switch (u.kind) {
      case ProxyKind::Scalar: fd = J.row(0).transpose(); break;
      case ProxyKind::Circulation:
        fd = Eigen::Vector3d(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
        break;
      case ProxyKind::Flux: fd = Eigen::VectorXd::Constant(1, J.trace()); break;
      case ProxyKind::Density: continue;
    }
    Eigen::VectorXd exact(fd.size());
    u.derivative(x, exact.data());
    worst = std::max(worst, (fd - exact).cwiseAbs().maxCoeff());
  }
  return worst;
}

CriterionResult proxy_suite(const VerifyOptions& opt) {
  CriterionResult res;
  res.title = "vector proxies: dimensions, curl/div, rates";
  const auto tet = one_tet();
  const auto none = BoundarySubcomplex::empty(tet);
  const int ned1 = space_by_name("ned1", 1, tet, none).dimension();
  const int rt = space_by_name("rt", 1, tet, none).dimension();
  const int bdm = space_by_name("bdm", 1, tet, none).dimension();
  res.metrics.push_back(within("ned1 r=1 dimension - edges", ned1 - tet.num_simplices(1), 0, 0));
  res.metrics.push_back(within("rt r=1 dimension - faces", rt - tet.num_simplices(2), 0, 0));
  res.metrics.push_back(within("bdm r=1 dimension - rank", bdm - span_rank(spanning_set(3, Family::Full, 1, 2), 1), 0, 0));
  Rng rng(opt.seed + 9);
  double fd = 0.0;
  for (int k = 0; k <= 2; ++k) fd = std::max(fd, fd_residual(from_form(manufactured_target("trig", {3, k, 1, 0})), rng));
  res.metrics.push_back(below("grad/curl/div finite-difference residual", fd, tol::curl_div));
  for (const std::string name : {"rt", "ned1"}) {
    StudyConfig s = rate_config(3, {proxy_space(name).family, 1, proxy_space(name).k}, InterpolantKind::ScottZhang,
                                false, opt.seed);
    s.proxy = name;
    add_rate_metrics(res, run_study(s), name + " r=1 trig", opt);
  }
  return res;
}

}  // namespace

CriterionResult run_criterion(int id, const VerifyOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult res;
  switch (id) {
    case 1: res = algebra_suite(options); break;
    case 2: res = space_suite(options); break;
    case 3: res = biorth_suite(options); break;
    case 4: res = facetdual_suite(options); break;
    case 5: res = reproduction_suite(options); break;
    case 6: res = rate_suite(options); break;
    case 7: res = bc_suite(options); break;
    case 8: res = broken_suite(options); break;
    case 9: res = proxy_suite(options); break;
    default: throw Error(ErrorCode::InvalidConfig, "criteria are numbered 1..9");
  }
  res.id = id;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (id == 1) res.metrics.push_back(below("runtime [s]", res.seconds, tol::algebra_seconds));
  return res;
}

}  // namespace feqi
