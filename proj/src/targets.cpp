#include "feqi/targets.hpp"

#include "feqi/error.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace feqi {

SampledForm form_from_fields(int n, int k, std::vector<ScalarField> comps, std::string name) {
  if (static_cast<int>(comps.size()) != num_components(n, k)) {
    throw Error(ErrorCode::DegreeMismatch, "wrong number of coefficient fields");
  }
  SampledForm w;
  w.n = n;
  w.k = k;
  w.name = std::move(name);
  auto shared = std::make_shared<const std::vector<ScalarField>>(std::move(comps));
  w.value = [shared](const double* x, double* out) {
    for (std::size_t c = 0; c < shared->size(); ++c) out[c] = (*shared)[c].value(x);
  };
  const int nd = num_components(n, k + 1);
  // (component, direction) -> (target component, sign) of d
  struct Term {
    int c, j, out, sign;
  };
  std::vector<Term> terms;
  const auto& I = subsets(n, k);
  for (std::size_t c = 0; c < I.size(); ++c)
    for (int j = 0; j < n; ++j) {
      const int s = wedge_sign(Mask(1) << j, I[c]);
      if (s != 0) terms.push_back({static_cast<int>(c), j, subset_rank(n, I[c] | (Mask(1) << j)), s});
    }
  w.exterior_derivative = [shared, n, nd, terms](const double* x, double* out) {
    std::fill(out, out + nd, 0.0);
    double g[kMaxDim * kMaxDim];
    for (std::size_t c = 0; c < shared->size(); ++c) (*shared)[c].gradient(x, g + n * c);
    for (const Term& t : terms) out[t.out] += t.sign * g[n * t.c + t.j];
  };
  return w;
}

namespace {

struct PiecewiseData {
  std::shared_ptr<const SimplicialComplex> mesh;
  std::vector<CellFrame> frames;
  std::vector<PolyForm> local, dlocal;
  std::vector<Eigen::VectorXd> lo, hi;  // bounding boxes
  std::uint64_t id = next_id();

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
  }

  // barycentric margin of x in the cell (>= 0 inside)
  double margin(int c, const double* x, Eigen::VectorXd& t) const {
    const int n = mesh->dim();
    t = frames[c].Einv * (Eigen::Map<const Eigen::VectorXd>(x, n) - frames[c].origin);
    return std::min(t.minCoeff(), 1.0 - t.sum());
  }

  int locate(const double* x, Eigen::VectorXd& t) const {
    thread_local std::uint64_t owner = 0;
    thread_local int last = -1;
    if (owner == id && last >= 0 && margin(last, x, t) > 1e-12) return last;
    const int n = mesh->dim();
    int best = -1;
    double best_margin = -1e300;
    Eigen::VectorXd tc;
    for (int c = 0; c < mesh->num_cells(); ++c) {
      bool out = false;
      for (int i = 0; i < n && !out; ++i) out = x[i] < lo[c](i) - 1e-9 || x[i] > hi[c](i) + 1e-9;
      if (out) continue;
      const double m = margin(c, x, tc);
      if (m > best_margin) {
        best_margin = m;
        best = c;
        t = tc;
      }
      if (m >= -1e-12) {
        best = c;
        t = tc;
        break;
      }
    }
    if (best < 0) {
      for (int c = 0; c < mesh->num_cells(); ++c) {
        const double m = margin(c, x, tc);
        if (m > best_margin) {
          best_margin = m;
          best = c;
          t = tc;
        }
      }
    }
    owner = id;
    last = best;
    return best;
  }
};

}  // namespace

SampledForm piecewise_form(std::shared_ptr<const SimplicialComplex> mesh, std::vector<PolyForm> local,
                           std::string name) {
  if (static_cast<int>(local.size()) != mesh->num_cells()) {
    throw Error(ErrorCode::HostMismatch, "one local form per cell is required");
  }
  const int n = mesh->dim();
  const int k = local.empty() ? 0 : local.front().degree();
  auto data = std::make_shared<PiecewiseData>();
  data->mesh = mesh;
  for (int c = 0; c < mesh->num_cells(); ++c) {
    data->frames.push_back(cell_frame(*mesh, c));
    data->dlocal.push_back(local[c].d());
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, 1e300), hi = Eigen::VectorXd::Constant(n, -1e300);
    for (int v : mesh->vertices_of({n, c})) {
      lo = lo.cwiseMin(mesh->vertex(v));
      hi = hi.cwiseMax(mesh->vertex(v));
    }
    data->lo.push_back(lo);
    data->hi.push_back(hi);
  }
  data->local = std::move(local);
  SampledForm w;
  w.n = n;
  w.k = k;
  w.name = std::move(name);
  w.value = [data, k](const double* x, double* out) {
    Eigen::VectorXd t;
    const int c = data->locate(x, t);
    const Eigen::VectorXd v = data->frames[c].to_cartesian[k] * data->local[c].evaluate(t.data());
    std::copy(v.data(), v.data() + v.size(), out);
  };
  w.exterior_derivative = [data, k, n](const double* x, double* out) {
    if (k >= n) return;
    Eigen::VectorXd t;
    const int c = data->locate(x, t);
    const Eigen::VectorXd v = data->frames[c].to_cartesian[k + 1] * data->dlocal[c].evaluate(t.data());
    std::copy(v.data(), v.data() + v.size(), out);
  };
  return w;
}

SampledForm fe_form(const GlobalFESpace& space, const Eigen::VectorXd& coefficients) {
  auto mesh = std::make_shared<const SimplicialComplex>(space.mesh());
  std::vector<PolyForm> local;
  for (int c = 0; c < mesh->num_cells(); ++c) local.push_back(space.restrict(coefficients, c));
  return piecewise_form(mesh, std::move(local), "fe_form");
}

namespace {

constexpr double kPi = std::numbers::pi;

// prod_j sin(nu_j x_j + theta_j), with parameters varying per component
ScalarField trig_field(int n, int c) {
  std::array<double, kMaxDim> nu{}, th{};
  for (int j = 0; j < n; ++j) {
    nu[j] = kPi * (1.0 + 0.25 * ((c + 2 * j) % 3));
    th[j] = 0.25 + 0.5 * ((c + j) % 4);
  }
  ScalarField f;
  f.value = [n, nu, th](const double* x) {
    double v = 1.0;
    for (int j = 0; j < n; ++j) v *= std::sin(nu[j] * x[j] + th[j]);
    return v;
  };
  f.gradient = [n, nu, th](const double* x, double* g) {
    double s[kMaxDim], c[kMaxDim];
    for (int j = 0; j < n; ++j) {
      s[j] = std::sin(nu[j] * x[j] + th[j]);
      c[j] = nu[j] * std::cos(nu[j] * x[j] + th[j]);
    }
    for (int j = 0; j < n; ++j) {
      double v = c[j];
      for (int i = 0; i < n; ++i)
        if (i != j) v *= s[i];
      g[j] = v;
    }
  };
  return f;
}

// f * prod_j x_j (1 - x_j)
ScalarField vanishing_on_boundary(int n, ScalarField f) {
  ScalarField h;
  auto bubble = [n](const double* x) {
    double b = 1.0;
    for (int j = 0; j < n; ++j) b *= x[j] * (1.0 - x[j]);
    return b;
  };
  h.value = [f, bubble](const double* x) { return f.value(x) * bubble(x); };
  h.gradient = [n, f, bubble](const double* x, double* g) {
    double gf[kMaxDim];
    f.gradient(x, gf);
    const double fv = f.value(x), b = bubble(x);
    for (int j = 0; j < n; ++j) {
      double db = 1.0 - 2.0 * x[j];
      for (int i = 0; i < n; ++i)
        if (i != j) db *= x[i] * (1.0 - x[i]);
      g[j] = gf[j] * b + fv * db;
    }
  };
  return h;
}

}  // namespace

SampledForm manufactured_target(const std::string& name, const TargetParams& p) {
  if (p.n < 1 || p.n > kMaxDim || p.k < 0 || p.k > p.n) {
    throw Error(ErrorCode::WrongDimension, "target degree or dimension out of range");
  }
  const int nc = num_components(p.n, p.k);
  if (name == "zero") return SampledForm::zero(p.n, p.k);
  if (name == "trig" || name == "bc_trig") {
    std::vector<ScalarField> comps;
    for (int c = 0; c < nc; ++c) {
      ScalarField f = trig_field(p.n, c);
      comps.push_back(name == "trig" ? f : vanishing_on_boundary(p.n, f));
    }
    return form_from_fields(p.n, p.k, std::move(comps), name);
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  if (name == "poly") {
    const FormCoordinates fc(p.n, p.k, p.r);
    Eigen::VectorXd v(fc.size());
    for (int i = 0; i < v.size(); ++i) v(i) = U(rng);
    SampledForm w = SampledForm::from_polyform(fc.from_vector(v));
    w.name = name;
    return w;
  }
  if (name == "broken_fe") {
    auto coarse = std::make_shared<const SimplicialComplex>(unit_domain(p.n, 1, 0));
    const GlobalFESpace V(*coarse, BoundarySubcomplex::empty(*coarse), Family::Trimmed, p.r + 1, p.k);
    Eigen::VectorXd c(V.size());
    for (int i = 0; i < c.size(); ++i) c(i) = U(rng);
    std::vector<PolyForm> local;
    for (int t = 0; t < coarse->num_cells(); ++t) local.push_back(V.restrict(c, t));
    return piecewise_form(coarse, std::move(local), name);
  }
  throw Error(ErrorCode::UnknownTarget, "unknown target '" + name + "'");
}

}  // namespace feqi
