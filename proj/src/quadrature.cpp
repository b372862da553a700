#include "feqi/quadrature.hpp"

#include "feqi/combinatorics.hpp"
#include "feqi/error.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace feqi {

namespace {

QuadratureRule grundmann_moeller(int n, int order) {
  if (n == 0) {
    QuadratureRule q;
    q.points = Eigen::MatrixXd::Zero(0, 1);
    q.weights = Eigen::VectorXd::Ones(1);
    return q;
  }
  const int s = order / 2;  // degree 2s+1 >= order
  const int d = 2 * s + 1;
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> wts;
  for (int i = 0; i <= s; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    const double w = sign * std::pow(2.0, -2 * s) * std::pow(d + n - 2 * i, d) /
                     (factorial(i) * factorial(d + n - i));
    // beta ranges over (n+1)-tuples with |beta| = s - i
    for (const auto& beta : multi_indices_exact(n + 1, s - i)) {
      Eigen::VectorXd p(n);
      for (int j = 0; j < n; ++j) p(j) = (2.0 * beta[j + 1] + 1.0) / (d + n - 2 * i);
      pts.push_back(p);
      wts.push_back(w);
    }
  }
  QuadratureRule q;
  q.points.resize(n, static_cast<Eigen::Index>(pts.size()));
  q.weights.resize(static_cast<Eigen::Index>(wts.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    q.points.col(i) = pts[i];
    q.weights(i) = wts[i];
    total += wts[i];
  }
  // the raw weights sum to 1; rescale to the reference volume
  q.weights *= (1.0 / factorial(n)) / total;
  return q;
}

QuadratureRule conical_product(int n, int order) {
  if (n == 0) return grundmann_moeller(0, order);
  const int m = order / 2 + 1;
  std::vector<QuadratureRule> axis;
  for (int j = 0; j < n; ++j) axis.push_back(gauss_jacobi(m, n - 1 - j));
  int total = 1;
  for (int j = 0; j < n; ++j) total *= m;
  QuadratureRule q;
  q.points.resize(n, total);
  q.weights.resize(total);
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    double w = 1.0, scale = 1.0;
    for (int j = 0; j < n; ++j) {
      const int i = rest % m;
      rest /= m;
      const double u = axis[j].points(0, i);
      q.points(j, idx) = scale * u;
      w *= axis[j].weights(i);
      scale *= 1.0 - u;
    }
    q.weights(idx) = w;
  }
  return q;
}

using RuleBuilder = QuadratureRule (*)(int, int);

const QuadratureRule& cached_rule(int dim, int order, RuleBuilder build, int which) {
  static std::mutex guard;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<QuadratureRule>> cache;
  if (dim < 0 || dim > kMaxDim) throw Error(ErrorCode::WrongDimension, "simplex rule dimension");
  order = std::max(order, 1);
  std::lock_guard lock(guard);
  auto& slot = cache[{which, dim, order}];
  if (!slot) slot = std::make_unique<QuadratureRule>(build(dim, order));
  return *slot;
}

}  // namespace

const QuadratureRule& simplex_rule(int dim, int order) { return cached_rule(dim, order, conical_product, 0); }

const QuadratureRule& grundmann_moeller_rule(int dim, int order) {
  return cached_rule(dim, order, grundmann_moeller, 1);
}

QuadratureRule gauss_jacobi(int n, int alpha) {
  // Golub-Welsch on [-1, 1] for (1 - x)^alpha, then mapped to [0, 1]
  const double a = alpha;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a;
    J(k, k) = k == 0 ? -a / (a + 2.0) : -a * a / (s * (s + 2.0));
    if (k + 1 < n) {
      const double kk = k + 1.0, t = 2.0 * kk + a;
      J(k, k + 1) = J(k + 1, k) = std::sqrt(4.0 * kk * (kk + a) * kk * (kk + a) / (t * t * (t + 1.0) * (t - 1.0)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  QuadratureRule q;
  q.points.resize(1, n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    q.points(0, i) = 0.5 * (x + 1.0);
    q.weights(i) = mu0 * v * v / std::pow(2.0, a + 1.0);
  }
  return q;
}

const QuadratureRule& simplex_lattice(int dim, int m) {
  static std::mutex guard;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(guard);
  auto& rule = cache[{dim, m}];
  if (rule.weights.size() == 0) {
    const auto pts = multi_indices_upto(dim, m);
    rule.points.resize(dim, static_cast<int>(pts.size()));
    rule.weights = Eigen::VectorXd::Ones(static_cast<int>(pts.size()));
    for (std::size_t q = 0; q < pts.size(); ++q)
      for (int i = 0; i < dim; ++i) rule.points(i, static_cast<int>(q)) = static_cast<double>(pts[q][i]) / m;
  }
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule q;
  q.points.resize(1, n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.points(0, i) = 0.5 * (a + b) + 0.5 * (b - a) * x;
    q.weights(i) = (b - a) / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

const QuadratureRule& unit_ball_rule(int dim, int radial, int angular) {
  static std::mutex guard;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(guard);
  auto& slot = cache[{dim, radial, angular}];
  if (slot) return *slot;
  const QuadratureRule gr = gauss_legendre(radial, 0.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> wts;
  const double pi = std::numbers::pi;
  if (dim == 1) {
    const QuadratureRule g = gauss_legendre(radial, -1.0, 1.0);
    for (int i = 0; i < radial; ++i) {
      pts.push_back(Eigen::VectorXd::Constant(1, g.points(0, i)));
      wts.push_back(g.weights(i));
    }
  } else if (dim == 2) {
    for (int i = 0; i < radial; ++i) {
      const double r = gr.points(0, i);
      for (int j = 0; j < angular; ++j) {
        const double th = 2.0 * pi * (j + 0.5) / angular;
        Eigen::VectorXd p(2);
        p << r * std::cos(th), r * std::sin(th);
        pts.push_back(p);
        wts.push_back(gr.weights(i) * r * 2.0 * pi / angular);
      }
    }
  } else if (dim == 3) {
    const QuadratureRule gc = gauss_legendre((angular + 1) / 2, -1.0, 1.0);
    for (int i = 0; i < radial; ++i) {
      const double r = gr.points(0, i);
      for (int c = 0; c < gc.size(); ++c) {
        const double ct = gc.points(0, c);
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < angular; ++j) {
          const double ph = 2.0 * pi * (j + 0.5) / angular;
          Eigen::VectorXd p(3);
          p << r * st * std::cos(ph), r * st * std::sin(ph), r * ct;
          pts.push_back(p);
          wts.push_back(gr.weights(i) * r * r * gc.weights(c) * 2.0 * pi / angular);
        }
      }
    }
  } else {
    throw Error(ErrorCode::WrongDimension, "unit_ball_rule supports dimensions 1 to 3");
  }
  auto q = std::make_unique<QuadratureRule>();
  q->points.resize(dim, static_cast<Eigen::Index>(pts.size()));
  q->weights.resize(static_cast<Eigen::Index>(wts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    q->points.col(i) = pts[i];
    q->weights(i) = wts[i];
  }
  slot = std::move(q);
  return *slot;
}

}  // namespace feqi
