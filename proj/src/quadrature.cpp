#include "orlat/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>

#include "orlat/error.hpp"

namespace orlat::quad {

namespace {

// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  const auto n = diag.size();
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

Rule make_legendre(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Rule rule = golub_welsch(diag, off, 2.0);
  // Polish nodes with Newton on P_n for full double precision.
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Rule make_laguerre(int n) {
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) off(k - 1) = k;
  return golub_welsch(diag, off, 1.0);
}

template <typename Make>
const Rule& cached(std::map<int, Rule>& cache, std::mutex& mutex, int n, Make make) {
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

double panel(const std::function<double(double)>& f, double a, double b, const Rule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::map<int, Rule> cache;
  static std::mutex mutex;
  return cached(cache, mutex, n, make_legendre);
}

const Rule& gauss_laguerre(int n) {
  static std::map<int, Rule> cache;
  static std::mutex mutex;
  return cached(cache, mutex, n, make_laguerre);
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_panels) {
  if (!(b > a)) return 0.0;
  const Rule& rule = gauss_legendre(15);
  struct Pending {
    double a, b, whole;
  };
  std::vector<Pending> stack{{a, b, panel(f, a, b, rule)}};
  double total = 0.0;
  int panels = 0;
  const double width = b - a;
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    const double left = panel(f, p.a, mid, rule);
    const double right = panel(f, mid, p.b, rule);
    const double share = abs_tol * (p.b - p.a) / width;
    if (std::abs(left + right - p.whole) <= share || (p.b - p.a) < 1e-14 * width) {
      total += left + right;
      continue;
    }
    if (++panels > max_panels) {
      throw Error(ErrorCode::QuadratureNonConvergence, "adaptive Gauss-Legendre exceeded panel budget");
    }
    stack.push_back({p.a, mid, left});
    stack.push_back({mid, p.b, right});
  }
  return total;
}

double expect_exp1(const std::function<double(double)>& f, double abs_tol, int max_nodes) {
  auto estimate = [&](int n) {
    const Rule& rule = gauss_laguerre(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
    return sum;
  };
  double previous = estimate(16);
  for (int n = 32; n <= max_nodes; n *= 2) {
    const double current = estimate(n);
    if (std::abs(current - previous) < abs_tol) return current;
    previous = current;
  }
  throw Error(ErrorCode::QuadratureNonConvergence, "Gauss-Laguerre node doubling did not settle");
}

}  // namespace orlat::quad
