#include "ssr/lanczos.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "ssr/errors.hpp"

namespace ssr {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double nrm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void orthogonalize(std::vector<double>& w, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) axpy(-dot(q, w), q, w);
}

// Random unit vector orthogonal to `basis`; empty if none can be found.
std::vector<double> random_orthogonal(std::size_t dim, const std::vector<std::vector<double>>& basis,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> v(dim);
    for (double& x : v) x = normal(rng);
    orthogonalize(v, basis);
    double n = nrm(v);
    if (n > 1e-8) {
      for (double& x : v) x /= n;
      return v;
    }
  }
  return {};
}

}  // namespace

EigenResult smallest_eigenpair(const LinearMap& apply, std::size_t dim, const EigenOptions& opts,
                               std::span<const double> start) {
  if (dim == 0) throw DomainError("eigenproblem dimension must be positive");
  if (opts.max_iter < 1) throw DomainError("max_iter must be at least 1");
  if (!start.empty() && start.size() != dim) throw ShapeError("start vector has wrong dimension");

  std::mt19937_64 rng(opts.seed);
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;

  std::vector<double> q(dim, 0.0);
  if (!start.empty()) std::copy(start.begin(), start.end(), q.begin());
  double qn = nrm(q);
  if (!(qn > 0.0) || !std::isfinite(qn)) {
    q = random_orthogonal(dim, basis, rng);
  } else {
    for (double& x : q) x /= qn;
  }

  EigenResult best;
  std::vector<double> w(dim);
  std::vector<double> ritz;
  int injected_at = -1;
  double scale = 1.0;

  for (int j = 0; j < opts.max_iter; ++j) {
    basis.push_back(q);
    apply(basis.back().data(), w.data());
    for (double x : w)
      if (!std::isfinite(x)) throw NumericError("operator produced a non-finite value");
    double a = dot(basis.back(), w);
    if (j == 0) best.start_rayleigh = a;
    alpha.push_back(a);
    if (j > 0) axpy(-beta.back(), basis[j - 1], w);
    axpy(-a, basis.back(), w);
    orthogonalize(w, basis);
    double b = nrm(w);
    scale = std::max({scale, std::abs(a), b});

    const int m = j + 1;
    double theta;
    Eigen::VectorXd y;
    if (m == 1) {
      theta = a;
      y = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      theta = es.eigenvalues()[0];
      y = es.eigenvectors().col(0);
    }
    const double residual = std::abs(b * y[m - 1]);

    ritz.assign(dim, 0.0);
    for (int i = 0; i < m; ++i) axpy(y[i], basis[i], ritz);
    double rn = nrm(ritz);
    for (double& x : ritz) x /= rn;

    best.value = theta;
    best.vector = ritz;
    best.residual = residual;
    best.iterations = m;

    const bool full_space = static_cast<std::size_t>(m) >= dim;
    const bool breakdown = b <= 1e-12 * scale;
    const int settle = static_cast<int>(std::min<std::size_t>(dim - std::min<std::size_t>(dim, m), 8));
    const bool settled = injected_at < 0 || (m - injected_at) >= settle;
    const bool small = residual <= opts.tol * std::max(1.0, std::abs(theta));
    if (full_space || (small && settled && !breakdown) || (breakdown && injected_at >= 0)) {
      best.converged = true;
      return best;
    }

    if (breakdown) {
      // The Krylov space is invariant; continue in its orthogonal complement.
      q = random_orthogonal(dim, basis, rng);
      if (q.empty()) {
        best.converged = true;
        return best;
      }
      beta.push_back(0.0);
      injected_at = m;
    } else {
      beta.push_back(b);
      for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / b;
    }
  }
  throw EigenSolverError("Lanczos did not converge within " + std::to_string(opts.max_iter) +
                             " iterations (residual " + std::to_string(best.residual) + ")",
                         best);
}

}  // namespace ssr
