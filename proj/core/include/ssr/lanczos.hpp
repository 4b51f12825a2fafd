#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssr {

// y = A x for a symmetric operator A of dimension m.
using LinearMap = std::function<void(const double* x, double* y)>;

struct EigenOptions {
  double tol = 1e-10;
  int max_iter = 100;
  std::uint64_t seed = 0;
};

struct EigenResult {
  double value = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  int iterations = 0;
  double start_rayleigh = 0.0;
  bool converged = false;
};

class EigenSolverError : public std::runtime_error {
public:
  EigenSolverError(const std::string& what, EigenResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const EigenResult& best() const noexcept { return best_; }

private:
  EigenResult best_;
};

// Lanczos with full reorthogonalization. `start` may be empty, in which case a
// seeded random vector is used. Throws EigenSolverError carrying the best
// iterate when the residual test fails within max_iter steps.
EigenResult smallest_eigenpair(const LinearMap& apply, std::size_t dim, const EigenOptions& opts,
                               std::span<const double> start = {});

}  // namespace ssr
