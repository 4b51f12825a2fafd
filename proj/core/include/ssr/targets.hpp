#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ssr/laminate.hpp"

namespace ssr {

struct TargetEntry {
  LaminationPoint target;
  std::optional<StackingSequence> witness;
};

struct TargetProvenance {
  std::string method;  // "inequivalent", "kde" or "explicit"
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  std::vector<double> bandwidth;
};

struct TargetSet {
  std::vector<TargetEntry> entries;
  TargetProvenance provenance;
};

// Witnesses drawn from pairwise distinct dihedral orbits of valid sequences.
TargetSet inequivalent_targets(const SsrProblem& problem, std::size_t count, std::uint64_t seed);

// Sequential draw: each label is uniform over the labels allowed after the
// previous one by every disorientation constraint; other constraints are
// enforced by rejection.
StackingSequence random_valid_sequence(const SsrProblem& problem, std::mt19937_64& rng);
StackingSequence random_valid_sequence(const SsrProblem& problem, std::uint64_t seed);

// Product Gaussian kernel with Scott's-rule bandwidth per dimension.
// Dimensions with zero spread are left out of the kernel.
class GaussianKde {
public:
  explicit GaussianKde(std::vector<std::vector<double>> points);

  double density(const std::vector<double>& x) const;
  const std::vector<double>& bandwidth() const { return bandwidth_; }
  std::size_t active_dimensions() const { return active_.size(); }

private:
  std::vector<std::vector<double>> points_;
  std::vector<double> bandwidth_;
  std::vector<std::size_t> active_;
};

// Indices of k items drawn without replacement with probability proportional
// to the weights (exponential-keys method).
std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights, std::size_t k,
                                                             std::mt19937_64& rng);

// 1 / density at each point, from a KDE fitted to the same points.
std::vector<double> kde_inverse_weights(const std::vector<std::vector<double>>& points,
                                        std::vector<double>* bandwidth = nullptr);

TargetSet kde_uniform_targets(const SsrProblem& problem, std::size_t n_samples, std::size_t n_targets,
                              std::uint64_t seed);

}  // namespace ssr
