#include "ssr/targets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "ssr/errors.hpp"
#include "ssr/oracle.hpp"

namespace ssr {

namespace {

constexpr int kRejectionLimit = 100000;

// allowed[a][b]: label b may follow label a under every disorientation limit.
std::vector<std::vector<bool>> allowed_transitions(const SsrProblem& problem) {
  const int d = problem.states();
  std::vector<std::vector<bool>> ok(static_cast<std::size_t>(d + 1), std::vector<bool>(static_cast<std::size_t>(d + 1), true));
  for (const auto& c : problem.constraints())
    if (const auto* x = std::get_if<Disorientation>(&c))
      for (auto [a, b] : disorientation_violation_pairs(problem.angles(), x->max_delta_deg)) ok[a][b] = false;
  return ok;
}

TargetEntry entry_for(const SsrProblem& problem, const StackingSequence& seq) {
  return {lamination_parameters(problem, seq), seq};
}

}  // namespace

StackingSequence random_valid_sequence(const SsrProblem& problem, std::mt19937_64& rng) {
  const int d = problem.states(), n = problem.plies();
  const auto ok = allowed_transitions(problem);
  for (int attempt = 0; attempt < kRejectionLimit; ++attempt) {
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    labels.push_back(std::uniform_int_distribution<int>(1, d)(rng));
    std::vector<int> options;
    for (int i = 1; i < n; ++i) {
      options.clear();
      for (int s = 1; s <= d; ++s)
        if (ok[labels.back()][s]) options.push_back(s);
      if (options.empty())
        throw GenerationError("no valid continuation after label " + std::to_string(labels.back()));
      labels.push_back(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]);
    }
    StackingSequence seq(std::move(labels), d);
    if (satisfies_all(problem, seq)) return seq;
  }
  throw GenerationError("rejection sampling did not find a valid sequence");
}

StackingSequence random_valid_sequence(const SsrProblem& problem, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_valid_sequence(problem, rng);
}

TargetSet inequivalent_targets(const SsrProblem& problem, std::size_t count, std::uint64_t seed) {
  if (!problem.angles().evenly_spaced())
    throw UnsupportedError("symmetry-inequivalent targets need an evenly spaced angle set");
  std::mt19937_64 rng(seed);
  std::vector<StackingSequence> reps;
  if (sequence_count(problem.states(), problem.plies()) <= kExhaustiveLimit) {
    std::set<StackingSequence> seen;
    for_each_valid(problem, [&](const StackingSequence& s) {
      seen.insert(canonical_representative(problem.angles(), s));
    });
    reps.assign(seen.begin(), seen.end());
    if (reps.size() < count)
      throw RefusalError("only " + std::to_string(reps.size()) + " inequivalent valid sequences exist", reps.size());
    std::shuffle(reps.begin(), reps.end(), rng);
    reps.resize(count);
  } else {
    std::set<StackingSequence> seen;
    const std::size_t limit = std::max<std::size_t>(1000, 100 * count);
    for (std::size_t tries = 0; reps.size() < count && tries < limit; ++tries) {
      StackingSequence s = random_valid_sequence(problem, rng);
      if (seen.insert(canonical_representative(problem.angles(), s)).second) reps.push_back(s);
    }
    if (reps.size() < count)
      throw RefusalError("found only " + std::to_string(reps.size()) + " inequivalent sequences", reps.size());
  }
  TargetSet out;
  out.provenance = {"inequivalent", seed, reps.size(), {}};
  for (const auto& s : reps) {
    // Pick a random member of the orbit as the witness.
    auto orbit = symmetry_orbit(problem.angles(), s);
    const auto& w = orbit[std::uniform_int_distribution<std::size_t>(0, orbit.size() - 1)(rng)];
    out.entries.push_back(entry_for(problem, w));
  }
  return out;
}

GaussianKde::GaussianKde(std::vector<std::vector<double>> points) : points_(std::move(points)) {
  if (points_.empty()) throw RefusalError("density estimate needs at least one point");
  const std::size_t dim = points_.front().size();
  for (const auto& p : points_)
    if (p.size() != dim) throw ShapeError("all points must have the same dimension");
  const double m = static_cast<double>(points_.size());
  std::vector<double> sigma(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (const auto& p : points_) mean += p[j];
    mean /= m;
    double var = 0.0;
    for (const auto& p : points_) var += (p[j] - mean) * (p[j] - mean);
    var /= std::max(1.0, m - 1.0);
    sigma[j] = std::sqrt(var);
    if (sigma[j] > 1e-12) active_.push_back(j);
  }
  if (active_.empty()) throw RefusalError("degenerate density: all sample points coincide");
  const double factor = std::pow(m, -1.0 / (static_cast<double>(active_.size()) + 4.0));
  bandwidth_.assign(dim, 0.0);
  for (std::size_t j : active_) bandwidth_[j] = sigma[j] * factor;
}

double GaussianKde::density(const std::vector<double>& x) const {
  if (x.size() != bandwidth_.size()) throw ShapeError("query point has the wrong dimension");
  double norm = 1.0;
  for (std::size_t j : active_) norm *= bandwidth_[j] * std::sqrt(2.0 * std::numbers::pi);
  double sum = 0.0;
  for (const auto& p : points_) {
    double e = 0.0;
    for (std::size_t j : active_) {
      const double u = (x[j] - p[j]) / bandwidth_[j];
      e += u * u;
    }
    sum += std::exp(-0.5 * e);
  }
  return sum / (static_cast<double>(points_.size()) * norm);
}

std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights, std::size_t k,
                                                             std::mt19937_64& rng) {
  if (k > weights.size()) throw DomainError("cannot draw more items than available");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw DomainError("weights must be positive and finite");
    double u = uni(rng);
    while (u <= 0.0) u = uni(rng);
    keys.emplace_back(std::log(u) / weights[i], i);
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(keys[i].second);
  return out;
}

std::vector<double> kde_inverse_weights(const std::vector<std::vector<double>>& points, std::vector<double>* bandwidth) {
  GaussianKde kde(points);
  if (bandwidth) *bandwidth = kde.bandwidth();
  std::vector<double> w;
  w.reserve(points.size());
  for (const auto& p : points) {
    const double rho = kde.density(p);
    if (!(rho > 0.0) || !std::isfinite(rho)) throw NumericError("density estimate is not positive");
    w.push_back(1.0 / rho);
  }
  return w;
}

TargetSet kde_uniform_targets(const SsrProblem& problem, std::size_t n_samples, std::size_t n_targets,
                              std::uint64_t seed) {
  if (n_targets > n_samples) throw DomainError("n_samples must be at least n_targets");
  if (n_targets == 0) return {{}, {"kde", seed, n_samples, {}}};
  std::mt19937_64 rng(seed);
  std::vector<StackingSequence> seqs;
  std::vector<std::vector<double>> points;
  seqs.reserve(n_samples);
  points.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    seqs.push_back(random_valid_sequence(problem, rng));
    points.push_back(lamination_parameters(problem, seqs.back()).flatten());
  }
  TargetSet out;
  out.provenance.method = "kde";
  out.provenance.seed = seed;
  out.provenance.sample_count = n_samples;
  std::vector<double> weights = kde_inverse_weights(points, &out.provenance.bandwidth);
  std::vector<std::size_t> pick;
  if (n_targets == n_samples) {
    pick.resize(n_samples);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
  } else {
    pick = weighted_sample_without_replacement(weights, n_targets, rng);
  }
  for (std::size_t i : pick) out.entries.push_back(entry_for(problem, seqs[i]));
  return out;
}

}  // namespace ssr
