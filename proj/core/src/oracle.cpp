#include "ssr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssr/errors.hpp"

namespace ssr {

std::uint64_t sequence_count(int d, int n) {
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) {
    if (c > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(d))
      return std::numeric_limits<std::uint64_t>::max();
    c *= static_cast<std::uint64_t>(d);
  }
  return c;
}

std::uint64_t sequence_index(const StackingSequence& seq) {
  if (sequence_count(seq.states(), seq.size()) == std::numeric_limits<std::uint64_t>::max())
    throw RefusalError("sequence space too large to index");
  std::uint64_t idx = 0;
  for (int s : seq.labels()) idx = idx * static_cast<std::uint64_t>(seq.states()) + static_cast<std::uint64_t>(s - 1);
  return idx;
}

StackingSequence sequence_from_index(std::uint64_t index, int n, int d) {
  if (index >= sequence_count(d, n)) throw DomainError("sequence index out of range");
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    labels[i] = static_cast<int>(index % static_cast<std::uint64_t>(d)) + 1;
    index /= static_cast<std::uint64_t>(d);
  }
  return StackingSequence(std::move(labels), d);
}

void for_each_sequence(int n, int d, const std::function<void(const StackingSequence&)>& visit) {
  std::vector<int> labels(static_cast<std::size_t>(n), 1);
  while (true) {
    visit(StackingSequence(labels, d));
    int i = n - 1;
    while (i >= 0 && labels[i] == d) labels[i--] = 1;
    if (i < 0) return;
    ++labels[i];
  }
}

OracleResult exhaustive_min(const SsrProblem& problem, bool include_penalties, std::size_t histogram_bins) {
  const std::uint64_t total = sequence_count(problem.states(), problem.plies());
  if (total > kExhaustiveLimit)
    throw RefusalError("exhaustive search over " + std::to_string(problem.states()) + "^" +
                       std::to_string(problem.plies()) + " sequences exceeds the limit of " +
                       std::to_string(kExhaustiveLimit));
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(total));
  OracleResult out;
  out.min_loss = std::numeric_limits<double>::infinity();
  for_each_sequence(problem.plies(), problem.states(), [&](const StackingSequence& s) {
    double h = loss(problem, s);
    if (include_penalties) h += total_penalty(problem, s);
    values.push_back(h);
    if (h < out.min_loss - kOracleTieTol) {
      out.min_loss = h;
      out.argmin.clear();
      out.argmin.push_back(s);
    } else if (std::abs(h - out.min_loss) <= kOracleTieTol) {
      out.argmin.push_back(s);
      out.min_loss = std::min(out.min_loss, h);
    }
  });
  // Ties are judged against the final minimum.
  std::vector<StackingSequence> kept;
  for (const auto& s : out.argmin) {
    double h = loss(problem, s) + (include_penalties ? total_penalty(problem, s) : 0.0);
    if (h <= out.min_loss + kOracleTieTol) kept.push_back(s);
  }
  out.argmin = std::move(kept);
  out.evaluated = values.size();

  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.histogram.lo = *lo;
  out.histogram.hi = *hi;
  out.histogram.counts.assign(std::max<std::size_t>(histogram_bins, 1), 0);
  const double width = (*hi - *lo) / static_cast<double>(out.histogram.counts.size());
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - *lo) / width) : 0;
    out.histogram.counts[std::min(b, out.histogram.counts.size() - 1)]++;
  }
  return out;
}

std::vector<double> dense_diagonal(const SsrProblem& problem, const MpoSum& terms) {
  const std::uint64_t total = sequence_count(problem.states(), problem.plies());
  if (total > kDenseLimit) throw RefusalError("dense diagonal larger than 2^20 entries");
  if (terms.sites() != problem.plies() || terms.states() != problem.states())
    throw ShapeError("MPO terms do not match the problem");
  std::vector<double> diag;
  diag.reserve(static_cast<std::size_t>(total));
  for_each_sequence(problem.plies(), problem.states(),
                    [&](const StackingSequence& s) { diag.push_back(terms.evaluate(s)); });
  return diag;
}

bool satisfies_all(const SsrProblem& problem, const StackingSequence& seq) {
  for (const auto& c : problem.constraints())
    if (violation_measure(problem.angles(), c, seq) != 0.0) return false;
  return true;
}

void for_each_valid(const SsrProblem& problem, const std::function<void(const StackingSequence&)>& visit) {
  if (sequence_count(problem.states(), problem.plies()) > kExhaustiveLimit)
    throw RefusalError("enumeration exceeds the exhaustive limit");
  for_each_sequence(problem.plies(), problem.states(), [&](const StackingSequence& s) {
    if (satisfies_all(problem, s)) visit(s);
  });
}

std::vector<StackingSequence> enumerate_valid(const SsrProblem& problem) {
  std::vector<StackingSequence> out;
  for_each_valid(problem, [&](const StackingSequence& s) { out.push_back(s); });
  return out;
}

}  // namespace ssr
