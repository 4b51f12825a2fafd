#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ssr/laminate.hpp"
#include "ssr/mpo.hpp"

namespace ssr {

struct LossHistogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::size_t> counts;
};

struct OracleResult {
  double min_loss = 0.0;
  std::vector<StackingSequence> argmin;
  LossHistogram histogram;
  std::size_t evaluated = 0;
};

inline constexpr double kOracleTieTol = 1e-12;
inline constexpr std::uint64_t kExhaustiveLimit = 10'000'000;
inline constexpr std::uint64_t kDenseLimit = 1ull << 20;

// Number of sequences d^N, saturating at UINT64_MAX.
std::uint64_t sequence_count(int d, int n);

// Big-endian odometer: s_1 is the most significant digit.
std::uint64_t sequence_index(const StackingSequence& seq);
StackingSequence sequence_from_index(std::uint64_t index, int n, int d);

// Calls `visit` for every sequence in odometer order.
void for_each_sequence(int n, int d, const std::function<void(const StackingSequence&)>& visit);

OracleResult exhaustive_min(const SsrProblem& problem, bool include_penalties, std::size_t histogram_bins = 20);

// Diagonal of the operator built from `terms`, indexed by sequence_index.
std::vector<double> dense_diagonal(const SsrProblem& problem, const MpoSum& terms);

bool satisfies_all(const SsrProblem& problem, const StackingSequence& seq);
void for_each_valid(const SsrProblem& problem, const std::function<void(const StackingSequence&)>& visit);
std::vector<StackingSequence> enumerate_valid(const SsrProblem& problem);

}  // namespace ssr
