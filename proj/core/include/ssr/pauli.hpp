#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ssr/laminate.hpp"

namespace ssr {

// Ply n (0-based) occupies qubits 2n and 2n+1. Codes: 1 -> 00, 2 -> 01,
// 3 -> 11, 4 -> 10, first bit on qubit 2n.
std::vector<int> encode(const StackingSequence& seq);
std::string encode_string(const StackingSequence& seq);
StackingSequence decode(const std::vector<int>& bits);

struct PauliZTerm {
  std::vector<int> support;  // sorted qubit indices
  double coefficient = 0.0;
};

struct PauliExpansion {
  int num_qubits = 0;
  double offset = 0.0;  // identity coefficient
  std::vector<PauliZTerm> terms;

  // Diagonal entry for a computational basis state: Z acts as (-1)^bit.
  double eigenvalue(const std::vector<int>& bits) const;
};

inline constexpr double kPauliDropTol = 1e-14;

// Loss Hamiltonian (and optionally the disorientation penalties) as merged
// Z-strings, sorted by (weight, support).
PauliExpansion pauli_expand(const SsrProblem& problem, bool include_disorientation);

struct TermCensus {
  std::vector<std::size_t> by_weight;  // index = number of Z factors
  std::size_t cnot_count = 0;          // 2 per Z factor
  std::size_t rotation_count = 0;      // one per non-identity term
};

TermCensus term_census(const PauliExpansion& expansion);

}  // namespace ssr
