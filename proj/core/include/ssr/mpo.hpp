#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ssr/laminate.hpp"
#include "ssr/tensor.hpp"

namespace ssr {

// Operator diagonal in the sequence basis. Site n holds W[n] with shape
// (b_{n-1}, b_n, d); b_0 = b_N = 1.
class DiagonalMpo {
public:
  DiagonalMpo(std::string tag, std::vector<DenseTensor> sites);

  const std::string& tag() const { return tag_; }
  int sites() const { return static_cast<int>(sites_.size()); }
  int states() const { return static_cast<int>(sites_.front().extent(2)); }
  const DenseTensor& site(int n) const { return sites_.at(static_cast<std::size_t>(n)); }

  // Extent of bond n, n = 0..N.
  int bond_dim(int n) const;
  int max_bond_dim() const;

  // Chain product W[1]_{s_1} ... W[N]_{s_N}.
  double evaluate(const StackingSequence& seq) const;
  double evaluate(const std::vector<int>& labels) const;

  // Channel 0 only propagates the identity from the left and the last channel
  // only propagates the identity to the right.
  bool automaton_form() const { return automaton_; }

private:
  std::string tag_;
  std::vector<DenseTensor> sites_;
  bool automaton_ = false;
};

struct MpoSum {
  std::vector<DiagonalMpo> terms;

  int sites() const { return terms.empty() ? 0 : terms.front().sites(); }
  int states() const { return terms.empty() ? 0 : terms.front().states(); }
  double evaluate(const StackingSequence& seq) const;
  void add(DiagonalMpo term);
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

// [[1, sqrt2 x, x^2], [0, 1, sqrt2 x], [0, 0, 1]]
Matrix3 quadratic_transfer(double x);
Matrix3 multiply(const Matrix3& a, const Matrix3& b);

// Fills the row-major b x b transfer matrix for site n (0-based) and label s.
using TransferFn = std::function<void(int n, int s, std::vector<double>& t)>;

// Assemble an MPO from per-site square transfer matrices T(n, s) and
// boundary vectors: value = left^T T(1, s_1) ... T(N, s_N) right.
DiagonalMpo mpo_from_transfer(std::string tag, int n_sites, int d, int b, const TransferFn& transfer,
                              const std::vector<double>& left, const std::vector<double>& right);

// (v_l^X - xi_l^X)^2 as a bond dimension 3 MPO.
DiagonalMpo loss_term_mpo(const SsrProblem& problem, Block x, int l);

DiagonalMpo disorientation_mpo(int n_sites, int d, double gamma,
                               const std::vector<std::pair<int, int>>& violation_pairs);
// gamma times the number of length-k windows of identical labels.
DiagonalMpo contiguity_mpo(int n_sites, int d, int k, double gamma);
DiagonalMpo balanced_mpo(int n_sites, int d, int s, int t, double gamma);
DiagonalMpo min_count_mpo(int n_sites, int d, int t, int n_t, double gamma);

DiagonalMpo penalty_mpo(const SsrProblem& problem, const ConstraintSpec& spec);

// One term per lamination component, plus one per constraint when requested.
MpoSum loss_mpo_sum(const SsrProblem& problem, bool include_penalties = true);

// Single MPO whose chain equals the sum of the terms. Used by tests.
DiagonalMpo stack_block_diagonal(const MpoSum& sum);

}  // namespace ssr
