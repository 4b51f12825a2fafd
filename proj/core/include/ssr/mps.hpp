#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssr/laminate.hpp"
#include "ssr/mpo.hpp"
#include "ssr/tensor.hpp"

namespace ssr {

// Site tensors A[n] of shape (chi_{n-1}, d, chi_n) with chi_0 = chi_N = 1.
class Mps {
public:
  Mps() = default;
  explicit Mps(std::vector<DenseTensor> sites, std::optional<int> center = std::nullopt);

  int sites() const { return static_cast<int>(sites_.size()); }
  int states() const { return static_cast<int>(sites_.front().extent(1)); }
  int bond_dim(int n) const;  // n = 0..N
  int max_bond_dim() const;

  const DenseTensor& site(int n) const { return sites_.at(static_cast<std::size_t>(n)); }
  DenseTensor& site(int n) { return sites_.at(static_cast<std::size_t>(n)); }
  void set_site(int n, DenseTensor t);

  std::optional<int> center() const { return center_; }
  void set_center(std::optional<int> c) { center_ = c; }

  // Gauge moves. A state without a center is canonicalized from scratch.
  void move_center_to(int c);
  // Single-step gauge moves; the center must currently sit at n.
  void shift_center_right(int n);
  void shift_center_left(int n);

  double norm() const;
  void normalize();

  // max |A^T A - I| over the site (left) or |A A^T - I| (right).
  double left_orthonormality_error(int n) const;
  double right_orthonormality_error(int n) const;
  // Largest canonical-form defect with respect to the current center.
  double canonical_error() const;

  // Amplitudes over all d^N sequences, s_1 most significant.
  std::vector<double> to_dense() const;

private:
  std::vector<DenseTensor> sites_;
  std::optional<int> center_;
};

Mps random_mps(int n_sites, int d, int chi_init, std::uint64_t seed);
Mps basis_state_mps(const StackingSequence& seq);
// Argmax label per site; every bond must have extent 1.
StackingSequence extract_sequence(const Mps& mps);

double overlap(const Mps& a, const Mps& b);
double expectation(const Mps& mps, const DiagonalMpo& term);
double expectation(const Mps& mps, const MpoSum& terms);

// Environment blocks for one MPO term, stored channel-major: shape (b, chi, chi).
DenseTensor initial_environment();
DenseTensor extend_left(const DenseTensor& left, const DenseTensor& a, const DenseTensor* w);
DenseTensor extend_right(const DenseTensor& right, const DenseTensor& a, const DenseTensor* w);

// left[t][n] covers sites 0..n-1 and right[t][n] covers sites n..N-1 for
// term t. The identity environments (no operator) are kept separately.
struct Environments {
  std::vector<std::vector<DenseTensor>> left, right;
  std::vector<DenseTensor> identity_left, identity_right;

  // Valid left blocks up to bond `center` and right blocks from bond center+2.
  void rebuild(const Mps& mps, const MpoSum& terms, int center);
  void update_left(const Mps& mps, const MpoSum& terms, int n);   // sets left[.][n+1]
  void update_right(const Mps& mps, const MpoSum& terms, int n);  // sets right[.][n]
};

}  // namespace ssr
