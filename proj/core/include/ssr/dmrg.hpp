#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssr/lanczos.hpp"
#include "ssr/laminate.hpp"
#include "ssr/mpo.hpp"
#include "ssr/mps.hpp"
#include "ssr/tensor.hpp"

namespace ssr {

// Outward runs from site 1 to N, inward from N to 1.
enum class SweepDirection { Outward, Inward, Alternating };

const char* direction_name(SweepDirection d);
SweepDirection parse_direction(const std::string& name);

enum class Move { Right, Left };

struct SweepSchedule {
  int chi_cap = 1;
  double cutoff = 0.0;
};

struct DmrgPlan {
  int n_sweeps = 10;
  SweepDirection direction = SweepDirection::Alternating;
  int chi_max = 32;
  bool collapse = true;
  double eig_tol = 1e-10;
  int eig_max_iter = 10;
  double svd_cutoff = 0.0;
  std::uint64_t seed = 0;
  bool record_local_updates = false;

  // Number of trailing sweeps that shrink the bond dimension to 1.
  int collapse_length() const;
  SweepSchedule schedule(int sweep) const;  // sweep = 0..n_sweeps-1
  void validate() const;
};

struct LocalUpdateStat {
  int bond = 0;  // left site of the two-site block, 0-based
  double lambda = 0.0;
  double rayleigh_before = 0.0;
  double discarded_weight = 0.0;
  int kept_rank = 0;
  int iterations = 0;
  bool eig_converged = true;
};

struct SweepRecord {
  int sweep = 0;  // 0 is the initial state
  double expectation = 0.0;
  int max_bond = 0;
  int chi_cap = 0;
  double duration_ms = 0.0;
  std::optional<double> lambda_min;
  double norm = 1.0;
  std::vector<LocalUpdateStat> local;
};

struct SweepTrace {
  std::vector<SweepRecord> records;
};

class DmrgAborted : public std::runtime_error {
public:
  DmrgAborted(const std::string& what, SweepTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SweepTrace& partial() const noexcept { return partial_; }

private:
  SweepTrace partial_;
};

struct DmrgResult {
  Mps state;
  std::optional<StackingSequence> sequence;
  SweepTrace trace;
};

// Holds the state, the operator terms, and the cached environments.
class DmrgEngine {
public:
  DmrgEngine(const MpoSum& terms, Mps state);

  const Mps& state() const { return state_; }
  Mps& state() { return state_; }
  const MpoSum& terms() const { return *terms_; }

  // Move the center to `site` by gauge moves and recompute all environments.
  void reset(int site);

  // Matrix-free effective Hamiltonian of the block at sites (bond, bond+1).
  // Requires the center at bond or bond+1 and matching environments.
  struct Effective {
    std::size_t dim = 0;
    LinearMap apply;
  };
  Effective effective_operator(int bond) const;
  std::vector<double> two_site_block(int bond) const;

  LocalUpdateStat local_update(int bond, Move move, const TruncationPolicy& policy, const EigenOptions& eig);

  // Gauge-only center moves that keep the environments in sync.
  void gauge_shift_right(int site);
  void gauge_shift_left(int site);

private:
  const MpoSum* terms_;
  Mps state_;
  Environments env_;
};

DmrgResult dmrg_run(const SsrProblem& problem, const MpoSum& terms, const Mps& init, const DmrgPlan& plan);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace ssr
