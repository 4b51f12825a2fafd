#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssr/dmrg.hpp"
#include "ssr/serialize.hpp"
#include "ssr/targets.hpp"

namespace ssr {

struct TargetSource {
  std::string kind = "inequivalent";  // inequivalent | kde | file
  std::size_t count = 15;
  std::size_t n_samples = 10000;      // kde only
  std::string path;                   // file only
};

struct ExperimentConfig {
  json problem;  // problem document without a target
  std::vector<bool> penalty_modes{true, false};
  TargetSource targets;
  std::vector<int> bond_dims{2, 32};
  std::vector<SweepDirection> directions{SweepDirection::Alternating};
  int sweeps = 10;
  bool collapse = true;
  int init_bond_dim = 2;
  double eig_tol = 1e-10;
  int eig_max_iter = 10;
  double svd_cutoff = 0.0;
  int restarts = 5;
  std::uint64_t seed = 0;
  std::string out_dir = "ssr-out";

  static ExperimentConfig from_json(const json& j);
  json to_json() const;
  // FNV-1a over the canonical JSON, excluding the output directory.
  std::string hash() const;
  SsrProblem base_problem() const;
};

struct RunRecord {
  std::string config_hash;
  std::string cell;
  std::size_t target_id = 0;
  int restart = 0;
  std::uint64_t seed = 0;
  int chi_max = 0;
  SweepDirection direction = SweepDirection::Alternating;
  bool penalized = false;
  std::string status = "ok";  // ok | error
  std::string error;
  double final_expectation = 0.0;
  std::optional<double> final_loss;
  std::optional<double> final_rmse;
  std::optional<StackingSequence> sequence;
  std::optional<double> reference_loss;  // oracle minimum or witness bound
  std::optional<bool> exact;
  std::vector<int> violations;  // per problem constraint
  double duration_ms = 0.0;
  SweepTrace trace;

  json to_json() const;
  static RunRecord from_json(const json& j);
};

struct RunOptions {
  std::string out_dir;  // overrides the config when non-empty
  int jobs = 1;
  bool resume = false;
};

std::string cell_id(std::size_t target_id, int restart, int chi, SweepDirection dir, bool penalized);

// Builds the target set, runs every grid cell, and appends one JSONL record
// per cell to <out>/runs.jsonl. Returns all records of this configuration.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Solves one cell in isolation; used by the runner and by tests.
RunRecord run_cell(const SsrProblem& problem, const TargetEntry& target, std::size_t target_id, int restart,
                   const DmrgPlan& plan, int init_bond_dim, std::uint64_t init_seed, bool penalized,
                   std::optional<double> oracle_min);

std::vector<RunRecord> read_records(const std::string& path);

struct SummaryRow {
  int chi_max = 0;
  SweepDirection direction = SweepDirection::Alternating;
  bool penalized = false;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  std::optional<double> exact_ratio;
  double violation_ratio = 0.0;
  std::optional<double> sweep_ms;
};

// Drop the first and last `edge` sweeps of every run, pool the rest, drop the
// lowest and highest 10% of the pooled values, and average.
std::optional<double> trimmed_sweep_mean(const std::vector<std::vector<double>>& per_run, int edge = 10);

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
json summary_to_json(const std::vector<SummaryRow>& rows);
std::string summary_to_csv(const std::vector<SummaryRow>& rows);

}  // namespace ssr
