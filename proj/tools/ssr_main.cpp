// ssr: command line driver for stacking-sequence retrieval.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ssr/errors.hpp"
#include "ssr/experiment.hpp"
#include "ssr/mpo.hpp"
#include "ssr/oracle.hpp"
#include "ssr/pauli.hpp"
#include "ssr/serialize.hpp"
#include "ssr/targets.hpp"

namespace fs = std::filesystem;
using ssr::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("ssr"));
  const char* env = std::getenv("SSR_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// A problem document may be given bare or wrapped as {"problem": {...}}.
json problem_doc(const json& j) { return j.contains("problem") ? j.at("problem") : j; }

struct SolveArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> chi;
  std::optional<int> sweeps;
  std::optional<std::string> direction;
  bool no_penalty = false;
  int init_bond_dim = 2;
};

int cmd_solve(const SolveArgs& a) {
  const json doc = read_json(a.config);
  const ssr::SsrProblem problem = ssr::problem_from_json(problem_doc(doc));
  ssr::DmrgPlan plan = doc.contains("plan") ? ssr::plan_from_json(doc.at("plan")) : ssr::DmrgPlan{};
  if (a.seed) plan.seed = *a.seed;
  if (a.chi) plan.chi_max = *a.chi;
  if (a.sweeps) plan.n_sweeps = *a.sweeps;
  if (a.direction) plan.direction = ssr::parse_direction(*a.direction);
  const bool penalized = doc.value("penalized", true) && !a.no_penalty;
  const int init_bond = doc.value("init_bond_dim", a.init_bond_dim);

  ssr::TargetEntry target{problem.target(), std::nullopt};
  std::optional<double> reference;
  if (ssr::sequence_count(problem.states(), problem.plies()) <= ssr::kExhaustiveLimit / 10)
    reference = ssr::exhaustive_min(problem, false).min_loss;
  spdlog::info("solving N={} d={} chi_max={} sweeps={} direction={}", problem.plies(), problem.states(),
               plan.chi_max, plan.n_sweeps, ssr::direction_name(plan.direction));
  ssr::RunRecord rec = ssr::run_cell(problem, target, 0, 0, plan, init_bond, plan.seed, penalized, reference);
  if (rec.status != "ok") {
    spdlog::error("solve failed: {}", rec.error);
    return kExitRuntime;
  }
  if (rec.sequence) spdlog::info("sequence {} loss {:.3e}", rec.sequence->to_string(), rec.final_loss.value_or(0.0));
  const std::string text = rec.to_json().dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    fs::create_directories(a.out);
    write_text((fs::path(a.out) / "result.json").string(), text);
    write_text((fs::path(a.out) / "trace.jsonl").string(), ssr::trace_to_jsonl(rec.trace, true));
  }
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool resume = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  json doc = read_json(a.config);
  if (a.seed) doc["seed"] = *a.seed;
  ssr::ExperimentConfig config;
  try {
    config = ssr::ExperimentConfig::from_json(doc);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid configuration: ") + e.what());
  }
  ssr::RunOptions options;
  options.out_dir = a.out.empty() ? config.out_dir : a.out;
  options.jobs = a.jobs;
  options.resume = a.resume;
  spdlog::info("experiment {} -> {}", config.hash(), options.out_dir);
  const auto records = ssr::run_experiment(config, options);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.status != "ok";
  spdlog::info("{} records, {} failed", records.size(), failed);
  const auto rows = ssr::summarize(records);
  write_text((fs::path(options.out_dir) / "summary.json").string(), ssr::summary_to_json(rows).dump(2) + "\n");
  write_text((fs::path(options.out_dir) / "summary.csv").string(), ssr::summary_to_csv(rows));
  return kExitOk;
}

int cmd_oracle(const std::string& config, bool no_penalty, std::size_t bins, const std::string& out) {
  const ssr::SsrProblem problem = ssr::problem_from_json(problem_doc(read_json(config)));
  const auto result = ssr::exhaustive_min(problem, !no_penalty, bins);
  spdlog::info("evaluated {} sequences, min loss {:.6e}", result.evaluated, result.min_loss);
  write_text(out, ssr::to_json(result).dump(2) + "\n");
  return kExitOk;
}

int cmd_targets(const std::string& config, const std::string& method, std::size_t count, std::size_t samples,
                std::uint64_t seed, const std::string& out) {
  const ssr::SsrProblem problem = ssr::problem_from_json(problem_doc(read_json(config)));
  ssr::TargetSet set;
  if (method == "inequivalent") set = ssr::inequivalent_targets(problem, count, seed);
  else if (method == "kde") set = ssr::kde_uniform_targets(problem, samples, count, seed);
  else throw UsageError("unknown target method " + method);
  write_text(out, ssr::to_json(set).dump(2) + "\n");
  return kExitOk;
}

int cmd_pauli(const std::string& config, bool disorientation, const std::string& out) {
  const ssr::SsrProblem problem = ssr::problem_from_json(problem_doc(read_json(config)));
  const auto expansion = ssr::pauli_expand(problem, disorientation);
  json j = ssr::to_json(expansion);
  j["census"] = ssr::to_json(ssr::term_census(expansion));
  write_text(out, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_summarize(const std::string& runs, bool csv, const std::string& out) {
  if (!fs::exists(runs)) throw UsageError("no such file " + runs);
  const auto rows = ssr::summarize(ssr::read_records(runs));
  write_text(out, csv ? ssr::summary_to_csv(rows) : ssr::summary_to_json(rows).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Stacking-sequence retrieval with DMRG"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve a single target");
  s->add_option("-c,--config", solve.config, "Problem document with a target")->required()->check(CLI::ExistingFile);
  s->add_option("-o,--out", solve.out, "Output directory (stdout when omitted)");
  s->add_option("--seed", solve.seed, "Master seed");
  s->add_option("--chi", solve.chi, "Maximum bond dimension");
  s->add_option("--sweeps", solve.sweeps, "Number of sweeps");
  s->add_option("--direction", solve.direction, "outward, inward or alternating");
  s->add_option("--init-bond", solve.init_bond_dim, "Bond dimension of the random initial state");
  s->add_flag("--no-penalty", solve.no_penalty, "Leave constraint penalties out of the operator");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a grid of targets, restarts and plans");
  e->add_option("-c,--config", exp.config, "Experiment configuration")->required()->check(CLI::ExistingFile);
  e->add_option("-o,--out", exp.out, "Output directory");
  e->add_option("-j,--jobs", exp.jobs, "Parallel cells")->check(CLI::PositiveNumber);
  e->add_option("--seed", exp.seed, "Master seed");
  e->add_flag("--resume", exp.resume, "Skip cells already present in runs.jsonl");

  std::string o_config, o_out;
  bool o_no_penalty = false;
  std::size_t o_bins = 20;
  auto* o = app.add_subcommand("oracle", "Exhaustive minimum over all sequences");
  o->add_option("-c,--config", o_config, "Problem document")->required()->check(CLI::ExistingFile);
  o->add_option("-o,--out", o_out, "Output file");
  o->add_option("--bins", o_bins, "Histogram bins");
  o->add_flag("--no-penalty", o_no_penalty, "Ignore constraint penalties");

  std::string t_config, t_out, t_method = "inequivalent";
  std::size_t t_count = 15, t_samples = 10000;
  std::uint64_t t_seed = 0;
  auto* t = app.add_subcommand("targets", "Generate a target set");
  t->add_option("-c,--config", t_config, "Problem document")->required()->check(CLI::ExistingFile);
  t->add_option("-o,--out", t_out, "Output file");
  t->add_option("--method", t_method, "inequivalent or kde");
  t->add_option("--count", t_count, "Number of targets");
  t->add_option("--samples", t_samples, "Random sequences for the kde method");
  t->add_option("--seed", t_seed, "Seed");

  std::string p_config, p_out;
  bool p_dis = false;
  auto* p = app.add_subcommand("pauli", "Export the Z-string expansion of the loss");
  p->add_option("-c,--config", p_config, "Problem document")->required()->check(CLI::ExistingFile);
  p->add_option("-o,--out", p_out, "Output file");
  p->add_flag("--disorientation", p_dis, "Include disorientation penalties");

  std::string m_runs, m_out;
  bool m_csv = false;
  auto* m = app.add_subcommand("summarize", "Summarize a runs.jsonl file");
  m->add_option("runs", m_runs, "Path to runs.jsonl")->required();
  m->add_option("-o,--out", m_out, "Output file");
  m->add_flag("--csv", m_csv, "Write CSV instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*e) return cmd_experiment(exp);
    if (*o) return cmd_oracle(o_config, o_no_penalty, o_bins, o_out);
    if (*t) return cmd_targets(t_config, t_method, t_count, t_samples, t_seed, t_out);
    if (*p) return cmd_pauli(p_config, p_dis, p_out);
    if (*m) return cmd_summarize(m_runs, m_csv, m_out);
  } catch (const UsageError& err) {
    spdlog::error("{}", err.what());
    return kExitUsage;
  } catch (const ssr::DomainError& err) {
    spdlog::error("{}", err.what());
    return kExitUsage;
  } catch (const ssr::ShapeError& err) {
    spdlog::error("{}", err.what());
    return kExitUsage;
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
