#include "ssr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "ssr/errors.hpp"
#include "ssr/mpo.hpp"
#include "ssr/oracle.hpp"

namespace ssr {

namespace fs = std::filesystem;

namespace {

constexpr double kExactTol = 1e-8;
constexpr std::uint64_t kOracleCellLimit = 1'000'000;

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.problem = j.at("problem");
  c.problem.erase("target");
  c.problem.erase("target_sequence");
  if (j.contains("penalty_modes")) c.penalty_modes = j.at("penalty_modes").get<std::vector<bool>>();
  if (j.contains("targets")) {
    const auto& t = j.at("targets");
    c.targets.kind = t.value("kind", c.targets.kind);
    c.targets.count = t.value("count", c.targets.count);
    c.targets.n_samples = t.value("n_samples", c.targets.n_samples);
    c.targets.path = t.value("path", std::string());
    if (c.targets.kind != "inequivalent" && c.targets.kind != "kde" && c.targets.kind != "file")
      throw DomainError("unknown target source: " + c.targets.kind);
    if (c.targets.kind == "file" && !fs::exists(c.targets.path))
      throw DomainError("target file does not exist: " + c.targets.path);
  }
  if (j.contains("plans")) {
    const auto& p = j.at("plans");
    if (p.contains("bond_dims")) c.bond_dims = p.at("bond_dims").get<std::vector<int>>();
    if (p.contains("directions")) {
      c.directions.clear();
      for (const auto& d : p.at("directions")) c.directions.push_back(parse_direction(d.get<std::string>()));
    }
    c.sweeps = p.value("sweeps", c.sweeps);
    c.collapse = p.value("collapse", c.collapse);
    c.init_bond_dim = p.value("init_bond_dim", c.init_bond_dim);
    c.eig_tol = p.value("eig_tol", c.eig_tol);
    c.eig_max_iter = p.value("eig_max_iter", c.eig_max_iter);
    c.svd_cutoff = p.value("svd_cutoff", c.svd_cutoff);
  }
  c.restarts = j.value("restarts", c.restarts);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out", c.out_dir);
  if (c.restarts < 0) throw DomainError("restarts must be nonnegative");
  for (int chi : c.bond_dims)
    if (chi < 1) throw DomainError("bond dimensions must be positive");
  c.base_problem();  // validates the problem block
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["schema"] = kSchemaVersion;
  j["problem"] = problem;
  j["penalty_modes"] = penalty_modes;
  j["targets"] = {{"kind", targets.kind}, {"count", targets.count}, {"n_samples", targets.n_samples}, {"path", targets.path}};
  std::vector<std::string> dirs;
  for (auto d : directions) dirs.push_back(direction_name(d));
  j["plans"] = {{"bond_dims", bond_dims},   {"directions", dirs},         {"sweeps", sweeps},
                {"collapse", collapse},     {"init_bond_dim", init_bond_dim}, {"eig_tol", eig_tol},
                {"eig_max_iter", eig_max_iter}, {"svd_cutoff", svd_cutoff}};
  j["restarts"] = restarts;
  j["seed"] = seed;
  j["out"] = out_dir;
  return j;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("out");
  return fnv1a_hex(canonical_dump(j));
}

SsrProblem ExperimentConfig::base_problem() const { return problem_from_json(problem); }

json RunRecord::to_json() const {
  json j;
  j["schema"] = kSchemaVersion;
  j["config_hash"] = config_hash;
  j["cell"] = cell;
  j["target_id"] = target_id;
  j["restart"] = restart;
  j["seed"] = seed;
  j["chi_max"] = chi_max;
  j["direction"] = direction_name(direction);
  j["penalized"] = penalized;
  j["status"] = status;
  j["error"] = error;
  j["final_expectation"] = final_expectation;
  j["final_loss"] = optional_json(final_loss);
  j["final_rmse"] = optional_json(final_rmse);
  j["sequence"] = sequence ? ssr::to_json(*sequence) : json(nullptr);
  j["states"] = sequence ? sequence->states() : 0;
  j["reference_loss"] = optional_json(reference_loss);
  j["exact"] = exact ? json(*exact) : json(nullptr);
  j["violations"] = violations;
  j["duration_ms"] = duration_ms;
  j["trace"] = json::array();
  for (const auto& r : trace.records) j["trace"].push_back(ssr::to_json(r, true));
  return j;
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.cell = j.at("cell").get<std::string>();
  r.target_id = j.at("target_id").get<std::size_t>();
  r.restart = j.at("restart").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.chi_max = j.at("chi_max").get<int>();
  r.direction = parse_direction(j.at("direction").get<std::string>());
  r.penalized = j.at("penalized").get<bool>();
  r.status = j.at("status").get<std::string>();
  r.error = j.value("error", std::string());
  r.final_expectation = j.value("final_expectation", 0.0);
  r.final_loss = optional_double(j, "final_loss");
  r.final_rmse = optional_double(j, "final_rmse");
  if (j.contains("sequence") && !j.at("sequence").is_null())
    r.sequence = StackingSequence(j.at("sequence").get<std::vector<int>>(), j.value("states", 4));
  r.reference_loss = optional_double(j, "reference_loss");
  if (j.contains("exact") && !j.at("exact").is_null()) r.exact = j.at("exact").get<bool>();
  r.violations = j.value("violations", std::vector<int>{});
  r.duration_ms = j.value("duration_ms", 0.0);
  if (j.contains("trace"))
    for (const auto& t : j.at("trace")) {
      SweepRecord s;
      s.sweep = t.at("sweep").get<int>();
      s.expectation = t.at("expectation").get<double>();
      s.max_bond = t.at("chi").get<int>();
      s.chi_cap = t.value("chi_cap", 0);
      s.duration_ms = t.value("duration_ms", 0.0);
      if (t.contains("lambda_min") && !t.at("lambda_min").is_null()) s.lambda_min = t.at("lambda_min").get<double>();
      s.norm = t.value("norm", 1.0);
      r.trace.records.push_back(std::move(s));
    }
  return r;
}

std::string cell_id(std::size_t target_id, int restart, int chi, SweepDirection dir, bool penalized) {
  return "t" + std::to_string(target_id) + "-r" + std::to_string(restart) + "-chi" + std::to_string(chi) + "-" +
         direction_name(dir) + (penalized ? "-pen" : "-nopen");
}

RunRecord run_cell(const SsrProblem& problem, const TargetEntry& target, std::size_t target_id, int restart,
                   const DmrgPlan& plan, int init_bond_dim, std::uint64_t init_seed, bool penalized,
                   std::optional<double> oracle_min) {
  RunRecord rec;
  rec.cell = cell_id(target_id, restart, plan.chi_max, plan.direction, penalized);
  rec.target_id = target_id;
  rec.restart = restart;
  rec.seed = init_seed;
  rec.chi_max = plan.chi_max;
  rec.direction = plan.direction;
  rec.penalized = penalized;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SsrProblem p = problem.with_target(target.target);
    const MpoSum terms = loss_mpo_sum(p, penalized);
    const Mps init = random_mps(p.plies(), p.states(), init_bond_dim, init_seed);
    DmrgResult res = dmrg_run(p, terms, init, plan);
    rec.trace = std::move(res.trace);
    rec.final_expectation = rec.trace.records.back().expectation;
    if (res.sequence) {
      rec.sequence = res.sequence;
      rec.final_loss = loss(p, *res.sequence);
      rec.final_rmse = rmse_from_loss(*rec.final_loss, p.symmetric());
      for (const auto& c : p.constraints())
        rec.violations.push_back(static_cast<int>(std::lround(violation_measure(p.angles(), c, *res.sequence))));
      if (oracle_min) rec.reference_loss = oracle_min;
      else if (target.witness) rec.reference_loss = 0.0;
      if (rec.reference_loss) rec.exact = *rec.final_loss <= *rec.reference_loss + kExactTol;
    }
  } catch (const DmrgAborted& e) {
    rec.status = "error";
    rec.error = e.what();
    rec.trace = e.partial();
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.error = e.what();
  }
  rec.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<RunRecord> read_records(const std::string& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(RunRecord::from_json(json::parse(line)));
  }
  return out;
}

namespace {

TargetSet build_targets(const ExperimentConfig& config, const SsrProblem& problem) {
  const std::uint64_t seed = mix_seed(config.seed, 0x7a7);
  if (config.targets.kind == "inequivalent") return inequivalent_targets(problem, config.targets.count, seed);
  if (config.targets.kind == "kde")
    return kde_uniform_targets(problem, config.targets.n_samples, config.targets.count, seed);
  std::ifstream in(config.targets.path);
  if (!in) throw std::runtime_error("cannot open target file " + config.targets.path);
  return target_set_from_json(json::parse(in));
}

struct Cell {
  std::size_t target_id;
  int restart;
  int chi;
  SweepDirection dir;
  bool penalized;
};

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const std::string out_dir = options.out_dir.empty() ? config.out_dir : options.out_dir;
  const std::string hash = config.hash();
  const SsrProblem problem = config.base_problem();

  std::vector<Cell> cells;
  TargetSet targets;
  const bool empty_grid = config.bond_dims.empty() || config.directions.empty() || config.penalty_modes.empty() ||
                          config.restarts == 0 || config.targets.count == 0;
  if (!empty_grid) {
    targets = build_targets(config, problem);
    for (std::size_t t = 0; t < targets.entries.size(); ++t)
      for (int r = 0; r < config.restarts; ++r)
        for (int chi : config.bond_dims)
          for (auto dir : config.directions)
            for (bool pen : config.penalty_modes) cells.push_back({t, r, chi, dir, pen});
  }

  fs::create_directories(out_dir);
  const fs::path runs = fs::path(out_dir) / "runs.jsonl";
  std::map<std::string, RunRecord> done;
  if (fs::exists(runs) && fs::file_size(runs) > 0) {
    if (!options.resume) throw RefusalError(runs.string() + " already exists; pass --resume to continue it");
    for (auto& r : read_records(runs.string())) {
      if (r.config_hash != hash) throw RefusalError("existing records belong to a different configuration");
      done.emplace(r.cell, std::move(r));
    }
  }
  if (!empty_grid) {
    std::ofstream tf(fs::path(out_dir) / "targets.json");
    tf << to_json(targets).dump(2) << '\n';
  }

  // Oracle reference per target when the sequence space is small.
  std::vector<std::optional<double>> oracle(targets.entries.size());
  if (sequence_count(problem.states(), problem.plies()) <= kOracleCellLimit)
    for (std::size_t t = 0; t < targets.entries.size(); ++t)
      oracle[t] = exhaustive_min(problem.with_target(targets.entries[t].target), false).min_loss;

  std::vector<Cell> todo;
  for (const auto& c : cells)
    if (!done.count(cell_id(c.target_id, c.restart, c.chi, c.dir, c.penalized))) todo.push_back(c);

  std::mutex write_mutex;
  std::ofstream out(runs, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + runs.string());
  std::map<std::string, RunRecord> fresh;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const Cell& c = todo[i];
      DmrgPlan plan;
      plan.n_sweeps = config.sweeps;
      plan.direction = c.dir;
      plan.chi_max = c.chi;
      plan.collapse = config.collapse;
      plan.eig_tol = config.eig_tol;
      plan.eig_max_iter = config.eig_max_iter;
      plan.svd_cutoff = config.svd_cutoff;
      // The initial state depends only on target and restart.
      const std::uint64_t init_seed = mix_seed(config.seed, (static_cast<std::uint64_t>(c.target_id) << 20) | static_cast<std::uint64_t>(c.restart));
      plan.seed = init_seed;
      RunRecord rec = run_cell(problem, targets.entries[c.target_id], c.target_id, c.restart, plan,
                               config.init_bond_dim, init_seed, c.penalized, oracle[c.target_id]);
      rec.config_hash = hash;
      std::lock_guard<std::mutex> lock(write_mutex);
      out << canonical_dump(rec.to_json()) << '\n';
      out.flush();
      fresh.emplace(rec.cell, std::move(rec));
    }
  };
  const int jobs = std::max(1, options.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<RunRecord> all;
  for (const auto& c : cells) {
    const std::string id = cell_id(c.target_id, c.restart, c.chi, c.dir, c.penalized);
    if (auto it = fresh.find(id); it != fresh.end()) all.push_back(std::move(it->second));
    else if (auto it2 = done.find(id); it2 != done.end()) all.push_back(std::move(it2->second));
  }
  return all;
}

std::optional<double> trimmed_sweep_mean(const std::vector<std::vector<double>>& per_run, int edge) {
  std::vector<double> pool;
  for (const auto& run : per_run) {
    const int n = static_cast<int>(run.size());
    for (int i = edge; i < n - edge; ++i) pool.push_back(run[static_cast<std::size_t>(i)]);
  }
  if (pool.empty()) return std::nullopt;
  std::sort(pool.begin(), pool.end());
  const std::size_t cut = pool.size() / 10;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = cut; i < pool.size() - cut; ++i) {
    sum += pool[i];
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::set<std::string> hashes;
  for (const auto& r : records) hashes.insert(r.config_hash);
  if (hashes.size() > 1) throw RefusalError("records come from different configurations");

  using Key = std::tuple<int, int, bool>;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) groups[{r.chi_max, static_cast<int>(r.direction), r.penalized}].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto& [key, recs] : groups) {
    SummaryRow row;
    row.chi_max = std::get<0>(key);
    row.direction = static_cast<SweepDirection>(std::get<1>(key));
    row.penalized = std::get<2>(key);
    row.runs = recs.size();
    std::vector<double> rmses;
    std::size_t exact_known = 0, exact_hits = 0, violating = 0, with_seq = 0;
    std::vector<std::vector<double>> durations;
    for (const RunRecord* r : recs) {
      if (r->status != "ok" || !r->final_rmse) {
        row.failed++;
        continue;
      }
      rmses.push_back(*r->final_rmse);
      ++with_seq;
      bool any = false;
      for (int v : r->violations) any = any || v > 0;
      violating += any;
      if (r->exact) {
        ++exact_known;
        exact_hits += *r->exact;
      }
      std::vector<double> d;
      for (const auto& s : r->trace.records)
        if (s.sweep > 0) d.push_back(s.duration_ms);
      durations.push_back(std::move(d));
    }
    if (!rmses.empty()) {
      double mean = 0.0;
      for (double x : rmses) mean += x;
      mean /= static_cast<double>(rmses.size());
      double var = 0.0;
      for (double x : rmses) var += (x - mean) * (x - mean);
      row.rmse_mean = mean;
      row.rmse_std = std::sqrt(var / static_cast<double>(rmses.size()));
    }
    if (exact_known) row.exact_ratio = static_cast<double>(exact_hits) / static_cast<double>(exact_known);
    if (with_seq) row.violation_ratio = static_cast<double>(violating) / static_cast<double>(with_seq);
    row.sweep_ms = trimmed_sweep_mean(durations);
    rows.push_back(row);
  }
  return rows;
}

json summary_to_json(const std::vector<SummaryRow>& rows) {
  json j;
  j["schema"] = kSchemaVersion;
  j["rows"] = json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"chi_max", r.chi_max},
                         {"direction", direction_name(r.direction)},
                         {"penalized", r.penalized},
                         {"runs", r.runs},
                         {"failed", r.failed},
                         {"rmse_mean", r.rmse_mean},
                         {"rmse_std", r.rmse_std},
                         {"exact_ratio", optional_json(r.exact_ratio)},
                         {"violation_ratio", r.violation_ratio},
                         {"sweep_ms", optional_json(r.sweep_ms)}});
  return j;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "chi_max,direction,penalized,runs,failed,rmse_mean,rmse_std,exact_ratio,violation_ratio,sweep_ms\n";
  os.precision(10);
  for (const auto& r : rows) {
    os << r.chi_max << ',' << direction_name(r.direction) << ',' << (r.penalized ? 1 : 0) << ',' << r.runs << ','
       << r.failed << ',' << r.rmse_mean << ',' << r.rmse_std << ',';
    if (r.exact_ratio) os << *r.exact_ratio;
    os << ',' << r.violation_ratio << ',';
    if (r.sweep_ms) os << *r.sweep_ms;
    os << '\n';
  }
  return os.str();
}

}  // namespace ssr
