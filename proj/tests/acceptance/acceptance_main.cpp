// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Names given on the command line restrict
// the run to those criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ssr/dmrg.hpp"
#include "ssr/experiment.hpp"
#include "ssr/mpo.hpp"
#include "ssr/oracle.hpp"
#include "ssr/pauli.hpp"
#include "ssr/serialize.hpp"
#include "ssr/targets.hpp"
#include "ssr_testing.hpp"

using namespace ssr;
using ssr::testing::Gen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

LaminationPoint zero_point(bool symmetric) {
  LaminationPoint p;
  p.symmetric = symmetric;
  return p;
}

// Independent reference for loss plus penalties: quadrature lamination
// parameters and direct counters over the label list.
double reference_cost(const SsrProblem& p, const StackingSequence& s) {
  const auto degrees = p.angles().all_degrees();
  double h = ssr::testing::squared_distance(ssr::testing::quadrature_lamination(degrees, s, p.symmetric()), p.target());
  for (const auto& c : p.constraints()) {
    if (const auto* d = std::get_if<Disorientation>(&c))
      h += d->gamma * ssr::testing::count_disorientation(degrees, s, d->max_delta_deg);
    else if (const auto* k = std::get_if<Contiguity>(&c))
      h += k->gamma * ssr::testing::count_contiguity(s, k->max_same + 1);
    else if (const auto* b = std::get_if<Balanced>(&c)) {
      const int diff = ssr::testing::count_label(s, b->s) - ssr::testing::count_label(s, b->t);
      h += b->gamma * diff * diff;
    } else if (const auto* m = std::get_if<MinCount>(&c)) {
      h += m->gamma * std::max(0, m->n_t - ssr::testing::count_label(s, m->t));
    }
  }
  return h;
}

Outcome mpo_oracle_equivalence() {
  const auto t0 = Clock::now();
  Gen g(101);
  const SsrProblem p(AngleSet::standard_four(), 6, true, g.point(true),
                     {Disorientation{45.0, 0.25}, Contiguity{2, 0.25}, Balanced{2, 4, 0.25}, MinCount{1, 2, 0.25}});
  const MpoSum terms = loss_mpo_sum(p, true);
  double worst = 0.0;
  std::size_t visited = 0;
  for_each_sequence(6, 4, [&](const StackingSequence& s) {
    worst = std::max(worst, std::abs(terms.evaluate(s) - reference_cost(p, s)));
    ++visited;
  });
  const double secs = seconds_since(t0);
  return {visited == 4096 && worst <= 1e-11 && secs <= 10.0,
          fmt("%zu sequences, max deviation %.3e (tol 1e-11), %.2f s (limit 10 s)", visited, worst, secs)};
}

Outcome transfer_algebra() {
  Gen g(102);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = g.real(-1.0, 1.0), y = g.real(-1.0, 1.0);
    const Matrix3 lhs = multiply(quadratic_transfer(x), quadratic_transfer(y));
    const Matrix3 rhs = quadratic_transfer(x + y);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(lhs[r][c] - rhs[r][c]));
  }
  return {worst <= 1e-12, fmt("1000 pairs, max entry deviation %.3e (tol 1e-12)", worst)};
}

Outcome penalty_counting() {
  Gen g(103);
  const int n = 50, d = 4;
  const double gamma = 0.37;
  const AngleSet angles = AngleSet::standard_four();
  const auto degrees = angles.all_degrees();
  const auto pairs = disorientation_violation_pairs(angles, 45.0);
  const DiagonalMpo dis = disorientation_mpo(n, d, gamma, pairs);
  const DiagonalMpo con3 = contiguity_mpo(n, d, 3, gamma);
  const DiagonalMpo con6 = contiguity_mpo(n, d, 6, gamma);
  const DiagonalMpo bal = balanced_mpo(n, d, 2, 4, gamma);
  const DiagonalMpo minc = min_count_mpo(n, d, 1, 15, gamma);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto s = i % 2 ? g.sequence(n, d) : g.sticky_sequence(n, d);
    const int diff = ssr::testing::count_label(s, 2) - ssr::testing::count_label(s, 4);
    const std::pair<double, int> checks[] = {
        {dis.evaluate(s), ssr::testing::count_disorientation(degrees, s, 45.0)},
        {con3.evaluate(s), ssr::testing::count_contiguity(s, 3)},
        {con6.evaluate(s), ssr::testing::count_contiguity(s, 6)},
        {bal.evaluate(s), diff * diff},
        {minc.evaluate(s), std::max(0, 15 - ssr::testing::count_label(s, 1))},
    };
    for (const auto& [value, count] : checks) worst = std::max(worst, std::abs(value - gamma * count));
  }
  return {worst <= 1e-10, fmt("200 sequences at N=50, 5 penalty operators, max deviation %.3e (tol 1e-10)", worst)};
}

// Runs shared by the recovery and determinism checks.
struct RecoveryRun {
  std::size_t targets_recovered = 0;
  std::size_t runs_recovered = 0;
  std::size_t oracle_mismatch = 0;
  std::vector<std::string> traces;
  double seconds = 0.0;
};

RecoveryRun recovery_runs() {
  const auto t0 = Clock::now();
  RecoveryRun out;
  const SsrProblem base(AngleSet::standard_four(), 6, true, zero_point(true), {Disorientation{45.0, 0.25}});
  const TargetSet targets = inequivalent_targets(base, 15, 11);
  for (std::size_t t = 0; t < targets.entries.size(); ++t) {
    const SsrProblem p = base.with_target(targets.entries[t].target);
    const double oracle = exhaustive_min(p, false).min_loss;
    out.oracle_mismatch += std::abs(oracle) > 1e-12;
    std::size_t ok = 0;
    for (int r = 0; r < 5; ++r) {
      DmrgPlan plan;
      plan.chi_max = 32;
      plan.n_sweeps = 10;
      plan.direction = SweepDirection::Alternating;
      plan.collapse = true;
      plan.seed = mix_seed(1, (static_cast<std::uint64_t>(t) << 20) | static_cast<std::uint64_t>(r));
      const RunRecord rec = run_cell(base, targets.entries[t], t, r, plan, 2, plan.seed, true, oracle);
      out.traces.push_back(trace_to_jsonl(rec.trace, false));
      if (rec.status == "ok" && rec.final_loss && *rec.final_loss <= oracle + 1e-8) ++ok;
    }
    out.runs_recovered += ok;
    out.targets_recovered += ok > 0;
  }
  out.seconds = seconds_since(t0);
  return out;
}

RecoveryRun first_recovery;

Outcome exact_recovery() {
  first_recovery = recovery_runs();
  const auto& r = first_recovery;
  return {r.targets_recovered == 15 && r.oracle_mismatch == 0 && r.seconds <= 300.0,
          fmt("%zu/15 targets recovered (%zu/75 runs), %zu oracle mismatches, %.1f s (limit 300 s)",
              r.targets_recovered, r.runs_recovered, r.oracle_mismatch, r.seconds)};
}

Outcome determinism() {
  if (first_recovery.traces.empty()) first_recovery = recovery_runs();
  const RecoveryRun second = recovery_runs();
  std::size_t differing = 0;
  for (std::size_t i = 0; i < second.traces.size(); ++i) differing += second.traces[i] != first_recovery.traces[i];
  const bool same_count = second.traces.size() == first_recovery.traces.size();
  return {same_count && differing == 0,
          fmt("%zu traces compared, %zu differ", second.traces.size(), differing)};
}

Outcome constraint_satisfaction() {
  const auto t0 = Clock::now();
  const SsrProblem base(AngleSet::standard_four(), 200, true, zero_point(true), {Disorientation{45.0, 0.005}});
  const TargetSet targets = kde_uniform_targets(base, 10000, 10, 21);
  std::size_t pen_runs = 0, pen_violating = 0, free_runs = 0, free_violating = 0, failed = 0;
  for (std::size_t t = 0; t < targets.entries.size(); ++t)
    for (int seed = 0; seed < 2; ++seed)
      for (bool penalized : {true, false}) {
        DmrgPlan plan;
        plan.chi_max = 8;
        plan.n_sweeps = 69;
        plan.seed = mix_seed(2, (static_cast<std::uint64_t>(t) << 20) | static_cast<std::uint64_t>(seed));
        const RunRecord rec = run_cell(base, targets.entries[t], t, seed, plan, 2, plan.seed, penalized, std::nullopt);
        if (rec.status != "ok" || !rec.sequence) {
          ++failed;
          continue;
        }
        const bool violating = disorientation_violations(base.angles(), 45.0, *rec.sequence) > 0;
        (penalized ? pen_runs : free_runs)++;
        (penalized ? pen_violating : free_violating) += violating;
      }
  const double secs = seconds_since(t0);
  const double free_share = free_runs ? static_cast<double>(free_violating) / free_runs : 0.0;
  return {failed == 0 && pen_runs == 20 && pen_violating == 0 && free_share >= 0.9 && secs <= 1800.0,
          fmt("penalized %zu/%zu violating, unpenalized %zu/%zu violating (%.0f%%, need >= 90%%), %zu failed, "
              "%.0f s (limit 1800 s)",
              pen_violating, pen_runs, free_violating, free_runs, 100.0 * free_share, failed, secs)};
}

Outcome monotone_local_solver() {
  Gen g(106);
  double worst_gap = -1e300, worst_drift = 0.0;
  std::size_t updates = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int n = trial < 4 ? 6 : 24;
    const bool sym = trial % 2 == 0;
    const SsrProblem p(AngleSet::standard_four(), n, sym, g.point(sym), {Disorientation{45.0, 0.25}});
    const MpoSum terms = loss_mpo_sum(p, true);
    DmrgPlan plan;
    plan.chi_max = trial < 4 ? 32 : 8;
    plan.n_sweeps = 10;
    plan.direction = static_cast<SweepDirection>(trial % 3);
    plan.seed = static_cast<std::uint64_t>(trial);
    plan.record_local_updates = true;
    const auto res = dmrg_run(p, terms, random_mps(n, 4, 2, plan.seed), plan);
    for (const auto& rec : res.trace.records) {
      worst_drift = std::max(worst_drift, std::abs(rec.norm - 1.0));
      for (const auto& u : rec.local) {
        worst_gap = std::max(worst_gap, u.lambda - u.rayleigh_before);
        ++updates;
      }
    }
  }
  return {updates > 0 && worst_gap <= 1e-9 && worst_drift <= 1e-10,
          fmt("%zu local updates, max(lambda - rayleigh) %.3e (tol 1e-9), max norm drift %.3e (tol 1e-10)", updates,
              worst_gap, worst_drift)};
}

Outcome pauli_expansion() {
  Gen g(107);
  bool bounds_ok = true, supports_ok = true;
  std::string hist;
  for (bool sym : {true, false}) {
    const SsrProblem p(AngleSet::standard_four(), 6, sym, g.point(sym), {Disorientation{45.0, 0.25}});
    const auto plain = pauli_expand(p, false);
    const auto full = pauli_expand(p, true);
    for (const auto* e : {&plain, &full}) {
      const auto c = term_census(*e);
      auto at = [&](std::size_t w) { return w < c.by_weight.size() ? c.by_weight[w] : std::size_t{0}; };
      bounds_ok = bounds_ok && at(1) <= 12 && at(2) <= 126 && at(3) <= 60 && at(4) <= 30;
      for (std::size_t w = 5; w < c.by_weight.size(); ++w) bounds_ok = bounds_ok && c.by_weight[w] == 0;
      if (e == &full) hist += fmt("%s %zu/%zu/%zu/%zu ", sym ? "sym" : "gen", at(1), at(2), at(3), at(4));
    }
    std::set<std::vector<int>> base;
    for (const auto& t : plain.terms) base.insert(t.support);
    for (const auto& t : full.terms) supports_ok = supports_ok && base.count(t.support);
  }
  const SsrProblem p4(AngleSet::standard_four(), 4, true, g.point(true), {Disorientation{45.0, 0.25}});
  const auto e4 = pauli_expand(p4, true);
  const auto diag = dense_diagonal(p4, loss_mpo_sum(p4, true));
  double worst = 0.0;
  for (std::uint64_t i = 0; i < diag.size(); ++i)
    worst = std::max(worst, std::abs(e4.eigenvalue(encode(sequence_from_index(i, 4, 4))) - diag[i]));
  return {bounds_ok && supports_ok && diag.size() == 256 && worst <= 1e-9,
          fmt("weights %sbounds %s, new supports %s, N=4 diagonal deviation %.3e (tol 1e-9)", hist.c_str(),
              bounds_ok ? "ok" : "exceeded", supports_ok ? "none" : "found", worst)};
}

Outcome dihedral_invariance() {
  Gen g(108);
  const AngleSet angles = AngleSet::standard_four();
  const auto group = dihedral_group(angles);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const bool sym = g.coin();
    const int n = g.integer(1, 30);
    const SsrProblem p(angles, n, sym, g.point(sym));
    const auto s = g.sequence(n, 4);
    const double h = loss(p, s);
    for (const auto& el : group)
      worst = std::max(worst, std::abs(loss_to(p, apply(angles, el, s), apply(angles, el, p.target())) - h));
  }
  return {group.size() == 8 && worst <= 1e-12,
          fmt("100 pairs x %zu elements, max deviation %.3e (tol 1e-12)", group.size(), worst)};
}

Outcome sweep_cost_trend() {
  const SsrProblem base(AngleSet::standard_four(), 200, true, zero_point(true), {Disorientation{45.0, 0.005}});
  const TargetSet targets = kde_uniform_targets(base, 2000, 2, 31);
  std::vector<double> means;
  std::string line;
  for (int chi : {2, 4, 8, 16}) {
    std::vector<std::vector<double>> per_run;
    for (std::size_t t = 0; t < targets.entries.size(); ++t) {
      DmrgPlan plan;
      plan.chi_max = chi;
      plan.n_sweeps = 30;
      plan.seed = mix_seed(3, t);
      const RunRecord rec = run_cell(base, targets.entries[t], t, 0, plan, 2, plan.seed, true, std::nullopt);
      std::vector<double> d;
      for (const auto& r : rec.trace.records)
        if (r.sweep > 0) d.push_back(r.duration_ms);
      per_run.push_back(std::move(d));
    }
    const auto m = trimmed_sweep_mean(per_run);
    means.push_back(m.value_or(std::nan("")));
    line += fmt("chi=%d %.2f ms ", chi, means.back());
  }
  bool increasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) increasing = increasing && means[i] > means[i - 1];
  return {increasing, line + (increasing ? "(increasing)" : "(not increasing)")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"mpo-oracle-equivalence", mpo_oracle_equivalence},
      {"transfer-algebra", transfer_algebra},
      {"penalty-counting", penalty_counting},
      {"exact-recovery", exact_recovery},
      {"constraint-satisfaction", constraint_satisfaction},
      {"monotone-local-solver", monotone_local_solver},
      {"pauli-expansion", pauli_expansion},
      {"dihedral-invariance", dihedral_invariance},
      {"determinism", determinism},
      {"sweep-cost-trend", sweep_cost_trend},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
