#include <gtest/gtest.h>

#include <cmath>

#include "ssr/dmrg.hpp"
#include "ssr/errors.hpp"
#include "ssr/oracle.hpp"
#include "ssr/serialize.hpp"
#include "ssr/targets.hpp"
#include "ssr_testing.hpp"

using namespace ssr;
using ssr::testing::Gen;

namespace {

SsrProblem problem_from_sequence(const StackingSequence& seq, bool symmetric, std::vector<ConstraintSpec> cons) {
  LaminationPoint zero;
  zero.symmetric = symmetric;
  SsrProblem base(AngleSet::standard_four(), seq.size(), symmetric, zero, std::move(cons));
  return base.with_target(lamination_parameters(base, seq));
}

// Dense projection of the two-site block space at `bond` into the full space:
// column i is the full state obtained by placing unit vector i in the block.
std::vector<std::vector<double>> block_embedding(const Mps& state, int bond) {
  const std::size_t cl = state.site(bond).extent(0), cr = state.site(bond + 1).extent(2);
  const std::size_t d = static_cast<std::size_t>(state.states());
  const std::size_t dim = cl * d * d * cr;
  std::vector<std::vector<double>> cols;
  DenseTensor pass({d * cr, d, cr});
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t r = 0; r < cr; ++r) pass({s * cr + r, s, r}) = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<DenseTensor> sites;
    for (int n = 0; n < state.sites(); ++n) {
      if (n == bond) {
        DenseTensor e({cl, d, d * cr});
        e.data()[i] = 1.0;
        sites.push_back(e);
      } else if (n == bond + 1) {
        sites.push_back(pass);
      } else {
        sites.push_back(state.site(n));
      }
    }
    cols.push_back(Mps(std::move(sites)).to_dense());
  }
  return cols;
}

}  // namespace

TEST(DmrgPlan, CollapseSchedule) {
  DmrgPlan p;
  p.chi_max = 32;
  p.n_sweeps = 10;
  EXPECT_EQ(p.collapse_length(), 6);
  const int caps[] = {32, 32, 32, 32, 16, 8, 4, 2, 1, 1};
  for (int s = 0; s < 10; ++s) EXPECT_EQ(p.schedule(s).chi_cap, caps[s]) << s;
  EXPECT_DOUBLE_EQ(p.schedule(9).cutoff, 0.5);
  EXPECT_DOUBLE_EQ(p.schedule(8).cutoff, 0.0);
  p.chi_max = 1;
  p.n_sweeps = 2;
  EXPECT_EQ(p.collapse_length(), 1);
  EXPECT_NO_THROW(p.validate());
  p.collapse = false;
  p.chi_max = 8;
  EXPECT_EQ(p.schedule(1).chi_cap, 8);
}

TEST(DmrgPlan, Validation) {
  DmrgPlan p;
  p.chi_max = 32;
  p.n_sweeps = 6;
  EXPECT_THROW(p.validate(), DomainError);
  p.n_sweeps = 0;
  p.collapse = false;
  EXPECT_THROW(p.validate(), DomainError);
  p.n_sweeps = 3;
  p.chi_max = 0;
  EXPECT_THROW(p.validate(), DomainError);
  p.chi_max = 2;
  p.svd_cutoff = 1.0;
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_THROW(parse_direction("sideways"), DomainError);
  EXPECT_EQ(parse_direction(direction_name(SweepDirection::Inward)), SweepDirection::Inward);
}

TEST(Effective, MatchesDenseProjectionOracle) {
  Gen g(1);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = g.integer(2, 4);
    const bool sym = g.coin();
    const auto p = problem_from_sequence(g.sequence(n, 4), sym,
                                         {Disorientation{45.0, 0.25}, Contiguity{1, 0.25}, Balanced{2, 4, 0.25},
                                          MinCount{1, 1, 0.25}});
    const auto terms = loss_mpo_sum(p, true);
    const auto diag = dense_diagonal(p, terms);
    DmrgEngine engine(terms, random_mps(n, 4, g.integer(1, 3), trial));
    for (int bond = 0; bond + 1 < n; ++bond) {
      engine.reset(bond);
      const auto eff = engine.effective_operator(bond);
      const auto cols = block_embedding(engine.state(), bond);
      ASSERT_EQ(cols.size(), eff.dim);
      std::vector<double> x(eff.dim), y(eff.dim);
      for (std::size_t j = 0; j < eff.dim; ++j) {
        std::fill(x.begin(), x.end(), 0.0);
        x[j] = 1.0;
        eff.apply(x.data(), y.data());
        for (std::size_t i = 0; i < eff.dim; ++i) {
          double h = 0.0;
          for (std::size_t s = 0; s < diag.size(); ++s) h += cols[i][s] * diag[s] * cols[j][s];
          ASSERT_NEAR(y[i], h, 1e-11) << "bond " << bond << " (" << i << ", " << j << ")";
        }
      }
    }
  }
}

TEST(LocalUpdate, EqualsDenseEffectiveMinimumAtFourPlies) {
  Gen g(2);
  const auto p = problem_from_sequence(g.sequence(4, 4), true, {Disorientation{45.0, 0.25}});
  const auto terms = loss_mpo_sum(p, true);
  for (int bond = 0; bond < 3; ++bond) {
    DmrgEngine engine(terms, random_mps(4, 4, 3, 5));
    engine.reset(bond);
    const auto eff = engine.effective_operator(bond);
    const auto cols = block_embedding(engine.state(), bond);
    const auto diag = dense_diagonal(p, terms);
    // Dense effective matrix and its smallest eigenvalue.
    const std::size_t m = eff.dim;
    std::vector<double> a(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double h = 0.0;
        for (std::size_t s = 0; s < diag.size(); ++s) h += cols[i][s] * diag[s] * cols[j][s];
        a[i * m + j] = h;
      }
    const double lmin = ssr::testing::jacobi_min_eigenvalue(a, m);

    EigenOptions eig;
    eig.tol = 1e-12;
    eig.max_iter = 1000;
    TruncationPolicy policy;
    const auto st = engine.local_update(bond, Move::Right, policy, eig);
    EXPECT_NEAR(st.lambda, lmin, 1e-9) << "bond " << bond;
    EXPECT_GE(st.lambda, -1e-12);
    EXPECT_LE(st.discarded_weight, 1e-12);
  }
}

TEST(DmrgRun, TraceInvariants) {
  Gen g(3);
  for (auto dir : {SweepDirection::Outward, SweepDirection::Inward, SweepDirection::Alternating}) {
    const auto p = problem_from_sequence(g.sequence(8, 4), g.coin(), {Disorientation{45.0, 0.25}});
    const auto terms = loss_mpo_sum(p, true);
    DmrgPlan plan;
    plan.direction = dir;
    plan.chi_max = 8;
    plan.n_sweeps = 8;
    plan.record_local_updates = true;
    plan.seed = 4;
    const auto res = dmrg_run(p, terms, random_mps(8, 4, 2, 4), plan);
    ASSERT_EQ(res.trace.records.size(), 9u);
    for (std::size_t s = 0; s < res.trace.records.size(); ++s) {
      const auto& r = res.trace.records[s];
      EXPECT_EQ(r.sweep, static_cast<int>(s));
      EXPECT_NEAR(r.norm, 1.0, 1e-10);
      EXPECT_LE(r.max_bond, std::max(2, plan.chi_max));
      if (s == 0) continue;
      EXPECT_LE(r.max_bond, r.chi_cap);
      ASSERT_EQ(r.local.size(), 7u);
      for (const auto& u : r.local) {
        EXPECT_LE(u.lambda, u.rayleigh_before + 1e-9);
        EXPECT_GE(u.lambda, -1e-10);
      }
      const bool forward = dir == SweepDirection::Outward || (dir == SweepDirection::Alternating && s % 2 == 1);
      EXPECT_EQ(r.local.front().bond, forward ? 0 : 6);
    }
    ASSERT_TRUE(res.sequence.has_value());
    EXPECT_NEAR(res.trace.records.back().expectation, terms.evaluate(*res.sequence), 1e-10);
  }
}

TEST(DmrgRun, MonotoneWhenCapIsNotBinding) {
  Gen g(4);
  for (int trial = 0; trial < 4; ++trial) {
    const auto p = problem_from_sequence(g.sequence(6, 4), true, {Disorientation{45.0, 0.25}});
    const auto terms = loss_mpo_sum(p, true);
    DmrgPlan plan;
    plan.chi_max = 64;
    plan.n_sweeps = 6;
    plan.collapse = false;
    plan.seed = static_cast<std::uint64_t>(trial);
    const auto res = dmrg_run(p, terms, random_mps(6, 4, 2, trial), plan);
    for (std::size_t s = 1; s < res.trace.records.size(); ++s)
      EXPECT_LE(res.trace.records[s].expectation, res.trace.records[s - 1].expectation + 1e-9);
  }
}

TEST(DmrgRun, BondDimensionOneGivesBasisState) {
  Gen g(5);
  const auto p = problem_from_sequence(g.sequence(10, 4), false, {});
  const auto terms = loss_mpo_sum(p, false);
  DmrgPlan plan;
  plan.chi_max = 1;
  plan.n_sweeps = 4;
  const auto res = dmrg_run(p, terms, random_mps(10, 4, 1, 2), plan);
  ASSERT_TRUE(res.sequence.has_value());
  EXPECT_EQ(res.state.max_bond_dim(), 1);
  EXPECT_NEAR(res.trace.records.back().expectation, loss(p, *res.sequence), 1e-10);
}

TEST(DmrgRun, RecoversExactTargetsAtSixPlies) {
  const SsrProblem base(AngleSet::standard_four(), 6, true, LaminationPoint{}, {Disorientation{45.0, 0.25}});
  const auto targets = inequivalent_targets(base, 5, 21);
  for (std::size_t t = 0; t < targets.entries.size(); ++t) {
    const auto p = base.with_target(targets.entries[t].target);
    const auto terms = loss_mpo_sum(p, true);
    bool hit = false;
    for (int r = 0; r < 5 && !hit; ++r) {
      DmrgPlan plan;
      plan.seed = mix_seed(7, t * 100 + r);
      const auto res = dmrg_run(p, terms, random_mps(6, 4, 2, plan.seed), plan);
      hit = res.sequence && loss(p, *res.sequence) <= 1e-8;
    }
    EXPECT_TRUE(hit) << "target " << t;
  }
}

TEST(DmrgRun, DeterministicTraces) {
  const auto p = problem_from_sequence(StackingSequence({1, 2, 2, 3, 4, 4, 1}, 4), true, {Disorientation{45.0, 0.25}});
  const auto terms = loss_mpo_sum(p, true);
  DmrgPlan plan;
  plan.seed = 77;
  const auto a = dmrg_run(p, terms, random_mps(7, 4, 2, 1), plan);
  const auto b = dmrg_run(p, terms, random_mps(7, 4, 2, 1), plan);
  EXPECT_EQ(trace_to_jsonl(a.trace, false), trace_to_jsonl(b.trace, false));
}

TEST(DmrgRun, RejectsMismatchedInputs) {
  const auto p = problem_from_sequence(StackingSequence({1, 2, 3}, 4), true, {});
  const auto terms = loss_mpo_sum(p, false);
  DmrgPlan plan;
  plan.chi_max = 2;
  plan.n_sweeps = 4;
  EXPECT_THROW(dmrg_run(p, terms, random_mps(4, 4, 2, 0), plan), ShapeError);
  plan.n_sweeps = 0;
  EXPECT_THROW(dmrg_run(p, terms, random_mps(3, 4, 2, 0), plan), DomainError);
  EXPECT_THROW(DmrgEngine(MpoSum{}, random_mps(3, 4, 2, 0)), DomainError);
}

TEST(MixSeed, SpreadsInputs) {
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(0, 1));
  EXPECT_EQ(mix_seed(5, 9), mix_seed(5, 9));
}
