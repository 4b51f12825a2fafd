#include <gtest/gtest.h>

#include <cmath>

#include "ssr/errors.hpp"
#include "ssr/mpo.hpp"
#include "ssr_testing.hpp"

using namespace ssr;
using ssr::testing::Gen;

namespace {

SsrProblem random_problem(Gen& g, int n, bool symmetric, std::vector<ConstraintSpec> cons = {}) {
  LaminationPoint zero;
  zero.symmetric = symmetric;
  SsrProblem base(AngleSet::standard_four(), n, symmetric, zero, std::move(cons));
  return base.with_target(g.point(symmetric));
}

std::vector<ConstraintSpec> all_penalties(int n, double gamma) {
  return {Disorientation{45.0, gamma}, Contiguity{2, gamma}, Balanced{2, 4, gamma},
          MinCount{3, std::max(1, n / 3), gamma}};
}

}  // namespace

TEST(Transfer, QuadraticAlgebra) {
  Gen g(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = g.real(-2, 2), y = g.real(-2, 2);
    const auto lhs = multiply(quadratic_transfer(x), quadratic_transfer(y));
    const auto rhs = quadratic_transfer(x + y);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) ASSERT_NEAR(lhs[i][j], rhs[i][j], 1e-12);
  }
  const auto id = quadratic_transfer(0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(id[i][j], i == j ? 1.0 : 0.0);
  EXPECT_DOUBLE_EQ(quadratic_transfer(1.5)[0][2], 2.25);
}

TEST(MpoFromTransfer, MatchesExplicitMatrixProduct) {
  Gen g(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(1, 6), d = g.integer(2, 4), b = g.integer(1, 4);
    std::vector<double> table(static_cast<std::size_t>(n * d * b * b));
    for (double& x : table) x = g.real(-1, 1);
    std::vector<double> left(b), right(b);
    for (double& x : left) x = g.real(-1, 1);
    for (double& x : right) x = g.real(-1, 1);
    TransferFn fn = [&](int site, int s, std::vector<double>& t) {
      t.assign(table.begin() + ((site * d + (s - 1)) * b * b), table.begin() + ((site * d + s) * b * b));
    };
    const auto mpo = mpo_from_transfer("t", n, d, b, fn, left, right);
    const auto seq = g.sequence(n, d);
    std::vector<double> row = left;
    for (int k = 0; k < n; ++k) {
      std::vector<double> t;
      fn(k, seq[k], t);
      std::vector<double> next(b, 0.0);
      for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) next[j] += row[i] * t[i * b + j];
      row = next;
    }
    double expect = 0.0;
    for (int i = 0; i < b; ++i) expect += row[i] * right[i];
    ASSERT_NEAR(mpo.evaluate(seq), expect, 1e-12);
  }
}

TEST(LossTerm, ChainEqualsSquaredComponentError) {
  Gen g(3);
  for (int trial = 0; trial < 60; ++trial) {
    const bool sym = g.coin();
    const int n = g.integer(1, 25);
    const auto p = random_problem(g, n, sym);
    const auto seq = g.sequence(n, 4);
    const auto v = ssr::testing::quadrature_lamination(p.angles().all_degrees(), seq, sym);
    for (Block x : p.target().blocks())
      for (int l = 1; l <= 4; ++l) {
        const auto mpo = loss_term_mpo(p, x, l);
        const double diff = v.at(x, l) - p.target().at(x, l);
        ASSERT_NEAR(mpo.evaluate(seq), diff * diff, 1e-12);
        EXPECT_LE(mpo.max_bond_dim(), 3);
        EXPECT_TRUE(mpo.automaton_form() || n < 2);
      }
  }
}

TEST(MpoSum, EqualsLossPlusPenalties) {
  Gen g(4);
  for (int trial = 0; trial < 40; ++trial) {
    const bool sym = g.coin();
    const int n = g.integer(2, 14);
    const auto p = random_problem(g, n, sym, all_penalties(n, g.real(0.01, 1.0)));
    const auto with = loss_mpo_sum(p, true);
    const auto without = loss_mpo_sum(p, false);
    EXPECT_EQ(with.terms.size(), (sym ? 8u : 12u) + 4u);
    for (int k = 0; k < 20; ++k) {
      const auto seq = g.sticky_sequence(n, 4);
      const double h = ssr::testing::squared_distance(
          ssr::testing::quadrature_lamination(p.angles().all_degrees(), seq, sym), p.target());
      ASSERT_NEAR(without.evaluate(seq), h, 1e-11);
      ASSERT_NEAR(with.evaluate(seq), h + total_penalty(p, seq), 1e-11);
    }
  }
}

TEST(Penalty, DisorientationCountsPairs) {
  Gen g(5);
  const auto angles = AngleSet::standard_four();
  const auto pairs = disorientation_violation_pairs(angles, 45.0);
  for (int n : {1, 2, 7, 50}) {
    const auto mpo = disorientation_mpo(n, 4, 0.5, pairs);
    if (n > 1) EXPECT_EQ(mpo.max_bond_dim(), 6);
    for (int k = 0; k < 30; ++k) {
      const auto seq = g.sticky_sequence(n, 4);
      ASSERT_NEAR(mpo.evaluate(seq), 0.5 * ssr::testing::count_disorientation(angles.all_degrees(), seq, 45.0),
                  1e-12);
    }
  }
}

TEST(Penalty, ContiguityCountsWindows) {
  Gen g(6);
  for (int k : {2, 3, 6}) {
    const auto mpo = contiguity_mpo(50, 4, k, 1.0);
    EXPECT_EQ(mpo.max_bond_dim(), 4 * (k - 1) + 2);
    EXPECT_TRUE(mpo.automaton_form());
    for (int t = 0; t < 30; ++t) {
      const auto seq = g.sticky_sequence(50, 4);
      ASSERT_DOUBLE_EQ(mpo.evaluate(seq), ssr::testing::count_contiguity(seq, k));
    }
  }
  EXPECT_DOUBLE_EQ(contiguity_mpo(3, 4, 5, 1.0).evaluate(StackingSequence({1, 1, 1}, 4)), 0.0);
  EXPECT_THROW(contiguity_mpo(5, 4, 1, 1.0), DomainError);
}

TEST(Penalty, BalancedSquaredDifference) {
  Gen g(7);
  const auto mpo = balanced_mpo(30, 4, 2, 4, 0.25);
  EXPECT_EQ(mpo.max_bond_dim(), 3);
  for (int t = 0; t < 50; ++t) {
    const auto seq = g.sticky_sequence(30, 4);
    const double diff = ssr::testing::count_label(seq, 2) - ssr::testing::count_label(seq, 4);
    ASSERT_NEAR(mpo.evaluate(seq), 0.25 * diff * diff, 1e-12);
  }
  EXPECT_THROW(balanced_mpo(5, 4, 2, 2, 1.0), DomainError);
}

TEST(Penalty, MinCountLinearShortfall) {
  Gen g(8);
  for (int nt : {1, 4, 12}) {
    const auto mpo = min_count_mpo(20, 4, 3, nt, 1.0);
    EXPECT_EQ(mpo.max_bond_dim(), nt + 1);
    for (int t = 0; t < 50; ++t) {
      const auto seq = g.sticky_sequence(20, 4);
      ASSERT_NEAR(mpo.evaluate(seq), std::max(0, nt - ssr::testing::count_label(seq, 3)), 1e-12);
    }
  }
  EXPECT_THROW(min_count_mpo(5, 4, 3, 6, 1.0), DomainError);
}

TEST(MpoSum, BlockDiagonalStackMatchesSum) {
  Gen g(9);
  for (int n : {1, 2, 5}) {
    const auto p = random_problem(g, n, g.coin(), all_penalties(n, 0.3));
    const auto sum = loss_mpo_sum(p, true);
    const auto stacked = stack_block_diagonal(sum);
    for (int k = 0; k < 20; ++k) {
      const auto seq = g.sequence(n, 4);
      ASSERT_NEAR(stacked.evaluate(seq), sum.evaluate(seq), 1e-12);
    }
  }
}

TEST(DiagonalMpo, RejectsInconsistentShapes) {
  EXPECT_THROW(DiagonalMpo("x", {}), ShapeError);
  EXPECT_THROW(DiagonalMpo("x", {DenseTensor({2, 1, 4})}), ShapeError);
  EXPECT_THROW(DiagonalMpo("x", {DenseTensor({1, 2, 4}), DenseTensor({3, 1, 4})}), ShapeError);
  const DiagonalMpo ok("x", {DenseTensor({1, 1, 4}, 1.0)});
  EXPECT_THROW(ok.evaluate(std::vector<int>{1, 2}), DomainError);
  EXPECT_THROW(ok.evaluate(std::vector<int>{5}), DomainError);
  MpoSum sum;
  sum.add(ok);
  EXPECT_THROW(sum.add(DiagonalMpo("y", {DenseTensor({1, 1, 3}, 1.0)})), ShapeError);
}
