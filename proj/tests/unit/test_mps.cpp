#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ssr/errors.hpp"
#include "ssr/mps.hpp"
#include "ssr/oracle.hpp"
#include "ssr_testing.hpp"

using namespace ssr;
using ssr::testing::Gen;

namespace {

double dense_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(RandomMps, NormalizedWithClippedBonds) {
  for (int n : {1, 2, 5, 9}) {
    const auto m = random_mps(n, 4, 8, 11);
    EXPECT_NEAR(m.norm(), 1.0, 1e-12);
    ASSERT_TRUE(m.center().has_value());
    EXPECT_EQ(*m.center(), 0);
    EXPECT_LE(m.canonical_error(), 1e-12);
    for (int b = 0; b <= n; ++b) {
      const int expect = std::min({8, static_cast<int>(std::pow(4, b)), static_cast<int>(std::pow(4, n - b))});
      EXPECT_EQ(m.bond_dim(b), expect) << "bond " << b;
    }
  }
  EXPECT_THROW(random_mps(0, 4, 2, 0), DomainError);
  EXPECT_THROW(random_mps(3, 4, 0, 0), DomainError);
}

TEST(RandomMps, SeedDeterminesState) {
  EXPECT_EQ(random_mps(5, 4, 4, 3).to_dense(), random_mps(5, 4, 4, 3).to_dense());
  EXPECT_NE(random_mps(5, 4, 4, 3).to_dense(), random_mps(5, 4, 4, 4).to_dense());
}

TEST(Mps, GaugeMovesPreserveState) {
  Gen g(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(2, 6);
    auto m = random_mps(n, 4, g.integer(1, 6), static_cast<std::uint64_t>(trial));
    const auto before = m.to_dense();
    for (int step = 0; step < 5; ++step) {
      const int c = g.integer(0, n - 1);
      m.move_center_to(c);
      EXPECT_EQ(*m.center(), c);
      EXPECT_LE(m.canonical_error(), 1e-12);
      const auto after = m.to_dense();
      for (std::size_t i = 0; i < before.size(); ++i) ASSERT_NEAR(after[i], before[i], 1e-12);
    }
    for (int k = 0; k < n; ++k) {
      if (k < *m.center()) EXPECT_LE(m.left_orthonormality_error(k), 1e-12);
      if (k > *m.center()) EXPECT_LE(m.right_orthonormality_error(k), 1e-12);
    }
  }
}

TEST(Mps, OverlapMatchesDense) {
  for (int seed = 0; seed < 10; ++seed) {
    const auto a = random_mps(4, 3, 3, seed);
    const auto b = random_mps(4, 3, 5, seed + 100);
    EXPECT_NEAR(overlap(a, b), dense_dot(a.to_dense(), b.to_dense()), 1e-12);
  }
  EXPECT_THROW(overlap(random_mps(3, 4, 2, 0), random_mps(4, 4, 2, 0)), ShapeError);
}

TEST(Mps, BasisStateRoundTrip) {
  Gen g(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(1, 6);
    const auto seq = g.sequence(n, 4);
    const auto m = basis_state_mps(seq);
    EXPECT_EQ(m.max_bond_dim(), 1);
    EXPECT_EQ(extract_sequence(m), seq);
    const auto dense = m.to_dense();
    const auto hot = std::max_element(dense.begin(), dense.end()) - dense.begin();
    EXPECT_EQ(static_cast<std::uint64_t>(hot), sequence_index(seq));
    EXPECT_DOUBLE_EQ(dense[hot], 1.0);
  }
}

TEST(Mps, ExtractRequiresProductState) {
  EXPECT_THROW(extract_sequence(random_mps(4, 4, 2, 0)), StateNotCollapsedError);
}

TEST(Mps, ExpectationMatchesDenseSum) {
  Gen g(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = g.integer(2, 5);
    const bool sym = g.coin();
    LaminationPoint zero;
    zero.symmetric = sym;
    SsrProblem base(AngleSet::standard_four(), n, sym, zero, {Disorientation{45.0, 0.3}, Contiguity{1, 0.2}});
    const auto p = base.with_target(g.point(sym));
    const auto terms = loss_mpo_sum(p, true);
    const auto m = random_mps(n, 4, g.integer(1, 8), trial);
    const auto psi = m.to_dense();
    double expect = 0.0;
    std::uint64_t idx = 0;
    for_each_sequence(n, 4, [&](const StackingSequence& s) {
      expect += psi[idx] * psi[idx] * terms.evaluate(s);
      ++idx;
    });
    EXPECT_NEAR(expectation(m, terms), expect, 1e-12);
  }
}

TEST(Mps, NormalizeAndRejectZero) {
  auto m = random_mps(3, 4, 2, 9);
  m.site(1).data()[0] += 3.0;
  m.set_center(std::nullopt);
  m.normalize();
  EXPECT_NEAR(m.norm(), 1.0, 1e-12);
  std::vector<DenseTensor> zero{DenseTensor({1, 4, 1}), DenseTensor({1, 4, 1})};
  Mps z(zero);
  EXPECT_THROW(z.normalize(), NumericError);
}

TEST(Mps, RejectsBadShapes) {
  EXPECT_THROW(Mps(std::vector<DenseTensor>{}), ShapeError);
  EXPECT_THROW(Mps({DenseTensor({2, 4, 1})}), ShapeError);
  EXPECT_THROW(Mps({DenseTensor({1, 4, 2}), DenseTensor({3, 4, 1})}), ShapeError);
  EXPECT_THROW(Mps({DenseTensor({1, 4, 1})}, 2), DomainError);
}
