#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "endorse/common/error.hpp"
#include "endorse/common/rng.hpp"
#include "endorse/selection/probability.hpp"
#include "endorse/selection/selection.hpp"
#include "support/failure_table.hpp"
#include "support/oracles.hpp"

namespace endorse::selection {
namespace {

std::vector<NodeId> ids(std::size_t n, std::uint32_t first = 0) {
  std::vector<NodeId> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<NodeId>(first + i);
  return out;
}

double chi_square_p_value(const std::vector<std::uint64_t>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// ---- partition ---------------------------------------------------------------

TEST(Partition, SingletonBoundary) {
  auto groups = partition_candidates(ids(29), 29, 1);
  ASSERT_EQ(groups.size(), 29u);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    EXPECT_EQ(groups[g].index, g + 1);
    EXPECT_EQ(groups[g].members.size(), 1u);
  }
}

TEST(Partition, EvenDivisionArithmetic) {
  auto groups = partition_candidates(ids(2000), 29, 2);
  std::size_t sum = 0;
  for (const auto& g : groups) {
    EXPECT_TRUE(g.members.size() == 68 || g.members.size() == 69);
    sum += g.members.size();
  }
  EXPECT_EQ(sum, 2000u);
}

TEST(Partition, DeterministicUnderSeed) {
  auto a = partition_candidates(ids(500), 11, 42);
  auto b = partition_candidates(ids(500), 11, 42);
  auto c = partition_candidates(ids(500), 11, 43);
  for (std::size_t g = 0; g < a.size(); ++g) EXPECT_EQ(a[g].members, b[g].members);
  bool differs = false;
  for (std::size_t g = 0; g < a.size(); ++g) differs |= a[g].members != c[g].members;
  EXPECT_TRUE(differs);
}

TEST(Partition, TooFewNodes) {
  try {
    partition_candidates(ids(3), 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewNodes);
  }
}

TEST(PartitionProperty, DisjointCoveringBalanced) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t g = 2 + rng.below(40);
    std::size_t n = g + rng.below(400);
    auto groups = partition_candidates(ids(n), g, rng.next());
    std::set<std::uint32_t> seen;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& grp : groups) {
      lo = std::min(lo, grp.members.size());
      hi = std::max(hi, grp.members.size());
      for (auto m : grp.members) EXPECT_TRUE(seen.insert(to_index(m)).second);
    }
    EXPECT_EQ(seen.size(), n);
    EXPECT_LE(hi - lo, 1u);
  }
}

// ---- endorser assignment ----------------------------------------------------

TEST(AssignEndorsers, ForcedChoiceWithSingletons) {
  auto groups = partition_candidates(ids(3), 3, 9);
  for (std::uint32_t c = 0; c < 3; ++c) {
    auto eg = assign_endorsers(NodeId{c}, groups, 1);
    std::set<std::uint32_t> got;
    for (auto e : eg.endorsers) got.insert(to_index(e));
    std::set<std::uint32_t> expected{0, 1, 2};
    expected.erase(c);
    EXPECT_EQ(got, expected);
  }
}

TEST(AssignEndorsers, OnePerForeignGroup) {
  auto groups = partition_candidates(ids(300), 21, 3);
  GroupIndex index(groups);
  for (std::uint32_t c = 0; c < 300; ++c) {
    auto eg = index.assign(NodeId{c}, 77);
    ASSERT_EQ(eg.endorsers.size(), 20u);
    auto own = groups[static_cast<std::size_t>(index.group_of(NodeId{c}))].index;
    std::set<std::size_t> sources(eg.source_groups.begin(), eg.source_groups.end());
    EXPECT_EQ(sources.size(), 20u);
    EXPECT_FALSE(sources.count(own));
    for (std::size_t i = 0; i < eg.endorsers.size(); ++i) {
      EXPECT_NE(eg.endorsers[i], NodeId{c});
      const auto& members = groups[eg.source_groups[i] - 1].members;
      EXPECT_NE(std::find(members.begin(), members.end(), eg.endorsers[i]), members.end());
    }
  }
}

TEST(AssignEndorsers, UniformWithinSourceGroup) {
  auto groups = partition_candidates(ids(40), 5, 11);
  const NodeId candidate = groups[0].members[0];
  std::map<std::size_t, std::map<std::uint32_t, std::uint64_t>> freq;
  for (std::uint64_t t = 0; t < 100000; ++t) {
    auto eg = assign_endorsers(candidate, groups, derive_seed(123, t));
    for (std::size_t i = 0; i < eg.endorsers.size(); ++i) ++freq[eg.source_groups[i]][to_index(eg.endorsers[i])];
  }
  for (std::size_t g = 1; g < groups.size(); ++g) {
    std::vector<std::uint64_t> counts;
    for (auto m : groups[g].members) counts.push_back(freq[groups[g].index][to_index(m)]);
    EXPECT_GT(chi_square_p_value(counts), 0.01) << "group " << g;
  }
}

TEST(AssignEndorsers, UnknownCandidate) {
  auto groups = partition_candidates(ids(10), 2, 0);
  try {
    assign_endorsers(NodeId{999}, groups, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCandidate);
  }
}

// ---- mid-epoch joins ---------------------------------------------------------

TEST(MidEpochAssign, TwoGroupBoundary) {
  auto groups = partition_candidates(ids(10), 2, 0);
  auto eg = mid_epoch_assign(NodeId{100}, groups, 5);
  EXPECT_EQ(eg.endorsers.size(), 1u);
}

TEST(MidEpochAssign, DoesNotMutateGroups) {
  auto groups = partition_candidates(ids(60), 7, 1);
  auto before = groups;
  for (std::uint32_t j = 0; j < 20; ++j) {
    auto eg = mid_epoch_assign(NodeId{1000 + j}, groups, 9);
    EXPECT_EQ(eg.endorsers.size(), 6u);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) EXPECT_EQ(groups[g].members, before[g].members);
}

TEST(MidEpochAssign, SkippedGroupIsUniform) {
  auto groups = partition_candidates(ids(50), 6, 2);
  std::vector<std::uint64_t> skipped(6, 0);
  for (std::uint64_t t = 0; t < 100000; ++t) {
    auto eg = mid_epoch_assign(NodeId{500}, groups, derive_seed(7, t));
    std::vector<bool> used(7, false);
    for (auto s : eg.source_groups) used[s] = true;
    for (std::size_t g = 1; g <= 6; ++g)
      if (!used[g]) ++skipped[g - 1];
  }
  EXPECT_GT(chi_square_p_value(skipped), 0.01);
}

// ---- failure probability ---------------------------------------------------------

TEST(FailureProbability, PublishedExamples) {
  auto near = [](double got, double want) { return std::abs(got - want) / want < 5e-5; };
  EXPECT_TRUE(near(failure_probability(10, 0.5), 5.8594e-03));
  EXPECT_TRUE(near(failure_probability(28, 0.5), 6.7055e-08));
  EXPECT_TRUE(near(failure_probability(26, 1.0 / 3.0), 6.4968e-08));
  EXPECT_TRUE(near(failure_probability(10, 1.0 / 3.0), 1.6936e-03));
}

TEST(FailureProbability, WholeTableToFourSignificantFigures) {
  for (const auto& row : testing::kFailureTable) {
    EXPECT_NEAR(failure_probability(row.n, 0.5) / row.half, 1.0, 5e-5) << "n=" << row.n;
    EXPECT_NEAR(failure_probability(row.n, 1.0 / 3.0) / row.third, 1.0, 5e-5) << "n=" << row.n;
  }
}

TEST(FailureProbability, MatchesClosedFormOracle) {
  // Half column collapses to floor(2n/3) / 2^n exactly.
  for (int n = 1; n <= 40; ++n) {
    double half = ((2 * n) / 3) / std::ldexp(1.0, n);
    EXPECT_NEAR(failure_probability(n, 0.5), half, 1e-12 * half);
    for (double p : {0.05, 0.2, 1.0 / 3.0, 0.45}) {
      double expected = static_cast<double>(testing::failure_sum_closed_form(n, p));
      EXPECT_NEAR(failure_probability(n, p), expected, 1e-12 * expected + 1e-300) << n << " " << p;
    }
  }
}

TEST(FailureProbability, MonotoneOverTableRange) {
  for (double p : {0.1, 0.25, 1.0 / 3.0, 0.5})
    for (int n = 10; n < 30; ++n) EXPECT_LT(failure_probability(n + 1, p), failure_probability(n, p));
  for (int n = 10; n <= 30; ++n)
    for (int k = 1; k < 10; ++k) EXPECT_LT(failure_probability(n, k * 0.05), failure_probability(n, (k + 1) * 0.05));
}

TEST(FailureProbability, BadRatio) {
  for (double p : {0.0, -0.1, 0.51, 1.0}) {
    try {
      failure_probability(10, p);
      FAIL() << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadRatio);
    }
  }
}

TEST(MinGroupCount, PublishedThresholds) {
  EXPECT_EQ(min_group_count(1e-7, 0.5), 28);
  EXPECT_EQ(min_group_count(1e-7, 1.0 / 3.0), 26);
  EXPECT_EQ(min_group_count(1.0, 1.0 / 3.0), 1);
}

TEST(MinGroupCount, EveryLargerCountMeetsTarget) {
  for (double target : {1e-3, 1e-5, 1e-9})
    for (double p : {0.2, 1.0 / 3.0, 0.5}) {
      int n = min_group_count(target, p);
      EXPECT_GE(failure_probability(n - 1, p), target);
      for (int m = n; m < n + 30; ++m) EXPECT_LT(failure_probability(m, p), target);
    }
}

TEST(ExpectedGroupsToFirstFailure, ReciprocalIdentity) {
  EXPECT_DOUBLE_EQ(expected_groups_to_first_failure(1e-7), 1e7);
  double p = failure_probability(28, 0.5);
  EXPECT_DOUBLE_EQ(expected_groups_to_first_failure(p) * p, 1.0);
}

TEST(QuorumArithmetic, Thresholds) {
  EXPECT_EQ(quorum_threshold(3), 3u);
  EXPECT_EQ(quorum_threshold(12), 9u);
  EXPECT_EQ(quorum_threshold(30), 21u);
  EXPECT_EQ(failing_faulty_count(10), 4u);
  EXPECT_EQ(failing_faulty_count(12), 4u);
  EXPECT_EQ(failing_faulty_count(30), 10u);
}

// ---- Monte Carlo -------------------------------------------------------------

TEST(MonteCarlo, NoAdversariesNeverFails) {
  auto r = monte_carlo_group_failure({200, 11, 0.0, 1}, 10000);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_EQ(r.rate, 0.0);
}

TEST(MonteCarlo, AgreesWithExactHypergeometricModel) {
  struct Case {
    std::size_t nodes, groups;
    double ratio;
  };
  for (auto c : {Case{110, 11, 1.0 / 3.0}, Case{140, 14, 0.5}, Case{170, 17, 0.2}}) {
    SelectionConfig cfg{c.nodes, c.groups, c.ratio, 2024};
    auto r = monte_carlo_group_failure(cfg, 100000);
    auto adversaries = static_cast<std::int64_t>(std::llround(c.ratio * c.nodes));
    double exact = static_cast<double>(testing::exact_selection_failure(
        static_cast<std::int64_t>(c.nodes), adversaries, static_cast<std::int64_t>(c.groups - 1)));
    double se = std::sqrt(exact * (1 - exact) / 100000.0);
    EXPECT_NEAR(r.rate, exact, 4 * se) << c.nodes << " " << c.ratio;
    EXPECT_LE(r.ci_low, r.rate);
    EXPECT_GE(r.ci_high, r.rate);
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResult) {
  SelectionConfig cfg{90, 10, 1.0 / 3.0, 5};
  auto a = monte_carlo_group_failure(cfg, 20000, 1);
  auto b = monte_carlo_group_failure(cfg, 20000, 3);
  EXPECT_EQ(a.failures, b.failures);
}

TEST(MonteCarlo, TooFewTrialsRejected) {
  EXPECT_THROW(monte_carlo_group_failure({90, 10, 0.3, 5}, 9999), Error);
  EXPECT_THROW(monte_carlo_group_failure({5, 10, 0.3, 5}, 10000), Error);
}

TEST(SubgroupComposition, FaultyCountsFollowHypergeometricTail) {
  // Adversaries placed uniformly, then a uniform partition: the number of
  // adversaries in one subgroup of size k is Hypergeometric(N, A, k).
  const std::size_t n_nodes = 120, group_count = 10, adversaries = 40, k = 12;
  const std::uint64_t trials = 40000;
  std::uint64_t heavy = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(31, t));
    std::vector<std::uint8_t> bad(n_nodes, 0);
    auto order = ids(n_nodes);
    rng.shuffle(std::span(order));
    for (std::size_t i = 0; i < adversaries; ++i) bad[to_index(order[i])] = 1;
    auto groups = partition_candidates(ids(n_nodes), group_count, rng.next());
    std::size_t faulty = 0;
    for (auto m : groups[0].members) faulty += bad[to_index(m)];
    heavy += faulty >= (k + 2) / 3 + 1;  // strictly more than one third
  }
  double rate = static_cast<double>(heavy) / trials;
  double exact = static_cast<double>(testing::hypergeometric_tail(n_nodes, adversaries, k, (k + 2) / 3 + 1));
  EXPECT_NEAR(rate, exact, 3 * std::sqrt(exact * (1 - exact) / trials));
}

}  // namespace
}  // namespace endorse::selection
