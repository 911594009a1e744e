#include <gtest/gtest.h>

#include <algorithm>

#include "endorse/simulator/bootstrap.hpp"

namespace endorse::simulator {
namespace {

TEST(Scale, CompletionTimeIsApproximatelyLinearInNodes) {
  std::vector<double> per_node;
  double last = 0;
  for (std::size_t nodes : {2000u, 4000u, 8000u}) {
    RunConfig c;
    c.sim.node_count = nodes;
    c.sim.endorsement_nodes = 20;
    const auto r = run_bootstrap(c.sim, c.net).report;
    EXPECT_EQ(r.failed_candidates, 0u);
    EXPECT_GT(r.completion_time_s, last) << nodes;
    last = r.completion_time_s;
    per_node.push_back(r.completion_time_s / static_cast<double>(nodes));
  }
  const auto [lo, hi] = std::minmax_element(per_node.begin(), per_node.end());
  const double mid = (*lo + *hi) / 2;
  for (double v : per_node) EXPECT_NEAR(v, mid, 0.5 * mid);
}

}  // namespace
}  // namespace endorse::simulator
