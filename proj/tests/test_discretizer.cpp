#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "reann/discretizer.hpp"
#include "reann/error.hpp"
#include "test_support.hpp"

using namespace reann;
using reann::testing::toy_dataset;

TEST(Discretizer, GroupsNearbyValues) {
  const std::vector<double> v{-0.90, -0.88, 0.90};
  const NodeClustering n = cluster_values(v, 0.1);
  ASSERT_EQ(n.representatives.size(), 2u);
  EXPECT_NEAR(n.representatives[0], -0.89, 1e-12);
  EXPECT_NEAR(n.representatives[1], 0.90, 1e-12);
  EXPECT_EQ(n.counts, (std::vector<std::size_t>{2, 1}));
}

TEST(Discretizer, LargeEpsilonGivesOneCluster) {
  const std::vector<double> v{-0.5, 0.0, 0.5};
  const NodeClustering n = cluster_values(v, 2.0);
  // 0.5 and 0.0 join (mean 0.25); -0.5 is 0.75 from that mean and 0.5 from
  // the top, so it joins too.
  ASSERT_EQ(n.representatives.size(), 1u);
  EXPECT_NEAR(n.representatives[0], 0.0, 1e-12);
  EXPECT_EQ(n.counts.front(), 3u);
}

TEST(Discretizer, JoinNeedsUpdatedMeanNearTop) {
  // After 0.30 .. 0.13 form one cluster (mean 1.22 / 6), 0.12 lies within
  // 0.1 of the mean, but adding it would drag the mean 0.1086 below 0.30.
  const std::vector<double> v{0.30, 0.21, 0.21, 0.21, 0.16, 0.13, 0.12};
  const NodeClustering n = cluster_values(v, 0.1);
  ASSERT_EQ(n.representatives.size(), 2u);
  EXPECT_NEAR(n.representatives[0], 0.12, 1e-12);
  EXPECT_NEAR(n.representatives[1], 1.22 / 6, 1e-12);
}

TEST(Discretizer, NearestTiesGoToLowerIndex) {
  NodeClustering n;
  n.representatives = {-0.5, 0.5};
  EXPECT_EQ(n.nearest(0.0), 0u);
  EXPECT_EQ(n.nearest(0.01), 1u);
}

TEST(Discretizer, EpsilonContainmentFuzz) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> count(1, 60);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_real_distribution<double> eps(0.01, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(count(rng)));
    for (auto& x : v) x = value(rng);
    if (trial % 3 == 0)
      for (auto& x : v) x = std::round(x * 4) / 4;  // heavy duplicates
    const double e = eps(rng);
    const NodeClustering n = cluster_values(v, e);
    ASSERT_TRUE(std::is_sorted(n.representatives.begin(), n.representatives.end()));
    ASSERT_TRUE(std::adjacent_find(n.representatives.begin(), n.representatives.end()) == n.representatives.end());
    std::size_t total = 0;
    for (auto c : n.counts) total += c;
    EXPECT_EQ(total, v.size());
    for (double x : v)
      EXPECT_LE(std::abs(x - n.representatives[n.nearest(x)]), e + 1e-12) << "trial " << trial;
  }
}

namespace {

Network two_node_net() {
  Network n;
  n.w_ih = Eigen::MatrixXd(1, 2);
  n.w_ih << 4.0, -4.0;
  n.mask_ih = Network::Mask::Constant(1, 2, true);
  n.w_ho = Eigen::MatrixXd(2, 2);
  n.w_ho << -3.0, 3.0, 0.0, 0.0;
  n.mask_ho = Network::Mask::Constant(2, 2, true);
  n.mask_ho.row(1).setConstant(false);
  n.b_h = Eigen::Vector2d(-2.0, 2.0);
  n.b_o = Eigen::Vector2d::Zero();
  return n;
}

}  // namespace

TEST(Discretizer, ClusterAtMarksDisconnectedNodes) {
  const Dataset d = toy_dataset({{0.0}, {0.05}, {0.95}, {1.0}}, {0, 0, 1, 1});
  const Network n = two_node_net();
  const ActivationClustering c = cluster_at(n, DatasetView(d), 0.1);
  ASSERT_EQ(c.hidden_count(), 2u);
  EXPECT_TRUE(c.nodes[0].connected);
  EXPECT_FALSE(c.nodes[1].connected);
  EXPECT_EQ(c.assignment.size(), 4u);
  EXPECT_EQ(c.assignment[0][0], c.assignment[1][0]);
  EXPECT_NE(c.assignment[0][0], c.assignment[3][0]);
  EXPECT_EQ(discretized_accuracy(n, c, DatasetView(d)), 1.0);
  EXPECT_THROW(cluster_at(n, DatasetView(d), 0.0), InvalidConfig);
  EXPECT_THROW(cluster_at(n, DatasetView(d), 2.5), InvalidConfig);
}

TEST(Discretizer, GridSearchReturnsLargestFeasibleEpsilon) {
  const Dataset d = toy_dataset({{0.0}, {0.05}, {0.95}, {1.0}}, {0, 0, 1, 1});
  const Network n = two_node_net();
  const std::vector<double> grid{0.05, 2.0, 0.5};
  const ActivationClustering c = cluster(n, DatasetView(d), grid, 1.0);
  EXPECT_EQ(c.epsilon, 0.5);
  EXPECT_GE(discretized_accuracy(n, c, DatasetView(d)), 1.0);
  const std::vector<double> only_coarse{2.0};
  EXPECT_THROW(cluster(n, DatasetView(d), only_coarse, 1.0), NoFeasibleEpsilon);
  EXPECT_THROW(cluster(n, DatasetView(d), std::vector<double>{}, 1.0), InvalidConfig);
}

TEST(Discretizer, SaveLoadRoundTrip) {
  const Dataset d = toy_dataset({{0.0}, {0.05}, {0.5}, {0.95}, {1.0}}, {0, 0, 1, 1, 1});
  const Network n = two_node_net();
  const ActivationClustering c = cluster_at(n, DatasetView(d), 0.2);
  std::stringstream buf;
  save_clusters(c, buf);
  const ActivationClustering back = load_clusters(buf, n, DatasetView(d));
  ASSERT_EQ(back.hidden_count(), c.hidden_count());
  for (std::size_t j = 0; j < c.hidden_count(); ++j) {
    EXPECT_EQ(back.nodes[j].representatives, c.nodes[j].representatives);
    EXPECT_EQ(back.nodes[j].counts, c.nodes[j].counts);
    EXPECT_EQ(back.nodes[j].connected, c.nodes[j].connected);
  }
  EXPECT_EQ(back.assignment, c.assignment);
  EXPECT_EQ(back.epsilon, 0.2);
}

TEST(Discretizer, LoadRejectsMismatch) {
  const Dataset d = toy_dataset({{0.0}}, {0});
  std::istringstream one_node("node 0 connected 1 epsilon 0.1\nrep 0 0 0.5 1\n");
  EXPECT_THROW(load_clusters(one_node, two_node_net(), DatasetView(d)), DimensionMismatch);
  std::istringstream orphan("rep 0 0 0.5 1\n");
  EXPECT_THROW(load_clusters(orphan, two_node_net(), DatasetView(d)), MalformedInput);
}
