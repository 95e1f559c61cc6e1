#include <gtest/gtest.h>

#include "reann/constructor.hpp"
#include "reann/error.hpp"
#include "reann/pipeline.hpp"
#include "test_support.hpp"

using namespace reann;
using reann::testing::toy_dataset;

namespace {

TrainConfig tcfg(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  c.learning_rate = 0.5;
  return c;
}

GrowthConfig gcfg(int max_hidden, double threshold = 0.01, int patience = 100) {
  GrowthConfig g;
  g.max_hidden = max_hidden;
  g.improvement_threshold = threshold;
  g.patience_epochs = patience;
  return g;
}

Dataset xor_like() {
  return toy_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0.1, 0.1}, {0.1, 0.9}, {0.9, 0.1}, {0.9, 0.9}},
                     {0, 1, 1, 0, 0, 1, 1, 0});
}

}  // namespace

TEST(Constructor, ValidatesConfig) {
  EXPECT_THROW(gcfg(0).validate(), InvalidConfig);
  EXPECT_THROW(gcfg(3, 0.0).validate(), InvalidConfig);
  EXPECT_THROW(gcfg(3, 0.01, 0).validate(), InvalidConfig);
  const Dataset d = toy_dataset({{0.0}}, {0});
  EXPECT_THROW(grow(DatasetView(d, {0, 0}), tcfg(1), gcfg(3)), InvalidConfig);
}

TEST(Constructor, MaxHiddenOneKeepsSingleNode) {
  const Dataset d = xor_like();
  const GrowthResult g = grow(DatasetView(d), tcfg(3), gcfg(1));
  EXPECT_EQ(g.network.hidden_count(), 1);
  ASSERT_EQ(g.log.size(), 1u);
  EXPECT_EQ(g.log.front().hidden, 1);
  EXPECT_EQ(g.trace.epochs_run, 100);
}

TEST(Constructor, SeparableToyStopsAtOneNode) {
  const Dataset d = toy_dataset({{0.0}, {0.1}, {0.9}, {1.0}}, {0, 0, 1, 1});
  TrainConfig c = tcfg(4);
  c.target_error = 0.05;
  const GrowthResult g = grow(DatasetView(d), c, gcfg(5, 0.01, 2000));
  EXPECT_EQ(g.network.hidden_count(), 1);
  EXPECT_EQ(accuracy(g.network, DatasetView(d)), 1.0);
}

TEST(Constructor, HiddenCountNeverExceedsCap) {
  const Dataset d = xor_like();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const GrowthResult g = grow(DatasetView(d), tcfg(seed), gcfg(3, 1e-6, 50));
    EXPECT_LE(g.network.hidden_count(), 3);
    EXPECT_GE(g.network.hidden_count(), 1);
  }
}

TEST(Constructor, LogRecordsAcceptedAndRejectedSteps) {
  const Dataset d = xor_like();
  const GrowthResult g = grow(DatasetView(d), tcfg(6), gcfg(4, 0.01, 200));
  ASSERT_FALSE(g.log.empty());
  EXPECT_TRUE(g.log.front().accepted);
  int accepted = 0;
  for (std::size_t i = 0; i < g.log.size(); ++i) {
    if (g.log[i].accepted) ++accepted;
    else EXPECT_EQ(i + 1, g.log.size()) << "rejection must end growth";
  }
  EXPECT_EQ(g.network.hidden_count(), accepted);
  // Accepted steps strictly reduce the training error.
  for (std::size_t i = 1; i < g.log.size(); ++i)
    if (g.log[i].accepted) EXPECT_LT(g.log[i].sse, g.log[i - 1].sse);
}

TEST(Constructor, GrowthIsDeterministic) {
  const Dataset d = xor_like();
  const GrowthResult a = grow(DatasetView(d), tcfg(9), gcfg(3));
  const GrowthResult b = grow(DatasetView(d), tcfg(9), gcfg(3));
  EXPECT_TRUE(a.network == b.network);
  EXPECT_EQ(a.trace.epoch_errors, b.trace.epoch_errors);
}

TEST(Constructor, CancerHiddenCountStaysSmall) {
  const PipelineConfig cfg = load_pipeline_config(reann::testing::source_path("configs/breast-cancer.cfg"));
  const PreparedData p = prepare_data(cfg);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GrowthResult g = grow(p.train, seeded(cfg.train, seed), cfg.growth);
    EXPECT_GE(g.network.hidden_count(), 1) << "seed " << seed;
    EXPECT_LE(g.network.hidden_count(), 3) << "seed " << seed;
  }
}
