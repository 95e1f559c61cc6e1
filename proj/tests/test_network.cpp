#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "reann/error.hpp"
#include "reann/network.hpp"
#include "test_support.hpp"

using namespace reann;
using reann::testing::toy_dataset;

namespace {

Network single_path(double w_ih, double w_ho) {
  Network n;
  n.w_ih = Eigen::MatrixXd::Constant(1, 1, w_ih);
  n.w_ho = Eigen::MatrixXd::Constant(1, 1, w_ho);
  n.b_h = Eigen::VectorXd::Zero(1);
  n.b_o = Eigen::VectorXd::Zero(1);
  n.mask_ih = Network::Mask::Constant(1, 1, true);
  n.mask_ho = Network::Mask::Constant(1, 1, true);
  return n;
}

TrainConfig config(std::uint64_t seed, double lr = 0.5, int epochs = 500) {
  TrainConfig c;
  c.seed = seed;
  c.learning_rate = lr;
  c.max_epochs = epochs;
  return c;
}

}  // namespace

TEST(Network, InitCountsConnections) {
  const Network n = init(9, 1, 2, config(7));
  EXPECT_EQ(n.active_connections(), 11u);
  EXPECT_EQ(n.input_count(), 9);
  EXPECT_EQ(n.hidden_count(), 1);
  EXPECT_EQ(n.output_count(), 2);
  EXPECT_LE(n.w_ih.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Network, InitIsDeterministic) {
  EXPECT_TRUE(init(9, 1, 2, config(7)) == init(9, 1, 2, config(7)));
  EXPECT_FALSE(init(9, 1, 2, config(7)) == init(9, 1, 2, config(8)));
}

TEST(Network, InitRejectsBadShapesAndConfig) {
  EXPECT_THROW(init(9, 0, 2, config(7)), InvalidConfig);
  EXPECT_THROW(init(9, 1, 2, config(7, 0.05)), InvalidConfig);
  EXPECT_THROW(init(9, 1, 2, config(7, 1.5)), InvalidConfig);
}

TEST(Network, ZeroWeightsGiveNeutralActivations) {
  Network n = init(3, 2, 2, config(1));
  n.w_ih.setZero();
  n.w_ho.setZero();
  n.b_h.setZero();
  n.b_o.setZero();
  const auto a = forward(n, Eigen::RowVector3d(0.3, 0.9, 0.1));
  EXPECT_TRUE(a.hidden.isZero());
  EXPECT_TRUE(a.output.isApproxToConstant(0.5));
}

TEST(Network, ForwardMatchesIndependentEvaluation) {
  // tanh(1) and 1 / (1 + exp(-tanh(1))) evaluated independently.
  const auto a = forward(single_path(1.0, 1.0), Eigen::Matrix<double, 1, 1>(1.0));
  EXPECT_NEAR(a.hidden(0), 0.7615941559557649, 1e-12);
  EXPECT_NEAR(a.output(0), 0.6816997421945262, 1e-12);
}

TEST(Network, OutputWeightSignDecidesClass) {
  Network n;
  n.w_ih = Eigen::MatrixXd::Constant(1, 1, 1.0);
  n.mask_ih = Network::Mask::Constant(1, 1, true);
  n.w_ho = Eigen::MatrixXd(1, 2);
  n.w_ho << 3.0354, -3.0354;
  n.mask_ho = Network::Mask::Constant(1, 2, true);
  n.b_h = Eigen::VectorXd::Zero(1);
  n.b_o = Eigen::VectorXd::Zero(2);
  const Eigen::Matrix<double, 1, 1> x(std::atanh(0.987));
  const auto a = forward(n, x);
  EXPECT_NEAR(a.hidden(0), 0.987, 1e-12);
  EXPECT_NEAR(a.output(0), 0.9523903631276327, 1e-12);
  EXPECT_NEAR(a.output(1), 0.04760963687236732, 1e-12);
  EXPECT_EQ(predict(n, x), 0);
}

TEST(Network, DimensionMismatch) {
  const Network n = init(3, 1, 2, config(1));
  EXPECT_THROW(forward(n, Eigen::RowVector2d(0.1, 0.2)), DimensionMismatch);
  EXPECT_THROW(one_hot<double>(2, 2), DimensionMismatch);
}

TEST(Network, ArgmaxTiesGoToLowestIndex) {
  EXPECT_EQ(argmax(Eigen::Vector3d(0.5, 0.5, 0.2)), 0);
  EXPECT_EQ(argmax(Eigen::Vector3d(0.1, 0.7, 0.7)), 1);
}

TEST(Network, LearnsSeparableToy) {
  const Dataset d = toy_dataset({{0.0}, {1.0}}, {0, 1});
  const DatasetView v(d);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto [net, trace] = train(init(1, 1, 2, config(seed)), v, config(seed));
    EXPECT_EQ(accuracy(net, v), 1.0) << "seed " << seed;
    EXPECT_EQ(trace.epochs_run, static_cast<int>(trace.epoch_errors.size()));
  }
}

TEST(Network, ZeroEpochsLeavesNetworkUnchanged) {
  const Dataset d = toy_dataset({{0.0}, {1.0}}, {0, 1});
  const Network start = init(1, 1, 2, config(3));
  auto [net, trace] = train(start, DatasetView(d), config(3, 0.5, 0));
  EXPECT_TRUE(net == start);
  EXPECT_TRUE(trace.epoch_errors.empty());
  EXPECT_EQ(trace.epochs_run, 0);
}

TEST(Network, EpochErrorMostlyDecreases) {
  const Dataset d = toy_dataset({{0.0, 0.2}, {0.1, 0.9}, {0.8, 0.3}, {1.0, 0.7}, {0.3, 0.1}, {0.7, 0.8}},
                                {0, 0, 1, 1, 0, 1});
  auto [net, trace] = train(init(2, 2, 2, config(11)), DatasetView(d), config(11, 0.5, 300));
  for (std::size_t e = 1; e < trace.epoch_errors.size(); ++e)
    EXPECT_LE(trace.epoch_errors[e], trace.epoch_errors[e - 1] * 1.05) << "epoch " << e;
  EXPECT_LT(trace.epoch_errors.back(), trace.epoch_errors.front());
}

TEST(Network, TargetErrorStopsEarly) {
  const Dataset d = toy_dataset({{0.0}, {1.0}}, {0, 1});
  TrainConfig c = config(2, 1.0, 5000);
  c.target_error = 0.05;
  auto [net, trace] = train(init(1, 1, 2, c), DatasetView(d), c);
  EXPECT_LT(trace.epochs_run, 5000);
  EXPECT_LE(trace.epoch_errors.back(), 0.05);
}

TEST(Network, MaskedWeightsStayZeroThroughTraining) {
  const Dataset d = toy_dataset({{0.0, 1.0}, {1.0, 0.0}, {0.2, 0.9}, {0.9, 0.1}}, {0, 1, 0, 1});
  Network n = init(2, 2, 2, config(5));
  n.mask_ih(1, 0) = false;
  n.mask_ho(1, 1) = false;
  n.apply_masks();
  auto [trained, trace] = train(n, DatasetView(d), config(5, 0.5, 50));
  EXPECT_EQ(trained.w_ih(1, 0), 0.0);
  EXPECT_EQ(trained.w_ho(1, 1), 0.0);
  EXPECT_EQ(trained.active_connections(), 6u);
}

TEST(Network, SaturatedCorrectOutputHasZeroGradient) {
  Network n = init(2, 2, 2, config(9));
  n.b_o << -1000.0, 1000.0;
  n.w_ho.setZero();
  const auto g = loss_gradient(n, Eigen::RowVector2d(0.4, 0.6), 1);
  EXPECT_TRUE(g.w_ih.isZero());
  EXPECT_TRUE(g.w_ho.isZero());
  EXPECT_TRUE(g.b_h.isZero());
  EXPECT_TRUE(g.b_o.isZero());
}

TEST(Network, MaskedConnectionHasZeroGradient) {
  Network n = init(3, 2, 2, config(4));
  n.mask_ih(2, 1) = false;
  n.mask_ho(0, 0) = false;
  n.apply_masks();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto g = loss_gradient(n, Eigen::RowVector3d(u(rng), u(rng), u(rng)), t % 2);
    EXPECT_EQ(g.w_ih(2, 1), 0.0);
    EXPECT_EQ(g.w_ho(0, 0), 0.0);
  }
}

// Central differences with step 1e-5 against the analytic gradient.
TEST(Network, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr double h = 1e-5;
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    TrainConfig c = config(static_cast<std::uint64_t>(trial) + 100);
    Network n = init(size(rng), size(rng), size(rng) + 1, c);
    Eigen::RowVectorXd x(n.input_count());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
    const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(n.output_count()));
    const auto g = loss_gradient(n, x, label);

    auto check = [&](double& w, double analytic) {
      const double keep = w;
      w = keep + h;
      const double up = squared_error(n, x, label);
      w = keep - h;
      const double down = squared_error(n, x, label);
      w = keep;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
      const double rel = std::abs(numeric - analytic) / scale;
      worst = std::max(worst, rel);
      EXPECT_LE(rel, 1e-4) << "trial " << trial;
      ++checked;
    };
    for (Eigen::Index i = 0; i < n.w_ih.size(); ++i) check(n.w_ih.data()[i], g.w_ih.data()[i]);
    for (Eigen::Index i = 0; i < n.w_ho.size(); ++i) check(n.w_ho.data()[i], g.w_ho.data()[i]);
    for (Eigen::Index i = 0; i < n.b_h.size(); ++i) check(n.b_h(i), g.b_h(i));
    for (Eigen::Index i = 0; i < n.b_o.size(); ++i) check(n.b_o(i), g.b_o(i));
  }
  EXPECT_GE(checked, 100);
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(Network, GradientTemplatedOnFloatAgreesWithDouble) {
  const Network n = init(3, 2, 2, config(12));
  const Eigen::RowVector3d x(0.2, 0.5, 0.9);
  const auto gd = loss_gradient(n, x, 1);
  const auto gf = loss_gradient(n.cast<float>(), x.cast<float>(), 1);
  EXPECT_TRUE(gf.w_ih.cast<double>().isApprox(gd.w_ih, 1e-4));
  EXPECT_TRUE(gf.w_ho.cast<double>().isApprox(gd.w_ho, 1e-4));
}

TEST(Network, ConstantNetworkAccuracyIsClassZeroFrequency) {
  const Dataset d = toy_dataset({{0.1}, {0.2}, {0.3}, {0.4}, {0.5}}, {0, 1, 0, 0, 1});
  Network n = init(1, 1, 2, config(1));
  n.w_ih.setZero();
  n.w_ho.setZero();
  n.b_o.setZero();
  EXPECT_DOUBLE_EQ(accuracy(n, DatasetView(d)), 0.6);
  const Dataset one = toy_dataset({{0.1}}, {0});
  EXPECT_EQ(accuracy(n, DatasetView(one)), 1.0);
  EXPECT_THROW(accuracy(n, DatasetView(d, {2, 2})), DimensionMismatch);
}

TEST(Network, SnapshotRoundTrip) {
  Network n = init(4, 3, 2, config(21));
  n.mask_ih(0, 1) = false;
  n.mask_ho(2, 0) = false;
  n.apply_masks();
  std::stringstream buf;
  save_network(n, buf);
  const Network back = load_network(buf);
  EXPECT_TRUE(back == n);
}

TEST(Network, SnapshotRejectsGarbage) {
  std::istringstream in("w_ih 0 0 zero 1\n");
  EXPECT_THROW(load_network(in), MalformedInput);
}
