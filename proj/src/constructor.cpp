#include "reann/constructor.hpp"

#include <random>

#include "reann/error.hpp"

namespace reann {

void GrowthConfig::validate() const {
  if (!(improvement_threshold > 0.0)) throw InvalidConfig("growth threshold must be > 0");
  if (patience_epochs < 1) throw InvalidConfig("growth patience must be >= 1 epoch");
  if (max_hidden < 1) throw InvalidConfig("max_hidden must be >= 1");
}

namespace {

void append(TrainTrace& into, const TrainTrace& more) {
  into.epoch_errors.insert(into.epoch_errors.end(), more.epoch_errors.begin(), more.epoch_errors.end());
  into.epochs_run += more.epochs_run;
}

}  // namespace

GrowthResult grow(const DatasetView& train_data, const TrainConfig& tcfg, const GrowthConfig& gcfg) {
  tcfg.validate();
  gcfg.validate();
  if (train_data.empty()) throw InvalidConfig("cannot grow a network on an empty dataset");

  TrainConfig stage = tcfg;
  stage.max_epochs = gcfg.patience_epochs;

  std::mt19937_64 rng(tcfg.seed);
  const auto n_in = static_cast<Eigen::Index>(train_data.attribute_count());
  const auto n_out = static_cast<Eigen::Index>(train_data.class_count());

  GrowthResult result;
  auto [net, trace] = train(init(n_in, 1, n_out, tcfg, rng), train_data, stage);
  double sse = sum_squared_error(net, train_data);
  result.log.push_back({1, sse, true});
  append(result.trace, trace);

  while (sse > tcfg.target_error && net.hidden_count() < gcfg.max_hidden) {
    auto [candidate, more] = train(add_hidden_node(net, tcfg, rng), train_data, stage);
    const double candidate_sse = sum_squared_error(candidate, train_data);
    const double improvement = sse > 0.0 ? (sse - candidate_sse) / sse : 0.0;
    const bool accepted = improvement >= gcfg.improvement_threshold;
    result.log.push_back({static_cast<int>(candidate.hidden_count()), candidate_sse, accepted});
    if (!accepted) break;
    net = std::move(candidate);
    sse = candidate_sse;
    append(result.trace, more);
  }
  result.network = std::move(net);
  return result;
}

}  // namespace reann
