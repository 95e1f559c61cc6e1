#pragma once

#include <vector>

#include "reann/dataset.hpp"
#include "reann/network.hpp"

namespace reann {

struct GrowthConfig {
  /// Minimum relative drop in training SSE that keeps a newly added node.
  double improvement_threshold = 0.01;
  /// Epochs trained at each candidate hidden-layer size.
  int patience_epochs = 100;
  int max_hidden = 5;

  void validate() const;
};

struct GrowthStep {
  int hidden = 0;
  double sse = 0.0;
  bool accepted = false;
};

struct GrowthResult {
  Network network;
  std::vector<GrowthStep> log;
  /// Epoch errors of the returned network's own training history.
  TrainTrace trace;
};

/// Starts from one hidden node and adds nodes one at a time, keeping the
/// trained weights of existing nodes. Growth stops once the training error
/// reaches `tcfg.target_error`, a new node fails to improve the error by the
/// configured fraction (that node is dropped again), or `max_hidden` is hit.
GrowthResult grow(const DatasetView& train_data, const TrainConfig& tcfg, const GrowthConfig& gcfg);

}  // namespace reann
