#pragma once

#include <cstddef>
#include <vector>

#include "reann/dataset.hpp"
#include "reann/network.hpp"

namespace reann {

enum class FloorMode { relative, absolute };

struct PruneConfig {
  FloorMode mode = FloorMode::relative;
  /// Relative mode: allowed drop from the pre-prune training accuracy.
  double eta = 0.01;
  /// Absolute mode: training accuracy that must be kept.
  double min_accuracy = 0.0;
  int retrain_epochs = 30;

  void validate() const;
  double floor(double baseline_accuracy) const;
};

struct PruneStep {
  enum class Outcome { commit, rollback };
  Outcome outcome = Outcome::commit;
  bool input_to_hidden = true;
  int from = 0;
  int to = 0;
  double weight = 0.0;
  double accuracy = 0.0;
  std::size_t active_after = 0;
};

struct PruneResult {
  Network network;
  std::vector<PruneStep> log;
  TrainTrace trace;  // retraining epochs of committed removals only
  double baseline_accuracy = 0.0;
  double floor = 0.0;
  double final_accuracy = 0.0;
  std::vector<bool> removed_inputs;
  std::vector<bool> removed_hidden;
};

/// Greedy magnitude pruning: mask the smallest active weight, retrain
/// briefly, keep the removal if training accuracy stays at or above the
/// floor, otherwise restore and exempt that weight. Biases are never pruned.
PruneResult prune(const Network& net, const DatasetView& train_data, const TrainConfig& tcfg,
                  const PruneConfig& pcfg);

}  // namespace reann
