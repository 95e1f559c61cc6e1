#include "reann/pruner.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "reann/error.hpp"

namespace reann {

void PruneConfig::validate() const {
  if (mode == FloorMode::relative && !(eta >= 0.0 && eta <= 0.05))
    throw InvalidConfig(fmt::format("prune eta {} outside [0, 0.05]", eta));
  if (mode == FloorMode::absolute && !(min_accuracy >= 0.0 && min_accuracy <= 1.0))
    throw InvalidConfig("prune min_accuracy outside [0, 1]");
  if (retrain_epochs < 0) throw InvalidConfig("retrain_epochs must be >= 0");
}

double PruneConfig::floor(double baseline_accuracy) const {
  return mode == FloorMode::relative ? baseline_accuracy - eta : min_accuracy;
}

namespace {

struct Candidate {
  bool input_to_hidden;
  Eigen::Index row;
  Eigen::Index col;
};

// Smallest |w| among active, non-exempt weights; input->hidden before
// hidden->output and column-major order break ties.
std::optional<Candidate> smallest_weight(const Network& net, const Network::Mask& exempt_ih,
                                         const Network::Mask& exempt_ho) {
  std::optional<Candidate> best;
  double best_mag = std::numeric_limits<double>::infinity();
  auto scan = [&](const Eigen::MatrixXd& w, const Network::Mask& mask, const Network::Mask& exempt,
                  bool ih) {
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        if (!mask(r, c) || exempt(r, c)) continue;
        const double mag = std::abs(w(r, c));
        if (mag < best_mag) {
          best_mag = mag;
          best = Candidate{ih, r, c};
        }
      }
  };
  scan(net.w_ih, net.mask_ih, exempt_ih, true);
  scan(net.w_ho, net.mask_ho, exempt_ho, false);
  return best;
}

}  // namespace

PruneResult prune(const Network& net, const DatasetView& train_data, const TrainConfig& tcfg,
                  const PruneConfig& pcfg) {
  tcfg.validate();
  pcfg.validate();

  PruneResult result;
  result.baseline_accuracy = accuracy(net, train_data);
  result.floor = pcfg.floor(result.baseline_accuracy);
  if (result.baseline_accuracy < result.floor)
    throw InvalidConfig(fmt::format("network accuracy {} is already below the prune floor {}",
                                    result.baseline_accuracy, result.floor));

  TrainConfig retrain = tcfg;
  retrain.max_epochs = pcfg.retrain_epochs;

  Network current = net;
  Network::Mask exempt_ih = Network::Mask::Constant(net.input_count(), net.hidden_count(), false);
  Network::Mask exempt_ho = Network::Mask::Constant(net.hidden_count(), net.output_count(), false);

  while (const auto pick = smallest_weight(current, exempt_ih, exempt_ho)) {
    Network trial = current;
    double weight;
    if (pick->input_to_hidden) {
      weight = trial.w_ih(pick->row, pick->col);
      trial.mask_ih(pick->row, pick->col) = false;
    } else {
      weight = trial.w_ho(pick->row, pick->col);
      trial.mask_ho(pick->row, pick->col) = false;
    }
    trial.apply_masks();
    auto [retrained, trace] = train(std::move(trial), train_data, retrain);
    const double acc = accuracy(retrained, train_data);

    PruneStep step;
    step.input_to_hidden = pick->input_to_hidden;
    step.from = static_cast<int>(pick->row);
    step.to = static_cast<int>(pick->col);
    step.weight = weight;
    step.accuracy = acc;
    if (acc >= result.floor) {
      step.outcome = PruneStep::Outcome::commit;
      current = std::move(retrained);
      result.trace.epoch_errors.insert(result.trace.epoch_errors.end(), trace.epoch_errors.begin(),
                                       trace.epoch_errors.end());
      result.trace.epochs_run += trace.epochs_run;
    } else {
      step.outcome = PruneStep::Outcome::rollback;
      (pick->input_to_hidden ? exempt_ih : exempt_ho)(pick->row, pick->col) = true;
    }
    step.active_after = current.active_connections();
    result.log.push_back(step);
  }

  result.final_accuracy = accuracy(current, train_data);
  const auto live_in = current.live_inputs();
  const auto live_h = current.live_hidden();
  result.removed_inputs.resize(live_in.size());
  result.removed_hidden.resize(live_h.size());
  for (std::size_t i = 0; i < live_in.size(); ++i) result.removed_inputs[i] = !live_in[i];
  for (std::size_t j = 0; j < live_h.size(); ++j) result.removed_hidden[j] = !live_h[j];
  result.network = std::move(current);
  return result;
}

}  // namespace reann
