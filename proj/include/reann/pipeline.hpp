#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reann/constructor.hpp"
#include "reann/dataset.hpp"
#include "reann/discretizer.hpp"
#include "reann/keyvalue.hpp"
#include "reann/network.hpp"
#include "reann/pruner.hpp"
#include "reann/rule.hpp"
#include "reann/rulegen.hpp"

namespace reann {

struct PipelineConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path schema_path;
  SplitSpec split;
  TrainConfig train;  // max_epochs: retraining budget after pruning
  GrowthConfig growth;
  PruneConfig prune;
  std::vector<double> epsilon_grid{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  /// Discretized training accuracy may sit at most this far below the pruned network's.
  double cluster_eta = 0.01;
  /// Rule training accuracy may sit at most this far below the discretized network's.
  double rule_eta = 0.01;
  /// Rules must agree with the discretized network on >= 1 - fidelity_eta of training patterns.
  double fidelity_eta = 0.02;
  int runs = 1;
  std::uint64_t base_seed = 1;
  std::filesystem::path out_dir = "out";

  void validate() const;
};

/// Relative paths inside the config resolve against the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const KeyValueFile& kv, const std::filesystem::path& base_dir);

/// Loaded, encoded dataset plus its split views.
struct PreparedData {
  Schema schema;
  Dataset data;
  DatasetView train;
  DatasetView test;
};
PreparedData prepare_data(const PipelineConfig& cfg);

struct Architecture {
  std::size_t nodes = 0;  // input + hidden + output nodes still in use, bias excluded
  std::size_t connections = 0;
  std::size_t inputs = 0;
  std::size_t hidden = 0;
};
Architecture describe(const Network& net);

/// Everything one pipeline run produces.
struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  Architecture initial, intermediate, final_arch;
  std::vector<GrowthStep> growth_log;
  std::vector<PruneStep> prune_log;
  double prune_floor = 0.0;
  bool final_retrain_kept = false;
  TrainTrace trace;

  Network network;
  ActivationClustering clustering;
  double cluster_floor = 0.0;
  RuleSet output_rules;
  std::vector<NodeRules> input_rules;
  std::size_t composed_rule_count = 0;
  RuleSet rules;

  double network_train_accuracy = 0.0, network_test_accuracy = 0.0;
  double discretized_train_accuracy = 0.0, discretized_test_accuracy = 0.0;
  double rules_train_accuracy = 0.0, rules_test_accuracy = 0.0;
  double fidelity_train = 0.0, fidelity_test = 0.0;  // vs the discretized network
  double network_agreement_train = 0.0, network_agreement_test = 0.0;  // vs the continuous network
};

TrainConfig seeded(const TrainConfig& base, std::uint64_t seed);

/// Pruning followed by a retraining pass of `train.max_epochs` epochs; the
/// retrained weights are kept only if training accuracy stays on the floor.
struct PruneStage {
  PruneResult pruned;
  bool retrain_kept = false;
  TrainTrace retrain_trace;
};
PruneStage prune_stage(const Network& grown, const PreparedData& prepared, const PipelineConfig& cfg,
                       std::uint64_t seed);

ActivationClustering cluster_stage(const Network& net, const PreparedData& prepared, const PipelineConfig& cfg,
                                   double* floor_out = nullptr);

struct Extraction {
  RuleSet output_rules;
  std::vector<NodeRules> input_rules;
  std::size_t composed_rule_count = 0;
  RuleSet rules;
};
Extraction extract_stage(const Network& net, const ActivationClustering& c, const PreparedData& prepared,
                         const PipelineConfig& cfg);

/// One full run (grow, prune, discretize, extract, evaluate). Module errors
/// are caught and recorded in the result.
RunResult run_once(const PreparedData& prepared, const PipelineConfig& cfg, int run_index);

/// Key-value report of one run.
KeyValueFile run_report(const RunResult& r, const PreparedData& prepared);

/// Two columns `epoch,sse` with a header row.
void emit_error_curve(const TrainTrace& trace, std::ostream& out);
void emit_error_curve(const TrainTrace& trace, const std::filesystem::path& path);

/// Writes network.txt, clusters.txt, rules.txt, report.txt and curve.csv.
void write_run_outputs(const RunResult& r, const PreparedData& prepared, const std::filesystem::path& dir);

/// Fields summarised across runs by mean/min/max.
const std::vector<std::string>& aggregated_fields();

/// Mean/min/max of every aggregated field over successful runs, computed
/// from the printed per-run values, plus the best run's fields. The best
/// run has the highest rule test accuracy, then fewest rules, then the
/// lowest index.
KeyValueFile aggregate(const std::vector<KeyValueFile>& reports);

/// Runs every configured run, writes `<out>/run_NN/*` and `<out>/summary.txt`.
KeyValueFile run_pipeline(const PipelineConfig& cfg);

/// Recomputes the summary from `<dir>/run_*/report.txt`.
KeyValueFile aggregate_directory(const std::filesystem::path& dir);

std::string run_directory_name(int run_index);

}  // namespace reann
