#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "reann/dataset.hpp"
#include "reann/discretizer.hpp"
#include "reann/network.hpp"
#include "reann/rule.hpp"

namespace reann {

struct CoverResult {
  std::vector<Rule> rules;
  /// Seed patterns no candidate conjunction could separate from a pattern of
  /// another class (identical on every candidate test). Left to the default.
  std::vector<std::size_t> inseparable;
};

/// Sequential covering. The first unmarked pattern seeds a rule; conditions
/// it satisfies are added greedily, each time maximising
/// (same-class covered - other-class covered) among conditions that strictly
/// shrink the other-class count, ties going to fewer other-class patterns,
/// then the lower column, then candidate order. A pure rule marks every
/// pattern it covers.
CoverResult cover(const PatternTable& table, std::span<const Condition> candidates);

/// Split point with exactly two fractional digits lying in
/// [low, high), chosen nearest the midpoint. Such a threshold partitions the
/// observed values exactly like the midpoint and survives the two-digit rule
/// text unchanged.
std::optional<double> printable_threshold(double low, double high);

/// `<=`/`>` tests at printable split points between consecutive distinct
/// observed values for continuous and ordinal columns; `=` tests for each
/// observed category. Only columns with `allowed[a]` set contribute.
std::vector<Condition> input_candidates(const PatternTable& table, const std::vector<AttributeSpec>& attributes,
                                        const std::vector<bool>& allowed);

/// Rules mapping representative indices of connected hidden nodes to the
/// discretized network's predicted class.
RuleSet extract_output_rules(const ActivationClustering& c, const Network& net, const DatasetView& train_data);

struct NodeRules {
  std::size_t node = 0;
  /// False for nodes that need no description (one representative, or no
  /// route to an output).
  bool needed = false;
  std::vector<Rule> rules;  // consequent = representative index
  int default_cluster = 0;  // most frequent representative
  std::vector<std::size_t> inseparable;
};

/// Per hidden node, rules over the inputs still connected to it that
/// predict the node's representative index.
std::vector<NodeRules> extract_input_rules(const ActivationClustering& c, const Network& net,
                                           const DatasetView& train_data);

/// Replaces each hidden-node test in the output rules by every input rule
/// implying that representative, conjoins across nodes and simplifies.
RuleSet compose(const RuleSet& output_rules, const std::vector<NodeRules>& input_rules,
                const DatasetView& train_data);

/// What a pruned rule set must still achieve on the training data.
struct RuleFloor {
  double min_accuracy = 0.0;
  /// Optional per-pattern labels to agree with (e.g. network predictions).
  std::vector<int> reference;
  double min_agreement = 0.0;
};

/// Repeats until stable: drop whole rules (lowest support first), drop single
/// conditions, loosen `<=`/`>` thresholds to the most general split point
/// the floor allows, reset the default to the majority class of unmatched
/// patterns. A change is kept only if the floor still holds and no training
/// pattern is matched by rules of different classes. The passes start from
/// the given set and from every variant that hands one class entirely to the
/// default rule; the smallest result wins, then the most accurate, then the
/// earliest start.
RuleSet prune_rules(RuleSet rs, const DatasetView& train_data, const RuleFloor& floor);

/// Folds condition-free rules into the default and removes rules that match
/// no training pattern or duplicate an earlier rule.
void tidy(RuleSet& rs, const PatternTable& table);

}  // namespace reann
