#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "reann/dataset.hpp"
#include "reann/discretizer.hpp"
#include "reann/network.hpp"
#include "reann/rule.hpp"

namespace reann {

/// No matching rule gives the default class. When matching rules disagree
/// the one with the highest support wins, then fewer conditions, then the
/// earlier listing.
int classify(const RuleSet& rs, Eigen::Ref<const Eigen::RowVectorXd> x);

struct RuleTally {
  std::size_t rule = 0;  // 1-based, as printed
  std::size_t matched = 0;
  std::size_t correct = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<RuleTally> per_rule;
  std::size_t default_used = 0;
  std::optional<double> fidelity_vs_network;
};

EvalReport evaluate(const RuleSet& rs, const DatasetView& data);

/// Share of patterns where the rule set agrees with the discretized network.
double fidelity(const RuleSet& rs, const Network& net, const ActivationClustering& c, const DatasetView& data);

/// Share of patterns where the rule set agrees with the continuous network.
double network_agreement(const RuleSet& rs, const Network& net, const DatasetView& data);

/// True when no pattern matches two rules with different consequents.
bool conflict_free(const RuleSet& rs, const PatternTable& table);

/// Majority label among patterns no rule matches; nullopt if every pattern is matched.
std::optional<int> majority_unmatched(const RuleSet& rs, const PatternTable& table, int class_count);

}  // namespace reann
