#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reann/dataset.hpp"

namespace reann {

enum class Op { le, gt, eq };

/// Test on one column of a pattern table: an input attribute in encoded
/// space, or a hidden node's representative index.
struct Condition {
  std::size_t attribute = 0;
  Op op = Op::le;
  double value = 0.0;

  bool matches(double x) const;
  bool operator==(const Condition&) const = default;
};

struct Rule {
  std::vector<Condition> conditions;  // conjunction
  int consequent = 0;
  std::size_t support = 0;         // training patterns matched
  std::size_t errors_on_train = 0; // matched with a different label

  template <typename Derived>
  bool matches(const Eigen::MatrixBase<Derived>& x) const {
    for (const auto& c : conditions)
      if (!c.matches(x(static_cast<Eigen::Index>(c.attribute)))) return false;
    return true;
  }
  bool same_logic(const Rule& o) const { return consequent == o.consequent && conditions == o.conditions; }
};

struct RuleSet {
  std::vector<Rule> rules;
  int default_class = 0;

  /// Reported rule count; the default rule counts as one.
  std::size_t count_with_default() const { return rules.size() + 1; }
};

/// Labeled rows to induce rules from; columns are whatever the conditions index.
struct PatternTable {
  Eigen::MatrixXd features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

PatternTable to_table(const DatasetView& data);

/// Merges bounds on the same attribute (tightest `<=` and `>` survive),
/// folds bounds into an equality test, and orders conditions by attribute.
/// Returns false when the conjunction has an empty feasible region.
bool simplify(std::vector<Condition>& conditions);

/// Recomputes support and errors_on_train over `table`.
void refresh_statistics(RuleSet& rs, const PatternTable& table);

/// Rule text: `Rule n: If <cond> and <cond> then <class>` lines followed by
/// `Default Rule: <class>`. Thresholds carry exactly two fractional digits.
std::string attribute_display(const std::vector<AttributeSpec>& attributes, std::size_t index);
std::string format_condition(const Condition& c, const std::vector<AttributeSpec>& attributes);
std::string format_rules(const RuleSet& rs, const std::vector<AttributeSpec>& attributes,
                         const std::vector<std::string>& class_names);
RuleSet parse_rules(std::istream& in, const std::vector<AttributeSpec>& attributes,
                    const std::vector<std::string>& class_names, const std::string& origin = "<rules>");

}  // namespace reann
