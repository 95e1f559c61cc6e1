#include "reann/ruleset_eval.hpp"

#include <algorithm>

#include "reann/error.hpp"

namespace reann {

namespace {

// Resolution order among disagreeing matches: support, fewer conditions, listing.
bool outranks(const Rule& a, const Rule& b) {
  if (a.support != b.support) return a.support > b.support;
  return a.conditions.size() < b.conditions.size();
}

}  // namespace

int classify(const RuleSet& rs, Eigen::Ref<const Eigen::RowVectorXd> x) {
  const Rule* winner = nullptr;
  for (const auto& r : rs.rules) {
    for (const auto& c : r.conditions)
      if (c.attribute >= static_cast<std::size_t>(x.size()))
        throw DimensionMismatch("rule refers to a missing attribute");
    if (!r.matches(x)) continue;
    if (winner == nullptr || outranks(r, *winner)) winner = &r;
  }
  return winner ? winner->consequent : rs.default_class;
}

EvalReport evaluate(const RuleSet& rs, const DatasetView& data) {
  if (data.empty()) throw DimensionMismatch("evaluation on an empty dataset");
  EvalReport report;
  for (std::size_t i = 0; i < rs.rules.size(); ++i) report.per_rule.push_back({i + 1, 0, 0});
  std::size_t correct = 0;
  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto x = data.features(p);
    const int label = data.label(p);
    bool any = false;
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
      if (!rs.rules[i].matches(x)) continue;
      any = true;
      ++report.per_rule[i].matched;
      if (rs.rules[i].consequent == label) ++report.per_rule[i].correct;
    }
    if (!any) ++report.default_used;
    if (classify(rs, x) == label) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return report;
}

double fidelity(const RuleSet& rs, const Network& net, const ActivationClustering& c, const DatasetView& data) {
  if (data.empty()) throw DimensionMismatch("fidelity on an empty dataset");
  std::size_t agree = 0;
  for (std::size_t p = 0; p < data.size(); ++p)
    if (classify(rs, data.features(p)) == discretized_predict(net, c, data.features(p))) ++agree;
  return static_cast<double>(agree) / static_cast<double>(data.size());
}

double network_agreement(const RuleSet& rs, const Network& net, const DatasetView& data) {
  if (data.empty()) throw DimensionMismatch("agreement on an empty dataset");
  std::size_t agree = 0;
  for (std::size_t p = 0; p < data.size(); ++p)
    if (classify(rs, data.features(p)) == predict(net, data.features(p))) ++agree;
  return static_cast<double>(agree) / static_cast<double>(data.size());
}

bool conflict_free(const RuleSet& rs, const PatternTable& table) {
  for (std::size_t p = 0; p < table.size(); ++p) {
    const auto x = table.features.row(static_cast<Eigen::Index>(p));
    int seen = -1;
    for (const auto& r : rs.rules) {
      if (!r.matches(x)) continue;
      if (seen >= 0 && seen != r.consequent) return false;
      seen = r.consequent;
    }
  }
  return true;
}

std::optional<int> majority_unmatched(const RuleSet& rs, const PatternTable& table, int class_count) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(class_count, 1)), 0);
  bool any = false;
  for (std::size_t p = 0; p < table.size(); ++p) {
    const auto x = table.features.row(static_cast<Eigen::Index>(p));
    const bool matched = std::any_of(rs.rules.begin(), rs.rules.end(), [&](const Rule& r) { return r.matches(x); });
    if (matched) continue;
    any = true;
    ++counts.at(static_cast<std::size_t>(table.labels[p]));
  }
  if (!any) return std::nullopt;
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace reann
