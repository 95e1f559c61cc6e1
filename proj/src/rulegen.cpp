#include "reann/rulegen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "reann/error.hpp"
#include "reann/ruleset_eval.hpp"

namespace reann {

namespace {

class Bits {
 public:
  explicit Bits(std::size_t n, bool value = false)
      : size_(n), words_((n + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  std::size_t count() const {
    std::size_t c = 0;
    for (const auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  Bits& operator&=(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
    return *this;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
    return *this;
  }
  Bits& subtract(const Bits& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~o.words_[k];
    return *this;
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    r &= o;
    return r;
  }
  /// popcount(this & o) without a temporary.
  std::size_t count_and(const Bits& o) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k) c += static_cast<std::size_t>(std::popcount(words_[k] & o.words_[k]));
    return c;
  }
  std::size_t count_and(const Bits& a, const Bits& b) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k)
      c += static_cast<std::size_t>(std::popcount(words_[k] & a.words_[k] & b.words_[k]));
    return c;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }
  std::size_t size_;
  std::vector<std::uint64_t> words_;
};

Bits match_bits(const PatternTable& table, const Condition& c) {
  Bits b(table.size());
  for (std::size_t p = 0; p < table.size(); ++p)
    if (c.matches(table.features(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c.attribute)))) b.set(p);
  return b;
}

int majority(const std::vector<int>& labels) {
  std::map<int, std::size_t> counts;
  for (const int l : labels) ++counts[l];
  int best = 0;
  std::size_t best_count = 0;
  for (const auto& [label, n] : counts)
    if (n > best_count) {
      best = label;
      best_count = n;
    }
  return best;
}

int label_span(const std::vector<int>& labels) {
  return labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace

CoverResult cover(const PatternTable& table, std::span<const Condition> candidates) {
  const std::size_t n = table.size();
  CoverResult result;
  if (n == 0) return result;

  std::vector<Bits> cand_bits;
  cand_bits.reserve(candidates.size());
  for (const auto& c : candidates) cand_bits.push_back(match_bits(table, c));

  std::map<int, Bits> class_bits;
  for (std::size_t p = 0; p < n; ++p) {
    auto it = class_bits.try_emplace(table.labels[p], n).first;
    it->second.set(p);
  }
  std::map<int, Bits> other_bits;
  for (const auto& [label, bits] : class_bits) {
    Bits other(n);
    for (std::size_t p = 0; p < n; ++p)
      if (!bits.test(p)) other.set(p);
    other_bits.emplace(label, std::move(other));
  }

  Bits marked(n);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (marked.test(seed)) continue;
    const int cls = table.labels[seed];
    const Bits& same = class_bits.at(cls);
    const Bits& other = other_bits.at(cls);

    Bits covered(n, true);
    std::size_t neg = covered.count_and(other);
    std::vector<Condition> conditions;
    while (neg > 0) {
      std::ptrdiff_t best = -1;
      long long best_score = 0;
      std::size_t best_neg = 0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!cand_bits[i].test(seed)) continue;
        const std::size_t nneg = covered.count_and(cand_bits[i], other);
        if (nneg >= neg) continue;
        const std::size_t npos = covered.count_and(cand_bits[i], same);
        const long long score = static_cast<long long>(npos) - static_cast<long long>(nneg);
        bool better = best < 0 || score > best_score;
        if (!better && score == best_score) {
          if (nneg != best_neg)
            better = nneg < best_neg;
          else
            better = candidates[i].attribute < candidates[static_cast<std::size_t>(best)].attribute;
        }
        if (better) {
          best = static_cast<std::ptrdiff_t>(i);
          best_score = score;
          best_neg = nneg;
        }
      }
      if (best < 0) break;
      conditions.push_back(candidates[static_cast<std::size_t>(best)]);
      covered &= cand_bits[static_cast<std::size_t>(best)];
      neg = best_neg;
    }
    if (neg > 0) {
      result.inseparable.push_back(seed);
      marked.set(seed);
      continue;
    }
    simplify(conditions);
    Rule r;
    r.conditions = std::move(conditions);
    r.consequent = cls;
    r.support = covered.count();
    r.errors_on_train = 0;
    result.rules.push_back(std::move(r));
    marked |= covered;
  }
  return result;
}

std::optional<double> printable_threshold(double low, double high) {
  if (!(low < high)) return std::nullopt;
  auto k_lo = static_cast<long long>(std::floor(low * 100.0)) - 1;
  while (static_cast<double>(k_lo) / 100.0 < low) ++k_lo;
  auto k_hi = static_cast<long long>(std::ceil(high * 100.0)) + 1;
  while (static_cast<double>(k_hi) / 100.0 >= high) --k_hi;
  if (k_lo > k_hi) return std::nullopt;
  const long long k = std::clamp(std::llround((low + high) * 50.0), k_lo, k_hi);
  return static_cast<double>(k) / 100.0;
}

std::vector<Condition> input_candidates(const PatternTable& table, const std::vector<AttributeSpec>& attributes,
                                        const std::vector<bool>& allowed) {
  std::vector<Condition> out;
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (a >= allowed.size() || !allowed[a]) continue;
    std::set<double> values;
    for (std::size_t p = 0; p < table.size(); ++p)
      values.insert(table.features(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(a)));
    if (attributes[a].kind == AttributeKind::categorical) {
      for (const double v : values) out.push_back({a, Op::eq, v});
      continue;
    }
    for (auto it = values.begin(); it != values.end() && std::next(it) != values.end(); ++it) {
      const auto t = printable_threshold(*it, *std::next(it));
      if (!t) continue;
      out.push_back({a, Op::le, *t});
      out.push_back({a, Op::gt, *t});
    }
  }
  return out;
}

RuleSet extract_output_rules(const ActivationClustering& c, const Network& net, const DatasetView& train_data) {
  if (train_data.empty()) throw DimensionMismatch("rule extraction on an empty dataset");
  const std::size_t hidden = c.nodes.size();
  PatternTable table;
  table.features.resize(static_cast<Eigen::Index>(train_data.size()), static_cast<Eigen::Index>(hidden));
  table.labels.resize(train_data.size());
  for (std::size_t p = 0; p < train_data.size(); ++p) {
    const auto& idx = c.assignment.at(p);
    for (std::size_t j = 0; j < hidden; ++j)
      table.features(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = static_cast<double>(idx[j]);
    table.labels[p] = discretized_predict(net, c, idx);
  }

  std::vector<Condition> candidates;
  for (std::size_t j = 0; j < hidden; ++j) {
    if (!c.nodes[j].connected) continue;
    for (std::size_t r = 0; r < c.nodes[j].representatives.size(); ++r)
      candidates.push_back({j, Op::eq, static_cast<double>(r)});
  }

  auto covered = cover(table, candidates);
  // The discretized network is a function of the representative indices.
  if (!covered.inseparable.empty()) throw std::logic_error("output rules: inseparable hidden-cluster pattern");

  RuleSet rs;
  rs.rules = std::move(covered.rules);
  rs.default_class = majority(table.labels);
  tidy(rs, table);
  return rs;
}

std::vector<NodeRules> extract_input_rules(const ActivationClustering& c, const Network& net,
                                           const DatasetView& train_data) {
  if (train_data.empty()) throw DimensionMismatch("rule extraction on an empty dataset");
  const PatternTable inputs = to_table(train_data);
  const auto& attributes = train_data.dataset().attributes;
  std::vector<NodeRules> out;
  for (std::size_t j = 0; j < c.nodes.size(); ++j) {
    NodeRules nr;
    nr.node = j;
    const auto& node = c.nodes[j];
    nr.default_cluster = static_cast<int>(std::max_element(node.counts.begin(), node.counts.end()) - node.counts.begin());
    nr.needed = node.connected && node.representatives.size() > 1;
    if (nr.needed) {
      PatternTable table{inputs.features, std::vector<int>(train_data.size())};
      for (std::size_t p = 0; p < train_data.size(); ++p) table.labels[p] = static_cast<int>(c.assignment.at(p)[j]);
      std::vector<bool> allowed(attributes.size());
      for (std::size_t a = 0; a < attributes.size(); ++a)
        allowed[a] = net.mask_ih(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
      const auto candidates = input_candidates(table, attributes, allowed);
      auto covered = cover(table, candidates);
      nr.rules = std::move(covered.rules);
      nr.inseparable = std::move(covered.inseparable);
    }
    out.push_back(std::move(nr));
  }
  return out;
}

RuleSet compose(const RuleSet& output_rules, const std::vector<NodeRules>& input_rules,
                const DatasetView& train_data) {
  const PatternTable table = to_table(train_data);
  RuleSet rs;
  rs.default_class = output_rules.default_class;

  for (const auto& out_rule : output_rules.rules) {
    // Options per hidden-node test: input rules that imply the tested representative.
    std::vector<std::vector<const Rule*>> options;
    bool feasible = true;
    for (const auto& cond : out_rule.conditions) {
      const auto& family = input_rules.at(cond.attribute);
      const int wanted = static_cast<int>(std::lround(cond.value));
      std::vector<const Rule*> opts;
      if (!family.needed) {
        opts.push_back(nullptr);  // node takes this value on every training pattern
      } else {
        for (const auto& r : family.rules)
          if (r.consequent == wanted) opts.push_back(&r);
      }
      if (opts.empty()) {
        feasible = false;
        break;
      }
      options.push_back(std::move(opts));
    }
    if (!feasible) continue;

    std::vector<std::size_t> pick(options.size(), 0);
    while (true) {
      Rule r;
      r.consequent = out_rule.consequent;
      for (std::size_t k = 0; k < options.size(); ++k)
        if (const Rule* in = options[k][pick[k]])
          r.conditions.insert(r.conditions.end(), in->conditions.begin(), in->conditions.end());
      if (simplify(r.conditions)) rs.rules.push_back(std::move(r));

      std::size_t k = 0;
      for (; k < pick.size(); ++k) {
        if (++pick[k] < options[k].size()) break;
        pick[k] = 0;
      }
      if (k == pick.size()) break;
    }
  }
  tidy(rs, table);
  return rs;
}

void tidy(RuleSet& rs, const PatternTable& table) {
  std::vector<Rule> kept;
  for (auto& r : rs.rules) {
    if (r.conditions.empty()) {
      rs.default_class = r.consequent;
      continue;
    }
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Rule& k) { return k.same_logic(r); });
    if (!duplicate) kept.push_back(std::move(r));
  }
  rs.rules = std::move(kept);
  refresh_statistics(rs, table);
  std::erase_if(rs.rules, [](const Rule& r) { return r.support == 0; });
}

namespace {

struct Assessment {
  bool conflict_free = true;
  double accuracy = 0.0;
  double agreement = 1.0;
};

class FloorCheck {
 public:
  FloorCheck(const PatternTable& table, const RuleFloor& floor) : table_(table), floor_(floor) {
    const std::size_t n = table.size();
    const int classes = label_span(table.labels);
    for (int k = 0; k < classes; ++k) label_bits_.emplace_back(n);
    for (std::size_t p = 0; p < n; ++p) label_bits_[static_cast<std::size_t>(table.labels[p])].set(p);
    if (!floor.reference.empty()) {
      const int ref_classes = std::max(classes, label_span(floor.reference));
      for (int k = 0; k < ref_classes; ++k) reference_bits_.emplace_back(n);
      for (std::size_t p = 0; p < n; ++p) reference_bits_[static_cast<std::size_t>(floor.reference[p])].set(p);
    }
  }

  Assessment assess(const RuleSet& rs) const { return assess(pointers(rs), rs.default_class); }

  bool holds(const RuleSet& rs) const { return holds(pointers(rs), rs.default_class); }

  bool holds(const std::vector<const Rule*>& rules, int default_class) const {
    const auto a = assess(rules, default_class);
    return a.conflict_free && a.accuracy >= floor_.min_accuracy &&
           (floor_.reference.empty() || a.agreement >= floor_.min_agreement);
  }

  /// Majority label among patterns no rule matches.
  std::optional<int> majority_unmatched(const std::vector<const Rule*>& rules) const {
    Bits unmatched(table_.size(), true);
    for (const Rule* r : rules) unmatched.subtract(coverage(*r));
    std::optional<int> best;
    std::size_t best_count = 0;
    for (std::size_t k = 0; k < label_bits_.size(); ++k) {
      const std::size_t c = unmatched.count_and(label_bits_[k]);
      if (c > best_count) {
        best_count = c;
        best = static_cast<int>(k);
      }
    }
    return best;
  }

  Assessment assess(const std::vector<const Rule*>& rules, int default_class) const {
    const std::size_t n = table_.size();
    Assessment a;
    std::map<int, Bits> by_class;
    for (const Rule* r : rules) by_class.try_emplace(r->consequent, n).first->second |= coverage(*r);

    Bits matched(n);
    for (const auto& [cls, bits] : by_class) {
      if (matched.count_and(bits) > 0) {
        a.conflict_free = false;
        return a;
      }
      matched |= bits;
    }
    std::size_t correct = 0, agree = 0;
    Bits fallback(n, true);
    fallback.subtract(matched);
    by_class.try_emplace(default_class, n).first->second |= fallback;
    for (const auto& [cls, bits] : by_class) {
      const auto k = static_cast<std::size_t>(cls);
      if (k < label_bits_.size()) correct += bits.count_and(label_bits_[k]);
      if (k < reference_bits_.size()) agree += bits.count_and(reference_bits_[k]);
    }
    const auto total = static_cast<double>(n);
    a.accuracy = static_cast<double>(correct) / total;
    if (!floor_.reference.empty()) a.agreement = static_cast<double>(agree) / total;
    return a;
  }

  static std::vector<const Rule*> pointers(const RuleSet& rs) {
    std::vector<const Rule*> out;
    out.reserve(rs.rules.size());
    for (const auto& r : rs.rules) out.push_back(&r);
    return out;
  }

 private:
  const Bits& coverage(const Rule& r) const {
    std::vector<double> key;
    key.reserve(3 * r.conditions.size());
    for (const auto& c : r.conditions) {
      key.push_back(static_cast<double>(c.attribute));
      key.push_back(static_cast<double>(static_cast<int>(c.op)));
      key.push_back(c.value);
    }
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Bits b(table_.size(), true);
    for (const auto& c : r.conditions) b &= match_bits(table_, c);
    return cache_.emplace(std::move(key), std::move(b)).first->second;
  }

  const PatternTable& table_;
  const RuleFloor& floor_;
  std::vector<Bits> label_bits_;
  std::vector<Bits> reference_bits_;
  mutable std::map<std::vector<double>, Bits> cache_;
};


/// Printable split points per attribute, ascending.
using Thresholds = std::vector<std::vector<double>>;

Thresholds split_points(const PatternTable& table, const std::vector<AttributeSpec>& attributes) {
  Thresholds out(attributes.size());
  const std::vector<bool> all(attributes.size(), true);
  for (const auto& c : input_candidates(table, attributes, all))
    if (c.op == Op::le) out[c.attribute].push_back(c.value);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

/// Loosens `<=` / `>` bounds of rule i as far as the floor allows.
bool relax_rule(RuleSet& rs, std::size_t i, const Thresholds& points, const FloorCheck& check) {
  bool changed = false;
  for (std::size_t k = 0; k < rs.rules[i].conditions.size(); ++k) {
    const Condition c = rs.rules[i].conditions[k];
    if (c.op == Op::eq || c.attribute >= points.size()) continue;
    std::vector<double> looser;
    for (const double t : points[c.attribute])
      if (c.op == Op::le ? t > c.value : t < c.value) looser.push_back(t);
    if (c.op == Op::le) std::reverse(looser.begin(), looser.end());
    for (const double t : looser) {
      RuleSet trial = rs;
      trial.rules[i].conditions[k].value = t;
      if (check.holds(trial)) {
        rs = std::move(trial);
        changed = true;
        break;
      }
    }
  }
  return changed;
}

RuleSet greedy_prune(RuleSet rs, const PatternTable& table, const FloorCheck& check, const Thresholds& points) {
  tidy(rs, table);
  constexpr int kMaxPasses = 100;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool changed = false;

    // Whole rules, least supported first.
    std::vector<std::size_t> order(rs.rules.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rs.rules[a].support < rs.rules[b].support; });
    std::vector<bool> dropped(rs.rules.size(), false);
    std::vector<const Rule*> kept_rules;
    for (const std::size_t victim : order) {
      kept_rules.clear();
      for (std::size_t i = 0; i < rs.rules.size(); ++i)
        if (!dropped[i] && i != victim) kept_rules.push_back(&rs.rules[i]);
      const int default_class = check.majority_unmatched(kept_rules).value_or(rs.default_class);
      if (check.holds(kept_rules, default_class)) {
        dropped[victim] = true;
        rs.default_class = default_class;
        changed = true;
      }
    }
    if (changed) {
      std::vector<Rule> kept;
      for (std::size_t i = 0; i < rs.rules.size(); ++i)
        if (!dropped[i]) kept.push_back(std::move(rs.rules[i]));
      rs.rules = std::move(kept);
    }

    // Single conditions.
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
      for (std::size_t k = 0; k < rs.rules[i].conditions.size();) {
        RuleSet trial = rs;
        trial.rules[i].conditions.erase(trial.rules[i].conditions.begin() + static_cast<std::ptrdiff_t>(k));
        if (check.holds(trial)) {
          rs = std::move(trial);
          changed = true;
        } else {
          ++k;
        }
      }
    }

    // Looser thresholds.
    for (std::size_t i = 0; i < rs.rules.size(); ++i) changed = relax_rule(rs, i, points, check) || changed;

    RuleSet trial = rs;
    trial.default_class = check.majority_unmatched(FloorCheck::pointers(rs)).value_or(rs.default_class);
    if (trial.default_class != rs.default_class && check.holds(trial)) {
      rs.default_class = trial.default_class;
      changed = true;
    }

    tidy(rs, table);
    if (!changed) break;
  }
  return rs;
}

}  // namespace

RuleSet prune_rules(RuleSet rs, const DatasetView& train_data, const RuleFloor& floor) {
  const PatternTable table = to_table(train_data);
  if (!floor.reference.empty() && floor.reference.size() != table.size())
    throw DimensionMismatch("reference labels do not match training data");
  const int classes = std::max(static_cast<int>(train_data.class_count()), label_span(table.labels));
  const FloorCheck check(table, floor);
  const Thresholds points = split_points(table, train_data.dataset().attributes);

  // Starting points: the full set, and for each class the set with that
  // class's rules removed and the class made the default.
  std::vector<RuleSet> starts{rs};
  for (int k = 0; k < classes; ++k) {
    RuleSet s;
    s.default_class = k;
    for (const auto& r : rs.rules)
      if (r.consequent != k) s.rules.push_back(r);
    if (s.rules.size() != rs.rules.size() && check.holds(s)) starts.push_back(std::move(s));
  }

  RuleSet best;
  std::size_t best_size = 0;
  double best_accuracy = -1.0;
  for (const auto& start : starts) {
    RuleSet pruned = greedy_prune(start, table, check, points);
    const double acc = check.assess(pruned).accuracy;
    if (best_accuracy < 0.0 || pruned.rules.size() < best_size ||
        (pruned.rules.size() == best_size && acc > best_accuracy)) {
      best_size = pruned.rules.size();
      best_accuracy = acc;
      best = std::move(pruned);
    }
  }
  return best;
}

}  // namespace reann
