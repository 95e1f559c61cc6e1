#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "reann/discretizer.hpp"
#include "reann/error.hpp"
#include "reann/network.hpp"
#include "reann/rulegen.hpp"
#include "reann/ruleset_eval.hpp"

namespace reann::checks {

namespace {

void put(KeyValueFile& kv, const std::string& key, double v) { kv.set(key, exact_decimal(v)); }
void put(KeyValueFile& kv, const std::string& key, std::size_t v) { kv.set(key, std::to_string(v)); }

TrainConfig train_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  return c;
}

}  // namespace

KeyValueFile gradient(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double step = 1e-5;
  constexpr double tolerance = 1e-4;
  std::size_t weights = 0, failures = 0;
  double worst = 0.0;
  for (int t = 0; t < cases; ++t) {
    Network net = init(size(rng), size(rng), size(rng) + 1, train_config(rng()), rng);
    for (Eigen::Index i = 0; i < net.input_count(); ++i)
      for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
        if (unit(rng) < 0.2) net.mask_ih(i, j) = false;
    net.apply_masks();
    Eigen::RowVectorXd x(net.input_count());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unit(rng);
    const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(net.output_count()));
    const Gradient<double> g = loss_gradient(net, x, label);

    auto probe = [&](double& w, double analytic, bool active) {
      const double keep = w;
      w = keep + step;
      const double up = squared_error(net, x, label);
      w = keep - step;
      const double down = squared_error(net, x, label);
      w = keep;
      const double numeric = active ? (up - down) / (2 * step) : 0.0;
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
      const double rel = std::abs(numeric - analytic) / scale;
      worst = std::max(worst, rel);
      if (rel > tolerance) ++failures;
      ++weights;
    };
    for (Eigen::Index i = 0; i < net.w_ih.rows(); ++i)
      for (Eigen::Index j = 0; j < net.w_ih.cols(); ++j) probe(net.w_ih(i, j), g.w_ih(i, j), net.mask_ih(i, j));
    for (Eigen::Index j = 0; j < net.w_ho.rows(); ++j)
      for (Eigen::Index k = 0; k < net.w_ho.cols(); ++k) probe(net.w_ho(j, k), g.w_ho(j, k), net.mask_ho(j, k));
    for (Eigen::Index j = 0; j < net.b_h.size(); ++j) probe(net.b_h(j), g.b_h(j), true);
    for (Eigen::Index k = 0; k < net.b_o.size(); ++k) probe(net.b_o(k), g.b_o(k), true);
  }
  KeyValueFile kv;
  put(kv, "gradient.cases", static_cast<std::size_t>(cases));
  put(kv, "gradient.weights", weights);
  put(kv, "gradient.step", step);
  put(kv, "gradient.max_relative_error", worst);
  put(kv, "gradient.failures", failures);
  return kv;
}

KeyValueFile containment(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 200);
  std::uniform_real_distribution<double> value(-1.0, 1.0), eps(0.001, 2.0);
  std::size_t values = 0, violations = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v(static_cast<std::size_t>(count(rng)));
    const int grid = t % 4 == 0 ? 1 + static_cast<int>(rng() % 8) : 0;
    for (auto& a : v) {
      a = value(rng);
      if (grid > 0) a = std::round(a * grid) / grid;
      if (t % 7 == 0) a = std::tanh(6 * a);  // saturated activations
    }
    const double e = eps(rng);
    const NodeClustering n = cluster_values(v, e);
    for (const double a : v) {
      const double gap = std::abs(a - n.representatives[n.nearest(a)]) - e;
      worst = std::max(worst, gap);
      if (gap > 1e-12) ++violations;
      ++values;
    }
  }
  KeyValueFile kv;
  put(kv, "containment.trials", static_cast<std::size_t>(trials));
  put(kv, "containment.values", values);
  put(kv, "containment.max_excess", std::max(0.0, worst));
  put(kv, "containment.violations", violations);
  return kv;
}

namespace {

struct BinaryTable {
  PatternTable table;
  std::vector<AttributeSpec> attributes;
};

BinaryTable binary_table(const std::vector<unsigned>& rows, const std::vector<int>& labels, int attributes,
                         bool categorical) {
  BinaryTable b;
  b.table.features.resize(static_cast<Eigen::Index>(rows.size()), attributes);
  for (std::size_t p = 0; p < rows.size(); ++p)
    for (int a = 0; a < attributes; ++a)
      b.table.features(static_cast<Eigen::Index>(p), a) = static_cast<double>((rows[p] >> a) & 1u);
  b.table.labels = labels;
  for (int a = 0; a < attributes; ++a) {
    AttributeSpec s;
    s.name = fmt::format("b{}", a + 1);
    if (categorical) {
      s.kind = AttributeKind::categorical;
      s.codes = s.labels = {"0", "1"};
    }
    b.attributes.push_back(s);
  }
  return b;
}

// A pattern can be isolated by a pure conjunction of candidate tests iff no
// pattern of another class passes every test the pattern passes.
std::set<std::size_t> oracle(const PatternTable& t, const std::vector<Condition>& candidates) {
  std::set<std::size_t> inseparable;
  for (std::size_t p = 0; p < t.size(); ++p)
    for (std::size_t q = 0; q < t.size(); ++q) {
      if (t.labels[q] == t.labels[p]) continue;
      const bool twin = std::all_of(candidates.begin(), candidates.end(), [&](const Condition& c) {
        const auto col = static_cast<Eigen::Index>(c.attribute);
        return !c.matches(t.features(static_cast<Eigen::Index>(p), col)) ||
               c.matches(t.features(static_cast<Eigen::Index>(q), col));
      });
      if (twin) {
        inseparable.insert(p);
        break;
      }
    }
  return inseparable;
}

// True when cover() agrees with the oracle: same inseparable set, every rule
// pure with its support recorded, and the rules plus a majority default
// classify every separable pattern correctly.
bool agrees(const BinaryTable& b) {
  const PatternTable& t = b.table;
  const auto candidates = input_candidates(t, b.attributes, std::vector<bool>(b.attributes.size(), true));
  const CoverResult r = cover(t, candidates);
  const std::set<std::size_t> expected = oracle(t, candidates);
  if (std::set<std::size_t>(r.inseparable.begin(), r.inseparable.end()) != expected) return false;
  RuleSet rs;
  rs.rules = r.rules;
  for (const auto& rule : rs.rules) {
    std::size_t support = 0;
    for (std::size_t p = 0; p < t.size(); ++p) {
      if (!rule.matches(t.features.row(static_cast<Eigen::Index>(p)))) continue;
      if (t.labels[p] != rule.consequent) return false;
      ++support;
    }
    if (support == 0 || support != rule.support) return false;
  }
  rs.default_class = majority_unmatched(rs, t, 3).value_or(0);
  if (!conflict_free(rs, t)) return false;
  for (std::size_t p = 0; p < t.size(); ++p)
    if (!expected.count(p) && classify(rs, t.features.row(static_cast<Eigen::Index>(p))) != t.labels[p]) return false;
  return true;
}

}  // namespace

KeyValueFile cover_oracle(int random_tables, std::uint64_t seed) {
  std::size_t exhaustive = 0, mismatches = 0;
  // Every ordered table of (row, label) pairs, 2 classes: 1 attribute up to 9
  // rows, 2 attributes up to 6 rows, 3 attributes up to 5 rows.
  const std::vector<std::pair<int, int>> bounds{{1, 9}, {2, 6}, {3, 5}};
  for (const auto& [attributes, max_rows] : bounds) {
    const unsigned options = 2u << attributes;  // row bits plus the label bit
    for (int n = 1; n <= max_rows; ++n) {
      std::vector<unsigned> digits(static_cast<std::size_t>(n), 0);
      while (true) {
        std::vector<unsigned> rows;
        std::vector<int> labels;
        for (const unsigned d : digits) {
          rows.push_back(d >> 1);
          labels.push_back(static_cast<int>(d & 1u));
        }
        for (const bool categorical : {false, true}) {
          if (!agrees(binary_table(rows, labels, attributes, categorical))) ++mismatches;
          ++exhaustive;
        }
        std::size_t k = 0;
        for (; k < digits.size(); ++k) {
          if (++digits[k] < options) break;
          digits[k] = 0;
        }
        if (k == digits.size()) break;
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> rows_dist(1, 12), attr_dist(1, 3), class_dist(2, 3);
  for (int t = 0; t < random_tables; ++t) {
    const int n = rows_dist(rng), m = attr_dist(rng), k = class_dist(rng);
    std::vector<unsigned> rows;
    std::vector<int> labels;
    for (int p = 0; p < n; ++p) {
      rows.push_back(static_cast<unsigned>(rng() % (1u << m)));
      labels.push_back(static_cast<int>(rng() % static_cast<unsigned>(k)));
    }
    if (!agrees(binary_table(rows, labels, m, t % 2 == 1))) ++mismatches;
  }
  KeyValueFile kv;
  put(kv, "cover.exhaustive_tables", exhaustive);
  put(kv, "cover.random_tables", static_cast<std::size_t>(random_tables));
  put(kv, "cover.max_rows", std::size_t{12});
  put(kv, "cover.mismatches", mismatches);
  return kv;
}

KeyValueFile discretized_floor(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 4), rows(5, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> grid{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  std::size_t succeeded = 0, infeasible = 0, violations = 0;
  for (int t = 0; t < trials; ++t) {
    const int n_in = size(rng), n_out = size(rng) + 1;
    Network net = init(n_in, size(rng), n_out, train_config(rng()), rng);
    net.w_ih *= 4.0;
    net.w_ho *= 4.0;
    Dataset d;
    for (int a = 0; a < n_in; ++a) d.attributes.push_back(AttributeSpec{fmt::format("x{}", a + 1)});
    for (int k = 0; k < n_out; ++k) d.class_names.push_back(fmt::format("c{}", k));
    const int n = rows(rng);
    d.features.resize(n, n_in);
    for (int p = 0; p < n; ++p) {
      for (int a = 0; a < n_in; ++a) d.features(p, a) = unit(rng);
      d.labels.push_back(predict(net, d.features.row(p)));
      if (unit(rng) < 0.2) d.labels.back() = static_cast<int>(rng() % static_cast<unsigned>(n_out));
    }
    d.missing = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n_in, false);
    d.encoded = true;
    d.degenerate.assign(static_cast<std::size_t>(n_in), false);
    d.imputed.assign(static_cast<std::size_t>(n_in), 0.0);
    const DatasetView view(d);
    const double floor = accuracy(net, view) - 0.05 * static_cast<double>(rng() % 3);
    try {
      const ActivationClustering c = cluster(net, view, grid, floor);
      ++succeeded;
      if (discretized_accuracy(net, c, view) < floor) ++violations;
    } catch (const NoFeasibleEpsilon&) {
      ++infeasible;
    }
  }
  KeyValueFile kv;
  put(kv, "discretize.trials", static_cast<std::size_t>(trials));
  put(kv, "discretize.succeeded", succeeded);
  put(kv, "discretize.infeasible", infeasible);
  put(kv, "discretize.violations", violations);
  return kv;
}

}  // namespace reann::checks
