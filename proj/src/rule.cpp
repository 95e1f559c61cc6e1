#include "reann/rule.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "reann/error.hpp"
#include "reann/keyvalue.hpp"

namespace reann {

bool Condition::matches(double x) const {
  switch (op) {
    case Op::le: return x <= value;
    case Op::gt: return x > value;
    case Op::eq: return std::abs(x - value) < 1e-9;
  }
  return false;
}

PatternTable to_table(const DatasetView& data) {
  PatternTable t;
  t.features.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.attribute_count()));
  t.labels.resize(data.size());
  for (std::size_t p = 0; p < data.size(); ++p) {
    t.features.row(static_cast<Eigen::Index>(p)) = data.features(p);
    t.labels[p] = data.label(p);
  }
  return t;
}

bool simplify(std::vector<Condition>& conditions) {
  struct Bounds {
    double upper = std::numeric_limits<double>::infinity();   // x <= upper
    double lower = -std::numeric_limits<double>::infinity();  // x > lower
    bool has_upper = false;
    bool has_lower = false;
    bool has_eq = false;
    double eq = 0.0;
  };
  std::map<std::size_t, Bounds> by_attr;
  for (const auto& c : conditions) {
    auto& b = by_attr[c.attribute];
    switch (c.op) {
      case Op::le:
        b.upper = std::min(b.upper, c.value);
        b.has_upper = true;
        break;
      case Op::gt:
        b.lower = std::max(b.lower, c.value);
        b.has_lower = true;
        break;
      case Op::eq:
        if (b.has_eq && std::abs(b.eq - c.value) >= 1e-9) return false;
        b.has_eq = true;
        b.eq = c.value;
        break;
    }
  }
  std::vector<Condition> out;
  for (const auto& [attr, b] : by_attr) {
    if (b.has_eq) {
      if (b.eq > b.upper || b.eq <= b.lower) return false;
      out.push_back({attr, Op::eq, b.eq});
      continue;
    }
    if (b.has_lower && b.has_upper && b.upper <= b.lower) return false;
    if (b.has_lower) out.push_back({attr, Op::gt, b.lower});
    if (b.has_upper) out.push_back({attr, Op::le, b.upper});
  }
  conditions = std::move(out);
  return true;
}

void refresh_statistics(RuleSet& rs, const PatternTable& table) {
  for (auto& r : rs.rules) {
    r.support = 0;
    r.errors_on_train = 0;
    for (std::size_t p = 0; p < table.size(); ++p) {
      if (!r.matches(table.features.row(static_cast<Eigen::Index>(p)))) continue;
      ++r.support;
      if (table.labels[p] != r.consequent) ++r.errors_on_train;
    }
  }
}

std::string attribute_display(const std::vector<AttributeSpec>& attributes, std::size_t index) {
  const std::string name = index < attributes.size() ? attributes[index].name : std::string("h");
  return fmt::format("{} (A_{})", name, index + 1);
}

std::string format_condition(const Condition& c, const std::vector<AttributeSpec>& attributes) {
  const std::string attr = attribute_display(attributes, c.attribute);
  switch (c.op) {
    case Op::le: return fmt::format("{} <= {:.2f}", attr, c.value);
    case Op::gt: return fmt::format("{} > {:.2f}", attr, c.value);
    case Op::eq: {
      if (c.attribute < attributes.size() && attributes[c.attribute].kind == AttributeKind::categorical) {
        const auto& spec = attributes[c.attribute];
        return fmt::format("{} = {}", attr, spec.labels[spec.category_of(c.value)]);
      }
      return fmt::format("{} = {:.2f}", attr, c.value);
    }
  }
  return attr;
}

std::string format_rules(const RuleSet& rs, const std::vector<AttributeSpec>& attributes,
                         const std::vector<std::string>& class_names) {
  std::string out;
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    const auto& r = rs.rules[i];
    out += fmt::format("Rule {}: If ", i + 1);
    for (std::size_t k = 0; k < r.conditions.size(); ++k) {
      if (k > 0) out += " and ";
      out += format_condition(r.conditions[k], attributes);
    }
    out += fmt::format(" then {}\n", class_names.at(static_cast<std::size_t>(r.consequent)));
  }
  out += fmt::format("Default Rule: {}\n", class_names.at(static_cast<std::size_t>(rs.default_class)));
  return out;
}

namespace {

int class_index(const std::vector<std::string>& class_names, const std::string& name, const std::string& where) {
  const auto it = std::find(class_names.begin(), class_names.end(), name);
  if (it == class_names.end()) throw MalformedInput(where + ": unknown class '" + name + "'");
  return static_cast<int>(it - class_names.begin());
}

Condition parse_condition(std::string_view text, const std::vector<AttributeSpec>& attributes,
                          const std::string& where) {
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    const std::string attr = attribute_display(attributes, a);
    if (text.substr(0, attr.size()) != attr) continue;
    std::string_view rest = text.substr(attr.size());
    Condition c;
    c.attribute = a;
    std::string value;
    if (rest.starts_with(" <= ")) {
      c.op = Op::le;
      value = trim(rest.substr(4));
    } else if (rest.starts_with(" > ")) {
      c.op = Op::gt;
      value = trim(rest.substr(3));
    } else if (rest.starts_with(" = ")) {
      c.op = Op::eq;
      value = trim(rest.substr(3));
    } else {
      continue;
    }
    if (c.op == Op::eq && attributes[a].kind == AttributeKind::categorical) {
      const auto& labels = attributes[a].labels;
      const auto it = std::find(labels.begin(), labels.end(), value);
      if (it == labels.end()) throw MalformedInput(where + ": unknown category '" + value + "'");
      c.value = attributes[a].category_value(static_cast<std::size_t>(it - labels.begin()));
    } else {
      c.value = parse_double(value, where);
    }
    return c;
  }
  throw MalformedInput(where + ": cannot parse condition '" + std::string(text) + "'");
}

}  // namespace

RuleSet parse_rules(std::istream& in, const std::vector<AttributeSpec>& attributes,
                    const std::vector<std::string>& class_names, const std::string& origin) {
  RuleSet rs;
  bool have_default = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty()) continue;
    const std::string where = fmt::format("{}:{}", origin, lineno);
    if (text.starts_with("Default Rule: ")) {
      rs.default_class = class_index(class_names, trim(text.substr(14)), where);
      have_default = true;
      continue;
    }
    const auto colon = text.find(": If ");
    const auto then = text.rfind(" then ");
    if (!text.starts_with("Rule ") || colon == std::string::npos || then == std::string::npos || then < colon)
      throw MalformedInput(where + ": not a rule line");
    Rule r;
    r.consequent = class_index(class_names, trim(text.substr(then + 6)), where);
    std::string_view body = std::string_view(text).substr(colon + 5, then - colon - 5);
    while (!body.empty()) {
      const auto sep = body.find(" and ");
      // A condition ends at the first " and " that is followed by an attribute.
      std::size_t cut = std::string_view::npos;
      for (auto pos = sep; pos != std::string_view::npos; pos = body.find(" and ", pos + 1)) {
        const auto next = body.substr(pos + 5);
        bool starts_attr = false;
        for (std::size_t a = 0; a < attributes.size() && !starts_attr; ++a)
          starts_attr = next.starts_with(attribute_display(attributes, a));
        if (starts_attr) {
          cut = pos;
          break;
        }
      }
      r.conditions.push_back(parse_condition(body.substr(0, cut), attributes, where));
      body = cut == std::string_view::npos ? std::string_view() : body.substr(cut + 5);
    }
    rs.rules.push_back(std::move(r));
  }
  if (!have_default) throw MalformedInput(origin + ": missing default rule");
  return rs;
}

}  // namespace reann
