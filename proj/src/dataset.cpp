#include "reann/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "reann/error.hpp"
#include "reann/keyvalue.hpp"

namespace reann {

const char* to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::continuous: return "continuous";
    case AttributeKind::ordinal: return "ordinal";
    case AttributeKind::categorical: return "categorical";
  }
  return "?";
}

AttributeKind parse_attribute_kind(const std::string& text) {
  if (text == "continuous") return AttributeKind::continuous;
  if (text == "ordinal") return AttributeKind::ordinal;
  if (text == "categorical") return AttributeKind::categorical;
  throw InvalidConfig("unknown attribute kind '" + text + "'");
}

void AttributeSpec::validate() const {
  if (kind == AttributeKind::categorical) {
    if (codes.empty()) throw InvalidConfig(name + ": empty category list");
    if (labels.size() != codes.size()) throw InvalidConfig(name + ": codes/labels size mismatch");
    if (std::set<std::string>(codes.begin(), codes.end()).size() != codes.size())
      throw InvalidConfig(name + ": duplicate category code");
    if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
      throw InvalidConfig(name + ": duplicate category label");
    return;
  }
  if (!(lower < upper)) throw InvalidConfig(name + ": domain needs lower < upper");
}

double AttributeSpec::category_value(std::size_t index) const {
  if (codes.size() <= 1) return 0.0;
  return static_cast<double>(index) / static_cast<double>(codes.size() - 1);
}

std::size_t AttributeSpec::category_of(double encoded) const {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codes.size(); ++c) {
    const double d = std::abs(category_value(c) - encoded);
    if (d < best_dist) {
      best = c;
      best_dist = d;
    }
  }
  return best;
}

void Schema::validate() const {
  if (attributes.empty()) throw InvalidConfig(name + ": schema declares no attributes");
  if (class_codes.size() < 2) throw InvalidConfig(name + ": need at least two classes");
  if (class_codes.size() != class_names.size()) throw InvalidConfig(name + ": class codes/names mismatch");
  if (class_column && *class_column > attributes.size())
    throw InvalidConfig(name + ": class column out of range");
  for (const auto& a : attributes) a.validate();
}

namespace {

// "code:label" pairs; a bare token is its own label.
void parse_coded_list(const std::string& text, std::vector<std::string>& codes,
                      std::vector<std::string>& labels) {
  for (const auto& item : split_list(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      codes.push_back(item);
      labels.push_back(item);
    } else {
      codes.push_back(trim(std::string_view(item).substr(0, colon)));
      labels.push_back(trim(std::string_view(item).substr(colon + 1)));
    }
  }
}

}  // namespace

Schema parse_schema(std::istream& in, const std::string& origin) {
  const auto kv = KeyValueFile::parse(in, origin);
  Schema s;
  s.name = kv.get_or("name", "dataset");
  s.has_id_column = kv.boolean_or("id_column", false);
  if (kv.contains("class_column")) {
    const auto c = kv.integer("class_column");
    if (c < 0) throw InvalidConfig(origin + ": negative class_column");
    s.class_column = static_cast<std::size_t>(c);
  }
  parse_coded_list(kv.at("classes"), s.class_codes, s.class_names);

  for (std::size_t i = 1;; ++i) {
    const auto entry = kv.get(fmt::format("attribute.{}", i));
    if (!entry) break;
    const auto parts = split_list(*entry, '|');
    if (parts.size() != 3)
      throw MalformedInput(fmt::format("{}: attribute.{} needs 'name | kind | domain'", origin, i));
    AttributeSpec a;
    a.name = parts[0];
    a.kind = parse_attribute_kind(parts[1]);
    if (a.kind == AttributeKind::categorical) {
      parse_coded_list(parts[2], a.codes, a.labels);
    } else {
      const auto bounds = split_list(parts[2], ',');
      if (bounds.size() != 2)
        throw MalformedInput(fmt::format("{}: attribute.{} domain needs 'lower, upper'", origin, i));
      a.lower = parse_double(bounds[0], origin);
      a.upper = parse_double(bounds[1], origin);
    }
    s.attributes.push_back(std::move(a));
  }
  s.validate();
  return s;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open schema " + path.string());
  return parse_schema(in, path.string());
}

DatasetView::DatasetView(const Dataset& data, IndexRange range) : data_(&data), range_(range) {
  if (range.begin > range.end || range.end > data.size())
    throw RangeError(fmt::format("range [{},{}) outside dataset of {} examples", range.begin,
                                 range.end, data.size()));
}

DatasetView::DatasetView(const Dataset& data) : DatasetView(data, IndexRange{0, data.size()}) {}

Dataset load(std::istream& in, const Schema& schema, const std::string& origin) {
  schema.validate();
  const std::size_t n_attr = schema.attributes.size();
  const std::size_t n_data_cols = n_attr + 1;
  const std::size_t n_cols = n_data_cols + (schema.has_id_column ? 1 : 0);
  const std::size_t class_col = schema.class_column.value_or(n_attr);

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> missing_rows;
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_list(line, ',');
    if (cells.size() != n_cols)
      throw MalformedInput(fmt::format("{}:{}: expected {} columns, found {}", origin, lineno, n_cols,
                                       cells.size()));
    if (schema.has_id_column) cells.erase(cells.begin());

    std::vector<double> values;
    std::vector<bool> missing;
    values.reserve(n_attr);
    int label = -1;
    std::size_t attr = 0;
    for (std::size_t c = 0; c < n_data_cols; ++c) {
      const std::string& cell = cells[c];
      if (c == class_col) {
        const auto it = std::find(schema.class_codes.begin(), schema.class_codes.end(), cell);
        if (it == schema.class_codes.end())
          throw MalformedInput(fmt::format("{}:{}: unknown class '{}'", origin, lineno, cell));
        label = static_cast<int>(it - schema.class_codes.begin());
        continue;
      }
      const AttributeSpec& spec = schema.attributes[attr++];
      if (cell == "?") {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        missing.push_back(true);
        continue;
      }
      missing.push_back(false);
      if (spec.kind == AttributeKind::categorical) {
        const auto it = std::find(spec.codes.begin(), spec.codes.end(), cell);
        if (it == spec.codes.end())
          throw MalformedInput(
              fmt::format("{}:{}: unknown category '{}' for {}", origin, lineno, cell, spec.name));
        values.push_back(static_cast<double>(it - spec.codes.begin()));
      } else {
        const double v = parse_double(cell, fmt::format("{}:{}", origin, lineno));
        if (v < spec.lower || v > spec.upper)
          throw MalformedInput(fmt::format("{}:{}: {} value {} outside declared domain [{}, {}]",
                                           origin, lineno, spec.name, cell, spec.lower, spec.upper));
        values.push_back(v);
      }
    }
    rows.push_back(std::move(values));
    missing_rows.push_back(std::move(missing));
    labels.push_back(label);
  }
  if (rows.empty()) throw MalformedInput(origin + ": no examples");

  Dataset d;
  d.attributes = schema.attributes;
  d.class_names = schema.class_names;
  d.labels = std::move(labels);
  d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_attr));
  d.missing.resize(d.features.rows(), d.features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t a = 0; a < n_attr; ++a) {
      d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = rows[r][a];
      d.missing(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = missing_rows[r][a];
    }
  d.degenerate.assign(n_attr, false);
  d.imputed.assign(n_attr, 0.0);
  return d;
}

Dataset load(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open dataset " + path.string());
  return load(in, schema, path.string());
}

double encode_value(const AttributeSpec& attr, double raw) {
  if (attr.kind == AttributeKind::categorical)
    return attr.category_value(static_cast<std::size_t>(raw));
  if (!(attr.lower < attr.upper)) return 0.0;
  return (raw - attr.lower) / (attr.upper - attr.lower);
}

double decode_value(const AttributeSpec& attr, double encoded) {
  if (attr.kind == AttributeKind::categorical) return static_cast<double>(attr.category_of(encoded));
  const double raw = attr.lower + encoded * (attr.upper - attr.lower);
  return attr.kind == AttributeKind::ordinal ? std::round(raw) : raw;
}

Dataset normalize(const Dataset& raw, IndexRange statistics) {
  if (raw.encoded) return raw;
  if (statistics.end > raw.size() || statistics.begin > statistics.end)
    throw RangeError("statistics range outside dataset");
  Dataset out = raw;
  out.encoded = true;
  const auto n = static_cast<Eigen::Index>(raw.size());
  for (std::size_t a = 0; a < raw.attribute_count(); ++a) {
    const auto col = static_cast<Eigen::Index>(a);
    const AttributeSpec& spec = raw.attributes[a];
    const bool degenerate = spec.kind == AttributeKind::categorical ? spec.category_count() < 2
                                                                    : !(spec.lower < spec.upper);
    out.degenerate[a] = degenerate;

    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (raw.missing(r, col)) continue;
      const double e = degenerate ? 0.0 : encode_value(spec, raw.features(r, col));
      out.features(r, col) = e;
      const auto idx = static_cast<std::size_t>(r);
      if (idx >= statistics.begin && idx < statistics.end) {
        sum += e;
        ++count;
      }
    }
    const double fill = count > 0 ? sum / static_cast<double>(count) : 0.0;
    out.imputed[a] = fill;
    for (Eigen::Index r = 0; r < n; ++r)
      if (raw.missing(r, col)) out.features(r, col) = fill;
  }
  return out;
}

Dataset normalize(const Dataset& raw) { return normalize(raw, IndexRange{0, raw.size()}); }

Eigen::MatrixXd decode(const Dataset& encoded) {
  Eigen::MatrixXd raw = encoded.features;
  for (std::size_t a = 0; a < encoded.attribute_count(); ++a)
    for (Eigen::Index r = 0; r < raw.rows(); ++r)
      raw(r, static_cast<Eigen::Index>(a)) =
          decode_value(encoded.attributes[a], encoded.features(r, static_cast<Eigen::Index>(a)));
  return raw;
}

std::pair<DatasetView, DatasetView> split(const Dataset& data, const SplitSpec& spec) {
  return {DatasetView(data, spec.train), DatasetView(data, spec.test)};
}

}  // namespace reann
