#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace reann {

enum class AttributeKind { continuous, ordinal, categorical };

const char* to_string(AttributeKind kind);
AttributeKind parse_attribute_kind(const std::string& text);

/// One input column. Continuous and ordinal attributes carry a declared
/// [lower, upper] range; categorical ones carry the raw tokens used in the
/// data file plus the labels shown in rules, in declared order.
struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::continuous;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> codes;
  std::vector<std::string> labels;

  std::size_t category_count() const { return codes.size(); }
  /// Throws InvalidConfig when the domain is empty, duplicated or inverted.
  void validate() const;
  /// Encoded value of category `index`: equally spaced over [0,1].
  double category_value(std::size_t index) const;
  /// Category index whose encoded value is closest to `encoded`.
  std::size_t category_of(double encoded) const;
};

struct Schema {
  std::string name;
  bool has_id_column = false;
  /// Column holding the class, counted over data columns after the id column.
  /// Unset means the last column.
  std::optional<std::size_t> class_column;
  std::vector<AttributeSpec> attributes;
  std::vector<std::string> class_codes;
  std::vector<std::string> class_names;

  void validate() const;
};

Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(std::istream& in, const std::string& origin = "<schema>");

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool operator==(const IndexRange&) const = default;
};

struct SplitSpec {
  IndexRange train;
  IndexRange test;
};

/// Tabular examples. Before normalization `features` holds raw values
/// (category index for categorical columns, NaN where missing); afterwards
/// every entry lies in [0,1].
struct Dataset {
  std::vector<AttributeSpec> attributes;
  std::vector<std::string> class_names;
  Eigen::MatrixXd features;
  std::vector<int> labels;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing;
  bool encoded = false;
  /// Per attribute: raw domain collapsed to a point, feature forced to 0.
  std::vector<bool> degenerate;
  /// Per attribute: value substituted for missing entries (encoded space).
  std::vector<double> imputed;

  std::size_t size() const { return labels.size(); }
  std::size_t attribute_count() const { return attributes.size(); }
  std::size_t class_count() const { return class_names.size(); }
};

/// Contiguous, file-ordered window onto a dataset. Holds a pointer, so the
/// dataset must outlive the view.
class DatasetView {
 public:
  DatasetView() = default;
  DatasetView(const Dataset& data, IndexRange range);
  explicit DatasetView(const Dataset& data);

  std::size_t size() const { return range_.size(); }
  bool empty() const { return size() == 0; }
  auto features(std::size_t i) const { return data_->features.row(range_.begin + i); }
  int label(std::size_t i) const { return data_->labels[range_.begin + i]; }
  const Dataset& dataset() const { return *data_; }
  IndexRange range() const { return range_; }
  std::size_t attribute_count() const { return data_ ? data_->attribute_count() : 0; }
  std::size_t class_count() const { return data_ ? data_->class_count() : 0; }

 private:
  const Dataset* data_ = nullptr;
  IndexRange range_;
};

Dataset load(const std::filesystem::path& path, const Schema& schema);
Dataset load(std::istream& in, const Schema& schema, const std::string& origin = "<stream>");

double encode_value(const AttributeSpec& attr, double raw);
double decode_value(const AttributeSpec& attr, double encoded);

/// Min-max encodes against declared domains and imputes missing entries with
/// the mean encoded value over non-missing rows of `statistics`.
Dataset normalize(const Dataset& raw, IndexRange statistics);
Dataset normalize(const Dataset& raw);

/// Inverse of normalize for present values (ordinal values snap to integers,
/// categorical values to category indices).
Eigen::MatrixXd decode(const Dataset& encoded);

std::pair<DatasetView, DatasetView> split(const Dataset& data, const SplitSpec& spec);

}  // namespace reann
