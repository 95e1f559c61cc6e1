#include "reann/network.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "reann/keyvalue.hpp"

namespace reann {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.1 && learning_rate <= 1.0))
    throw InvalidConfig(fmt::format("learning rate {} outside [0.1, 1.0]", learning_rate));
  if (max_epochs < 0) throw InvalidConfig("max_epochs must be non-negative");
  if (!(target_error >= 0.0)) throw InvalidConfig("target_error must be >= 0");
  if (!(init_lower < init_upper) || init_lower < -1.0 || init_upper > 1.0)
    throw InvalidConfig("init range must be a non-empty interval inside [-1, 1]");
}

Network init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, const TrainConfig& cfg,
             std::mt19937_64& rng) {
  cfg.validate();
  if (n_in < 1 || n_hidden < 1 || n_out < 1) throw InvalidConfig("layer sizes must be >= 1");
  std::uniform_real_distribution<double> draw(cfg.init_lower, cfg.init_upper);
  auto sample = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = draw(rng);
    return m;
  };
  Network net;
  net.w_ih = sample(n_in, n_hidden);
  net.w_ho = sample(n_hidden, n_out);
  net.b_h = sample(n_hidden, 1);
  net.b_o = sample(n_out, 1);
  net.mask_ih = Network::Mask::Constant(n_in, n_hidden, true);
  net.mask_ho = Network::Mask::Constant(n_hidden, n_out, true);
  return net;
}

Network init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, const TrainConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return init(n_in, n_hidden, n_out, cfg, rng);
}

Network add_hidden_node(const Network& net, const TrainConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> draw(cfg.init_lower, cfg.init_upper);
  const Eigen::Index h = net.hidden_count();
  Network out = net;
  out.w_ih.conservativeResize(Eigen::NoChange, h + 1);
  out.mask_ih.conservativeResize(Eigen::NoChange, h + 1);
  out.w_ho.conservativeResize(h + 1, Eigen::NoChange);
  out.mask_ho.conservativeResize(h + 1, Eigen::NoChange);
  out.b_h.conservativeResize(h + 1);
  for (Eigen::Index i = 0; i < out.input_count(); ++i) out.w_ih(i, h) = draw(rng);
  for (Eigen::Index k = 0; k < out.output_count(); ++k) out.w_ho(h, k) = draw(rng);
  out.b_h(h) = draw(rng);
  out.mask_ih.col(h).setConstant(true);
  out.mask_ho.row(h).setConstant(true);
  return out;
}

namespace {

void check_dims(const Network& net, const DatasetView& data) {
  if (static_cast<Eigen::Index>(data.attribute_count()) != net.input_count())
    throw DimensionMismatch("dataset attribute count does not match network inputs");
  if (static_cast<Eigen::Index>(data.class_count()) != net.output_count())
    throw DimensionMismatch("dataset class count does not match network outputs");
}

}  // namespace

std::pair<Network, TrainTrace> train(Network net, const DatasetView& data, const TrainConfig& cfg) {
  cfg.validate();
  TrainTrace trace;
  if (cfg.max_epochs == 0) return {std::move(net), std::move(trace)};
  if (data.empty()) throw InvalidConfig("cannot train on an empty dataset");
  check_dims(net, data);

  const double lr = cfg.learning_rate;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t p = 0; p < data.size(); ++p) {
      const auto g = loss_gradient(net, data.features(p), data.label(p));
      net.w_ih -= lr * g.w_ih;
      net.w_ho -= lr * g.w_ho;
      net.b_h -= lr * g.b_h;
      net.b_o -= lr * g.b_o;
    }
    net.apply_masks();
    const double sse = sum_squared_error(net, data);
    trace.epoch_errors.push_back(sse);
    ++trace.epochs_run;
    if (sse <= cfg.target_error) break;
  }
  return {std::move(net), std::move(trace)};
}

double sum_squared_error(const Network& net, const DatasetView& data) {
  check_dims(net, data);
  double sse = 0.0;
  for (std::size_t p = 0; p < data.size(); ++p) sse += squared_error(net, data.features(p), data.label(p));
  return sse;
}

int predict(const Network& net, Eigen::Ref<const Eigen::RowVectorXd> x) {
  return argmax(forward(net, x).output);
}

double accuracy(const Network& net, const DatasetView& data) {
  check_dims(net, data);
  if (data.empty()) throw DimensionMismatch("accuracy of an empty dataset");
  std::size_t correct = 0;
  for (std::size_t p = 0; p < data.size(); ++p)
    if (predict(net, data.features(p)) == data.label(p)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void save_network(const Network& net, std::ostream& out) {
  for (Eigen::Index i = 0; i < net.input_count(); ++i)
    for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
      out << fmt::format("w_ih {} {} {} {}\n", i, j, exact_decimal(net.w_ih(i, j)), net.mask_ih(i, j) ? 1 : 0);
  for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
    for (Eigen::Index k = 0; k < net.output_count(); ++k)
      out << fmt::format("w_ho {} {} {} {}\n", j, k, exact_decimal(net.w_ho(j, k)), net.mask_ho(j, k) ? 1 : 0);
  for (Eigen::Index j = 0; j < net.hidden_count(); ++j)
    out << fmt::format("b_h {} {}\n", j, exact_decimal(net.b_h(j)));
  for (Eigen::Index k = 0; k < net.output_count(); ++k)
    out << fmt::format("b_o {} {}\n", k, exact_decimal(net.b_o(k)));
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  save_network(net, out);
}

Network load_network(std::istream& in, const std::string& origin) {
  struct Entry {
    std::string kind;
    long long a = 0, b = 0;
    double value = 0.0;
    bool active = true;
  };
  std::vector<Entry> entries;
  long long n_in = 0, n_hidden = 0, n_out = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    const std::string where = fmt::format("{}:{}", origin, lineno);
    Entry e;
    e.kind = tok[0];
    if (e.kind == "w_ih" || e.kind == "w_ho") {
      if (tok.size() != 5) throw MalformedInput(where + ": expected 'kind i j value active'");
      e.a = parse_integer(tok[1], where);
      e.b = parse_integer(tok[2], where);
      e.value = parse_double(tok[3], where);
      e.active = parse_integer(tok[4], where) != 0;
      if (e.kind == "w_ih") {
        n_in = std::max(n_in, e.a + 1);
        n_hidden = std::max(n_hidden, e.b + 1);
      } else {
        n_hidden = std::max(n_hidden, e.a + 1);
        n_out = std::max(n_out, e.b + 1);
      }
    } else if (e.kind == "b_h" || e.kind == "b_o") {
      if (tok.size() != 3) throw MalformedInput(where + ": expected 'kind index value'");
      e.a = parse_integer(tok[1], where);
      e.value = parse_double(tok[2], where);
      (e.kind == "b_h" ? n_hidden : n_out) = std::max(e.kind == "b_h" ? n_hidden : n_out, e.a + 1);
    } else {
      throw MalformedInput(where + ": unknown entity '" + e.kind + "'");
    }
    if (e.a < 0 || e.b < 0) throw MalformedInput(where + ": negative index");
    entries.push_back(e);
  }
  if (n_in == 0 || n_hidden == 0 || n_out == 0) throw MalformedInput(origin + ": incomplete network");
  const auto expected = static_cast<std::size_t>(n_in * n_hidden + n_hidden * n_out + n_hidden + n_out);
  if (entries.size() != expected) throw MalformedInput(origin + ": wrong number of entries");

  Network net;
  net.w_ih = Eigen::MatrixXd::Zero(n_in, n_hidden);
  net.w_ho = Eigen::MatrixXd::Zero(n_hidden, n_out);
  net.b_h = Eigen::VectorXd::Zero(n_hidden);
  net.b_o = Eigen::VectorXd::Zero(n_out);
  net.mask_ih = Network::Mask::Constant(n_in, n_hidden, true);
  net.mask_ho = Network::Mask::Constant(n_hidden, n_out, true);
  for (const auto& e : entries) {
    if (e.kind == "w_ih") {
      net.w_ih(e.a, e.b) = e.value;
      net.mask_ih(e.a, e.b) = e.active;
    } else if (e.kind == "w_ho") {
      net.w_ho(e.a, e.b) = e.value;
      net.mask_ho(e.a, e.b) = e.active;
    } else if (e.kind == "b_h") {
      net.b_h(e.a) = e.value;
    } else {
      net.b_o(e.a) = e.value;
    }
  }
  net.apply_masks();
  return net;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open network " + path.string());
  return load_network(in, path.string());
}

}  // namespace reann
