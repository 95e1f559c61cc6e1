#include "reann/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "reann/error.hpp"
#include "reann/keyvalue.hpp"

namespace reann {

std::size_t NodeClustering::nearest(double activation) const {
  std::size_t best = 0;
  for (std::size_t r = 1; r < representatives.size(); ++r)
    if (std::abs(representatives[r] - activation) < std::abs(representatives[best] - activation)) best = r;
  return best;
}

NodeClustering cluster_values(std::span<const double> activations, double epsilon) {
  struct Group {
    double sum = 0.0;
    std::size_t size = 0;
    double top = 0.0;  // first (largest) member
    double mean() const { return sum / static_cast<double>(size); }
  };

  std::vector<std::size_t> order(activations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return activations[a] > activations[b]; });

  std::vector<Group> groups;
  for (const std::size_t idx : order) {
    const double v = activations[idx];
    bool joined = false;
    for (auto& g : groups) {
      if (std::abs(v - g.mean()) > epsilon) continue;
      const double updated = (g.sum + v) / static_cast<double>(g.size + 1);
      if (g.top - updated > epsilon) continue;
      g.sum += v;
      ++g.size;
      joined = true;
      break;
    }
    if (!joined) groups.push_back({v, 1, v});
  }

  NodeClustering node;
  node.epsilon = epsilon;
  for (const auto& g : groups) node.representatives.push_back(g.mean());
  std::sort(node.representatives.begin(), node.representatives.end());
  node.representatives.erase(std::unique(node.representatives.begin(), node.representatives.end()),
                             node.representatives.end());
  node.counts.assign(node.representatives.size(), 0);
  for (const double v : activations) ++node.counts[node.nearest(v)];
  return node;
}

Eigen::MatrixXd hidden_activations(const Network& net, const DatasetView& data) {
  if (static_cast<Eigen::Index>(data.attribute_count()) != net.input_count())
    throw DimensionMismatch("dataset attribute count does not match network inputs");
  Eigen::MatrixXd h(static_cast<Eigen::Index>(data.size()), net.hidden_count());
  for (std::size_t p = 0; p < data.size(); ++p)
    h.row(static_cast<Eigen::Index>(p)) = hidden_layer(net, data.features(p)).transpose();
  return h;
}

namespace {

void fill_assignment(ActivationClustering& c, const Eigen::MatrixXd& h) {
  c.assignment.assign(static_cast<std::size_t>(h.rows()), std::vector<std::size_t>(c.nodes.size()));
  for (Eigen::Index p = 0; p < h.rows(); ++p)
    for (std::size_t j = 0; j < c.nodes.size(); ++j)
      c.assignment[static_cast<std::size_t>(p)][j] = c.nodes[j].nearest(h(p, static_cast<Eigen::Index>(j)));
}

}  // namespace

ActivationClustering cluster_at(const Network& net, const DatasetView& train_data, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 2.0)) throw InvalidConfig(fmt::format("epsilon {} outside (0, 2]", epsilon));
  if (train_data.empty()) throw DimensionMismatch("cannot cluster activations of an empty dataset");
  const Eigen::MatrixXd h = hidden_activations(net, train_data);
  const auto connected = net.connected_hidden();

  ActivationClustering c;
  c.epsilon = epsilon;
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    const Eigen::VectorXd column = h.col(j);
    auto node = cluster_values(std::span<const double>(column.data(), static_cast<std::size_t>(column.size())), epsilon);
    node.connected = connected[static_cast<std::size_t>(j)];
    c.nodes.push_back(std::move(node));
  }
  fill_assignment(c, h);
  return c;
}

ActivationClustering cluster(const Network& net, const DatasetView& train_data,
                             std::span<const double> epsilon_grid, double floor) {
  if (epsilon_grid.empty()) throw InvalidConfig("empty epsilon grid");
  std::vector<double> grid(epsilon_grid.begin(), epsilon_grid.end());
  std::sort(grid.begin(), grid.end(), std::greater<>());
  double best_seen = 0.0;
  for (const double eps : grid) {
    auto c = cluster_at(net, train_data, eps);
    const double acc = discretized_accuracy(net, c, train_data);
    if (acc >= floor) return c;
    best_seen = std::max(best_seen, acc);
  }
  throw NoFeasibleEpsilon(fmt::format(
      "no epsilon in the grid keeps discretized accuracy >= {} (best {})", floor, best_seen));
}

std::vector<std::size_t> cluster_indices(const Network& net, const ActivationClustering& c,
                                         Eigen::Ref<const Eigen::RowVectorXd> x) {
  if (static_cast<Eigen::Index>(c.nodes.size()) != net.hidden_count())
    throw DimensionMismatch("clustering does not match network hidden layer");
  const auto h = hidden_layer(net, x);
  std::vector<std::size_t> idx(c.nodes.size());
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = c.nodes[j].nearest(h(static_cast<Eigen::Index>(j)));
  return idx;
}

int discretized_predict(const Network& net, const ActivationClustering& c,
                        const std::vector<std::size_t>& indices) {
  Eigen::VectorXd h(net.hidden_count());
  for (std::size_t j = 0; j < indices.size(); ++j)
    h(static_cast<Eigen::Index>(j)) = c.nodes[j].representatives.at(indices[j]);
  return argmax(output_layer(net, h));
}

int discretized_predict(const Network& net, const ActivationClustering& c,
                        Eigen::Ref<const Eigen::RowVectorXd> x) {
  return discretized_predict(net, c, cluster_indices(net, c, x));
}

double discretized_accuracy(const Network& net, const ActivationClustering& c, const DatasetView& data) {
  if (data.empty()) throw DimensionMismatch("discretized accuracy of an empty dataset");
  std::size_t correct = 0;
  for (std::size_t p = 0; p < data.size(); ++p)
    if (discretized_predict(net, c, data.features(p)) == data.label(p)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void save_clusters(const ActivationClustering& c, std::ostream& out) {
  for (std::size_t j = 0; j < c.nodes.size(); ++j) {
    const auto& n = c.nodes[j];
    out << fmt::format("node {} connected {} epsilon {}\n", j, n.connected ? 1 : 0, exact_decimal(n.epsilon));
    for (std::size_t r = 0; r < n.representatives.size(); ++r)
      out << fmt::format("rep {} {} {} {}\n", j, r, exact_decimal(n.representatives[r]), n.counts[r]);
  }
}

void save_clusters(const ActivationClustering& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  save_clusters(c, out);
}

ActivationClustering load_clusters(std::istream& in, const Network& net, const DatasetView& train_data,
                                   const std::string& origin) {
  ActivationClustering c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = fmt::format("{}:{}", origin, lineno);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok[0] == "node" && tok.size() == 6) {
      if (static_cast<std::size_t>(parse_integer(tok[1], where)) != c.nodes.size())
        throw MalformedInput(where + ": nodes out of order");
      NodeClustering n;
      n.connected = parse_integer(tok[3], where) != 0;
      n.epsilon = parse_double(tok[5], where);
      c.epsilon = n.epsilon;
      c.nodes.push_back(std::move(n));
    } else if (tok[0] == "rep" && tok.size() == 5) {
      if (c.nodes.empty() || static_cast<std::size_t>(parse_integer(tok[1], where)) != c.nodes.size() - 1)
        throw MalformedInput(where + ": representative before its node");
      c.nodes.back().representatives.push_back(parse_double(tok[3], where));
      c.nodes.back().counts.push_back(static_cast<std::size_t>(parse_integer(tok[4], where)));
    } else {
      throw MalformedInput(where + ": unrecognised line");
    }
  }
  if (static_cast<Eigen::Index>(c.nodes.size()) != net.hidden_count())
    throw DimensionMismatch(origin + ": clustering does not match network hidden layer");
  for (const auto& n : c.nodes)
    if (n.representatives.empty()) throw MalformedInput(origin + ": node without representatives");
  fill_assignment(c, hidden_activations(net, train_data));
  return c;
}

ActivationClustering load_clusters(const std::filesystem::path& path, const Network& net,
                                   const DatasetView& train_data) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open clusters " + path.string());
  return load_clusters(in, net, train_data, path.string());
}

}  // namespace reann
