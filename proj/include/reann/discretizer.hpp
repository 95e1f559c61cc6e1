#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "reann/dataset.hpp"
#include "reann/network.hpp"

namespace reann {

/// Discrete activation levels of one hidden node.
struct NodeClustering {
  double epsilon = 0.0;
  std::vector<double> representatives;  // ascending, pairwise distinct
  std::vector<std::size_t> counts;      // training patterns per representative
  /// False when the node has no active connection to any output.
  bool connected = true;

  /// Nearest representative by absolute distance, ties to the lower index.
  std::size_t nearest(double activation) const;
};

struct ActivationClustering {
  double epsilon = 0.0;
  std::vector<NodeClustering> nodes;
  /// assignment[p][j]: representative index of training pattern p at node j.
  std::vector<std::vector<std::size_t>> assignment;

  std::size_t hidden_count() const { return nodes.size(); }
};

/// One greedy pass: values are visited in descending order and join the
/// first cluster whose running mean lies within epsilon (provided the
/// updated mean still lies within epsilon of every member), else found a new
/// cluster. Every value ends up within epsilon of its nearest representative.
NodeClustering cluster_values(std::span<const double> activations, double epsilon);

/// patterns x hidden matrix of hidden-node activations.
Eigen::MatrixXd hidden_activations(const Network& net, const DatasetView& data);

ActivationClustering cluster_at(const Network& net, const DatasetView& train_data, double epsilon);

/// Tries epsilons from largest to smallest and returns the first clustering
/// whose discretized network keeps training accuracy >= floor.
/// Throws NoFeasibleEpsilon when none does.
ActivationClustering cluster(const Network& net, const DatasetView& train_data,
                             std::span<const double> epsilon_grid, double floor);

/// Representative index per hidden node for an arbitrary feature vector.
std::vector<std::size_t> cluster_indices(const Network& net, const ActivationClustering& c,
                                         Eigen::Ref<const Eigen::RowVectorXd> x);
/// Output layer evaluated on representative activations.
int discretized_predict(const Network& net, const ActivationClustering& c,
                        const std::vector<std::size_t>& indices);
int discretized_predict(const Network& net, const ActivationClustering& c,
                        Eigen::Ref<const Eigen::RowVectorXd> x);
double discretized_accuracy(const Network& net, const ActivationClustering& c, const DatasetView& data);

/// `node j connected c epsilon e` followed by `rep j r value count` lines.
void save_clusters(const ActivationClustering& c, std::ostream& out);
void save_clusters(const ActivationClustering& c, const std::filesystem::path& path);
/// Restores representatives; the assignment table is rebuilt from `train_data`.
ActivationClustering load_clusters(std::istream& in, const Network& net, const DatasetView& train_data,
                                   const std::string& origin = "<stream>");
ActivationClustering load_clusters(const std::filesystem::path& path, const Network& net,
                                   const DatasetView& train_data);

}  // namespace reann
