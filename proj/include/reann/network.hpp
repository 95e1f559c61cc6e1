#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reann/dataset.hpp"
#include "reann/error.hpp"

namespace reann {

/// Three-layer feedforward classifier with a bias on the hidden and output
/// layers. Connection masks mark pruned weights; a masked weight is exactly
/// zero and is never updated.
template <typename Scalar>
struct BasicNetwork {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix w_ih;  // input x hidden
  Mask mask_ih;
  Matrix w_ho;  // hidden x output
  Mask mask_ho;
  Vector b_h;
  Vector b_o;

  Eigen::Index input_count() const { return w_ih.rows(); }
  Eigen::Index hidden_count() const { return w_ih.cols(); }
  Eigen::Index output_count() const { return w_ho.cols(); }

  /// Active weighted connections; biases are not counted.
  std::size_t active_connections() const {
    return static_cast<std::size_t>(mask_ih.count() + mask_ho.count());
  }

  /// Inputs with at least one active outgoing connection.
  std::vector<bool> live_inputs() const {
    std::vector<bool> live(static_cast<std::size_t>(input_count()));
    for (Eigen::Index i = 0; i < input_count(); ++i) live[static_cast<std::size_t>(i)] = mask_ih.row(i).any();
    return live;
  }

  /// Hidden nodes with at least one active incoming and one active outgoing connection.
  std::vector<bool> live_hidden() const {
    std::vector<bool> live(static_cast<std::size_t>(hidden_count()));
    for (Eigen::Index j = 0; j < hidden_count(); ++j)
      live[static_cast<std::size_t>(j)] = mask_ih.col(j).any() && mask_ho.row(j).any();
    return live;
  }

  /// Hidden nodes that still reach an output (possibly with a constant activation).
  std::vector<bool> connected_hidden() const {
    std::vector<bool> out(static_cast<std::size_t>(hidden_count()));
    for (Eigen::Index j = 0; j < hidden_count(); ++j) out[static_cast<std::size_t>(j)] = mask_ho.row(j).any();
    return out;
  }

  void apply_masks() {
    w_ih = mask_ih.select(w_ih, Scalar(0));
    w_ho = mask_ho.select(w_ho, Scalar(0));
  }

  template <typename Other>
  BasicNetwork<Other> cast() const {
    BasicNetwork<Other> n;
    n.w_ih = w_ih.template cast<Other>();
    n.mask_ih = mask_ih;
    n.w_ho = w_ho.template cast<Other>();
    n.mask_ho = mask_ho;
    n.b_h = b_h.template cast<Other>();
    n.b_o = b_o.template cast<Other>();
    return n;
  }

  bool operator==(const BasicNetwork& o) const {
    return w_ih == o.w_ih && (mask_ih == o.mask_ih).all() && w_ho == o.w_ho &&
           (mask_ho == o.mask_ho).all() && b_h == o.b_h && b_o == o.b_o;
  }
};

using Network = BasicNetwork<double>;

/// Hyperbolic tangent, range [-1, 1].
template <typename Scalar>
Scalar hidden_activation(Scalar y) {
  using std::tanh;
  return tanh(y);
}

/// Logistic sigmoid, range (0, 1).
template <typename Scalar>
Scalar output_activation(Scalar y) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-y));
}

template <typename Scalar>
struct Activations {
  typename BasicNetwork<Scalar>::Vector hidden;
  typename BasicNetwork<Scalar>::Vector output;
};

/// Copies a row or column expression into a column vector of `Scalar`.
template <typename Scalar, typename Derived>
typename BasicNetwork<Scalar>::Vector as_column(const Eigen::MatrixBase<Derived>& x) {
  typename BasicNetwork<Scalar>::Vector v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v(i) = static_cast<Scalar>(x(i));
  return v;
}

template <typename Scalar, typename Derived>
typename BasicNetwork<Scalar>::Vector hidden_layer(const BasicNetwork<Scalar>& net,
                                                   const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != net.input_count()) throw DimensionMismatch("input length does not match network");
  typename BasicNetwork<Scalar>::Vector pre = net.w_ih.transpose() * as_column<Scalar>(x) + net.b_h;
  return pre.unaryExpr([](Scalar v) { return hidden_activation(v); });
}

template <typename Scalar, typename Derived>
typename BasicNetwork<Scalar>::Vector output_layer(const BasicNetwork<Scalar>& net,
                                                   const Eigen::MatrixBase<Derived>& h) {
  if (h.size() != net.hidden_count()) throw DimensionMismatch("hidden length does not match network");
  typename BasicNetwork<Scalar>::Vector pre =
      net.w_ho.transpose() * as_column<Scalar>(h) + net.b_o;
  return pre.unaryExpr([](Scalar v) { return output_activation(v); });
}

/// Accepts row or column feature vectors.
template <typename Scalar, typename Derived>
Activations<Scalar> forward(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  Activations<Scalar> a;
  a.hidden = hidden_layer(net, x);
  a.output = output_layer(net, a.hidden);
  return a;
}

/// Index of the largest entry; ties resolve to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (v(k) > v(best)) best = static_cast<int>(k);
  return best;
}

template <typename Scalar>
typename BasicNetwork<Scalar>::Vector one_hot(Eigen::Index size, int label) {
  typename BasicNetwork<Scalar>::Vector t = BasicNetwork<Scalar>::Vector::Zero(size);
  if (label < 0 || label >= size) throw DimensionMismatch("label outside output range");
  t(label) = Scalar(1);
  return t;
}

/// Squared error of one example against its one-hot target.
template <typename Scalar, typename Derived>
Scalar squared_error(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x, int label) {
  const auto a = forward(net, x);
  return (a.output - one_hot<Scalar>(net.output_count(), label)).squaredNorm();
}

/// Gradient of the squared error with respect to every weight and bias.
/// Entries for masked connections are zero.
template <typename Scalar>
struct Gradient {
  typename BasicNetwork<Scalar>::Matrix w_ih;
  typename BasicNetwork<Scalar>::Matrix w_ho;
  typename BasicNetwork<Scalar>::Vector b_h;
  typename BasicNetwork<Scalar>::Vector b_o;
};

template <typename Scalar, typename Derived>
Gradient<Scalar> loss_gradient(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<Derived>& x,
                               int label) {
  using Vector = typename BasicNetwork<Scalar>::Vector;
  const auto a = forward(net, x);
  const Vector target = one_hot<Scalar>(net.output_count(), label);

  // dE/d(pre_o) = 2 (o - t) o (1 - o)
  const Vector delta_o = (Scalar(2) * (a.output - target).array() * a.output.array() *
                          (Scalar(1) - a.output.array()))
                             .matrix();
  // dE/d(pre_h) = (W_ho delta_o) (1 - h^2)
  const Vector delta_h =
      ((net.w_ho * delta_o).array() * (Scalar(1) - a.hidden.array().square())).matrix();

  const Vector xin = as_column<Scalar>(x);

  Gradient<Scalar> g;
  g.w_ih = net.mask_ih.select(xin * delta_h.transpose(), Scalar(0));
  g.w_ho = net.mask_ho.select(a.hidden * delta_o.transpose(), Scalar(0));
  g.b_h = delta_h;
  g.b_o = delta_o;
  return g;
}

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 300;
  double target_error = 0.0;
  double init_lower = -1.0;
  double init_upper = 1.0;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct TrainTrace {
  /// Sum of squared errors over the training view after each epoch.
  std::vector<double> epoch_errors;
  int epochs_run = 0;
};

Network init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, const TrainConfig& cfg);
Network init(Eigen::Index n_in, Eigen::Index n_hidden, Eigen::Index n_out, const TrainConfig& cfg,
             std::mt19937_64& rng);

/// Appends one hidden node with fresh weights drawn from the init range.
Network add_hidden_node(const Network& net, const TrainConfig& cfg, std::mt19937_64& rng);

/// Per-pattern gradient descent in file order until the epoch error reaches
/// `target_error` or `max_epochs` passes are done.
std::pair<Network, TrainTrace> train(Network net, const DatasetView& data, const TrainConfig& cfg);

double sum_squared_error(const Network& net, const DatasetView& data);
int predict(const Network& net, Eigen::Ref<const Eigen::RowVectorXd> x);
double accuracy(const Network& net, const DatasetView& data);

/// Snapshot text: `w_ih i j value active`, `w_ho j k value active`,
/// `b_h j value`, `b_o k value`, values in shortest round-trip form.
void save_network(const Network& net, std::ostream& out);
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(std::istream& in, const std::string& origin = "<stream>");
Network load_network(const std::filesystem::path& path);

}  // namespace reann
