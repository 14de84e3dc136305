#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <vector>

#include "fairsched/random.hpp"

namespace fairsched {

// Parameter-shaped container shared by the network and its gradients.
struct NetworkParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;

  void set_zero();
  std::size_t parameter_count() const;
  bool operator==(const NetworkParams& other) const;
};

// Fully connected, ReLU hidden layers, linear output.
class QNetwork {
 public:
  QNetwork() = default;
  // Glorot-uniform weights, zero biases.
  QNetwork(std::vector<int> layer_sizes, Rng& rng);
  QNetwork(std::vector<int> layer_sizes, NetworkParams params);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  const NetworkParams& params() const { return params_; }
  NetworkParams& params() { return params_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  // Samples are columns.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  // Mean squared error between Q(x_i)[a_i] and y_i over the batch.
  double loss(const Eigen::MatrixXd& inputs, std::span<const int> actions,
              std::span<const double> targets) const;
  double loss_and_gradient(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                           std::span<const double> targets, NetworkParams& gradient) const;

 private:
  std::vector<int> sizes_;
  NetworkParams params_;
};

class MomentumSgd {
 public:
  MomentumSgd() = default;
  MomentumSgd(const QNetwork& shape, double learning_rate, double momentum);

  void step(QNetwork& net, const NetworkParams& gradient);

 private:
  double learning_rate_ = 0.0;
  double momentum_ = 0.0;
  NetworkParams velocity_;
};

}  // namespace fairsched
