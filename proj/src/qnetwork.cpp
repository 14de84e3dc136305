#include "fairsched/qnetwork.hpp"

#include <cmath>
#include <stdexcept>

namespace fairsched {

void NetworkParams::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

bool NetworkParams::operator==(const NetworkParams& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() || weights[l].cols() != other.weights[l].cols() ||
        weights[l] != other.weights[l]) {
      return false;
    }
    if (biases[l].size() != other.biases[l].size() || biases[l] != other.biases[l]) return false;
  }
  return true;
}

QNetwork::QNetwork(std::vector<int> layer_sizes, Rng& rng) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("network needs at least input and output layers");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    Eigen::MatrixXd w(fan_out, fan_in);
    // row-major fill keeps the draw order independent of Eigen's storage order
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = uniform(rng);
    }
    params_.weights.push_back(std::move(w));
    params_.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

QNetwork::QNetwork(std::vector<int> layer_sizes, NetworkParams params)
    : sizes_(std::move(layer_sizes)), params_(std::move(params)) {
  if (sizes_.size() < 2 || params_.weights.size() != sizes_.size() - 1 ||
      params_.biases.size() != sizes_.size() - 1) {
    throw std::invalid_argument("network parameters do not match layer sizes");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (params_.weights[l].rows() != sizes_[l + 1] || params_.weights[l].cols() != sizes_[l] ||
        params_.biases[l].size() != sizes_[l + 1]) {
      throw std::invalid_argument("network parameters do not match layer sizes");
    }
  }
}

Eigen::VectorXd QNetwork::forward(const Eigen::VectorXd& input) const {
  return forward_batch(input);
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_size()) throw std::invalid_argument("input dimension mismatch");
  Eigen::MatrixXd a = inputs;
  const std::size_t layers = params_.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = params_.weights[l] * a;
    z.colwise() += params_.biases[l];
    a = (l + 1 < layers) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double QNetwork::loss(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                      std::span<const double> targets) const {
  const Eigen::MatrixXd q = forward_batch(inputs);
  double total = 0.0;
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const double diff = q(actions[static_cast<std::size_t>(i)], i) - targets[static_cast<std::size_t>(i)];
    total += diff * diff;
  }
  return total / static_cast<double>(q.cols());
}

double QNetwork::loss_and_gradient(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                                   std::span<const double> targets, NetworkParams& gradient) const {
  const auto batch = inputs.cols();
  if (batch == 0 || static_cast<Eigen::Index>(actions.size()) != batch ||
      static_cast<Eigen::Index>(targets.size()) != batch) {
    throw std::invalid_argument("loss_and_gradient: batch size mismatch");
  }
  const std::size_t layers = params_.weights.size();

  // activations[0] is the input; pre_activations[l] feeds layer l+1
  std::vector<Eigen::MatrixXd> activations{inputs};
  std::vector<Eigen::MatrixXd> pre_activations;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = params_.weights[l] * activations.back();
    z.colwise() += params_.biases[l];
    pre_activations.push_back(z);
    activations.push_back((l + 1 < layers) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z);
  }

  const Eigen::MatrixXd& q = activations.back();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
  double total = 0.0;
  const double scale = 2.0 / static_cast<double>(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= q.rows()) throw std::out_of_range("action index out of range");
    const double diff = q(a, i) - targets[static_cast<std::size_t>(i)];
    total += diff * diff;
    delta(a, i) = scale * diff;
  }

  gradient.weights.resize(layers);
  gradient.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    gradient.weights[l] = delta * activations[l].transpose();
    gradient.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = params_.weights[l].transpose() * delta;
      delta = back.cwiseProduct((pre_activations[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return total / static_cast<double>(batch);
}

MomentumSgd::MomentumSgd(const QNetwork& shape, double learning_rate, double momentum)
    : learning_rate_(learning_rate), momentum_(momentum), velocity_(shape.params()) {
  velocity_.set_zero();
}

void MomentumSgd::step(QNetwork& net, const NetworkParams& gradient) {
  auto& p = net.params();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    velocity_.weights[l] = momentum_ * velocity_.weights[l] - learning_rate_ * gradient.weights[l];
    velocity_.biases[l] = momentum_ * velocity_.biases[l] - learning_rate_ * gradient.biases[l];
    p.weights[l] += velocity_.weights[l];
    p.biases[l] += velocity_.biases[l];
  }
}

}  // namespace fairsched
