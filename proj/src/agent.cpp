#include "fairsched/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace fairsched {

namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(std::span<const double> v) {
  if (v.empty()) return {};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};
}

constexpr const char* kCheckpointMagic = "fairsched-checkpoint";
constexpr int kCheckpointVersion = 1;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  if (!(in >> got) || got != want) {
    throw std::runtime_error("checkpoint: expected '" + want + "', found '" + got + "'");
  }
}

template <typename T>
T read_field(std::istream& in, const std::string& key) {
  expect_token(in, key);
  T value{};
  if (!(in >> value)) throw std::runtime_error("checkpoint: bad value for '" + key + "'");
  return value;
}

void write_network(std::ostream& out, const std::string& name, const QNetwork& net) {
  out << "network " << name << '\n';
  const auto& p = net.params();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const auto& w = p.weights[l];
    out << "weights " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << (c ? " " : "") << fmt_double(w(r, c));
      out << '\n';
    }
    const auto& b = p.biases[l];
    out << "bias " << l << ' ' << b.size() << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << fmt_double(b(i));
    out << '\n';
  }
}

QNetwork read_network(std::istream& in, const std::string& name, const std::vector<int>& sizes) {
  expect_token(in, "network");
  expect_token(in, name);
  NetworkParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    expect_token(in, "weights");
    std::size_t index = 0;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> index >> rows >> cols) || index != l || rows != sizes[l + 1] || cols != sizes[l]) {
      throw std::runtime_error("checkpoint: weight block header mismatch");
    }
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> w(r, c))) throw std::runtime_error("checkpoint: truncated weights");
      }
    }
    expect_token(in, "bias");
    Eigen::Index n = 0;
    if (!(in >> index >> n) || index != l || n != sizes[l + 1]) {
      throw std::runtime_error("checkpoint: bias block header mismatch");
    }
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(in >> b(i))) throw std::runtime_error("checkpoint: truncated bias");
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return QNetwork(sizes, std::move(p));
}

std::vector<int> layer_sizes_for(const AgentConfig& config) {
  std::vector<int> sizes{kStateSize};
  sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  sizes.push_back(kActionCount);
  return sizes;
}

}  // namespace

AgentState build_state(double beta_prev, const FairnessReport& report,
                       std::span<const double> norm_delays, std::span<const double> mcs_indexes) {
  const auto w = moments(norm_delays);
  const auto m = moments(mcs_indexes);
  return {beta_prev, report.d_inf, report.d_sup, w.mean, w.stddev, m.mean, m.stddev};
}

double reward(FairnessCase c, double delta_beta) {
  switch (c) {
    case FairnessCase::FF:
      return 1.0;
    case FairnessCase::UF:
      return delta_beta > 0.0 ? delta_beta : -1.0;
    case FairnessCase::OF:
      return delta_beta < 0.0 ? -delta_beta : -1.0;
  }
  return -1.0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (items_.size() < capacity_) {
    items_.push_back(t);
    return;
  }
  items_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (items_.empty()) return {};
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

void AgentConfig::validate() const {
  for (int h : hidden_layers) {
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
  }
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must be in [0, 1)");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (replay_capacity < batch_size) throw std::invalid_argument("replay_capacity must be >= batch_size");
  if (target_sync_period < 1) throw std::invalid_argument("target_sync_period must be >= 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw std::invalid_argument("epsilon bounds must be in [0, 1]");
  }
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw std::invalid_argument("epsilon_decay_fraction must be in [0, 1]");
  }
  if (!(beta_max > 0.0)) throw std::invalid_argument("beta_max must be positive");
  if (!(beta_initial >= 0.0 && beta_initial <= beta_max)) {
    throw std::invalid_argument("beta_initial must be in [0, beta_max]");
  }
  if (!(distance_clip > 0.0) || !(mcs_scale > 0.0)) throw std::invalid_argument("feature scales must be positive");
}

DqnAgent::DqnAgent(AgentConfig config, Rng& init_rng)
    : config_(std::move(config)),
      replay_(static_cast<std::size_t>(std::max(config_.replay_capacity, 1))),
      beta_(config_.beta_initial) {
  config_.validate();
  online_ = QNetwork(layer_sizes_for(config_), init_rng);
  target_ = online_;
  optimizer_ = MomentumSgd(online_, config_.learning_rate, config_.momentum);
}

DqnAgent::DqnAgent(AgentConfig config, QNetwork online, QNetwork target)
    : config_(std::move(config)),
      online_(std::move(online)),
      target_(std::move(target)),
      replay_(static_cast<std::size_t>(std::max(config_.replay_capacity, 1))),
      beta_(config_.beta_initial) {
  config_.validate();
  optimizer_ = MomentumSgd(online_, config_.learning_rate, config_.momentum);
}

void DqnAgent::set_beta(double beta) { beta_ = std::clamp(beta, 0.0, config_.beta_max); }

double DqnAgent::epsilon(std::int64_t step) const {
  const double decay_steps = config_.epsilon_decay_fraction * static_cast<double>(planned_steps_);
  if (decay_steps <= 0.0 || static_cast<double>(step) >= decay_steps) return config_.epsilon_end;
  const double frac = static_cast<double>(std::max<std::int64_t>(step, 0)) / decay_steps;
  return config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
}

Eigen::VectorXd DqnAgent::features(const AgentState& s) const {
  const double clip = config_.distance_clip;
  Eigen::VectorXd x(kStateSize);
  x << s.beta_prev / config_.beta_max, std::clamp(s.d_inf, -clip, clip), std::clamp(s.d_sup, -clip, clip),
      s.mean_norm_delay, s.std_norm_delay, s.mean_mcs / config_.mcs_scale, s.std_mcs / config_.mcs_scale;
  return x;
}

Eigen::VectorXd DqnAgent::q_values(const AgentState& state) const {
  return online_.forward(features(state));
}

int DqnAgent::greedy_action(const AgentState& state) const {
  const Eigen::VectorXd q = q_values(state);
  int best = 0;
  for (int a = 1; a < q.size(); ++a) {
    if (q(a) > q(best)) best = a;
  }
  return best;
}

int DqnAgent::select_action(const AgentState& state, std::int64_t step, bool training, Rng& rng) const {
  if (training) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon(step)) {
      std::uniform_int_distribution<int> pick(0, kActionCount - 1);
      return pick(rng);
    }
  }
  return greedy_action(state);
}

double DqnAgent::apply_action(int action_index) {
  if (action_index < 0 || action_index >= kActionCount) throw std::out_of_range("action index");
  set_beta(beta_ + kActions[static_cast<std::size_t>(action_index)]);
  return beta_;
}

std::optional<double> DqnAgent::train_step(Rng& rng) {
  const auto batch = static_cast<std::size_t>(config_.batch_size);
  if (replay_.size() < batch) return std::nullopt;

  const auto picks = replay_.sample(batch, rng);
  Eigen::MatrixXd inputs(kStateSize, static_cast<Eigen::Index>(batch));
  Eigen::MatrixXd next_inputs(kStateSize, static_cast<Eigen::Index>(batch));
  std::vector<int> actions(batch);
  std::vector<double> rewards(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& t = replay_.at(picks[i]);
    inputs.col(static_cast<Eigen::Index>(i)) = features(t.state);
    next_inputs.col(static_cast<Eigen::Index>(i)) = features(t.next_state);
    actions[i] = t.action;
    rewards[i] = t.reward;
  }

  const Eigen::MatrixXd next_q = target_.forward_batch(next_inputs);
  std::vector<double> targets(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    targets[i] = rewards[i] + config_.discount * next_q.col(static_cast<Eigen::Index>(i)).maxCoeff();
  }

  NetworkParams gradient;
  const double loss = online_.loss_and_gradient(inputs, actions, targets, gradient);
  optimizer_.step(online_, gradient);
  ++train_steps_;
  if (train_steps_ % config_.target_sync_period == 0) sync_target();
  return loss;
}

void DqnAgent::save(std::ostream& out) const {
  const auto& sizes = online_.layer_sizes();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "layers " << sizes.size();
  for (int s : sizes) out << ' ' << s;
  out << '\n';
  out << "discount " << fmt_double(config_.discount) << '\n'
      << "learning_rate " << fmt_double(config_.learning_rate) << '\n'
      << "momentum " << fmt_double(config_.momentum) << '\n'
      << "batch_size " << config_.batch_size << '\n'
      << "replay_capacity " << config_.replay_capacity << '\n'
      << "target_sync_period " << config_.target_sync_period << '\n'
      << "epsilon_start " << fmt_double(config_.epsilon_start) << '\n'
      << "epsilon_end " << fmt_double(config_.epsilon_end) << '\n'
      << "epsilon_decay_fraction " << fmt_double(config_.epsilon_decay_fraction) << '\n'
      << "beta_initial " << fmt_double(config_.beta_initial) << '\n'
      << "beta_max " << fmt_double(config_.beta_max) << '\n'
      << "distance_clip " << fmt_double(config_.distance_clip) << '\n'
      << "mcs_scale " << fmt_double(config_.mcs_scale) << '\n'
      << "planned_steps " << planned_steps_ << '\n'
      << "train_steps " << train_steps_ << '\n'
      << "beta " << fmt_double(beta_) << '\n';
  write_network(out, "online", online_);
  write_network(out, "target", target_);
  out << "end\n";
}

void DqnAgent::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  save(out);
  if (!out) throw std::runtime_error("error writing checkpoint: " + path);
}

DqnAgent DqnAgent::load(std::istream& in) {
  expect_token(in, kCheckpointMagic);
  int version = 0;
  if (!(in >> version) || version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto n_layers = read_field<std::size_t>(in, "layers");
  if (n_layers < 2 || n_layers > 64) throw std::runtime_error("checkpoint: bad layer count");
  std::vector<int> sizes(n_layers);
  for (auto& s : sizes) {
    if (!(in >> s) || s < 1) throw std::runtime_error("checkpoint: bad layer size");
  }
  if (sizes.front() != kStateSize || sizes.back() != kActionCount) {
    throw std::runtime_error("checkpoint: network shape does not match state/action spaces");
  }
  AgentConfig config;
  config.hidden_layers.assign(sizes.begin() + 1, sizes.end() - 1);
  config.discount = read_field<double>(in, "discount");
  config.learning_rate = read_field<double>(in, "learning_rate");
  config.momentum = read_field<double>(in, "momentum");
  config.batch_size = read_field<int>(in, "batch_size");
  config.replay_capacity = read_field<int>(in, "replay_capacity");
  config.target_sync_period = read_field<int>(in, "target_sync_period");
  config.epsilon_start = read_field<double>(in, "epsilon_start");
  config.epsilon_end = read_field<double>(in, "epsilon_end");
  config.epsilon_decay_fraction = read_field<double>(in, "epsilon_decay_fraction");
  config.beta_initial = read_field<double>(in, "beta_initial");
  config.beta_max = read_field<double>(in, "beta_max");
  config.distance_clip = read_field<double>(in, "distance_clip");
  config.mcs_scale = read_field<double>(in, "mcs_scale");
  const auto planned = read_field<std::int64_t>(in, "planned_steps");
  const auto trained = read_field<std::int64_t>(in, "train_steps");
  const auto beta = read_field<double>(in, "beta");
  QNetwork online = read_network(in, "online", sizes);
  QNetwork target = read_network(in, "target", sizes);
  expect_token(in, "end");

  DqnAgent agent(std::move(config), std::move(online), std::move(target));
  agent.planned_steps_ = planned;
  agent.train_steps_ = trained;
  agent.set_beta(beta);
  return agent;
}

DqnAgent DqnAgent::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return load(in);
}

}  // namespace fairsched
