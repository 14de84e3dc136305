#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairsched/fairness.hpp"
#include "fairsched/qnetwork.hpp"
#include "fairsched/random.hpp"

namespace fairsched {

// Beta increments available to the controller, index order is stable.
inline constexpr std::array<double, 11> kActions = {
    0.0, 1e-4, -1e-4, 1e-3, -1e-3, 1e-2, -1e-2, 5e-2, -5e-2, 1e-1, -1e-1};
inline constexpr int kActionCount = static_cast<int>(kActions.size());
inline constexpr int kStateSize = 7;

struct AgentState {
  double beta_prev = 0.0;
  double d_inf = 0.0;
  double d_sup = 0.0;
  double mean_norm_delay = 0.0;
  double std_norm_delay = 0.0;
  double mean_mcs = 0.0;
  double std_mcs = 0.0;

  std::array<double, kStateSize> to_array() const {
    return {beta_prev, d_inf, d_sup, mean_norm_delay, std_norm_delay, mean_mcs, std_mcs};
  }
};

// mcs_indexes: per-user MCS index reported this TTI (averaged over RBs).
AgentState build_state(double beta_prev, const FairnessReport& report,
                       std::span<const double> norm_delays, std::span<const double> mcs_indexes);

// +1 in FF; in UF/OF the magnitude of a step in the corrective direction,
// -1 otherwise.
double reward(FairnessCase c, double delta_beta);

struct Transition {
  AgentState state;
  int action = 0;
  double reward = 0.0;
  AgentState next_state;
};

// Bounded FIFO; the oldest transition is overwritten once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(const Transition& t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  std::vector<std::size_t> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

struct AgentConfig {
  std::vector<int> hidden_layers{60};
  double discount = 0.95;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 32;
  int replay_capacity = 10000;
  int target_sync_period = 1000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  double beta_initial = 1.0;
  double beta_max = 10.0;
  double distance_clip = 5.0;
  double mcs_scale = 15.0;  // usually the MCS table size

  void validate() const;
};

class DqnAgent {
 public:
  DqnAgent(AgentConfig config, Rng& init_rng);

  const AgentConfig& config() const { return config_; }
  double beta() const { return beta_; }
  void set_beta(double beta);

  // Linear decay over epsilon_decay_fraction of the planned steps.
  void plan_schedule(std::int64_t total_steps) { planned_steps_ = total_steps; }
  std::int64_t planned_steps() const { return planned_steps_; }
  double epsilon(std::int64_t step) const;

  Eigen::VectorXd features(const AgentState& state) const;
  Eigen::VectorXd q_values(const AgentState& state) const;
  int greedy_action(const AgentState& state) const;
  int select_action(const AgentState& state, std::int64_t step, bool training, Rng& rng) const;
  // Clamped to [0, beta_max]; returns the new beta.
  double apply_action(int action_index);

  void remember(const Transition& t) { replay_.push(t); }
  // nullopt while the replay buffer holds fewer than batch_size transitions.
  std::optional<double> train_step(Rng& rng);

  const QNetwork& online() const { return online_; }
  QNetwork& online() { return online_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  std::int64_t train_steps() const { return train_steps_; }

  void sync_target() { target_ = online_; }

  // Plain-text checkpoint, layout documented in docs/checkpoint.md.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static DqnAgent load(std::istream& in);
  static DqnAgent load(const std::string& path);

 private:
  DqnAgent(AgentConfig config, QNetwork online, QNetwork target);

  AgentConfig config_;
  QNetwork online_;
  QNetwork target_;
  MomentumSgd optimizer_;
  ReplayBuffer replay_;
  double beta_;
  std::int64_t planned_steps_ = 0;
  std::int64_t train_steps_ = 0;
};

}  // namespace fairsched
