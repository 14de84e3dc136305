#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairsched/agent.hpp"
#include "fairsched/channel.hpp"
#include "fairsched/config.hpp"
#include "fairsched/fairness.hpp"
#include "fairsched/sched.hpp"
#include "fairsched/traffic.hpp"

namespace fairsched {

struct TtiRecord {
  Tti n = 0;
  FairnessCase fairness_case = FairnessCase::FF;
  double beta = 0.0;
  int action = -1;          // action applied this TTI, -1 without an agent
  double delta_beta = 0.0;
  double reward = 0.0;
  double avg_delay = 0.0;   // mean W_u after service, seconds
  double d_inf = 0.0;
  double d_sup = 0.0;
  Bits arrived_bits = 0;
  Bits delivered_bits = 0;
  Bits backlog_bits = 0;
  std::optional<double> loss;
};

struct NormDelaySnapshot {
  Tti n = 0;
  std::vector<double> values;
};

// Time-aggregated normalized-delay distribution on a fixed grid.
class DelayHistogram {
 public:
  static constexpr double kStep = 0.01;
  static constexpr int kBins = 1001;  // grid 0 .. 10

  void add(double w);
  std::int64_t total() const { return total_; }
  // Fraction of samples <= i * kStep.
  double cdf_at(int i) const;

 private:
  std::array<std::int64_t, kBins> counts_{};
  std::int64_t overflow_ = 0;
  std::int64_t total_ = 0;
};

// Aggregates exclude the warm-up TTIs.
struct RunSummary {
  std::int64_t steps = 0;
  std::int64_t measured_ttis = 0;
  std::vector<double> user_avg_delay;  // mean packet sojourn per user, seconds
  double avg_delay = 0.0;              // mean over users of user_avg_delay
  double max_user_avg_delay = 0.0;
  double time_avg_queue_delay = 0.0;   // time and user average of W_u
  std::int64_t departed_packets = 0;
  std::int64_t residual_packets = 0;   // still queued at the end, counted with their age
  std::array<std::int64_t, 3> case_counts{};  // OF, UF, FF
  double mean_beta = 0.0;
  double final_beta = 0.0;
  double delivered_bits_per_tti = 0.0;
  DelayHistogram norm_delay_cdf;

  double case_percent(FairnessCase c) const;
};

struct MetricsLog {
  std::vector<TtiRecord> records;
  std::vector<NormDelaySnapshot> snapshots;
  RunSummary summary;
};

enum class RunMode { Train, Evaluate };

// One single-cell world. Per TTI: channel, AMC, arrivals, queue delay, beta
// update, allocation, service with block errors, average-rate update,
// fairness evaluation, reward and next agent action.
class Simulation {
 public:
  // agent: required for beta-mlwdf under agent control in Evaluate mode;
  // created from config in Train mode when absent.
  Simulation(SimConfig config, RunMode mode, std::optional<DqnAgent> agent = std::nullopt);

  TtiRecord step();
  void run();
  // Folds residual queued packets into the summary; call once after the last step.
  void finish();

  Tti now() const { return n_; }
  const SimConfig& config() const { return config_; }
  const MetricsLog& log() const { return log_; }
  MetricsLog take_log() { return std::move(log_); }
  const ChannelState& channel() const { return channel_; }
  const std::vector<UserQueue>& queues() const { return queues_; }
  const SchedulerState& scheduler() const { return sched_; }
  const std::optional<DqnAgent>& agent() const { return agent_; }
  std::optional<DqnAgent>& agent() { return agent_; }
  bool agent_driven() const { return agent_.has_value(); }

  Bits total_arrived() const { return total_arrived_; }
  Bits total_delivered() const { return total_delivered_; }
  Bits total_backlog() const;

 private:
  void compute_rates();
  std::vector<double> queue_delays(Tti reference) const;

  SimConfig config_;
  RunMode mode_;
  McsTable mcs_;
  CbrSource source_;
  ChannelState channel_;
  SchedulerState sched_;
  std::vector<UserQueue> queues_;
  std::optional<DqnAgent> agent_;
  AgentState agent_state_;
  int pending_action_ = 0;

  Rng fading_rng_;
  Rng block_rng_;
  Rng explore_rng_;
  Rng replay_rng_;

  RateMatrix rates_;
  McsMatrix mcs_index_;
  std::vector<double> reported_mcs_;

  Tti n_ = 0;
  Bits total_arrived_ = 0;
  Bits total_delivered_ = 0;
  bool finished_ = false;

  MetricsLog log_;
  std::vector<double> sojourn_sum_;
  std::vector<std::int64_t> sojourn_count_;
  double beta_sum_ = 0.0;
  double queue_delay_sum_ = 0.0;
  double delivered_sum_ = 0.0;
};

struct RunResult {
  MetricsLog log;
  std::optional<DqnAgent> agent;
};

// Validates, then runs config.run_length TTIs.
RunResult run(const SimConfig& config, RunMode mode, std::optional<DqnAgent> agent = std::nullopt);

}  // namespace fairsched
