#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fairsched/agent.hpp"
#include "fairsched/channel.hpp"
#include "fairsched/fairness.hpp"
#include "fairsched/sched.hpp"

namespace fairsched {

struct TrafficConfig {
  double s_cbr_bytes = 850.0;
  double t_cbr = 6e-3;
  bool random_phases = false;
};

struct SnrConfig {
  double mu_db = 15.0;
  double sigma_db = 3.0;
};

// How beta evolves under the beta-mlwdf policy.
enum class BetaControl { Agent, Fixed };

// Defaults reproduce the 60-user / 100-RB reference cell.
struct SimConfig {
  CellGeometry geometry;
  TrafficConfig traffic;
  SnrConfig snr;
  double bler_target = 0.1;
  FairnessParams fairness;
  Policy policy = Policy::BetaMlwdf;
  double t_pf = 100.0;
  QosParams qos;
  AgentConfig agent;
  BetaControl beta_control = BetaControl::Agent;
  // Stop giving RBs to a user once this TTI's allocation covers its queue.
  bool buffer_aware = false;
  std::string mcs_table_path;  // empty: built-in table
  double mcs_gap_db = 3.0;
  std::int64_t run_length = 200000;
  std::int64_t warmup = 1000;
  int subsample = 10;  // 0 disables per-user snapshots
  std::uint64_t seed = 1;
  std::uint64_t episode = 0;  // see episode_seed()

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  McsTable mcs_table() const;
};

// key = value lines, '#' comments. Unknown keys are an error.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::string& path);
void apply_setting(SimConfig& config, std::string_view key, std::string_view value);
std::string config_text(const SimConfig& config);

}  // namespace fairsched
