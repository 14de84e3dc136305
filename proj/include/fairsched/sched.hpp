#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairsched {

enum class Policy { Pf, Ldf, Mlwdf, BetaMlwdf };

// Accepts pf | ldf | mlwdf | beta-mlwdf. Throws std::invalid_argument.
Policy parse_policy(std::string_view name);
std::string_view policy_name(Policy policy);

struct QosParams {
  double delta = 0.05;   // probability of missing the budget
  double budget = 0.1;   // delay budget T_u, seconds

  // a_u = -ln(delta) * T_u
  double weight() const;
};

// Average rates are in bits per TTI.
struct SchedulerState {
  static constexpr double kRateFloor = 1e-3;

  std::vector<double> avg_rate;
  double t_pf = 100.0;
  double beta = 1.0;
  std::vector<QosParams> qos;

  SchedulerState() = default;
  SchedulerState(int n_users, double initial_rate, double t_pf, QosParams qos_params,
                 double beta = 1.0);

  int n_users() const { return static_cast<int>(avg_rate.size()); }
  void validate() const;
};

// Rates: n_users x n_rbs potential bits. Delays: W_u in seconds.
using RateMatrix = Eigen::MatrixXd;
using McsMatrix = Eigen::MatrixXi;  // -1 where the user cannot be served

double qos_factor(int u, const SchedulerState& state);

double utility_pf(int u, int k, const RateMatrix& rates, const SchedulerState& state);
double utility_ldf(int u, std::span<const double> delays);
double utility_mlwdf(int u, int k, const RateMatrix& rates, std::span<const double> delays,
                     const SchedulerState& state);
// g_u * W_u^beta * r_{u,k}, with 0^0 = 1.
double utility_beta(int u, int k, const RateMatrix& rates, std::span<const double> delays,
                    const SchedulerState& state);

// Moving average over the TPF window, floored at kRateFloor.
void update_avg_rate(SchedulerState& state, std::span<const double> achieved);

struct RbAssignment {
  int user = -1;
  int mcs = -1;
  double rate_bits = 0.0;

  bool operator==(const RbAssignment&) const = default;
};

struct AllocationGrid {
  std::vector<RbAssignment> rbs;
  std::vector<double> user_bits;

  bool operator==(const AllocationGrid&) const = default;
};

// Per-RB argmax sweep in RB order; ties go to the lowest user index and users
// without rate on the RB are excluded. LDF hands every RB on which it has a
// rate to the single largest-delay user.
//
// backlog (bits per user, optional): a user whose allocation this TTI already
// covers its backlog is no longer a candidate, and LDF then walks down the
// delay ranking. Empty means unbounded demand.
AllocationGrid allocate_tti(Policy policy, const RateMatrix& rates, const McsMatrix& mcs,
                            std::span<const double> delays, const SchedulerState& state,
                            std::span<const double> backlog = {});

}  // namespace fairsched
