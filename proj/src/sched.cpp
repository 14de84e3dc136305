#include "fairsched/sched.hpp"

#include <cmath>
#include <stdexcept>

namespace fairsched {

namespace {

double delay_power(double delay, double beta) {
  if (beta == 0.0) return 1.0;
  if (delay <= 0.0) return 0.0;
  return std::pow(delay, beta);
}

double utility(Policy policy, int u, int k, const RateMatrix& rates,
               std::span<const double> delays, const SchedulerState& state) {
  switch (policy) {
    case Policy::Pf:
      return utility_pf(u, k, rates, state);
    case Policy::Mlwdf:
      return utility_mlwdf(u, k, rates, delays, state);
    case Policy::BetaMlwdf:
      return utility_beta(u, k, rates, delays, state);
    case Policy::Ldf:
      return utility_ldf(u, delays);
  }
  return 0.0;
}

}  // namespace

Policy parse_policy(std::string_view name) {
  if (name == "pf") return Policy::Pf;
  if (name == "ldf") return Policy::Ldf;
  if (name == "mlwdf") return Policy::Mlwdf;
  if (name == "beta-mlwdf") return Policy::BetaMlwdf;
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected pf | ldf | mlwdf | beta-mlwdf)");
}

std::string_view policy_name(Policy policy) {
  switch (policy) {
    case Policy::Pf: return "pf";
    case Policy::Ldf: return "ldf";
    case Policy::Mlwdf: return "mlwdf";
    case Policy::BetaMlwdf: return "beta-mlwdf";
  }
  return "?";
}

double QosParams::weight() const { return -std::log(delta) * budget; }

SchedulerState::SchedulerState(int n_users, double initial_rate, double t_pf_window,
                               QosParams qos_params, double initial_beta)
    : avg_rate(static_cast<std::size_t>(n_users), std::max(initial_rate, kRateFloor)),
      t_pf(t_pf_window),
      beta(initial_beta),
      qos(static_cast<std::size_t>(n_users), qos_params) {
  validate();
}

void SchedulerState::validate() const {
  if (!(t_pf > 0.0)) throw std::invalid_argument("T_PF must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (qos.size() != avg_rate.size()) throw std::invalid_argument("qos/user count mismatch");
  for (const auto& q : qos) {
    if (!(q.delta > 0.0 && q.delta < 1.0)) throw std::invalid_argument("delta_u must be in (0, 1)");
    if (!(q.budget > 0.0)) throw std::invalid_argument("T_u must be positive");
  }
}

double qos_factor(int u, const SchedulerState& state) {
  const auto i = static_cast<std::size_t>(u);
  return state.qos[i].weight() / state.avg_rate[i];
}

double utility_pf(int u, int k, const RateMatrix& rates, const SchedulerState& state) {
  return rates(u, k) / state.avg_rate[static_cast<std::size_t>(u)];
}

double utility_ldf(int u, std::span<const double> delays) {
  return delays[static_cast<std::size_t>(u)];
}

double utility_mlwdf(int u, int k, const RateMatrix& rates, std::span<const double> delays,
                     const SchedulerState& state) {
  return qos_factor(u, state) * delays[static_cast<std::size_t>(u)] * rates(u, k);
}

double utility_beta(int u, int k, const RateMatrix& rates, std::span<const double> delays,
                    const SchedulerState& state) {
  return qos_factor(u, state) * delay_power(delays[static_cast<std::size_t>(u)], state.beta) *
         rates(u, k);
}

void update_avg_rate(SchedulerState& state, std::span<const double> achieved) {
  if (achieved.size() != state.avg_rate.size()) throw std::invalid_argument("achieved rate size mismatch");
  const double w = 1.0 / state.t_pf;
  for (std::size_t u = 0; u < achieved.size(); ++u) {
    const double next = (1.0 - w) * state.avg_rate[u] + w * achieved[u];
    state.avg_rate[u] = std::max(next, SchedulerState::kRateFloor);
  }
}

AllocationGrid allocate_tti(Policy policy, const RateMatrix& rates, const McsMatrix& mcs,
                            std::span<const double> delays, const SchedulerState& state,
                            std::span<const double> backlog) {
  const auto n_users = static_cast<int>(rates.rows());
  const auto n_rbs = static_cast<int>(rates.cols());
  if (static_cast<int>(delays.size()) != n_users || state.n_users() != n_users ||
      mcs.rows() != rates.rows() || mcs.cols() != rates.cols() ||
      (!backlog.empty() && static_cast<int>(backlog.size()) != n_users)) {
    throw std::invalid_argument("allocate_tti: dimension mismatch");
  }

  AllocationGrid grid;
  grid.rbs.assign(static_cast<std::size_t>(n_rbs), {});
  grid.user_bits.assign(static_cast<std::size_t>(n_users), 0.0);

  auto candidate = [&](int u, int k) {
    if (!(rates(u, k) > 0.0)) return false;
    const auto i = static_cast<std::size_t>(u);
    return backlog.empty() || grid.user_bits[i] < backlog[i];
  };

  auto assign = [&](int k, int u) {
    auto& rb = grid.rbs[static_cast<std::size_t>(k)];
    rb.user = u;
    rb.mcs = mcs(u, k);
    rb.rate_bits = rates(u, k);
    grid.user_bits[static_cast<std::size_t>(u)] += rb.rate_bits;
  };

  if (policy == Policy::Ldf && backlog.empty()) {
    int chosen = 0;
    for (int u = 1; u < n_users; ++u) {
      if (utility_ldf(u, delays) > utility_ldf(chosen, delays)) chosen = u;
    }
    for (int k = 0; k < n_rbs; ++k) {
      if (rates(chosen, k) > 0.0) assign(k, chosen);
    }
    return grid;
  }

  for (int k = 0; k < n_rbs; ++k) {
    int best = -1;
    double best_utility = 0.0;
    for (int u = 0; u < n_users; ++u) {
      if (!candidate(u, k)) continue;
      const double value = utility(policy, u, k, rates, delays, state);
      if (best < 0 || value > best_utility) {
        best = u;
        best_utility = value;
      }
    }
    if (best >= 0) assign(k, best);
  }
  return grid;
}

}  // namespace fairsched
