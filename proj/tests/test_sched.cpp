#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "fairsched/sched.hpp"
#include "support.hpp"

using namespace fairsched;

namespace {

struct Instance {
  RateMatrix rates;
  McsMatrix mcs;
  std::vector<double> delays;
  SchedulerState state;
};

Instance random_instance(Rng& rng, int m, int n, bool uniform_qos) {
  Instance in;
  std::uniform_real_distribution<double> rate(0.0, 1500.0);
  std::uniform_real_distribution<double> avg(50.0, 2000.0);
  std::uniform_real_distribution<double> delay(0.0, 0.2);
  std::uniform_real_distribution<double> delta(0.01, 0.3);
  std::uniform_real_distribution<double> budget(0.05, 0.3);
  std::bernoulli_distribution outage(0.1);
  in.rates.resize(m, n);
  in.mcs.resize(m, n);
  for (int u = 0; u < m; ++u) {
    for (int k = 0; k < n; ++k) {
      const bool off = outage(rng);
      in.rates(u, k) = off ? 0.0 : rate(rng);
      in.mcs(u, k) = off ? -1 : k % 15;
    }
  }
  in.delays.resize(static_cast<std::size_t>(m));
  for (auto& d : in.delays) d = delay(rng);
  in.state = SchedulerState(m, 1.0, 100.0, QosParams{}, 1.0);
  for (auto& r : in.state.avg_rate) r = avg(rng);
  if (!uniform_qos) {
    for (auto& q : in.state.qos) q = QosParams{delta(rng), budget(rng)};
  }
  return in;
}

int max_delay_user(const std::vector<double>& delays) {
  return static_cast<int>(std::max_element(delays.begin(), delays.end()) - delays.begin());
}

}  // namespace

TEST_SUITE("sched") {

TEST_CASE("policy names round trip") {
  for (Policy p : {Policy::Pf, Policy::Ldf, Policy::Mlwdf, Policy::BetaMlwdf}) {
    CHECK(parse_policy(policy_name(p)) == p);
  }
  CHECK_THROWS_AS(parse_policy("edf"), std::invalid_argument);
}

TEST_CASE("qos weight and factor") {
  CHECK(QosParams{0.05, 0.1}.weight() == doctest::Approx(0.29957).epsilon(1e-5));
  CHECK(QosParams{std::exp(-1.0), 1.0}.weight() == doctest::Approx(1.0).epsilon(1e-15));

  SchedulerState s(2, 100.0, 100.0, QosParams{});
  const double g = qos_factor(0, s);
  s.avg_rate[0] = 200.0;
  CHECK(qos_factor(0, s) == doctest::Approx(g / 2.0));
}

TEST_CASE("scheduler state validation") {
  CHECK_THROWS_AS(SchedulerState(2, 1.0, 0.0, QosParams{}), std::invalid_argument);
  CHECK_THROWS_AS(SchedulerState(2, 1.0, 100.0, QosParams{1.5, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(SchedulerState(2, 1.0, 100.0, QosParams{}, -0.5), std::invalid_argument);
  // cold start never divides by zero
  SchedulerState s(3, 0.0, 100.0, QosParams{});
  for (double r : s.avg_rate) CHECK(r == SchedulerState::kRateFloor);
}

TEST_CASE("pf utility") {
  SchedulerState s(1, 90.0, 100.0, QosParams{});
  RateMatrix r(1, 2);
  r << 180.0, 0.0;
  CHECK(utility_pf(0, 0, r, s) == 2.0);
  CHECK(utility_pf(0, 1, r, s) == 0.0);
}

TEST_CASE("ldf utility is the delay") {
  const std::vector<double> d = {0.0, 5e-3, 2e-3};
  CHECK(utility_ldf(1, d) == 5e-3);
}

TEST_CASE("mlwdf utility by hand") {
  SchedulerState s(1, 1.0, 100.0, QosParams{});
  s.avg_rate[0] = QosParams{}.weight() / 0.003;  // g = 0.003
  RateMatrix r(1, 1);
  r << 180.0;
  const std::vector<double> d = {0.010};
  CHECK(utility_mlwdf(0, 0, r, d, s) == doctest::Approx(0.0054).epsilon(1e-12));
  const std::vector<double> zero = {0.0};
  CHECK(utility_mlwdf(0, 0, r, zero, s) == 0.0);
}

TEST_CASE("beta utility special values") {
  SchedulerState s(1, 100.0, 100.0, QosParams{});
  RateMatrix r(1, 1);
  r << 300.0;
  const std::vector<double> zero = {0.0};
  const std::vector<double> some = {0.02};
  const double g = qos_factor(0, s);
  s.beta = 0.0;
  CHECK(utility_beta(0, 0, r, zero, s) == g * 300.0);  // 0^0 = 1
  CHECK(utility_beta(0, 0, r, some, s) == g * 300.0);
  s.beta = 2.5;
  CHECK(utility_beta(0, 0, r, zero, s) == 0.0);
  CHECK(utility_beta(0, 0, r, some, s) == doctest::Approx(g * std::pow(0.02, 2.5) * 300.0));
  s.beta = 1.0;
  CHECK(utility_beta(0, 0, r, some, s) == utility_mlwdf(0, 0, r, some, s));
}

TEST_CASE("beta utility equals mlwdf at beta 1 for random inputs") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    auto in = random_instance(rng, 6, 8, false);
    in.state.beta = 1.0;
    for (int u = 0; u < 6; ++u) {
      for (int k = 0; k < 8; ++k) {
        REQUIRE(utility_beta(u, k, in.rates, in.delays, in.state) ==
                utility_mlwdf(u, k, in.rates, in.delays, in.state));
      }
    }
  }
}

TEST_CASE("utility ratio between two users grows with beta") {
  // W_u > W_v => U_u/U_v = (g_u r_u / g_v r_v) * (W_u/W_v)^beta is non-decreasing in beta
  Rng rng(32);
  std::uniform_real_distribution<double> d(1e-3, 0.5);
  for (int i = 0; i < 300; ++i) {
    auto in = random_instance(rng, 2, 1, false);
    in.rates(0, 0) = 100.0 + i;
    in.rates(1, 0) = 900.0 - i;
    double a = d(rng), b = d(rng);
    if (a == b) continue;
    in.delays = {std::max(a, b), std::min(a, b)};
    double last = 0.0;
    for (double beta = 0.0; beta <= 10.0; beta += 0.25) {
      in.state.beta = beta;
      const double ratio = utility_beta(0, 0, in.rates, in.delays, in.state) /
                           utility_beta(1, 0, in.rates, in.delays, in.state);
      REQUIRE(ratio >= last * (1.0 - 1e-12));
      last = ratio;
    }
  }
}

TEST_CASE("average rate update") {
  SchedulerState s(2, 100.0, 100.0, QosParams{});
  const std::vector<double> zero = {0.0, 100.0};
  update_avg_rate(s, zero);
  CHECK(s.avg_rate[0] == doctest::Approx(99.0));
  CHECK(s.avg_rate[1] == doctest::Approx(100.0));

  // geometric convergence with ratio (1 - 1/T_PF)
  SchedulerState c(1, 1.0, 50.0, QosParams{});
  const std::vector<double> target = {400.0};
  double err = 399.0;
  for (int n = 0; n < 200; ++n) {
    update_avg_rate(c, target);
    err *= 1.0 - 1.0 / 50.0;
    CHECK(400.0 - c.avg_rate[0] == doctest::Approx(err).epsilon(1e-9));
  }

  // floor
  SchedulerState f(1, 1e-3, 2.0, QosParams{});
  update_avg_rate(f, std::vector<double>{0.0});
  CHECK(f.avg_rate[0] == SchedulerState::kRateFloor);
}

TEST_CASE("pf two-by-two by hand") {
  SchedulerState s(2, 1.0, 100.0, QosParams{});
  RateMatrix r(2, 2);
  r << 2.0, 1.0, 1.0, 2.0;
  McsMatrix mcs = McsMatrix::Constant(2, 2, 3);
  const std::vector<double> d = {0.0, 0.0};
  const auto grid = allocate_tti(Policy::Pf, r, mcs, d, s);
  CHECK(grid.rbs[0].user == 0);
  CHECK(grid.rbs[1].user == 1);
  CHECK(grid.user_bits == std::vector<double>{2.0, 2.0});
  CHECK(grid.rbs[0].mcs == 3);
}

TEST_CASE("pf picks the larger rate when averages match") {
  SchedulerState s(2, 10.0, 100.0, QosParams{});
  RateMatrix r(2, 1);
  r << 3.0, 7.0;
  const auto grid = allocate_tti(Policy::Pf, r, McsMatrix::Zero(2, 1), std::vector<double>{0, 0}, s);
  CHECK(grid.rbs[0].user == 1);
}

TEST_CASE("single user gets every schedulable RB") {
  SchedulerState s(1, 10.0, 100.0, QosParams{});
  RateMatrix r(1, 4);
  r << 5.0, 0.0, 1.0, 2.0;
  McsMatrix mcs(1, 4);
  mcs << 4, -1, 0, 1;
  for (Policy p : {Policy::Pf, Policy::Ldf, Policy::Mlwdf, Policy::BetaMlwdf}) {
    const auto grid = allocate_tti(p, r, mcs, std::vector<double>{0.004}, s);
    CHECK(grid.rbs[0].user == 0);
    CHECK(grid.rbs[1].user == -1);
    CHECK(grid.rbs[2].user == 0);
    CHECK(grid.rbs[3].user == 0);
    CHECK(grid.user_bits[0] == 8.0);
  }
}

TEST_CASE("ldf serves the largest-delay user on all its RBs") {
  SchedulerState s(3, 10.0, 100.0, QosParams{});
  RateMatrix r(3, 3);
  r << 9.0, 9.0, 9.0,
       1.0, 0.0, 1.0,
       9.0, 9.0, 9.0;
  McsMatrix mcs = McsMatrix::Constant(3, 3, 2);
  const std::vector<double> d = {0.0, 5e-3, 2e-3};
  const auto grid = allocate_tti(Policy::Ldf, r, mcs, d, s);
  CHECK(grid.rbs[0].user == 1);
  CHECK(grid.rbs[1].user == -1);  // chosen user in outage there
  CHECK(grid.rbs[2].user == 1);

  const std::vector<double> zero = {0.0, 0.0, 0.0};
  const auto tie = allocate_tti(Policy::Ldf, r, mcs, zero, s);
  for (const auto& rb : tie.rbs) CHECK(rb.user == 0);
}

TEST_CASE("buffer-aware allocation stops at the backlog") {
  SchedulerState s(2, 10.0, 100.0, QosParams{});
  RateMatrix r(2, 4);
  r << 100.0, 100.0, 100.0, 100.0,
        10.0,  10.0,  10.0,  10.0;
  McsMatrix mcs = McsMatrix::Constant(2, 4, 1);
  const std::vector<double> d = {0.01, 0.001};
  const std::vector<double> backlog = {150.0, 1000.0};
  for (Policy p : {Policy::Pf, Policy::Ldf, Policy::Mlwdf, Policy::BetaMlwdf}) {
    const auto grid = allocate_tti(p, r, mcs, d, s, backlog);
    CHECK(grid.rbs[0].user == 0);
    CHECK(grid.rbs[1].user == 0);
    CHECK(grid.rbs[2].user == 1);
    CHECK(grid.rbs[3].user == 1);
  }
  // an empty queue gets nothing; RBs nobody needs stay idle
  const std::vector<double> idle = {0.0, 0.0};
  const auto grid = allocate_tti(Policy::Pf, r, mcs, d, s, idle);
  for (const auto& rb : grid.rbs) CHECK(rb.user == -1);
}

TEST_CASE("allocation grid invariants on random instances") {
  Rng rng(33);
  for (int i = 0; i < 300; ++i) {
    auto in = random_instance(rng, 7, 12, i % 2 == 0);
    in.state.beta = (i % 5) * 0.7;
    for (Policy p : {Policy::Pf, Policy::Ldf, Policy::Mlwdf, Policy::BetaMlwdf}) {
      const auto grid = allocate_tti(p, in.rates, in.mcs, in.delays, in.state);
      REQUIRE(grid.rbs.size() == 12);
      std::vector<double> bits(7, 0.0);
      for (int k = 0; k < 12; ++k) {
        const auto& rb = grid.rbs[static_cast<std::size_t>(k)];
        if (rb.user < 0) continue;
        REQUIRE(in.rates(rb.user, k) > 0.0);
        REQUIRE(rb.rate_bits == in.rates(rb.user, k));
        REQUIRE(rb.mcs == in.mcs(rb.user, k));
        bits[static_cast<std::size_t>(rb.user)] += rb.rate_bits;
      }
      REQUIRE(bits == grid.user_bits);
    }
  }
}

TEST_CASE("special cases of beta-mlwdf") {
  Rng rng(34);
  for (int i = 0; i < 300; ++i) {
    // beta = 1 is M-LWDF
    auto in = random_instance(rng, 10, 20, false);
    in.state.beta = 1.0;
    REQUIRE(allocate_tti(Policy::BetaMlwdf, in.rates, in.mcs, in.delays, in.state) ==
            allocate_tti(Policy::Mlwdf, in.rates, in.mcs, in.delays, in.state));

    // beta = 0 with a common a_u is PF
    auto pf = random_instance(rng, 10, 20, true);
    pf.state.beta = 0.0;
    const auto a = allocate_tti(Policy::BetaMlwdf, pf.rates, pf.mcs, pf.delays, pf.state);
    const auto b = allocate_tti(Policy::Pf, pf.rates, pf.mcs, pf.delays, pf.state);
    for (int k = 0; k < 20; ++k) REQUIRE(a.rbs[k].user == b.rbs[k].user);
  }
}

TEST_CASE("large beta follows the largest delay") {
  Rng rng(35);
  std::uniform_real_distribution<double> ratio(1.1, 2.0);
  std::uniform_real_distribution<double> rate(100.0, 1000.0);
  std::uniform_real_distribution<double> avg(500.0, 1000.0);
  for (int i = 0; i < 200; ++i) {
    // g*r spread stays below 1.1^50, so the delay term dominates
    auto in = random_instance(rng, 10, 20, true);
    for (int u = 0; u < 10; ++u) {
      for (int k = 0; k < 20; ++k) in.rates(u, k) = rate(rng);
      in.state.avg_rate[static_cast<std::size_t>(u)] = avg(rng);
    }
    std::vector<double> d(10);
    d[0] = 1e-3;
    for (int u = 1; u < 10; ++u) d[static_cast<std::size_t>(u)] = d[static_cast<std::size_t>(u) - 1] * ratio(rng);
    std::shuffle(d.begin(), d.end(), rng);
    in.delays = d;
    in.state.beta = 50.0;
    const auto grid = allocate_tti(Policy::BetaMlwdf, in.rates, in.mcs, in.delays, in.state);
    const int top = max_delay_user(d);
    for (const auto& rb : grid.rbs) REQUIRE(rb.user == top);
  }
}

}  // TEST_SUITE
