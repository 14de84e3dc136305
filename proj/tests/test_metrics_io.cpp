#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "fairsched/metrics_io.hpp"
#include "support.hpp"

using namespace fairsched;

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

RunResult short_run(Policy p) {
  SimConfig c;
  c.geometry.n_users = 6;
  c.geometry.n_rbs = 6;
  c.traffic.s_cbr_bytes = 300;
  c.policy = p;
  c.run_length = 120;
  c.warmup = 20;
  c.subsample = 40;
  c.agent.batch_size = 4;
  c.agent.replay_capacity = 40;
  return run(c, p == Policy::BetaMlwdf ? RunMode::Train : RunMode::Evaluate);
}

}  // namespace

TEST_SUITE("metrics_io") {

TEST_CASE("metrics csv layout") {
  const auto r = short_run(Policy::BetaMlwdf);
  std::ostringstream out;
  write_metrics_csv(r.log, out);
  const auto rows = lines(out.str());
  REQUIRE(rows.size() == 121);
  CHECK(rows[0] ==
        "tti,case,beta,action,delta_beta,reward,avg_delay_ms,d_inf,d_sup,arrived_bits,delivered_bits,"
        "backlog_bits,loss");
  const std::set<std::string> cases = {"OF", "UF", "FF"};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    REQUIRE(cells.size() == 13);
    CHECK(std::stoll(cells[0]) == static_cast<long long>(i - 1));
    CHECK(cases.count(cells[1]) == 1);
  }
  // no loss before the replay buffer holds a batch
  CHECK(split(rows[1])[12].empty());
  CHECK_FALSE(split(rows.back())[12].empty());
}

TEST_CASE("norm delay snapshots") {
  const auto r = short_run(Policy::Pf);
  testsupport::TempDir dir("metrics");
  write_norm_delays_csv(r.log, dir.str("norm.csv"));
  const auto rows = lines(testsupport::slurp(dir.str("norm.csv")));
  REQUIRE(rows.size() == 1 + 3 * 6);
  CHECK(rows[0] == "tti,user,norm_delay");
  CHECK(split(rows[1])[0] == "0");
  CHECK(split(rows[7])[0] == "40");
  CHECK(split(rows[18])[1] == "5");
}

TEST_CASE("summary json schema") {
  const auto r = short_run(Policy::Mlwdf);
  SimConfig c;
  c.policy = Policy::Mlwdf;
  const auto j = summary_json(r.log.summary, c);
  CHECK(j.at("schema_version") == kSummarySchemaVersion);
  CHECK(kSummarySchemaVersion == 1);
  for (const char* key :
       {"policy", "beta_control", "seed", "episode", "steps", "warmup", "measured_ttis", "n_users", "n_rbs",
        "lambda", "psi", "xi", "avg_delay_ms", "max_user_avg_delay_ms", "time_avg_queue_delay_ms", "ff_pct",
        "uf_pct", "of_pct", "mean_beta", "final_beta", "delivered_bits_per_tti", "departed_packets",
        "residual_packets", "user_avg_delay_ms", "norm_delay_cdf"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j.at("policy") == "mlwdf");
  CHECK(j.at("steps") == 120);
  CHECK(j.at("warmup") == 20);
  CHECK(j.at("measured_ttis") == 100);
  CHECK(j.at("user_avg_delay_ms").size() == 6);
  const double pct = j.at("ff_pct").get<double>() + j.at("uf_pct").get<double>() + j.at("of_pct").get<double>();
  CHECK(pct == doctest::Approx(100.0));

  const auto& w = j.at("norm_delay_cdf").at("w");
  const auto& f = j.at("norm_delay_cdf").at("F");
  REQUIRE(w.size() == 501);
  REQUIRE(f.size() == 501);
  CHECK(w.back().get<double>() == doctest::Approx(5.0));
  double last = 0.0;
  for (const auto& v : f) {
    CHECK(v.get<double>() >= last);
    CHECK(v.get<double>() <= 1.0);
    last = v.get<double>();
  }
}

TEST_CASE("json file round trip and read errors") {
  testsupport::TempDir dir("json");
  const auto r = short_run(Policy::Pf);
  const auto j = summary_json(r.log.summary, SimConfig{});
  write_json(j, dir.str("s.json"));
  CHECK(read_json(dir.str("s.json")) == j);
  {
    std::ofstream bad(dir.str("bad.json"));
    bad << "{ not json";
  }
  CHECK_THROWS_AS(read_json(dir.str("bad.json")), std::runtime_error);
  CHECK_THROWS_AS(read_json(dir.str("missing.json")), std::runtime_error);
  CHECK_THROWS(write_json(j, "/nonexistent/dir/s.json"));
}

}  // TEST_SUITE
