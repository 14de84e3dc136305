#include "fairsched/metrics_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace fairsched {

namespace {

constexpr double kCdfExportMax = 5.0;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_metrics_csv(const MetricsLog& log, std::ostream& out) {
  out << "tti,case,beta,action,delta_beta,reward,avg_delay_ms,d_inf,d_sup,"
         "arrived_bits,delivered_bits,backlog_bits,loss\n";
  for (const auto& r : log.records) {
    out << r.n << ',' << case_name(r.fairness_case) << ',' << num(r.beta) << ',' << r.action << ','
        << num(r.delta_beta) << ',' << num(r.reward) << ',' << num(r.avg_delay * 1e3) << ','
        << num(r.d_inf) << ',' << num(r.d_sup) << ',' << r.arrived_bits << ',' << r.delivered_bits
        << ',' << r.backlog_bits << ',';
    if (r.loss) out << num(*r.loss);
    out << '\n';
  }
}

void write_metrics_csv(const MetricsLog& log, const std::string& path) {
  auto out = open_out(path);
  write_metrics_csv(log, out);
  if (!out) throw std::runtime_error("error writing " + path);
}

void write_norm_delays_csv(const MetricsLog& log, const std::string& path) {
  auto out = open_out(path);
  out << "tti,user,norm_delay\n";
  for (const auto& snap : log.snapshots) {
    for (std::size_t u = 0; u < snap.values.size(); ++u) {
      out << snap.n << ',' << u << ',' << num(snap.values[u]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("error writing " + path);
}

nlohmann::json summary_json(const RunSummary& s, const SimConfig& config) {
  nlohmann::json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["policy"] = std::string(policy_name(config.policy));
  j["beta_control"] = config.beta_control == BetaControl::Agent ? "agent" : "fixed";
  j["seed"] = config.seed;
  j["episode"] = config.episode;
  j["steps"] = s.steps;
  j["warmup"] = s.steps - s.measured_ttis;
  j["measured_ttis"] = s.measured_ttis;
  j["n_users"] = config.geometry.n_users;
  j["n_rbs"] = config.geometry.n_rbs;
  j["lambda"] = config.fairness.lambda;
  j["psi"] = config.fairness.psi;
  j["xi"] = config.fairness.xi;
  j["avg_delay_ms"] = s.avg_delay * 1e3;
  j["max_user_avg_delay_ms"] = s.max_user_avg_delay * 1e3;
  j["time_avg_queue_delay_ms"] = s.time_avg_queue_delay * 1e3;
  j["ff_pct"] = s.case_percent(FairnessCase::FF);
  j["uf_pct"] = s.case_percent(FairnessCase::UF);
  j["of_pct"] = s.case_percent(FairnessCase::OF);
  j["mean_beta"] = s.mean_beta;
  j["final_beta"] = s.final_beta;
  j["delivered_bits_per_tti"] = s.delivered_bits_per_tti;
  j["departed_packets"] = s.departed_packets;
  j["residual_packets"] = s.residual_packets;
  auto users = nlohmann::json::array();
  for (double d : s.user_avg_delay) users.push_back(d * 1e3);
  j["user_avg_delay_ms"] = users;
  auto w = nlohmann::json::array();
  auto f = nlohmann::json::array();
  const int last = static_cast<int>(kCdfExportMax / DelayHistogram::kStep + 0.5);
  for (int i = 0; i <= last; ++i) {
    w.push_back(i * DelayHistogram::kStep);
    f.push_back(s.norm_delay_cdf.cdf_at(i));
  }
  j["norm_delay_cdf"] = {{"w", w}, {"F", f}};
  return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("error writing " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace fairsched
