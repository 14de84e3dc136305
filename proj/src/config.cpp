#include "fairsched/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace fairsched {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
  std::string text(value);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::int64_t to_int(std::string_view key, std::string_view value) {
  std::int64_t v = 0;
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects an integer, got '" +
                                std::string(value) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config: '" + std::string(key) + "' expects true/false");
}

std::vector<int> to_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(static_cast<int>(to_int(key, trim(value.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void SimConfig::validate() const {
  geometry.validate();
  if (traffic.s_cbr_bytes < 0.0) throw std::invalid_argument("s_cbr_bytes must be >= 0");
  if (!(traffic.t_cbr > 0.0)) throw std::invalid_argument("t_cbr_ms must be positive");
  const double ratio = traffic.t_cbr / geometry.tti;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
    throw std::invalid_argument("t_cbr_ms must be an integer multiple of tti_ms");
  }
  if (!(snr.sigma_db >= 0.0)) throw std::invalid_argument("sigma_gamma_db must be >= 0");
  if (!(bler_target >= 0.0 && bler_target < 1.0)) throw std::invalid_argument("bler_target must be in [0, 1)");
  fairness.validate(geometry.n_users);
  if (!(t_pf > 0.0)) throw std::invalid_argument("t_pf must be positive");
  if (!(qos.delta > 0.0 && qos.delta < 1.0)) throw std::invalid_argument("delta_u must be in (0, 1)");
  if (!(qos.budget > 0.0)) throw std::invalid_argument("t_u_ms must be positive");
  agent.validate();
  if (run_length < 1) throw std::invalid_argument("run_length must be >= 1");
  if (warmup < 0) throw std::invalid_argument("warmup must be >= 0");
  if (subsample < 0) throw std::invalid_argument("subsample must be >= 0");
  if (!(mcs_gap_db >= 0.0)) throw std::invalid_argument("mcs_gap_db must be >= 0");
}

McsTable SimConfig::mcs_table() const {
  return mcs_table_path.empty() ? McsTable::default_table(mcs_gap_db) : McsTable::load(mcs_table_path);
}

void apply_setting(SimConfig& c, std::string_view key, std::string_view value) {
  auto d = [&] { return to_double(key, value); };
  auto i = [&] { return to_int(key, value); };
  if (key == "n_rbs") c.geometry.n_rbs = static_cast<int>(i());
  else if (key == "n_users") c.geometry.n_users = static_cast<int>(i());
  else if (key == "numerology") c.geometry.numerology = static_cast<int>(i());
  else if (key == "tti_ms") c.geometry.tti = d() * 1e-3;
  else if (key == "carrier_freq_ghz") c.geometry.carrier_freq = d() * 1e9;
  else if (key == "user_speed_kmh") c.geometry.user_speed = d() / 3.6;
  else if (key == "delay_spread_us") c.geometry.delay_spread = d() * 1e-6;
  else if (key == "s_cbr_bytes") c.traffic.s_cbr_bytes = d();
  else if (key == "t_cbr_ms") c.traffic.t_cbr = d() * 1e-3;
  else if (key == "random_phases") c.traffic.random_phases = to_bool(key, value);
  else if (key == "mu_gamma_db") c.snr.mu_db = d();
  else if (key == "sigma_gamma_db") c.snr.sigma_db = d();
  else if (key == "bler_target") c.bler_target = d();
  else if (key == "t_pf") c.t_pf = d();
  else if (key == "delta_u") c.qos.delta = d();
  else if (key == "t_u_ms") c.qos.budget = d() * 1e-3;
  else if (key == "lambda") c.fairness.lambda = d();
  else if (key == "psi") c.fairness.psi = d();
  else if (key == "xi") c.fairness.xi = d();
  else if (key == "strict_any_violator") c.fairness.strict_any_violator = to_bool(key, value);
  else if (key == "policy") c.policy = parse_policy(value);
  else if (key == "beta_control") {
    if (value == "agent") c.beta_control = BetaControl::Agent;
    else if (value == "fixed") c.beta_control = BetaControl::Fixed;
    else throw std::invalid_argument("config: beta_control expects agent | fixed");
  }
  else if (key == "buffer_aware") c.buffer_aware = to_bool(key, value);
  else if (key == "beta_initial") c.agent.beta_initial = d();
  else if (key == "beta_max") c.agent.beta_max = d();
  else if (key == "mcs_table") c.mcs_table_path = std::string(value);
  else if (key == "mcs_gap_db") c.mcs_gap_db = d();
  else if (key == "run_length") c.run_length = i();
  else if (key == "warmup") c.warmup = i();
  else if (key == "subsample") c.subsample = static_cast<int>(i());
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(i());
  else if (key == "episode") c.episode = static_cast<std::uint64_t>(i());
  else if (key == "hidden_layers") c.agent.hidden_layers = to_int_list(key, value);
  else if (key == "discount") c.agent.discount = d();
  else if (key == "learning_rate") c.agent.learning_rate = d();
  else if (key == "momentum") c.agent.momentum = d();
  else if (key == "batch_size") c.agent.batch_size = static_cast<int>(i());
  else if (key == "replay_capacity") c.agent.replay_capacity = static_cast<int>(i());
  else if (key == "target_sync_period") c.agent.target_sync_period = static_cast<int>(i());
  else if (key == "epsilon_start") c.agent.epsilon_start = d();
  else if (key == "epsilon_end") c.agent.epsilon_end = d();
  else if (key == "epsilon_decay_fraction") c.agent.epsilon_decay_fraction = d();
  else if (key == "distance_clip") c.agent.distance_clip = d();
  else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

SimConfig parse_config(std::istream& in) {
  SimConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(config, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return config;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  SimConfig c = parse_config(in);
  // a relative MCS table path is taken relative to the config file
  if (!c.mcs_table_path.empty()) {
    std::filesystem::path table(c.mcs_table_path);
    if (table.is_relative()) c.mcs_table_path = (std::filesystem::path(path).parent_path() / table).string();
  }
  return c;
}

std::string config_text(const SimConfig& c) {
  std::ostringstream out;
  out << "n_rbs = " << c.geometry.n_rbs << '\n'
      << "n_users = " << c.geometry.n_users << '\n'
      << "numerology = " << c.geometry.numerology << '\n'
      << "tti_ms = " << num(c.geometry.tti * 1e3) << '\n'
      << "carrier_freq_ghz = " << num(c.geometry.carrier_freq * 1e-9) << '\n'
      << "user_speed_kmh = " << num(c.geometry.user_speed * 3.6) << '\n'
      << "delay_spread_us = " << num(c.geometry.delay_spread * 1e6) << '\n'
      << "s_cbr_bytes = " << num(c.traffic.s_cbr_bytes) << '\n'
      << "t_cbr_ms = " << num(c.traffic.t_cbr * 1e3) << '\n'
      << "random_phases = " << (c.traffic.random_phases ? "true" : "false") << '\n'
      << "mu_gamma_db = " << num(c.snr.mu_db) << '\n'
      << "sigma_gamma_db = " << num(c.snr.sigma_db) << '\n'
      << "bler_target = " << num(c.bler_target) << '\n'
      << "t_pf = " << num(c.t_pf) << '\n'
      << "delta_u = " << num(c.qos.delta) << '\n'
      << "t_u_ms = " << num(c.qos.budget * 1e3) << '\n'
      << "lambda = " << num(c.fairness.lambda) << '\n'
      << "psi = " << num(c.fairness.psi) << '\n'
      << "xi = " << num(c.fairness.xi) << '\n'
      << "strict_any_violator = " << (c.fairness.strict_any_violator ? "true" : "false") << '\n'
      << "policy = " << policy_name(c.policy) << '\n'
      << "beta_control = " << (c.beta_control == BetaControl::Agent ? "agent" : "fixed") << '\n'
      << "buffer_aware = " << (c.buffer_aware ? "true" : "false") << '\n'
      << "beta_initial = " << num(c.agent.beta_initial) << '\n'
      << "beta_max = " << num(c.agent.beta_max) << '\n';
  if (!c.mcs_table_path.empty()) out << "mcs_table = " << c.mcs_table_path << '\n';
  out << "mcs_gap_db = " << num(c.mcs_gap_db) << '\n'
      << "run_length = " << c.run_length << '\n'
      << "warmup = " << c.warmup << '\n'
      << "subsample = " << c.subsample << '\n'
      << "seed = " << c.seed << '\n'
      << "episode = " << c.episode << '\n'
      << "hidden_layers = ";
  for (std::size_t i = 0; i < c.agent.hidden_layers.size(); ++i) {
    out << (i ? "," : "") << c.agent.hidden_layers[i];
  }
  out << '\n'
      << "discount = " << num(c.agent.discount) << '\n'
      << "learning_rate = " << num(c.agent.learning_rate) << '\n'
      << "momentum = " << num(c.agent.momentum) << '\n'
      << "batch_size = " << c.agent.batch_size << '\n'
      << "replay_capacity = " << c.agent.replay_capacity << '\n'
      << "target_sync_period = " << c.agent.target_sync_period << '\n'
      << "epsilon_start = " << num(c.agent.epsilon_start) << '\n'
      << "epsilon_end = " << num(c.agent.epsilon_end) << '\n'
      << "epsilon_decay_fraction = " << num(c.agent.epsilon_decay_fraction) << '\n'
      << "distance_clip = " << num(c.agent.distance_clip) << '\n';
  return out.str();
}

}  // namespace fairsched
