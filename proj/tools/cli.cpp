#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "fairsched/config.hpp"
#include "fairsched/fairness.hpp"
#include "fairsched/metrics_io.hpp"
#include "fairsched/sim.hpp"

namespace fs = std::filesystem;

namespace fairsched::cli {

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::optional<std::uint64_t> episode;
  std::string policy;
  std::string checkpoint;
  std::string out = ".";
  std::string in;
  std::vector<std::string> settings;
};

void init_logging() {
  auto logger = spdlog::get("fairsched");
  if (!logger) logger = spdlog::stderr_logger_mt("fairsched");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("FAIRSCHED_LOG")) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; treat those as a typo, not silence
    if (level == spdlog::level::off && std::string(env) != "off") {
      level = spdlog::level::info;
      spdlog::warn("FAIRSCHED_LOG={} not recognised, using info", env);
    }
  }
  spdlog::set_level(level);
}

SimConfig effective_config(const Options& o) {
  SimConfig c = o.config_path.empty() ? SimConfig{} : load_config(o.config_path);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + s);
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.steps) c.run_length = *o.steps;
  if (o.episode) c.episode = *o.episode;
  if (!o.policy.empty()) c.policy = parse_policy(o.policy);
  c.validate();
  return c;
}

bool needs_agent(const SimConfig& c) {
  return c.policy == Policy::BetaMlwdf && c.beta_control == BetaControl::Agent;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw std::runtime_error("cannot create output directory " + dir);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// Runs with periodic progress at debug level.
RunResult simulate(const SimConfig& c, RunMode mode, std::optional<DqnAgent> agent,
                   const std::string& label) {
  Simulation sim(c, mode, std::move(agent));
  const std::int64_t tick = std::max<std::int64_t>(1, c.run_length / 10);
  for (std::int64_t n = 0; n < c.run_length; ++n) {
    const auto rec = sim.step();
    if ((n + 1) % tick == 0) {
      spdlog::debug("{}: tti {}/{} beta {:.3f} case {}", label, n + 1, c.run_length, rec.beta,
                    case_name(rec.fairness_case));
    }
  }
  sim.finish();
  RunResult r{sim.take_log(), std::nullopt};
  if (sim.agent()) r.agent = std::move(*sim.agent());
  return r;
}

void write_run(const fs::path& dir, const SimConfig& c, const MetricsLog& log) {
  write_metrics_csv(log, (dir / "metrics.csv").string());
  write_norm_delays_csv(log, (dir / "norm_delays.csv").string());
  write_json(summary_json(log.summary, c), (dir / "summary.json").string());
  write_text(dir / "config.cfg", config_text(c));
}

void log_summary(const std::string& label, const RunSummary& s) {
  spdlog::info("{}: avg delay {:.1f} ms, FF {:.2f}% UF {:.2f}% OF {:.2f}%", label, s.avg_delay * 1e3,
               s.case_percent(FairnessCase::FF), s.case_percent(FairnessCase::UF),
               s.case_percent(FairnessCase::OF));
}

int cmd_train(const Options& o) {
  const SimConfig c = effective_config(o);
  if (!needs_agent(c)) throw std::invalid_argument("train needs policy beta-mlwdf with beta_control = agent");
  const fs::path dir = prepare_dir(o.out);
  spdlog::info("training {} TTIs, seed {}", c.run_length, c.seed);
  auto result = simulate(c, RunMode::Train, std::nullopt, "train");
  result.agent->save((dir / "checkpoint").string());
  write_run(dir, c, result.log);
  log_summary("train", result.log.summary);
  return 0;
}

std::optional<DqnAgent> agent_for(const SimConfig& c, const std::string& checkpoint) {
  if (!needs_agent(c)) return std::nullopt;
  if (checkpoint.empty()) throw std::invalid_argument("beta-mlwdf under agent control needs --checkpoint");
  return DqnAgent::load(checkpoint);
}

int cmd_eval(const Options& o) {
  const SimConfig c = effective_config(o);
  auto agent = agent_for(c, o.checkpoint);
  const fs::path dir = prepare_dir(o.out);
  auto result = simulate(c, RunMode::Evaluate, std::move(agent), std::string(policy_name(c.policy)));
  write_run(dir, c, result.log);
  log_summary(std::string(policy_name(c.policy)), result.log.summary);
  return 0;
}

int cmd_compare(const Options& o) {
  if (!o.policy.empty()) throw std::invalid_argument("compare always runs all four policies; drop --policy");
  const SimConfig base = effective_config(o);
  const fs::path dir = prepare_dir(o.out);

  const Policy order[] = {Policy::Pf, Policy::Ldf, Policy::Mlwdf, Policy::BetaMlwdf};
  std::vector<SimConfig> configs;
  std::vector<std::future<RunResult>> jobs;
  for (Policy p : order) {
    SimConfig c = base;
    c.policy = p;
    auto agent = agent_for(c, o.checkpoint);
    configs.push_back(c);
    jobs.push_back(std::async(std::launch::async, [c, agent = std::move(agent)]() mutable {
      return simulate(c, RunMode::Evaluate, std::move(agent), std::string(policy_name(c.policy)));
    }));
  }

  std::vector<CompareRow> rows;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto result = jobs[i].get();
    const auto& c = configs[i];
    const std::string name(policy_name(c.policy));
    write_run(prepare_dir((dir / name).string()), c, result.log);
    const auto& s = result.log.summary;
    rows.push_back({name, s.avg_delay * 1e3, s.max_user_avg_delay * 1e3, s.case_percent(FairnessCase::FF),
                    s.case_percent(FairnessCase::UF), s.case_percent(FairnessCase::OF)});
  }
  write_text(dir / "compare.csv", compare_csv(rows));
  const std::string table = compare_text(rows);
  write_text(dir / "compare.txt", table);
  std::cout << table;
  return 0;
}

struct CdfSource {
  std::string label;
  nlohmann::json summary;
};

std::vector<CdfSource> find_summaries(const fs::path& in) {
  if (!fs::is_directory(in)) throw std::runtime_error("no such directory: " + in.string());
  std::vector<fs::path> paths;
  if (fs::exists(in / "summary.json")) paths.push_back(in / "summary.json");
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(in)) {
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) paths.push_back(d / "summary.json");

  std::vector<CdfSource> out;
  for (const auto& p : paths) {
    auto j = read_json(p.string());
    if (j.value("schema_version", -1) != kSummarySchemaVersion) {
      throw std::runtime_error(p.string() + ": unsupported summary schema_version");
    }
    std::string label = j.at("policy").get<std::string>();
    const bool taken = std::any_of(out.begin(), out.end(), [&](const CdfSource& s) { return s.label == label; });
    if (taken) label += "@" + p.parent_path().filename().string();
    out.push_back({label, std::move(j)});
  }
  return out;
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_export_cdf(const Options& o) {
  const fs::path in(o.in);
  const auto sources = find_summaries(in);
  const fs::path dir = prepare_dir(o.out.empty() ? o.in : o.out);

  double xi = effective_config(o).fairness.xi;
  if (sources.empty()) spdlog::warn("no summary.json under {}; writing the requirement only", o.in);
  else xi = sources.front().summary.at("xi").get<double>();

  std::ostringstream csv;
  csv << "w,F(w),policy\n";
  for (const auto& s : sources) {
    const auto& cdf = s.summary.at("norm_delay_cdf");
    const auto& w = cdf.at("w");
    const auto& f = cdf.at("F");
    if (w.size() != f.size()) throw std::runtime_error(s.label + ": malformed norm_delay_cdf");
    for (std::size_t i = 0; i < w.size(); ++i) {
      csv << fmt_num(w[i].get<double>()) << ',' << fmt_num(f[i].get<double>()) << ',' << s.label << '\n';
    }
  }
  // requirement line and the +-xi tolerance band around it
  const int points = 500;
  for (int i = 0; i <= points; ++i) {
    const double w = i / 100.0;
    csv << fmt_num(w) << ',' << fmt_num(cdf_requirement(w)) << ",requirement\n";
  }
  for (int i = 0; i <= points; ++i) {
    const double w = i / 100.0;
    csv << fmt_num(w) << ',' << fmt_num(cdf_requirement(w - xi)) << ",requirement+xi\n";
  }
  for (int i = 0; i <= points; ++i) {
    const double w = i / 100.0;
    csv << fmt_num(w) << ',' << fmt_num(cdf_requirement(w + xi)) << ",requirement-xi\n";
  }
  write_text(dir / "cdf.csv", csv.str());
  spdlog::info("wrote {} ({} policies)", (dir / "cdf.csv").string(), sources.size());
  return 0;
}

void add_run_options(CLI::App* cmd, Options& o, bool with_checkpoint, bool with_policy) {
  cmd->add_option("--config", o.config_path, "config file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed override");
  cmd->add_option("--steps", o.steps, "run length override, in TTIs")->check(CLI::PositiveNumber);
  cmd->add_option("--episode", o.episode, "episode override (fresh fading/traffic, same cell)");
  cmd->add_option("--set", o.settings, "extra key=value config setting, repeatable");
  cmd->add_option("--out", o.out, "output directory");
  if (with_checkpoint) cmd->add_option("--checkpoint", o.checkpoint, "trained agent checkpoint");
  if (with_policy) cmd->add_option("--policy", o.policy, "pf | ldf | mlwdf | beta-mlwdf");
}

}  // namespace

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "policy,avg_delay_ms,max_user_avg_delay_ms,ff_pct,uf_pct,of_pct\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.1f,%.1f,%.2f,%.2f,%.2f\n", r.policy.c_str(), r.avg_delay_ms,
                  r.max_user_avg_delay_ms, r.ff_pct, r.uf_pct, r.of_pct);
    out << buf;
  }
  return out.str();
}

std::string compare_text(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-12s %14s %18s %8s %8s %8s\n", "policy", "avg delay ms",
                "max user delay ms", "FF %", "UF %", "OF %");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %14.1f %18.1f %8.2f %8.2f %8.2f\n", r.policy.c_str(),
                  r.avg_delay_ms, r.max_user_avg_delay_ms, r.ff_pct, r.uf_pct, r.of_pct);
    out << buf;
  }
  return out.str();
}

int run_cli(int argc, const char* const* argv) {
  init_logging();

  CLI::App app{"Single-cell OFDMA scheduler simulator with a learned beta-M-LWDF controller"};
  app.name("fairsched");
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "train the beta controller and write a checkpoint");
  add_run_options(train, o, false, true);
  auto* eval = app.add_subcommand("eval", "run one policy greedily and write its metrics");
  add_run_options(eval, o, true, true);
  auto* compare = app.add_subcommand("compare", "run PF, LDF, M-LWDF and beta-M-LWDF on the same seed");
  add_run_options(compare, o, true, false);
  auto* cdf = app.add_subcommand("export-cdf", "collect normalized-delay CDFs from run directories");
  cdf->add_option("--in", o.in, "run or compare output directory")->required();
  cdf->add_option("--out", o.out, "output directory (default: --in)");
  cdf->add_option("--config", o.config_path, "config supplying xi when --in has no runs")->check(CLI::ExistingFile);
  cdf->callback([&o, cdf] {
    if (cdf->count("--out") == 0) o.out.clear();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*compare) return cmd_compare(o);
    return cmd_export_cdf(o);
  } catch (const std::exception& e) {
    std::cerr << "fairsched: error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("fairsched");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fairsched::cli
