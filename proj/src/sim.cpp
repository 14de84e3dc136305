#include "fairsched/sim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairsched {

void DelayHistogram::add(double w) {
  ++total_;
  // bin i holds values in ((i-1)*step, i*step]
  const double pos = std::ceil(w / kStep - 1e-9);
  if (!(pos < kBins)) {
    ++overflow_;
    return;
  }
  counts_[static_cast<std::size_t>(std::max(pos, 0.0))]++;
}

double DelayHistogram::cdf_at(int i) const {
  if (total_ == 0) return 0.0;
  std::int64_t below = 0;
  for (int b = 0; b <= std::min(i, kBins - 1); ++b) below += counts_[static_cast<std::size_t>(b)];
  return static_cast<double>(below) / static_cast<double>(total_);
}

double RunSummary::case_percent(FairnessCase c) const {
  const auto total = case_counts[0] + case_counts[1] + case_counts[2];
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(case_counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
}

Simulation::Simulation(SimConfig config, RunMode mode, std::optional<DqnAgent> agent)
    : config_(std::move(config)),
      mode_(mode),
      mcs_(config_.mcs_table()),
      fading_rng_(make_rng(config_.seed, Stream::Fading, config_.episode)),
      block_rng_(make_rng(config_.seed, Stream::BlockError, config_.episode)),
      explore_rng_(make_rng(config_.seed, Stream::Exploration, config_.episode)),
      replay_rng_(make_rng(config_.seed, Stream::Replay, config_.episode)) {
  config_.validate();
  const auto& g = config_.geometry;
  const int m = g.n_users;

  Rng snr_rng = make_rng(config_.seed, Stream::MeanSnr, config_.episode);
  const auto mean_snr = draw_mean_snrs(snr_rng, config_.snr.mu_db, config_.snr.sigma_db, m);
  channel_ = make_channel(mean_snr, g.n_rbs, FadingCorrelation::from_geometry(g), fading_rng_);

  source_ = CbrSource::make(config_.traffic.s_cbr_bytes, config_.traffic.t_cbr, g.tti, m);
  if (config_.traffic.random_phases) {
    Rng phase_rng = make_rng(config_.seed, Stream::TrafficPhase, config_.episode);
    source_.randomize_phases(phase_rng);
  }
  for (int u = 0; u < m; ++u) queues_.emplace_back(u);

  const double lowest_rate =
      mcs_.entries().front().spectral_efficiency * g.rb_bandwidth() * g.tti;
  sched_ = SchedulerState(m, lowest_rate, config_.t_pf, config_.qos, config_.agent.beta_initial);

  const bool wants_agent =
      config_.policy == Policy::BetaMlwdf && config_.beta_control == BetaControl::Agent;
  if (wants_agent) {
    if (agent) {
      agent_ = std::move(agent);
      if (mode_ == RunMode::Evaluate) agent_->set_beta(agent_->config().beta_initial);
    } else if (mode_ == RunMode::Train) {
      AgentConfig ac = config_.agent;
      ac.mcs_scale = static_cast<double>(mcs_.size());
      Rng init_rng = make_rng(config_.seed, Stream::WeightInit, config_.episode);
      agent_.emplace(std::move(ac), init_rng);
    } else {
      throw std::invalid_argument("evaluating beta-mlwdf under agent control needs a checkpoint");
    }
    if (mode_ == RunMode::Train) agent_->plan_schedule(config_.run_length);
    sched_.beta = agent_->beta();
  }

  rates_.resize(m, g.n_rbs);
  mcs_index_.resize(m, g.n_rbs);
  reported_mcs_.assign(static_cast<std::size_t>(m), 0.0);
  sojourn_sum_.assign(static_cast<std::size_t>(m), 0.0);
  sojourn_count_.assign(static_cast<std::size_t>(m), 0);

  if (agent_) {
    compute_rates();
    const std::vector<double> ones(static_cast<std::size_t>(m), 1.0);
    const auto report = evaluate_fairness(ones, config_.fairness);
    agent_state_ = build_state(agent_->beta(), report, ones, reported_mcs_);
    pending_action_ = agent_->select_action(agent_state_, 0, mode_ == RunMode::Train, explore_rng_);
  }
}

void Simulation::compute_rates() {
  const auto& g = config_.geometry;
  for (int u = 0; u < g.n_users; ++u) {
    double mcs_sum = 0.0;
    for (int k = 0; k < g.n_rbs; ++k) {
      const auto sel = select_mcs(channel_.inst_snr(u, k), mcs_, g);
      rates_(u, k) = sel.rate_bits;
      mcs_index_(u, k) = sel.mcs.value_or(-1);
      mcs_sum += sel.mcs.value_or(0);
    }
    reported_mcs_[static_cast<std::size_t>(u)] = mcs_sum / g.n_rbs;
  }
}

std::vector<double> Simulation::queue_delays(Tti reference) const {
  std::vector<double> delays(queues_.size());
  for (std::size_t u = 0; u < queues_.size(); ++u) {
    delays[u] = queue_delay(queues_[u], reference, config_.geometry.tti);
  }
  return delays;
}

Bits Simulation::total_backlog() const {
  Bits total = 0;
  for (const auto& q : queues_) total += q.backlog_bits();
  return total;
}

TtiRecord Simulation::step() {
  if (finished_) throw std::logic_error("simulation already finished");
  const auto& g = config_.geometry;
  const int m = g.n_users;
  const bool training = mode_ == RunMode::Train;
  TtiRecord rec;
  rec.n = n_;

  if (n_ > 0) advance_channel(channel_, fading_rng_);
  compute_rates();

  rec.arrived_bits = generate_arrivals(queues_, n_, source_);
  total_arrived_ += rec.arrived_bits;
  const auto delays = queue_delays(n_);

  if (agent_) {
    rec.action = pending_action_;
    rec.delta_beta = kActions[static_cast<std::size_t>(pending_action_)];
    sched_.beta = agent_->apply_action(pending_action_);
  }
  rec.beta = sched_.beta;

  std::vector<double> backlog;
  if (config_.buffer_aware) {
    backlog.reserve(queues_.size());
    for (const auto& q : queues_) backlog.push_back(static_cast<double>(q.backlog_bits()));
  }
  const auto grid = allocate_tti(config_.policy, rates_, mcs_index_, delays, sched_, backlog);

  std::vector<double> achieved(static_cast<std::size_t>(m), 0.0);
  std::vector<Tti> departures;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  // a run no longer than the warm-up is measured from the first TTI
  const bool measured = n_ >= config_.warmup || config_.run_length <= config_.warmup;
  for (int u = 0; u < m; ++u) {
    const auto i = static_cast<std::size_t>(u);
    // one draw per user per TTI keeps the stream aligned across policies
    const bool success = coin(block_rng_) >= config_.bler_target;
    const auto tb_bits = static_cast<Bits>(std::floor(grid.user_bits[i]));
    departures.clear();
    const auto served = serve(queues_[i], tb_bits, success, &departures);
    achieved[i] = static_cast<double>(served.delivered_bits);
    rec.delivered_bits += served.delivered_bits;
    if (measured) {
      for (Tti arrival : departures) {
        sojourn_sum_[i] += static_cast<double>(n_ + 1 - arrival) * g.tti;
        sojourn_count_[i]++;
      }
    }
  }
  total_delivered_ += rec.delivered_bits;
  update_avg_rate(sched_, achieved);

  rec.backlog_bits = total_backlog();
  if (total_arrived_ != total_delivered_ + rec.backlog_bits) {
    std::ostringstream msg;
    msg << "bit conservation violated at TTI " << n_ << ": arrived " << total_arrived_
        << " delivered " << total_delivered_ << " queued " << rec.backlog_bits;
    throw std::logic_error(msg.str());
  }

  // delay seen at the start of the next TTI, before its arrivals
  const auto post = queue_delays(n_ + 1);
  double delay_sum = 0.0;
  for (double w : post) delay_sum += w;
  rec.avg_delay = delay_sum / m;
  const auto norm = normalized_delays(post);
  auto report = evaluate_fairness(norm, config_.fairness);
  // idle system: all-ones would read as over-fair on the line test, but
  // nobody is waiting, so it counts as fair
  if (delay_sum == 0.0) {
    report.fairness_case = FairnessCase::FF;
    report.d_inf = 0.0;
    report.d_sup = 0.0;
  }
  rec.fairness_case = report.fairness_case;
  rec.d_inf = report.d_inf;
  rec.d_sup = report.d_sup;

  if (agent_) {
    rec.reward = reward(report.fairness_case, rec.delta_beta);
    const AgentState next = build_state(sched_.beta, report, norm, reported_mcs_);
    if (training) agent_->remember({agent_state_, pending_action_, rec.reward, next});
    agent_state_ = next;
    pending_action_ = agent_->select_action(agent_state_, n_ + 1, training, explore_rng_);
    if (training) rec.loss = agent_->train_step(replay_rng_);
  }

  if (!(sched_.beta >= 0.0 && sched_.beta <= std::max(config_.agent.beta_max, config_.agent.beta_initial))) {
    throw std::logic_error("beta left its admissible range at TTI " + std::to_string(n_));
  }

  auto& s = log_.summary;
  if (measured) {
    s.measured_ttis++;
    s.case_counts[static_cast<std::size_t>(rec.fairness_case)]++;
    for (double w : norm) s.norm_delay_cdf.add(w);
    beta_sum_ += rec.beta;
    queue_delay_sum_ += rec.avg_delay;
    delivered_sum_ += static_cast<double>(rec.delivered_bits);
  }
  if (config_.subsample > 0 && n_ % config_.subsample == 0) log_.snapshots.push_back({n_, norm});
  s.steps = n_ + 1;
  s.final_beta = rec.beta;
  log_.records.push_back(rec);
  ++n_;
  return rec;
}

void Simulation::run() {
  while (n_ < config_.run_length) step();
  finish();
}

void Simulation::finish() {
  if (finished_) return;
  finished_ = true;
  const auto m = queues_.size();
  auto& s = log_.summary;
  s.user_avg_delay.assign(m, 0.0);
  s.departed_packets = 0;
  s.residual_packets = 0;
  s.avg_delay = 0.0;
  s.max_user_avg_delay = 0.0;
  for (std::size_t u = 0; u < m; ++u) {
    double sum = sojourn_sum_[u];
    auto count = sojourn_count_[u];
    s.departed_packets += count;
    for (const auto& p : queues_[u].packets()) {
      sum += static_cast<double>(n_ - p.arrival_tti) * config_.geometry.tti;
      ++count;
      ++s.residual_packets;
    }
    s.user_avg_delay[u] = count > 0 ? sum / static_cast<double>(count) : 0.0;
    s.avg_delay += s.user_avg_delay[u];
    s.max_user_avg_delay = std::max(s.max_user_avg_delay, s.user_avg_delay[u]);
  }
  if (m > 0) s.avg_delay /= static_cast<double>(m);
  if (s.measured_ttis > 0) {
    const auto t = static_cast<double>(s.measured_ttis);
    s.mean_beta = beta_sum_ / t;
    s.time_avg_queue_delay = queue_delay_sum_ / t;
    s.delivered_bits_per_tti = delivered_sum_ / t;
  }
}

RunResult run(const SimConfig& config, RunMode mode, std::optional<DqnAgent> agent) {
  config.validate();
  Simulation sim(config, mode, std::move(agent));
  sim.run();
  return {sim.take_log(), std::move(sim.agent())};
}

}  // namespace fairsched
