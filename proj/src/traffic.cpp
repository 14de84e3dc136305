#include "fairsched/traffic.hpp"

#include <cmath>
#include <stdexcept>

namespace fairsched {

void UserQueue::push(Bits size_bits, Tti arrival) {
  if (size_bits <= 0) return;
  packets_.push_back({size_bits, arrival, size_bits});
  backlog_bits_ += size_bits;
}

Bits UserQueue::serve(Bits tb_bits, std::vector<Tti>* departures) {
  Bits delivered = 0;
  while (tb_bits > 0 && !packets_.empty()) {
    Packet& head = packets_.front();
    if (head.remaining_bits <= tb_bits) {
      tb_bits -= head.remaining_bits;
      delivered += head.remaining_bits;
      if (departures) departures->push_back(head.arrival_tti);
      packets_.pop_front();
    } else {
      head.remaining_bits -= tb_bits;
      delivered += tb_bits;
      tb_bits = 0;
    }
  }
  backlog_bits_ -= delivered;
  return delivered;
}

CbrSource CbrSource::make(double s_cbr_bytes, double t_cbr, double tti, int n_users) {
  if (s_cbr_bytes < 0.0) throw std::invalid_argument("S_CBR must be >= 0");
  if (!(tti > 0.0) || !(t_cbr > 0.0)) throw std::invalid_argument("T_CBR and TTI must be positive");
  const double ratio = t_cbr / tti;
  const double period = std::round(ratio);
  if (period < 1.0 || std::abs(ratio - period) > 1e-9 * ratio) {
    throw std::invalid_argument("T_CBR must be an integer multiple of the TTI");
  }
  CbrSource source;
  source.packet_bits = static_cast<Bits>(std::llround(8.0 * s_cbr_bytes));
  source.period_ttis = static_cast<Tti>(period);
  source.phases.assign(static_cast<std::size_t>(n_users), 0);
  return source;
}

void CbrSource::randomize_phases(Rng& rng) {
  std::uniform_int_distribution<Tti> phase(0, period_ttis - 1);
  for (auto& p : phases) p = phase(rng);
}

bool CbrSource::arrives(int user, Tti n) const {
  return n % period_ttis == phases[static_cast<std::size_t>(user)];
}

Bits generate_arrivals(std::vector<UserQueue>& queues, Tti n, const CbrSource& source) {
  Bits added = 0;
  for (std::size_t u = 0; u < queues.size(); ++u) {
    if (source.packet_bits > 0 && source.arrives(static_cast<int>(u), n)) {
      queues[u].push(source.packet_bits, n);
      added += source.packet_bits;
    }
  }
  return added;
}

double queue_delay(const UserQueue& queue, Tti n, double tti) {
  Tti total = 0;
  for (const auto& p : queue.packets()) total += n - p.arrival_tti;
  return static_cast<double>(total) * tti;
}

ServeResult serve(UserQueue& queue, Bits tb_bits, bool success, std::vector<Tti>* departures) {
  if (!success || tb_bits <= 0) return {};
  return {queue.serve(tb_bits, departures)};
}

}  // namespace fairsched
