#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "fairsched/random.hpp"

namespace fairsched {

using Bits = std::int64_t;
using Tti = std::int64_t;

struct Packet {
  Bits size_bits = 0;
  Tti arrival_tti = 0;
  Bits remaining_bits = 0;
};

// Unbounded FIFO of packets for one user. A partially served head packet keeps
// its original arrival time.
class UserQueue {
 public:
  explicit UserQueue(int user_id = 0) : user_id_(user_id) {}

  int user_id() const { return user_id_; }
  bool empty() const { return packets_.empty(); }
  std::size_t size() const { return packets_.size(); }
  Bits backlog_bits() const { return backlog_bits_; }
  const std::deque<Packet>& packets() const { return packets_; }

  void push(Bits size_bits, Tti arrival);

  // Removes up to tb_bits from the head; arrival times of fully departed
  // packets are appended to departures (if non-null).
  Bits serve(Bits tb_bits, std::vector<Tti>* departures = nullptr);

 private:
  int user_id_;
  std::deque<Packet> packets_;
  Bits backlog_bits_ = 0;
};

// Constant-bit-rate source: one packet per user every period_ttis, at the
// TTIs where n mod period == phase.
struct CbrSource {
  Bits packet_bits = 0;
  Tti period_ttis = 1;
  std::vector<Tti> phases;  // one per user

  // Throws std::invalid_argument unless t_cbr is an integer multiple of tti.
  static CbrSource make(double s_cbr_bytes, double t_cbr, double tti, int n_users);
  void randomize_phases(Rng& rng);
  bool arrives(int user, Tti n) const;
};

// Returns the number of bits enqueued.
Bits generate_arrivals(std::vector<UserQueue>& queues, Tti n, const CbrSource& source);

// Sum over queued packets of (n - arrival) * tti, in seconds.
double queue_delay(const UserQueue& queue, Tti n, double tti);

struct ServeResult {
  Bits delivered_bits = 0;
};

// Block-error aware service: nothing leaves the queue when success is false.
ServeResult serve(UserQueue& queue, Bits tb_bits, bool success, std::vector<Tti>* departures = nullptr);

}  // namespace fairsched
