#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairsched/random.hpp"

namespace fairsched {

// Single-cell OFDMA geometry. Units are SI throughout (s, Hz, m/s).
struct CellGeometry {
  int n_rbs = 100;
  int n_users = 60;
  int numerology = 0;
  double tti = 1e-3;
  double carrier_freq = 5e9;
  double user_speed = 5.0 / 3.6;
  double delay_spread = 100e-6;

  double subcarrier_spacing() const { return 15000.0 * static_cast<double>(1 << numerology); }
  double rb_bandwidth() const { return 12.0 * subcarrier_spacing(); }
  double doppler() const;

  // Throws std::invalid_argument.
  void validate() const;
};

// AR(1) coefficient between consecutive TTIs and the exponential correlation
// coefficient between adjacent RBs.
struct FadingCorrelation {
  double time = 0.0;
  double frequency = 0.0;

  // time = J0(2*pi*f_d*TTI); frequency = exp(-B_rb / B_c) with B_c = 1/(2*pi*tau).
  static FadingCorrelation from_geometry(const CellGeometry& geometry);
};

struct ChannelState {
  Eigen::MatrixXcd h;         // n_users x n_rbs
  Eigen::VectorXd mean_snr;   // linear
  Eigen::MatrixXd inst_snr;   // linear, mean_snr(u) * |h(u,k)|^2
  FadingCorrelation correlation;

  int n_users() const { return static_cast<int>(h.rows()); }
  int n_rbs() const { return static_cast<int>(h.cols()); }
};

// Log-normal mean SNRs: 10^(X/10), X ~ N(mu_db, sigma_db^2).
std::vector<double> draw_mean_snrs(Rng& rng, double mu_db, double sigma_db, int n_users);

// Warm-up draw: stationary complex Gaussian field with the requested
// frequency correlation.
ChannelState make_channel(const std::vector<double>& mean_snr, int n_rbs,
                          FadingCorrelation correlation, Rng& rng);

// One TTI of AR(1) evolution; preserves the unit-power Rayleigh marginal.
void advance_channel(ChannelState& state, Rng& rng);

struct McsEntry {
  int index = 0;
  double spectral_efficiency = 0.0;  // bits/s/Hz
  double min_snr_db = 0.0;
};

class McsTable {
 public:
  explicit McsTable(std::vector<McsEntry> entries);

  // 15 entries from 0.23 to 7.41 bits/s/Hz; thresholds from Shannon capacity
  // backed off by gap_db.
  static McsTable default_table(double gap_db = 3.0);
  // One entry per line: index spectral_efficiency min_snr_db. '#' starts a comment.
  static McsTable parse(std::istream& in);
  static McsTable load(const std::string& path);

  const std::vector<McsEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<double>& thresholds_linear() const { return min_snr_linear_; }

 private:
  std::vector<McsEntry> entries_;
  std::vector<double> min_snr_linear_;
};

struct McsSelection {
  std::optional<int> mcs;  // nullopt: unschedulable on this RB
  double rate_bits = 0.0;  // potential bits per TTI on one RB
};

McsSelection select_mcs(double snr_linear, const McsTable& table, const CellGeometry& geometry);

}  // namespace fairsched
