#include "fairsched/channel.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fairsched {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

std::complex<double> unit_gaussian(Rng& rng, std::normal_distribution<double>& normal) {
  const double re = normal(rng);
  const double im = normal(rng);
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

// Row of n unit-power complex Gaussians with corr(k, k') = rho^|k-k'|.
void draw_frequency_row(Eigen::RowVectorXcd& row, double rho, Rng& rng,
                        std::normal_distribution<double>& normal) {
  const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  row(0) = unit_gaussian(rng, normal);
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    row(k) = rho * row(k - 1) + innovation * unit_gaussian(rng, normal);
  }
}

void refresh_snr(ChannelState& state) {
  state.inst_snr = state.h.cwiseAbs2();
  for (Eigen::Index u = 0; u < state.inst_snr.rows(); ++u) {
    state.inst_snr.row(u) *= state.mean_snr(u);
  }
}

}  // namespace

double CellGeometry::doppler() const { return user_speed * carrier_freq / kSpeedOfLight; }

void CellGeometry::validate() const {
  if (n_rbs < 1) throw std::invalid_argument("n_rbs must be >= 1");
  if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");
  if (numerology < 0 || numerology > 3) throw std::invalid_argument("numerology must be in [0, 3]");
  if (!(tti > 0.0)) throw std::invalid_argument("tti must be positive");
  if (!(carrier_freq > 0.0)) throw std::invalid_argument("carrier_freq must be positive");
  if (user_speed < 0.0) throw std::invalid_argument("user_speed must be >= 0");
  if (delay_spread < 0.0) throw std::invalid_argument("delay_spread must be >= 0");
}

FadingCorrelation FadingCorrelation::from_geometry(const CellGeometry& geometry) {
  FadingCorrelation c;
  c.time = std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * geometry.doppler() * geometry.tti);
  if (geometry.delay_spread <= 0.0) {
    c.frequency = 1.0;
  } else {
    const double coherence_bw = 1.0 / (2.0 * std::numbers::pi * geometry.delay_spread);
    c.frequency = std::exp(-geometry.rb_bandwidth() / coherence_bw);
  }
  return c;
}

std::vector<double> draw_mean_snrs(Rng& rng, double mu_db, double sigma_db, int n_users) {
  std::vector<double> out(static_cast<std::size_t>(n_users));
  if (sigma_db == 0.0) {
    std::fill(out.begin(), out.end(), std::pow(10.0, mu_db / 10.0));
    return out;
  }
  std::normal_distribution<double> normal(mu_db, sigma_db);
  for (auto& v : out) v = std::pow(10.0, normal(rng) / 10.0);
  return out;
}

ChannelState make_channel(const std::vector<double>& mean_snr, int n_rbs,
                          FadingCorrelation correlation, Rng& rng) {
  if (n_rbs < 1 || mean_snr.empty()) throw std::invalid_argument("empty channel dimensions");
  const auto n_users = static_cast<Eigen::Index>(mean_snr.size());
  ChannelState state;
  state.correlation = correlation;
  state.mean_snr = Eigen::Map<const Eigen::VectorXd>(mean_snr.data(), n_users);
  state.h.resize(n_users, n_rbs);
  std::normal_distribution<double> normal;
  Eigen::RowVectorXcd row(n_rbs);
  for (Eigen::Index u = 0; u < n_users; ++u) {
    draw_frequency_row(row, correlation.frequency, rng, normal);
    state.h.row(u) = row;
  }
  refresh_snr(state);
  return state;
}

void advance_channel(ChannelState& state, Rng& rng) {
  const double rho = state.correlation.time;
  if (rho != 1.0) {
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    std::normal_distribution<double> normal;
    Eigen::RowVectorXcd fresh(state.h.cols());
    for (Eigen::Index u = 0; u < state.h.rows(); ++u) {
      draw_frequency_row(fresh, state.correlation.frequency, rng, normal);
      state.h.row(u) = rho * state.h.row(u) + innovation * fresh;
    }
  }
  refresh_snr(state);
}

McsTable::McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("MCS table is empty");
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (!(entries_[i].spectral_efficiency > entries_[i - 1].spectral_efficiency)) {
      throw std::invalid_argument("MCS spectral efficiency must be strictly increasing");
    }
    if (!(entries_[i].min_snr_db > entries_[i - 1].min_snr_db)) {
      throw std::invalid_argument("MCS SNR thresholds must be strictly increasing");
    }
    if (entries_[i].index <= entries_[i - 1].index) {
      throw std::invalid_argument("MCS indexes must be strictly increasing");
    }
  }
  if (!(entries_.front().spectral_efficiency > 0.0)) {
    throw std::invalid_argument("MCS spectral efficiency must be positive");
  }
  min_snr_linear_.reserve(entries_.size());
  for (const auto& e : entries_) min_snr_linear_.push_back(std::pow(10.0, e.min_snr_db / 10.0));
}

McsTable McsTable::default_table(double gap_db) {
  static constexpr double kEfficiency[] = {0.2344, 0.3770, 0.8770, 1.4766, 1.9141,
                                           2.4063, 2.7305, 3.3223, 3.9023, 4.5234,
                                           5.1152, 5.5547, 6.2266, 6.9141, 7.4063};
  std::vector<McsEntry> entries;
  int index = 0;
  for (double se : kEfficiency) {
    const double snr_db = 10.0 * std::log10(std::exp2(se) - 1.0) + gap_db;
    entries.push_back({index++, se, snr_db});
  }
  return McsTable(std::move(entries));
}

McsTable McsTable::parse(std::istream& in) {
  std::vector<McsEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    McsEntry e;
    if (!(fields >> e.index)) continue;
    if (!(fields >> e.spectral_efficiency >> e.min_snr_db)) {
      throw std::invalid_argument("MCS table line " + std::to_string(line_no) + ": expected 3 fields");
    }
    entries.push_back(e);
  }
  return McsTable(std::move(entries));
}

McsTable McsTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open MCS table: " + path);
  return parse(in);
}

McsSelection select_mcs(double snr_linear, const McsTable& table, const CellGeometry& geometry) {
  const auto& thresholds = table.thresholds_linear();
  // highest entry with threshold <= snr
  auto it = std::upper_bound(thresholds.begin(), thresholds.end(), snr_linear);
  if (it == thresholds.begin()) return {};
  const auto& entry = table.entries()[static_cast<std::size_t>(it - thresholds.begin() - 1)];
  return {entry.index, entry.spectral_efficiency * geometry.rb_bandwidth() * geometry.tti};
}

}  // namespace fairsched
