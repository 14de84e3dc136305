#include "fairsched/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairsched {

namespace {

int ceil_fraction(double fraction, int m) {
  // guard against 0.2 * 20 landing a hair above 4
  return static_cast<int>(std::ceil(fraction * m - 1e-9));
}

int count_violators(std::span<const double> sorted, int first_rank, int last_rank, double xi) {
  const int m = static_cast<int>(sorted.size());
  int count = 0;
  for (int j = first_rank; j <= last_rank; ++j) {
    if (sorted[static_cast<std::size_t>(j - 1)] > required_delay(j, m) + xi) ++count;
  }
  return count;
}

}  // namespace

std::string_view case_name(FairnessCase c) {
  switch (c) {
    case FairnessCase::OF: return "OF";
    case FairnessCase::UF: return "UF";
    case FairnessCase::FF: return "FF";
  }
  return "?";
}

int FairnessParams::best_count(int m) const { return ceil_fraction(lambda, m); }
int FairnessParams::outlier_count(int m) const { return ceil_fraction(psi, m); }

void FairnessParams::validate(int m) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0, 1]");
  if (!(psi >= 0.0 && psi <= 1.0)) throw std::invalid_argument("psi must be in [0, 1]");
  if (!(xi >= 0.0)) throw std::invalid_argument("xi must be >= 0");
  if (best_count(m) + outlier_count(m) >= m) {
    throw std::invalid_argument("ceil(lambda*M) + ceil(psi*M) must be < M");
  }
}

std::vector<double> normalized_delays(std::span<const double> delays) {
  std::vector<double> out(delays.size(), 1.0);
  if (delays.empty()) return out;
  const double sum = std::accumulate(delays.begin(), delays.end(), 0.0);
  if (sum <= 0.0) return out;
  const double mean = sum / static_cast<double>(delays.size());
  for (std::size_t u = 0; u < delays.size(); ++u) out[u] = delays[u] / mean;
  return out;
}

double cdf_requirement(double w) {
  if (w < 0.5) return 0.0;
  if (w > 1.5) return 1.0;
  return w - 0.5;
}

double required_delay(int j, int m) {
  // one rounding: the nearest double to j/m + 1/2
  return (static_cast<double>(j) + 0.5 * static_cast<double>(m)) / static_cast<double>(m);
}

double empirical_cdf(std::span<const double> norm_delays, double w) {
  if (norm_delays.empty()) return 0.0;
  const auto below = std::count_if(norm_delays.begin(), norm_delays.end(),
                                   [w](double x) { return x <= w; });
  return static_cast<double>(below) / static_cast<double>(norm_delays.size());
}

std::vector<double> sorted_delays(std::span<const double> norm_delays) {
  std::vector<double> sorted(norm_delays.begin(), norm_delays.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return sorted;
}

FairnessCase classify(std::span<const double> norm_delays, const FairnessParams& params) {
  const auto sorted = sorted_delays(norm_delays);
  const int m = static_cast<int>(sorted.size());
  const int best = params.best_count(m);
  const int outliers = params.outlier_count(m);
  const int threshold = params.strict_any_violator ? 0 : 1;
  if (count_violators(sorted, 1, best, params.xi) > threshold) return FairnessCase::OF;
  if (count_violators(sorted, best + 1, m - outliers, params.xi) > threshold) return FairnessCase::UF;
  return FairnessCase::FF;
}

StateDistances state_distances(std::span<const double> gaps, FairnessCase c,
                               const FairnessParams& params) {
  const int m = static_cast<int>(gaps.size());
  const auto best = static_cast<std::size_t>(std::clamp(params.best_count(m), 0, m));
  const auto head = gaps.subspan(0, best);
  const auto tail = gaps.subspan(best);
  auto max_of = [](std::span<const double> s) { return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end()); };
  auto min_of = [](std::span<const double> s) { return s.empty() ? 0.0 : *std::min_element(s.begin(), s.end()); };
  if (c == FairnessCase::OF) return {max_of(head), min_of(tail)};
  return {min_of(head), max_of(tail)};
}

FairnessReport evaluate_fairness(std::span<const double> norm_delays, const FairnessParams& params) {
  FairnessReport report;
  report.sorted_norm_delays = sorted_delays(norm_delays);
  const int m = static_cast<int>(norm_delays.size());
  report.gaps.resize(report.sorted_norm_delays.size());
  for (int j = 1; j <= m; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    report.gaps[i] = report.sorted_norm_delays[i] - required_delay(j, m);
  }
  report.fairness_case = classify(norm_delays, params);
  const auto d = state_distances(report.gaps, report.fairness_case, params);
  report.d_inf = d.d_inf;
  report.d_sup = d.d_sup;
  return report;
}

}  // namespace fairsched
