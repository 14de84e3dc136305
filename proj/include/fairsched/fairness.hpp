#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace fairsched {

// OF: over-fair, UF: unfair, FF: feasible-fair.
enum class FairnessCase { OF, UF, FF };

std::string_view case_name(FairnessCase c);

struct FairnessParams {
  double lambda = 0.2;  // fraction of best users
  double psi = 0.1;     // fraction of outliers ignored at the top
  double xi = 0.1;      // confidence margin on the requirement
  // Off: two or more violators are needed to leave FF. On: one is enough.
  bool strict_any_violator = false;

  int best_count(int m) const;
  int outlier_count(int m) const;
  // Throws std::invalid_argument unless best + outliers < m.
  void validate(int m) const;
};

struct FairnessReport {
  std::vector<double> sorted_norm_delays;
  std::vector<double> gaps;  // sorted delay minus required delay, by rank
  FairnessCase fairness_case = FairnessCase::FF;
  double d_inf = 0.0;
  double d_sup = 0.0;
};

// W / mean(W); an all-zero vector (idle cell) maps to all ones.
std::vector<double> normalized_delays(std::span<const double> delays);

// Piecewise-linear CDF target through (0.5, 0) and (1.5, 1).
double cdf_requirement(double w);

// Inverse of the target at j/m for the 1-based rank j.
double required_delay(int j, int m);

double empirical_cdf(std::span<const double> norm_delays, double w);

// Ascending order with ties broken by user index.
std::vector<double> sorted_delays(std::span<const double> norm_delays);

FairnessCase classify(std::span<const double> norm_delays, const FairnessParams& params);

struct StateDistances {
  double d_inf = 0.0;
  double d_sup = 0.0;
};

StateDistances state_distances(std::span<const double> gaps, FairnessCase c,
                               const FairnessParams& params);

FairnessReport evaluate_fairness(std::span<const double> norm_delays, const FairnessParams& params);

}  // namespace fairsched
