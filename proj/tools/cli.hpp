#pragma once

#include <string>
#include <vector>

namespace fairsched::cli {

// Entry point behind the fairsched binary. Returns the process exit code;
// errors are reported on stderr.
int run_cli(int argc, const char* const* argv);

int run_cli(const std::vector<std::string>& args);

struct CompareRow {
  std::string policy;
  double avg_delay_ms = 0.0;
  double max_user_avg_delay_ms = 0.0;
  double ff_pct = 0.0;
  double uf_pct = 0.0;
  double of_pct = 0.0;
};

std::string compare_csv(const std::vector<CompareRow>& rows);
std::string compare_text(const std::vector<CompareRow>& rows);

}  // namespace fairsched::cli
