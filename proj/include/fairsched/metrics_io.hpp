#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "fairsched/config.hpp"
#include "fairsched/sim.hpp"

namespace fairsched {

inline constexpr int kSummarySchemaVersion = 1;

// Column layout is documented in docs/formats.md.
void write_metrics_csv(const MetricsLog& log, std::ostream& out);
void write_metrics_csv(const MetricsLog& log, const std::string& path);
void write_norm_delays_csv(const MetricsLog& log, const std::string& path);

nlohmann::json summary_json(const RunSummary& summary, const SimConfig& config);
void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

}  // namespace fairsched
