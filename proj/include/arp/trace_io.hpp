#pragma once

#include "arp/driver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace arp {

/// Version of the JSON-lines trace and CSV summary layouts.
inline constexpr int kTraceSchemaVersion = 1;

nlohmann::json config_to_json(const SolverConfig& config);
SolverConfig config_from_json(const nlohmann::json& j);

nlohmann::json row_to_json(const TraceRow& row, bool include_timing = false);
TraceRow row_from_json(const nlohmann::json& j);

/// Header record, one "iter" record per row, then a "summary" record.
/// Wall-clock times are omitted unless requested so equal runs give equal bytes.
void write_jsonl(const RunTrace& trace, std::ostream& out, bool include_timing = false);

struct LoadedTrace {
  nlohmann::json header;
  std::vector<TraceRow> rows;
  nlohmann::json summary;  // null when the writer did not finish
};

/// Throws Error on malformed input or an unsupported schema version.
LoadedTrace read_jsonl(std::istream& in);

std::vector<std::string> summary_csv_columns();
void write_summary_csv_header(std::ostream& out);
void write_summary_csv_row(const RunTrace& trace, std::ostream& out);

}  // namespace arp
