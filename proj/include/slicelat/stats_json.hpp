#pragma once

#include "json.hpp"
#include "slicelat/delay_stats.hpp"
#include "slicelat/report.hpp"

namespace slicelat {

/// Sparse snapshot: layout, totals, headline quantiles and non-empty bins as
/// [index, count] pairs.
nlohmann::json stats_to_json(const DelayStats& stats);

/// Throws Error{SchemaError}.
DelayStats stats_from_json(const nlohmann::json& doc);

nlohmann::json datasets_to_json(const ForwardingStats& forwarding, const PfcpStats& pfcp);

}  // namespace slicelat
