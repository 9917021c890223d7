#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "slicelat/delay_stats.hpp"
#include "slicelat/pfcp_tracker.hpp"

namespace slicelat {

/// Orchestration budget drawn as the reference line on PFCP CDFs.
inline constexpr std::uint64_t kOrchestrationBudgetNs = 2'000'000;

/// Orders slice and load labels the way the tables list them: the three
/// standard slices / loads first, then anything else alphabetically.
struct LabelOrder {
    bool operator()(const std::pair<std::string, std::string>& a,
                    const std::pair<std::string, std::string>& b) const;
};

/// Forwarding-delay statistics keyed by (slice, load).
using ForwardingStats = std::map<std::pair<std::string, std::string>, DelayStats, LabelOrder>;
/// PFCP RTT statistics keyed by (message class, load).
using PfcpStats = std::map<std::pair<std::string, std::string>, DelayStats, LabelOrder>;

/// Nanoseconds to whole microseconds, rounding half away from zero.
[[nodiscard]] std::uint64_t to_whole_us(std::uint64_t ns) noexcept;

/// Markdown table with columns Slice, Load, N, P50 (µs), P99 (µs). The
/// standard 3 x 3 slice/load grid is always present; combinations without
/// samples print "no data".
std::string render_forwarding_table(const ForwardingStats& stats);

/// One Markdown table per message class with columns Load, N, Mean (µs),
/// P99 (µs). The Modification table is always present.
std::string render_pfcp_tables(const PfcpStats& stats);

}  // namespace slicelat
