#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "slicelat/config.hpp"
#include "slicelat/matcher.hpp"
#include "slicelat/pfcp_tracker.hpp"
#include "slicelat/report.hpp"

namespace slicelat {

/// Trace ingestion: parses lines, routes M1/M3 to the matcher and P4 to the
/// PFCP tracker, streams dataset rows, and accumulates per-slice statistics.
/// Memory is bounded by the matcher buffers and the histograms, not by the
/// length of the input.
class ReplayPipeline {
public:
    /// `pairs_csv` and `pfcp_csv` receive data rows only (no header); either
    /// may be null.
    ReplayPipeline(const ExperimentConfig& config, std::string load_label, std::ostream* pairs_csv,
                   std::ostream* pfcp_csv);

    /// Malformed lines are counted, never fatal. Blank lines are ignored.
    void feed_line(std::string_view line);
    void feed_event(const ProbeEvent& event);

    /// Drains the matcher and sweeps timed-out PFCP requests.
    void finish();

    std::function<void(const MatchedPair&)> on_pair;

    [[nodiscard]] MatchAccounting accounting() const { return matcher_.accounting(); }
    [[nodiscard]] PfcpAccounting pfcp_accounting() const noexcept { return tracker_.accounting(); }
    [[nodiscard]] const ForwardingStats& forwarding_stats() const noexcept { return forwarding_; }
    [[nodiscard]] const PfcpStats& pfcp_stats() const noexcept { return pfcp_; }
    [[nodiscard]] std::uint64_t lines_seen() const noexcept { return lines_; }

private:
    const ExperimentConfig& config_;
    std::string load_;
    std::ostream* pairs_csv_;
    std::ostream* pfcp_csv_;
    Matcher matcher_;
    PfcpTracker tracker_;
    ForwardingStats forwarding_;
    PfcpStats pfcp_;
    std::uint64_t lines_ = 0;
    std::uint64_t last_pfcp_ts_ = 0;
};

/// `key=value` accounting summary, one counter per line.
void write_summary(std::ostream& out, const MatchAccounting& fwd, const PfcpAccounting& pfcp);

}  // namespace slicelat
