#include "slicelat/pipeline.hpp"

#include <cstdio>
#include <ostream>

#include "slicelat/dataset.hpp"

namespace slicelat {

ReplayPipeline::ReplayPipeline(const ExperimentConfig& config, std::string load_label,
                               std::ostream* pairs_csv, std::ostream* pfcp_csv)
    : config_(config),
      load_(std::move(load_label)),
      pairs_csv_(pairs_csv),
      pfcp_csv_(pfcp_csv),
      matcher_(config.matcher) {}

void ReplayPipeline::feed_line(std::string_view line) {
    ++lines_;
    if (!line.empty() && line.back() == '\n') {
        line.remove_suffix(1);
    }
    if (line.empty()) {
        return;
    }
    auto event = try_parse_trace_line(line);
    if (!event) {
        matcher_.count_malformed();
        return;
    }
    feed_event(*event);
}

void ReplayPipeline::feed_event(const ProbeEvent& event) {
    if (is_forwarding_point(event.point)) {
        auto pair = matcher_.on_event(event);
        if (!pair) {
            return;
        }
        const std::string slice = config_.slice_for(pair->ns);
        if (pairs_csv_) {
            *pairs_csv_ << format_pair_row(slice, load_, *pair) << '\n';
        }
        auto [it, inserted] = forwarding_.try_emplace({slice, load_});
        it->second.observe(pair->delay);
        if (on_pair) {
            on_pair(*pair);
        }
        return;
    }

    last_pfcp_ts_ = std::max(last_pfcp_ts_, event.timestamp_ns);
    tracker_.timeout_sweep(last_pfcp_ts_, config_.pfcp_timeout);
    auto txn = tracker_.on_pfcp_event(event);
    if (!txn) {
        return;
    }
    if (pfcp_csv_) {
        *pfcp_csv_ << format_pfcp_row(load_, *txn) << '\n';
    }
    if (feeds_statistics(*txn, config_.include_retransmitted)) {
        auto [it, inserted] = pfcp_.try_emplace({std::string(to_string(txn->msg_class)), load_});
        it->second.observe(txn->rtt);
    }
}

void ReplayPipeline::finish() {
    matcher_.drain();
    tracker_.timeout_sweep(last_pfcp_ts_, config_.pfcp_timeout);
}

void write_summary(std::ostream& out, const MatchAccounting& fwd, const PfcpAccounting& pfcp) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.6f", fwd.match_rate());
    out << "m1_total=" << fwd.m1_total << '\n'
        << "m3_total=" << fwd.m3_total << '\n'
        << "matched=" << fwd.matched << '\n'
        << "m1_evicted=" << fwd.m1_evicted << '\n'
        << "m1_expired=" << fwd.m1_expired << '\n'
        << "m3_orphaned=" << fwd.m3_orphaned << '\n'
        << "pending_m1=" << fwd.pending_m1 << '\n'
        << "pending_m3=" << fwd.pending_m3 << '\n'
        << "malformed=" << fwd.malformed << '\n'
        << "match_rate=" << rate << '\n'
        << "conservation=" << (fwd.conserved() ? "ok" : "VIOLATED") << '\n'
        << "pfcp_sends=" << pfcp.sends << '\n'
        << "pfcp_retransmissions=" << pfcp.retransmissions << '\n'
        << "pfcp_recvs=" << pfcp.recvs << '\n'
        << "pfcp_transactions=" << pfcp.transactions << '\n'
        << "pfcp_orphans=" << pfcp.orphans << '\n'
        << "pfcp_lost=" << pfcp.lost << '\n'
        << "pfcp_pending=" << pfcp.pending << '\n'
        << "pfcp_conservation=" << (pfcp.conserved() ? "ok" : "VIOLATED") << '\n';
}

}  // namespace slicelat
