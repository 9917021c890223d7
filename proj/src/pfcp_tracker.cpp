#include "slicelat/pfcp_tracker.hpp"

#include <string>

#include "slicelat/error.hpp"
#include "slicelat/wire.hpp"

namespace slicelat {

std::string_view to_string(PfcpClass c) noexcept {
    switch (c) {
        case PfcpClass::Establishment: return "Establishment";
        case PfcpClass::Modification: return "Modification";
        case PfcpClass::Deletion: return "Deletion";
        case PfcpClass::Other: return "Other";
    }
    return "Other";
}

std::optional<PfcpClass> pfcp_class_from_string(std::string_view text) noexcept {
    for (auto c : {PfcpClass::Establishment, PfcpClass::Modification, PfcpClass::Deletion,
                   PfcpClass::Other}) {
        if (to_string(c) == text) {
            return c;
        }
    }
    return std::nullopt;
}

PfcpClass classify_pfcp_request(std::uint8_t message_type) noexcept {
    switch (message_type) {
        case kPfcpEstablishmentRequest: return PfcpClass::Establishment;
        case kPfcpModificationRequest: return PfcpClass::Modification;
        case kPfcpDeletionRequest: return PfcpClass::Deletion;
        default: return PfcpClass::Other;
    }
}

std::optional<PfcpTransaction> PfcpTracker::on_pfcp_event(const ProbeEvent& event) {
    if (!is_pfcp_point(event.point) || !event.pfcp) {
        throw Error(ErrorCode::WrongEventKind,
                    std::string(to_string(event.point)) + " event routed to the PFCP tracker");
    }
    const PfcpRef ref = *event.pfcp;

    if (event.point == ProbePoint::PfcpSend) {
        if (auto it = pending_.find(ref.sequence); it != pending_.end()) {
            it->second.retransmitted = true;
            ++acct_.retransmissions;
            return std::nullopt;
        }
        if (last_send_seq_ && *last_send_seq_ > ref.sequence &&
            *last_send_seq_ - ref.sequence > kPfcpSequenceLimit / 2) {
            acct_.lost += pending_.size();
            pending_.clear();
        }
        last_send_seq_ = ref.sequence;
        pending_.emplace(ref.sequence, Pending{ref.message_type, event.timestamp_ns, false});
        ++acct_.sends;
        return std::nullopt;
    }

    ++acct_.recvs;
    auto it = pending_.find(ref.sequence);
    if (it == pending_.end()) {
        ++acct_.orphans;
        return std::nullopt;
    }
    const auto expected = pfcp_response_for(it->second.request_type);
    if (!expected || *expected != ref.message_type || event.timestamp_ns < it->second.t_send) {
        // A peer-initiated request can reuse the number; the pending request stays.
        ++acct_.orphans;
        return std::nullopt;
    }
    PfcpTransaction txn;
    txn.sequence = ref.sequence;
    txn.request_type = it->second.request_type;
    txn.msg_class = classify_pfcp_request(it->second.request_type);
    txn.t_send = it->second.t_send;
    txn.t_recv = event.timestamp_ns;
    txn.rtt = txn.t_recv - txn.t_send;
    txn.retransmitted = it->second.retransmitted;
    pending_.erase(it);
    ++acct_.transactions;
    return txn;
}

std::uint64_t PfcpTracker::timeout_sweep(std::uint64_t now, std::chrono::nanoseconds timeout) {
    const auto limit = static_cast<std::uint64_t>(timeout.count());
    std::uint64_t expired = 0;
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (now > it->second.t_send && now - it->second.t_send > limit) {
            it = pending_.erase(it);
            ++expired;
        } else {
            ++it;
        }
    }
    acct_.lost += expired;
    return expired;
}

PfcpAccounting PfcpTracker::accounting() const noexcept {
    PfcpAccounting a = acct_;
    a.pending = pending_.size();
    return a;
}

}  // namespace slicelat
