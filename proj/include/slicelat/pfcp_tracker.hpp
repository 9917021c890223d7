#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "slicelat/probe_event.hpp"

namespace slicelat {

enum class PfcpClass : std::uint8_t { Establishment, Modification, Deletion, Other };

std::string_view to_string(PfcpClass c) noexcept;
std::optional<PfcpClass> pfcp_class_from_string(std::string_view text) noexcept;

/// Class of a request message type; responses and node messages map to Other.
[[nodiscard]] PfcpClass classify_pfcp_request(std::uint8_t message_type) noexcept;

struct PfcpTransaction {
    std::uint32_t sequence = 0;
    PfcpClass msg_class = PfcpClass::Other;
    std::uint8_t request_type = 0;
    std::uint64_t t_send = 0;
    std::uint64_t t_recv = 0;
    std::uint64_t rtt = 0;
    bool retransmitted = false;

    friend bool operator==(const PfcpTransaction&, const PfcpTransaction&) = default;
};

/// Whether a transaction belongs in RTT statistics. Retransmitted transactions
/// are ambiguous about which copy was answered and are left out unless asked.
[[nodiscard]] constexpr bool feeds_statistics(const PfcpTransaction& t,
                                              bool include_retransmitted = false) noexcept {
    return include_retransmitted || !t.retransmitted;
}

struct PfcpAccounting {
    std::uint64_t sends = 0;            // distinct requests (first transmissions)
    std::uint64_t retransmissions = 0;  // repeated sends of a pending sequence
    std::uint64_t recvs = 0;
    std::uint64_t transactions = 0;
    std::uint64_t orphans = 0;
    std::uint64_t lost = 0;
    std::uint64_t pending = 0;

    /// sends == transactions + pending + lost; recvs == transactions + orphans.
    [[nodiscard]] bool conserved() const noexcept {
        return sends == transactions + pending + lost && recvs == transactions + orphans;
    }
    friend bool operator==(const PfcpAccounting&, const PfcpAccounting&) = default;
};

/// Pairs N4 request sends with response receives by 24-bit sequence number.
///
/// A send whose sequence is far below the previous one (more than half the
/// sequence space) is treated as a wrap: every pending request from before it
/// is counted lost.
class PfcpTracker {
public:
    /// Throws Error{WrongEventKind} for M1/M3 events.
    std::optional<PfcpTransaction> on_pfcp_event(const ProbeEvent& event);

    /// Removes pending requests with now - t_send > timeout; returns how many.
    std::uint64_t timeout_sweep(std::uint64_t now, std::chrono::nanoseconds timeout = std::chrono::seconds(1));

    [[nodiscard]] PfcpAccounting accounting() const noexcept;

private:
    struct Pending {
        std::uint8_t request_type = 0;
        std::uint64_t t_send = 0;
        bool retransmitted = false;
    };

    std::unordered_map<std::uint32_t, Pending> pending_;
    std::optional<std::uint32_t> last_send_seq_;
    PfcpAccounting acct_;
};

}  // namespace slicelat
