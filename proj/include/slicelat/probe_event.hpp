#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "slicelat/wire.hpp"

namespace slicelat {

enum class ProbePoint : std::uint8_t { M1, M3, PfcpSend, PfcpRecv };

std::string_view to_string(ProbePoint point) noexcept;

[[nodiscard]] constexpr bool is_forwarding_point(ProbePoint p) noexcept {
    return p == ProbePoint::M1 || p == ProbePoint::M3;
}

[[nodiscard]] constexpr bool is_pfcp_point(ProbePoint p) noexcept {
    return p == ProbePoint::PfcpSend || p == ProbePoint::PfcpRecv;
}

/// Namespace that owns the N4 socket; P4 lines carry no ns field.
inline constexpr std::string_view kPfcpNamespace = "smf";

struct PfcpRef {
    std::uint32_t sequence = 0;
    std::uint8_t message_type = 0;

    friend bool operator==(const PfcpRef&, const PfcpRef&) = default;
};

/// One timestamped observation from a probe.
///
/// M1 carries teid and flow_key, M3 carries flow_key only, the PFCP points
/// carry pfcp only and always belong to the "smf" namespace. Timestamps are
/// nanoseconds on the kernel monotonic clock and strictly positive.
struct ProbeEvent {
    ProbePoint point = ProbePoint::M1;
    std::string ns;
    std::uint64_t timestamp_ns = 0;
    std::optional<std::uint32_t> teid;
    std::optional<FlowKey> flow_key;
    std::optional<PfcpRef> pfcp;

    static ProbeEvent m1(std::string ns, FlowKey key, std::uint32_t teid, std::uint64_t ts);
    static ProbeEvent m3(std::string ns, FlowKey key, std::uint64_t ts);
    static ProbeEvent pfcp_send(std::uint32_t seq, std::uint8_t message_type, std::uint64_t ts);
    static ProbeEvent pfcp_recv(std::uint32_t seq, std::uint8_t message_type, std::uint64_t ts);

    [[nodiscard]] bool valid() const noexcept;

    friend bool operator==(const ProbeEvent&, const ProbeEvent&) = default;
};

/// Namespace identifiers are 1..31 characters of [A-Za-z0-9_.-].
[[nodiscard]] bool valid_namespace_id(std::string_view ns) noexcept;

/// Marker preceding the canonical body in raw kernel trace output.
inline constexpr std::string_view kTraceMarker = "TCBPF:";

/// Parses a canonical trace line, or a raw kernel trace line whose canonical
/// body follows the `TCBPF:` marker. A single trailing LF is accepted.
/// Throws Error{MalformedLine}.
ProbeEvent parse_trace_line(std::string_view line);

/// Non-throwing variant for the ingestion hot path.
std::optional<ProbeEvent> try_parse_trace_line(std::string_view line) noexcept;

/// Canonical form without the trailing LF. Throws Error{InvalidEvent}.
std::string emit_trace_line(const ProbeEvent& event);

}  // namespace slicelat
