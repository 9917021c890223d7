#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>

namespace slicelat {

using ByteView = std::span<const std::uint8_t>;

inline constexpr std::uint16_t kGtpuPort = 2152;
inline constexpr std::uint16_t kPfcpPort = 8805;
inline constexpr std::uint8_t kGtpuGpdu = 0xFF;

struct GtpuHeader {
    std::uint8_t version = 1;
    bool protocol_type = true;
    std::uint8_t message_type = kGtpuGpdu;
    std::uint16_t payload_length = 0;
    std::uint32_t teid = 0;
    // Offset of the inner packet from the start of the GTP-U header: 8 without
    // optional fields, 12 with the sequence/N-PDU/next-extension block, plus
    // the length of any chained extension headers.
    std::size_t header_length = 8;

    friend bool operator==(const GtpuHeader&, const GtpuHeader&) = default;
};

/// Parses the GTP-U header at the start of an N3 UDP payload.
///
/// Throws Error{TruncatedHeader} when the buffer cannot hold the header
/// (including any option block and extension chain), Error{UnsupportedVersion}
/// for anything other than GTPv1, and Error{NotGpdu} for echo, error-indication
/// and other signalling messages. The payload itself may be truncated by the
/// capture; only the header must be present.
GtpuHeader parse_gtpu(ByteView buffer);

inline constexpr std::uint8_t kProtoIcmp = 1;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

struct FiveTuple {
    std::uint32_t src_addr = 0;  // host byte order
    std::uint32_t dst_addr = 0;
    std::uint8_t protocol = 0;
    std::uint16_t src_port = 0;  // zero when the protocol carries no ports
    std::uint16_t dst_port = 0;

    friend bool operator==(const FiveTuple&, const FiveTuple&) = default;
};

[[nodiscard]] constexpr bool has_ports(std::uint8_t protocol) noexcept {
    return protocol == kProtoTcp || protocol == kProtoUdp;
}

/// 64-bit correlation digest shared by the N3 (post-decapsulation) and N6 views
/// of one packet.
struct FlowKey {
    std::uint64_t digest = 0;

    friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

/// Digest over (five-tuple, IPv4 Identification, IPv4 total length).
///
/// Three rounds of the splitmix64 finalizer, each absorbing one 64-bit word:
///   w0 = src_addr << 32 | dst_addr
///   w1 = src_port << 48 | dst_port << 32 | ip_id << 16 | total_length
///   w2 = protocol
///   h  = mix(mix(mix(0x9e3779b97f4a7c15 ^ w0) ^ w1) ^ w2)
/// The probe programs carry an identical copy; docs/flow_key.md is the
/// normative description.
[[nodiscard]] FlowKey flow_key_digest(const FiveTuple& tuple, std::uint16_t ip_id,
                                      std::uint16_t total_length) noexcept;

struct FlowIdentity {
    FiveTuple tuple;
    std::uint16_t ip_id = 0;
    std::uint16_t total_length = 0;
    FlowKey key;
};

/// Reads the IPv4 header (and L4 ports for TCP/UDP) at buffer[offset..].
/// Throws Error{TruncatedPacket} or Error{UnsupportedIpVersion}.
FlowIdentity extract_flow_key(ByteView buffer, std::size_t offset = 0);

inline constexpr std::uint8_t kPfcpEstablishmentRequest = 50;
inline constexpr std::uint8_t kPfcpEstablishmentResponse = 51;
inline constexpr std::uint8_t kPfcpModificationRequest = 52;
inline constexpr std::uint8_t kPfcpModificationResponse = 53;
inline constexpr std::uint8_t kPfcpDeletionRequest = 54;
inline constexpr std::uint8_t kPfcpDeletionResponse = 55;
inline constexpr std::uint32_t kPfcpSequenceLimit = 1u << 24;

struct PfcpHeader {
    std::uint8_t version = 1;
    std::uint8_t message_type = 0;
    std::uint16_t message_length = 0;
    bool seid_present = false;
    std::uint64_t seid = 0;
    std::uint32_t sequence = 0;  // 24 bits

    friend bool operator==(const PfcpHeader&, const PfcpHeader&) = default;
};

/// Throws Error{TruncatedHeader} or Error{UnknownVersion}.
PfcpHeader parse_pfcp(ByteView buffer);

/// Session-related messages (types 50..99) carry a SEID.
[[nodiscard]] constexpr bool pfcp_is_session_message(std::uint8_t message_type) noexcept {
    return message_type >= 50 && message_type < 100;
}

/// Response type answering a request type, or nullopt when `request` is not a
/// request message.
[[nodiscard]] std::optional<std::uint8_t> pfcp_response_for(std::uint8_t request) noexcept;

}  // namespace slicelat

template <>
struct std::hash<slicelat::FlowKey> {
    std::size_t operator()(const slicelat::FlowKey& key) const noexcept {
        return static_cast<std::size_t>(key.digest);
    }
};
