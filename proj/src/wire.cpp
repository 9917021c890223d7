#include "slicelat/wire.hpp"

#include <string>

#include "slicelat/error.hpp"

namespace slicelat {

namespace {

constexpr std::uint16_t load_be16(const std::uint8_t* p) noexcept {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

constexpr std::uint32_t load_be24(const std::uint8_t* p) noexcept {
    return (static_cast<std::uint32_t>(p[0]) << 16) | (static_cast<std::uint32_t>(p[1]) << 8) |
           static_cast<std::uint32_t>(p[2]);
}

constexpr std::uint32_t load_be32(const std::uint8_t* p) noexcept {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

constexpr std::uint64_t load_be64(const std::uint8_t* p) noexcept {
    return (static_cast<std::uint64_t>(load_be32(p)) << 32) | load_be32(p + 4);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint8_t kGtpuFlagExtension = 0x04;
constexpr std::uint8_t kGtpuFlagSequence = 0x02;
constexpr std::uint8_t kGtpuFlagNpdu = 0x01;
// Bounded like the in-kernel walk; real N3 traffic carries one PDU Session
// Container.
constexpr int kMaxGtpuExtensions = 4;

}  // namespace

GtpuHeader parse_gtpu(ByteView buffer) {
    if (buffer.size() < 8) {
        throw Error(ErrorCode::TruncatedHeader,
                    "GTP-U header needs 8 bytes, have " + std::to_string(buffer.size()));
    }
    const std::uint8_t* p = buffer.data();
    GtpuHeader hdr;
    hdr.version = static_cast<std::uint8_t>(p[0] >> 5);
    if (hdr.version != 1) {
        throw Error(ErrorCode::UnsupportedVersion,
                    "GTP-U version " + std::to_string(hdr.version));
    }
    hdr.protocol_type = (p[0] & 0x10) != 0;
    hdr.message_type = p[1];
    hdr.payload_length = load_be16(p + 2);
    hdr.teid = load_be32(p + 4);
    if (hdr.message_type != kGtpuGpdu) {
        throw Error(ErrorCode::NotGpdu, "GTP-U message type " + std::to_string(hdr.message_type));
    }

    const std::uint8_t flags = p[0];
    if ((flags & (kGtpuFlagExtension | kGtpuFlagSequence | kGtpuFlagNpdu)) == 0) {
        hdr.header_length = 8;
        return hdr;
    }
    if (buffer.size() < 12) {
        throw Error(ErrorCode::TruncatedHeader, "GTP-U option block truncated");
    }
    std::size_t offset = 12;
    if (flags & kGtpuFlagExtension) {
        std::uint8_t next_type = p[11];
        for (int hop = 0; next_type != 0; ++hop) {
            if (hop == kMaxGtpuExtensions) {
                throw Error(ErrorCode::TruncatedHeader, "GTP-U extension chain too long");
            }
            if (offset >= buffer.size()) {
                throw Error(ErrorCode::TruncatedHeader, "GTP-U extension header truncated");
            }
            const std::size_t ext_len = static_cast<std::size_t>(p[offset]) * 4;
            if (ext_len == 0 || offset + ext_len > buffer.size()) {
                throw Error(ErrorCode::TruncatedHeader, "GTP-U extension header truncated");
            }
            next_type = p[offset + ext_len - 1];
            offset += ext_len;
        }
    }
    hdr.header_length = offset;
    return hdr;
}

FlowKey flow_key_digest(const FiveTuple& tuple, std::uint16_t ip_id,
                        std::uint16_t total_length) noexcept {
    const std::uint64_t w0 = (static_cast<std::uint64_t>(tuple.src_addr) << 32) | tuple.dst_addr;
    const std::uint64_t w1 = (static_cast<std::uint64_t>(tuple.src_port) << 48) |
                             (static_cast<std::uint64_t>(tuple.dst_port) << 32) |
                             (static_cast<std::uint64_t>(ip_id) << 16) | total_length;
    const std::uint64_t w2 = tuple.protocol;
    std::uint64_t h = mix64(0x9e3779b97f4a7c15ULL ^ w0);
    h = mix64(h ^ w1);
    h = mix64(h ^ w2);
    return FlowKey{h};
}

FlowIdentity extract_flow_key(ByteView buffer, std::size_t offset) {
    if (offset >= buffer.size() || buffer.size() - offset < 20) {
        // A lone version nibble is still enough to classify IPv6.
        if (offset < buffer.size() && (buffer[offset] >> 4) != 4) {
            throw Error(ErrorCode::UnsupportedIpVersion,
                        "IP version " + std::to_string(buffer[offset] >> 4));
        }
        throw Error(ErrorCode::TruncatedPacket, "IPv4 header truncated");
    }
    const std::uint8_t* ip = buffer.data() + offset;
    const std::size_t avail = buffer.size() - offset;
    const unsigned version = ip[0] >> 4;
    if (version != 4) {
        throw Error(ErrorCode::UnsupportedIpVersion, "IP version " + std::to_string(version));
    }
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
    if (ihl < 20 || ihl > avail) {
        throw Error(ErrorCode::TruncatedPacket, "IPv4 header length " + std::to_string(ihl));
    }

    FlowIdentity id;
    id.total_length = load_be16(ip + 2);
    id.ip_id = load_be16(ip + 4);
    id.tuple.protocol = ip[9];
    id.tuple.src_addr = load_be32(ip + 12);
    id.tuple.dst_addr = load_be32(ip + 16);
    if (has_ports(id.tuple.protocol)) {
        if (avail < ihl + 4) {
            throw Error(ErrorCode::TruncatedPacket, "L4 ports truncated");
        }
        id.tuple.src_port = load_be16(ip + ihl);
        id.tuple.dst_port = load_be16(ip + ihl + 2);
    }
    id.key = flow_key_digest(id.tuple, id.ip_id, id.total_length);
    return id;
}

PfcpHeader parse_pfcp(ByteView buffer) {
    if (buffer.empty()) {
        throw Error(ErrorCode::TruncatedHeader, "empty PFCP datagram");
    }
    const std::uint8_t* p = buffer.data();
    PfcpHeader hdr;
    hdr.version = static_cast<std::uint8_t>(p[0] >> 5);
    if (hdr.version != 1) {
        throw Error(ErrorCode::UnknownVersion, "PFCP version " + std::to_string(hdr.version));
    }
    hdr.seid_present = (p[0] & 0x01) != 0;
    const std::size_t needed = hdr.seid_present ? 16 : 8;
    if (buffer.size() < needed) {
        throw Error(ErrorCode::TruncatedHeader, "PFCP header needs " + std::to_string(needed) +
                                                    " bytes, have " + std::to_string(buffer.size()));
    }
    hdr.message_type = p[1];
    hdr.message_length = load_be16(p + 2);
    std::size_t seq_at = 4;
    if (hdr.seid_present) {
        hdr.seid = load_be64(p + 4);
        seq_at = 12;
    }
    hdr.sequence = load_be24(p + seq_at);
    return hdr;
}

std::optional<std::uint8_t> pfcp_response_for(std::uint8_t request) noexcept {
    switch (request) {
        case 1: case 3: case 5: case 7: case 9:
            return static_cast<std::uint8_t>(request + 1);
        case 12: case 14: case 16:
            return static_cast<std::uint8_t>(request + 1);
        case 50: case 52: case 54: case 56:
            return static_cast<std::uint8_t>(request + 1);
        default:
            return std::nullopt;
    }
}

}  // namespace slicelat
