#include "slicelat/probe_event.hpp"

#include <array>
#include <charconv>
#include <utility>

#include "slicelat/error.hpp"

namespace slicelat {

namespace {

// Splits off the next single-space-delimited token. Returns false on an empty
// token (double space, leading/trailing space).
bool next_token(std::string_view& rest, std::string_view& token) {
    if (rest.empty()) {
        return false;
    }
    const auto sp = rest.find(' ');
    token = rest.substr(0, sp);
    rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    if (sp != std::string_view::npos && rest.empty()) {
        return false;
    }
    return !token.empty();
}

bool take_field(std::string_view& rest, std::string_view name, std::string_view& value) {
    std::string_view token;
    if (!next_token(rest, token)) {
        return false;
    }
    if (token.size() <= name.size() || token.substr(0, name.size()) != name ||
        token[name.size()] != '=') {
        return false;
    }
    value = token.substr(name.size() + 1);
    return true;
}

template <typename T>
bool parse_hex_fixed(std::string_view text, std::size_t width, T& out) {
    if (text.size() != width) {
        return false;
    }
    for (char c : text) {
        const bool lower_hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!lower_hex) {
            return false;
        }
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, 16);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

// Canonical decimal: digits only, no leading zeros except "0" itself.
template <typename T>
bool parse_decimal(std::string_view text, T& out) {
    if (text.empty() || (text.size() > 1 && text[0] == '0')) {
        return false;
    }
    for (char c : text) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, 10);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::optional<ProbeEvent> parse_body(std::string_view body, const char*& why) {
    std::string_view rest = body;
    std::string_view kind;
    if (!next_token(rest, kind)) {
        why = "missing event kind";
        return std::nullopt;
    }
    ProbeEvent ev;
    std::string_view value;
    if (kind == "M1" || kind == "M3") {
        ev.point = kind == "M1" ? ProbePoint::M1 : ProbePoint::M3;
        if (!take_field(rest, "ns", value) || !valid_namespace_id(value)) {
            why = "bad ns field";
            return std::nullopt;
        }
        ev.ns = std::string(value);
        std::uint64_t digest = 0;
        if (!take_field(rest, "key", value) || !parse_hex_fixed(value, 16, digest)) {
            why = "bad key field";
            return std::nullopt;
        }
        ev.flow_key = FlowKey{digest};
        if (ev.point == ProbePoint::M1) {
            std::uint32_t teid = 0;
            if (!take_field(rest, "teid", value) || !parse_hex_fixed(value, 8, teid)) {
                why = "bad teid field";
                return std::nullopt;
            }
            ev.teid = teid;
        }
    } else if (kind == "P4") {
        ev.ns = std::string(kPfcpNamespace);
        if (!take_field(rest, "dir", value) || (value != "S" && value != "R")) {
            why = "bad dir field";
            return std::nullopt;
        }
        ev.point = value == "S" ? ProbePoint::PfcpSend : ProbePoint::PfcpRecv;
        PfcpRef ref;
        if (!take_field(rest, "seq", value) || !parse_decimal(value, ref.sequence) ||
            ref.sequence >= kPfcpSequenceLimit) {
            why = "bad seq field";
            return std::nullopt;
        }
        if (!take_field(rest, "mt", value) || !parse_decimal(value, ref.message_type)) {
            why = "bad mt field";
            return std::nullopt;
        }
        ev.pfcp = ref;
    } else {
        why = "unknown event kind";
        return std::nullopt;
    }
    if (!take_field(rest, "ts", value) || !parse_decimal(value, ev.timestamp_ns) ||
        ev.timestamp_ns == 0) {
        why = "bad ts field";
        return std::nullopt;
    }
    if (!rest.empty()) {
        why = "trailing fields";
        return std::nullopt;
    }
    return ev;
}

std::optional<ProbeEvent> parse_line(std::string_view line, const char*& why) {
    if (!line.empty() && line.back() == '\n') {
        line.remove_suffix(1);
    }
    if (const auto marker = line.find(kTraceMarker); marker != std::string_view::npos) {
        line.remove_prefix(marker + kTraceMarker.size());
        while (!line.empty() && line.front() == ' ') {
            line.remove_prefix(1);
        }
    }
    return parse_body(line, why);
}

void append_hex(std::string& out, std::uint64_t value, int width) {
    static constexpr char kDigits[] = "0123456789abcdef";
    for (int shift = (width - 1) * 4; shift >= 0; shift -= 4) {
        out.push_back(kDigits[(value >> shift) & 0xF]);
    }
}

void append_decimal(std::string& out, std::uint64_t value) {
    std::array<char, 24> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.append(buf.data(), ptr);
}

}  // namespace

std::string_view to_string(ProbePoint point) noexcept {
    switch (point) {
        case ProbePoint::M1: return "M1";
        case ProbePoint::M3: return "M3";
        case ProbePoint::PfcpSend: return "PFCP_SEND";
        case ProbePoint::PfcpRecv: return "PFCP_RECV";
    }
    return "?";
}

ProbeEvent ProbeEvent::m1(std::string ns, FlowKey key, std::uint32_t teid, std::uint64_t ts) {
    ProbeEvent ev;
    ev.point = ProbePoint::M1;
    ev.ns = std::move(ns);
    ev.timestamp_ns = ts;
    ev.teid = teid;
    ev.flow_key = key;
    return ev;
}

ProbeEvent ProbeEvent::m3(std::string ns, FlowKey key, std::uint64_t ts) {
    ProbeEvent ev;
    ev.point = ProbePoint::M3;
    ev.ns = std::move(ns);
    ev.timestamp_ns = ts;
    ev.flow_key = key;
    return ev;
}

ProbeEvent ProbeEvent::pfcp_send(std::uint32_t seq, std::uint8_t message_type, std::uint64_t ts) {
    ProbeEvent ev;
    ev.point = ProbePoint::PfcpSend;
    ev.ns = std::string(kPfcpNamespace);
    ev.timestamp_ns = ts;
    ev.pfcp = PfcpRef{seq, message_type};
    return ev;
}

ProbeEvent ProbeEvent::pfcp_recv(std::uint32_t seq, std::uint8_t message_type, std::uint64_t ts) {
    ProbeEvent ev = pfcp_send(seq, message_type, ts);
    ev.point = ProbePoint::PfcpRecv;
    return ev;
}

bool ProbeEvent::valid() const noexcept {
    if (timestamp_ns == 0) {
        return false;
    }
    switch (point) {
        case ProbePoint::M1:
            return valid_namespace_id(ns) && teid && flow_key && !pfcp;
        case ProbePoint::M3:
            return valid_namespace_id(ns) && !teid && flow_key && !pfcp;
        case ProbePoint::PfcpSend:
        case ProbePoint::PfcpRecv:
            return ns == kPfcpNamespace && !teid && !flow_key && pfcp &&
                   pfcp->sequence < kPfcpSequenceLimit;
    }
    return false;
}

bool valid_namespace_id(std::string_view ns) noexcept {
    if (ns.empty() || ns.size() > 31) {
        return false;
    }
    for (char c : ns) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '_' || c == '.' || c == '-';
        if (!ok) {
            return false;
        }
    }
    return true;
}

ProbeEvent parse_trace_line(std::string_view line) {
    const char* why = "";
    auto ev = parse_line(line, why);
    if (!ev) {
        throw Error(ErrorCode::MalformedLine, why);
    }
    return std::move(*ev);
}

std::optional<ProbeEvent> try_parse_trace_line(std::string_view line) noexcept {
    const char* why = "";
    try {
        return parse_line(line, why);
    } catch (...) {
        // std::string allocation failure
        return std::nullopt;
    }
}

std::string emit_trace_line(const ProbeEvent& event) {
    if (!event.valid()) {
        throw Error(ErrorCode::InvalidEvent,
                    "cannot emit invalid " + std::string(to_string(event.point)) + " event");
    }
    std::string out;
    out.reserve(64);
    switch (event.point) {
        case ProbePoint::M1:
        case ProbePoint::M3:
            out += event.point == ProbePoint::M1 ? "M1 ns=" : "M3 ns=";
            out += event.ns;
            out += " key=";
            append_hex(out, event.flow_key->digest, 16);
            if (event.point == ProbePoint::M1) {
                out += " teid=";
                append_hex(out, *event.teid, 8);
            }
            break;
        case ProbePoint::PfcpSend:
        case ProbePoint::PfcpRecv:
            out += event.point == ProbePoint::PfcpSend ? "P4 dir=S seq=" : "P4 dir=R seq=";
            append_decimal(out, event.pfcp->sequence);
            out += " mt=";
            append_decimal(out, event.pfcp->message_type);
            break;
    }
    out += " ts=";
    append_decimal(out, event.timestamp_ns);
    return out;
}

}  // namespace slicelat
