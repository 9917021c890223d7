#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles/reference_encoder.hpp"
#include "slicelat/error.hpp"
#include "slicelat/probe_event.hpp"
#include "slicelat/wire.hpp"

using namespace slicelat;

namespace {

template <typename Fn>
ErrorCode error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::IoError;
}

ByteView view(const refenc::Bytes& b) {
    return {b.data(), b.size()};
}

}  // namespace

TEST_CASE("parse_gtpu: minimal G-PDU header") {
    const refenc::Bytes raw{0x30, 0xFF, 0x00, 0x64, 0xAB, 0xCD, 0x12, 0x34};
    const auto h = parse_gtpu(view(raw));
    CHECK(h.version == 1);
    CHECK(h.protocol_type);
    CHECK(h.message_type == 0xFF);
    CHECK(h.payload_length == 0x0064);
    CHECK(h.teid == 0xABCD1234u);
    CHECK(h.header_length == 8);

    refenc::GtpuSpec spec;
    spec.teid = 0xABCD1234;
    spec.length_field = 0x0064;
    CHECK(refenc::gtpu_frame(spec, {}) == raw);
}

TEST_CASE("parse_gtpu: errors") {
    const refenc::Bytes four{0x30, 0xFF, 0x00, 0x64};
    CHECK(error_of([&] { (void)parse_gtpu(view(four)); }) == ErrorCode::TruncatedHeader);
    CHECK(error_of([&] { (void)parse_gtpu({}); }) == ErrorCode::TruncatedHeader);

    const refenc::Bytes v2{0x48, 0xFF, 0x00, 0x00, 0, 0, 0, 1};
    CHECK(error_of([&] { (void)parse_gtpu(view(v2)); }) == ErrorCode::UnsupportedVersion);

    refenc::GtpuSpec echo;
    echo.message_type = 1;
    echo.s_flag = true;
    CHECK(error_of([&] { (void)parse_gtpu(view(refenc::gtpu_frame(echo, {}))); }) == ErrorCode::NotGpdu);

    refenc::GtpuSpec err_ind;
    err_ind.message_type = 26;
    CHECK(error_of([&] { (void)parse_gtpu(view(refenc::gtpu_frame(err_ind, {}))); }) == ErrorCode::NotGpdu);

    // Option flag set but only 8 bytes captured.
    const refenc::Bytes short_opt{0x32, 0xFF, 0x00, 0x04, 0, 0, 0, 1};
    CHECK(error_of([&] { (void)parse_gtpu(view(short_opt)); }) == ErrorCode::TruncatedHeader);
}

TEST_CASE("parse_gtpu: option block and extension chain") {
    const auto inner = refenc::ipv4_packet({});
    for (int variant = 0; variant < 5; ++variant) {
        refenc::GtpuSpec spec;
        spec.teid = 0x100 + static_cast<std::uint32_t>(variant);
        switch (variant) {
            case 0: break;
            case 1: spec.s_flag = true; spec.sequence = 77; break;
            case 2: spec.pn_flag = true; break;
            case 3: spec.extensions.push_back({}); break;
            case 4:
                spec.extensions.push_back({0x85, {0x10, 0x01, 0x02, 0x03, 0x04, 0x05}});
                spec.extensions.push_back({0x40, {0xAA, 0xBB}});
                break;
        }
        const auto frame = refenc::gtpu_frame(spec, inner);
        const auto h = parse_gtpu(view(frame));
        CAPTURE(variant);
        CHECK(h.teid == spec.teid);
        CHECK(h.header_length == refenc::gtpu_payload_offset(spec));
        CHECK(h.payload_length == frame.size() - 8);
        // Payload truncation is allowed; only the header must be present.
        const refenc::Bytes header_only(frame.begin(), frame.begin() + static_cast<long>(h.header_length));
        CHECK(parse_gtpu(view(header_only)).header_length == h.header_length);
        if (variant >= 3) {
            const refenc::Bytes cut(frame.begin(), frame.begin() + static_cast<long>(h.header_length - 1));
            CHECK(error_of([&] { (void)parse_gtpu(view(cut)); }) == ErrorCode::TruncatedHeader);
        }
    }
}

TEST_CASE("parse_gtpu: zero-length extension is rejected") {
    refenc::Bytes frame{0x34, 0xFF, 0x00, 0x08, 0, 0, 0, 1, 0, 0, 0, 0x85, 0x00, 0, 0, 0};
    CHECK(error_of([&] { (void)parse_gtpu(view(frame)); }) == ErrorCode::TruncatedHeader);
}

TEST_CASE("flow key: matches the independently generated vectors") {
    std::ifstream in(SLICELAT_TEST_DATA "/flowkey_vectors.txt");
    REQUIRE(in);
    std::string line;
    int checked = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string src, dst, digest;
        unsigned proto, sport, dport, id, len;
        row >> src >> dst >> proto >> sport >> dport >> id >> len >> digest;
        FiveTuple t;
        t.src_addr = static_cast<std::uint32_t>(std::stoul(src, nullptr, 16));
        t.dst_addr = static_cast<std::uint32_t>(std::stoul(dst, nullptr, 16));
        t.protocol = static_cast<std::uint8_t>(proto);
        t.src_port = static_cast<std::uint16_t>(sport);
        t.dst_port = static_cast<std::uint16_t>(dport);
        const auto key = flow_key_digest(t, static_cast<std::uint16_t>(id), static_cast<std::uint16_t>(len));
        CAPTURE(line);
        CHECK(key.digest == std::stoull(digest, nullptr, 16));
        ++checked;
    }
    CHECK(checked > 200);
}

TEST_CASE("extract_flow_key: view independence and sensitivity") {
    refenc::Ipv4Spec spec;
    const auto packet = refenc::ipv4_packet(spec);
    refenc::GtpuSpec g;
    g.teid = 42;
    const auto frame = refenc::gtpu_frame(g, packet);

    const auto at_m3 = extract_flow_key(view(packet));
    const auto at_m1 = extract_flow_key(view(frame), 8);
    CHECK(at_m1.key == at_m3.key);
    CHECK(at_m3.tuple.src_addr == 0x0A2D0001u);
    CHECK(at_m3.tuple.dst_addr == 0x0A2E0002u);
    CHECK(at_m3.tuple.src_port == 5001);
    CHECK(at_m3.tuple.dst_port == 5201);
    CHECK(at_m3.ip_id == 7);
    CHECK(at_m3.total_length == 1400);
    CHECK(at_m3.key.digest == 0x1b1bb0b07bde2e90ULL);

    // With a PDU session container the inner packet moves; the key does not.
    g.extensions.push_back({});
    const auto ext_frame = refenc::gtpu_frame(g, packet);
    const auto h = parse_gtpu(view(ext_frame));
    CHECK(extract_flow_key(view(ext_frame), h.header_length).key == at_m3.key);

    spec.id = 8;
    CHECK(extract_flow_key(view(refenc::ipv4_packet(spec))).key != at_m3.key);

    // Captured prefix holding only IP + ports is enough.
    CHECK(extract_flow_key(view(refenc::ipv4_packet({}, 24))).key == at_m3.key);
}

TEST_CASE("extract_flow_key: ICMP, options and errors") {
    refenc::Ipv4Spec icmp;
    icmp.src = 0x0A2D0002;
    icmp.dst = 0x0A2E0001;
    icmp.id = 1;
    icmp.protocol = 1;
    icmp.total_length = 84;
    const auto id = extract_flow_key(view(refenc::ipv4_packet(icmp)));
    CHECK(id.tuple.protocol == 1);
    CHECK(id.tuple.src_port == 0);
    CHECK(id.tuple.dst_port == 0);
    CHECK(id.key.digest == 0x76b492e6233cc8e6ULL);

    refenc::Ipv4Spec opts;
    opts.protocol = 6;
    opts.ihl_words = 7;
    opts.total_length = 80;
    const auto tcp = extract_flow_key(view(refenc::ipv4_packet(opts)));
    CHECK(tcp.tuple.src_port == 5001);
    CHECK(tcp.tuple.protocol == 6);

    CHECK(error_of([&] { (void)extract_flow_key(view(refenc::ipv4_packet({}, 19))); }) ==
          ErrorCode::TruncatedPacket);
    CHECK(error_of([&] { (void)extract_flow_key(view(refenc::ipv4_packet({}, 23))); }) ==
          ErrorCode::TruncatedPacket);
    CHECK(error_of([&] { (void)extract_flow_key(view(refenc::ipv4_packet({}, 40)), 40); }) ==
          ErrorCode::TruncatedPacket);
    refenc::Ipv4Spec v6;
    v6.version = 6;
    CHECK(error_of([&] { (void)extract_flow_key(view(refenc::ipv4_packet(v6))); }) ==
          ErrorCode::UnsupportedIpVersion);
    refenc::Ipv4Spec bad_ihl;
    bad_ihl.ihl_words = 4;
    CHECK(error_of([&] { (void)extract_flow_key(view(refenc::ipv4_packet(bad_ihl))); }) ==
          ErrorCode::TruncatedPacket);
}

TEST_CASE("flow key: no collisions over 1e5 random tuples") {
    std::mt19937_64 rng(7);
    std::vector<std::uint64_t> digests;
    digests.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
        FiveTuple t{static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng()), kProtoUdp,
                    static_cast<std::uint16_t>(rng()), static_cast<std::uint16_t>(rng())};
        digests.push_back(flow_key_digest(t, static_cast<std::uint16_t>(rng()), 1400).digest);
    }
    std::sort(digests.begin(), digests.end());
    CHECK(std::adjacent_find(digests.begin(), digests.end()) == digests.end());
}

TEST_CASE("parse_pfcp: reference-encoded messages") {
    refenc::PfcpSpec req;
    req.sequence = 17;
    const auto h = parse_pfcp(view(refenc::pfcp_message(req)));
    CHECK(h.version == 1);
    CHECK(h.message_type == 52);
    CHECK(h.sequence == 17);
    CHECK(h.seid_present);
    CHECK(h.seid == 0x1122334455667788ULL);
    CHECK(h.message_length == 12);

    refenc::PfcpSpec rsp = req;
    rsp.message_type = 53;
    rsp.body_bytes = 9;
    const auto r = parse_pfcp(view(refenc::pfcp_message(rsp)));
    CHECK(r.message_type == 53);
    CHECK(r.sequence == 17);

    refenc::PfcpSpec node;
    node.message_type = 1;
    node.with_seid = false;
    node.sequence = 0xFFFFFF;
    const auto n = parse_pfcp(view(refenc::pfcp_message(node)));
    CHECK_FALSE(n.seid_present);
    CHECK(n.sequence == 0xFFFFFFu);
    CHECK(n.sequence < kPfcpSequenceLimit);

    CHECK(error_of([&] { (void)parse_pfcp({}); }) == ErrorCode::TruncatedHeader);
    auto cut = refenc::pfcp_message(req);
    cut.resize(15);
    CHECK(error_of([&] { (void)parse_pfcp(view(cut)); }) == ErrorCode::TruncatedHeader);
    refenc::PfcpSpec v2 = req;
    v2.version = 2;
    CHECK(error_of([&] { (void)parse_pfcp(view(refenc::pfcp_message(v2))); }) == ErrorCode::UnknownVersion);

    CHECK(pfcp_response_for(50) == std::optional<std::uint8_t>(51));
    CHECK(pfcp_response_for(52) == std::optional<std::uint8_t>(53));
    CHECK(pfcp_response_for(53) == std::nullopt);
    CHECK(pfcp_is_session_message(52));
    CHECK_FALSE(pfcp_is_session_message(5));
}

TEST_CASE("trace lines: grammar examples") {
    const auto m1 = parse_trace_line("M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=1000000");
    CHECK(m1.point == ProbePoint::M1);
    CHECK(m1.ns == "upf1");
    CHECK(m1.teid == 42u);
    CHECK(m1.flow_key->digest == 0xdeadbeefULL);
    CHECK(m1.timestamp_ns == 1000000);

    const auto m3 = parse_trace_line(
        "<idle>-0 [003] ..s. 4711.002: bpf_trace_printk: TCBPF: M3 ns=upf1 key=00000000deadbeef ts=1000500");
    CHECK(m3.point == ProbePoint::M3);
    CHECK(m3.timestamp_ns == 1000500);
    CHECK_FALSE(m3.teid);
    CHECK(m3 == ProbeEvent::m3("upf1", FlowKey{0xdeadbeef}, 1000500));

    const auto p4 = parse_trace_line("P4 dir=S seq=7 mt=52 ts=99\n");
    CHECK(p4 == ProbeEvent::pfcp_send(7, 52, 99));
    CHECK(p4.ns == kPfcpNamespace);
    CHECK(parse_trace_line("P4 dir=R seq=7 mt=53 ts=100") == ProbeEvent::pfcp_recv(7, 53, 100));

    CHECK(error_of([] { (void)parse_trace_line("garbage"); }) == ErrorCode::MalformedLine);
    CHECK_FALSE(try_parse_trace_line("garbage"));
}

TEST_CASE("trace lines: strictness") {
    const char* bad[] = {
        "",
        "M1 ns=upf1 key=00000000DEADBEEF teid=0000002a ts=1",
        "M1 ns=upf1 key=deadbeef teid=0000002a ts=1",
        "M1 ns=upf1 key=00000000deadbeef teid=2a ts=1",
        "M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=0",
        "M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=01",
        "M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=1 ",
        "M1 ns=upf1 key=00000000deadbeef teid=0000002a  ts=1",
        "M1 ns=upf1 key=00000000deadbeef ts=1",
        "M3 ns=upf1 key=00000000deadbeef teid=0000002a ts=1",
        "M3 ns= key=00000000deadbeef ts=1",
        "M3 ns=up f1 key=00000000deadbeef ts=1",
        "M3 ns=upf1 key=00000000deadbeef ts=18446744073709551616",
        "P4 dir=X seq=1 mt=52 ts=1",
        "P4 dir=S seq=16777216 mt=52 ts=1",
        "P4 dir=S seq=1 mt=256 ts=1",
        "P4 dir=S seq=-1 mt=52 ts=1",
        "M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=1\n\n",
        "M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=1\r",
        "TCBPF:",
        "prefix TCBPF: garbage",
    };
    for (const char* line : bad) {
        CAPTURE(line);
        CHECK_FALSE(try_parse_trace_line(line));
    }
    CHECK(try_parse_trace_line("M3 ns=upf1 key=00000000deadbeef ts=18446744073709551615"));
    CHECK(try_parse_trace_line("xTCBPF:M3 ns=a.b-c_9 key=00000000deadbeef ts=5"));
}

TEST_CASE("emit_trace_line: canonical form") {
    CHECK(emit_trace_line(ProbeEvent::m1("upf1", FlowKey{0xdeadbeef}, 42, 1000000)) ==
          "M1 ns=upf1 key=00000000deadbeef teid=0000002a ts=1000000");
    CHECK(emit_trace_line(ProbeEvent::m1("upf2", FlowKey{1}, 0xFFFFFFFF, 5)) ==
          "M1 ns=upf2 key=0000000000000001 teid=ffffffff ts=5");
    CHECK(emit_trace_line(ProbeEvent::m3("upf1", FlowKey{0xdeadbeef}, 1000500)) ==
          "M3 ns=upf1 key=00000000deadbeef ts=1000500");
    CHECK(emit_trace_line(ProbeEvent::pfcp_send(7, 52, 3)) == "P4 dir=S seq=7 mt=52 ts=3");
    CHECK(error_of([] { (void)emit_trace_line(ProbeEvent::pfcp_send(7, 52, 0)); }) == ErrorCode::InvalidEvent);
    CHECK(error_of([] { (void)emit_trace_line(ProbeEvent::m3("", FlowKey{1}, 1)); }) == ErrorCode::InvalidEvent);
    CHECK(error_of([] { (void)emit_trace_line(ProbeEvent::pfcp_recv(1u << 24, 53, 1)); }) ==
          ErrorCode::InvalidEvent);
}

TEST_CASE("trace lines: random round trip") {
    std::mt19937_64 rng(11);
    const std::string names[] = {"upf1", "upf2", "upf3", "edge-7", "a", std::string(31, 'n')};
    for (int i = 0; i < 20000; ++i) {
        ProbeEvent ev;
        const std::uint64_t ts = 1 + rng() % (i % 2 ? 1000 : ~0ULL);
        switch (rng() % 4) {
            case 0: ev = ProbeEvent::m1(names[rng() % 6], FlowKey{rng()}, static_cast<std::uint32_t>(rng()), ts); break;
            case 1: ev = ProbeEvent::m3(names[rng() % 6], FlowKey{rng()}, ts); break;
            case 2: ev = ProbeEvent::pfcp_send(static_cast<std::uint32_t>(rng() % (1u << 24)),
                                               static_cast<std::uint8_t>(rng()), ts); break;
            default: ev = ProbeEvent::pfcp_recv(static_cast<std::uint32_t>(rng() % (1u << 24)),
                                                static_cast<std::uint8_t>(rng()), ts); break;
        }
        const auto line = emit_trace_line(ev);
        REQUIRE(parse_trace_line(line) == ev);
        REQUIRE(parse_trace_line("cpu 9: TCBPF: " + line + "\n") == ev);
        REQUIRE(emit_trace_line(parse_trace_line(line)) == line);
    }
}

TEST_CASE("trace lines: probe output fixture parses cleanly") {
    std::ifstream in(SLICELAT_TEST_DATA "/probe_lines.txt");
    REQUIRE(in);
    int parsed = 0;
    int m1 = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        CAPTURE(line);
        const auto ev = try_parse_trace_line(line);
        REQUIRE(ev.has_value());
        CHECK(ev->valid());
        if (ev->point == ProbePoint::M1) ++m1;
        ++parsed;
    }
    CHECK(parsed == 10);
    CHECK(m1 == 3);
}
