#include "slicelat/dataset.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <vector>

#include "slicelat/error.hpp"

namespace slicelat {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                           : comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

template <typename T>
T parse_number(std::string_view text, int base, std::string_view column) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::SchemaError, "bad " + std::string(column) + " value '" + std::string(text) + "'");
    }
    return value;
}

void append_hex(std::string& out, std::uint64_t value, int width) {
    static constexpr char kDigits[] = "0123456789abcdef";
    for (int shift = (width - 1) * 4; shift >= 0; shift -= 4) {
        out.push_back(kDigits[(value >> shift) & 0xF]);
    }
}

void append_dec(std::string& out, std::uint64_t value) {
    std::array<char, 24> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    out.append(buf.data(), ptr);
}

std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

template <typename Row, typename Parse>
void for_each_row(std::istream& in, Parse parse, const std::function<void(const Row&)>& fn) {
    std::string line;
    std::uint64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        Row row;
        try {
            row = parse(line);
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        fn(row);
    }
}

}  // namespace

std::string format_pair_row(std::string_view slice, std::string_view load, const MatchedPair& pair) {
    std::string out;
    out.reserve(96);
    out += slice;
    out += ',';
    out += load;
    out += ',';
    out += pair.ns;
    out += ',';
    append_hex(out, pair.teid, 8);
    out += ',';
    append_hex(out, pair.flow_key.digest, 16);
    out += ',';
    append_dec(out, pair.t_m1);
    out += ',';
    append_dec(out, pair.t_m3);
    out += ',';
    append_dec(out, pair.delay);
    return out;
}

std::string format_pfcp_row(std::string_view load, const PfcpTransaction& txn) {
    std::string out;
    out += load;
    out += ',';
    out += to_string(txn.msg_class);
    out += ',';
    append_dec(out, txn.sequence);
    out += ',';
    append_dec(out, txn.t_send);
    out += ',';
    append_dec(out, txn.t_recv);
    out += ',';
    append_dec(out, txn.rtt);
    out += txn.retransmitted ? ",1" : ",0";
    return out;
}

PairRow parse_pair_row(std::string_view line) {
    const auto cells = split_csv(chomp(line));
    if (cells.size() != 8) {
        throw Error(ErrorCode::SchemaError, "pair row needs 8 columns, has " + std::to_string(cells.size()));
    }
    if (cells[3].size() != 8 || cells[4].size() != 16) {
        throw Error(ErrorCode::SchemaError, "teid/flow_key must be fixed-width hex");
    }
    PairRow row;
    row.slice = std::string(cells[0]);
    row.load = std::string(cells[1]);
    row.pair.ns = std::string(cells[2]);
    row.pair.teid = parse_number<std::uint32_t>(cells[3], 16, "teid");
    row.pair.flow_key = FlowKey{parse_number<std::uint64_t>(cells[4], 16, "flow_key")};
    row.pair.t_m1 = parse_number<std::uint64_t>(cells[5], 10, "t_m1_ns");
    row.pair.t_m3 = parse_number<std::uint64_t>(cells[6], 10, "t_m3_ns");
    row.pair.delay = parse_number<std::uint64_t>(cells[7], 10, "delay_ns");
    if (row.slice.empty() || row.load.empty() || row.pair.t_m3 < row.pair.t_m1 ||
        row.pair.t_m3 - row.pair.t_m1 != row.pair.delay) {
        throw Error(ErrorCode::SchemaError, "inconsistent pair row");
    }
    return row;
}

PfcpRow parse_pfcp_row(std::string_view line) {
    const auto cells = split_csv(chomp(line));
    if (cells.size() != 7) {
        throw Error(ErrorCode::SchemaError, "PFCP row needs 7 columns, has " + std::to_string(cells.size()));
    }
    PfcpRow row;
    row.load = std::string(cells[0]);
    const auto cls = pfcp_class_from_string(cells[1]);
    if (!cls || row.load.empty()) {
        throw Error(ErrorCode::SchemaError, "bad msg_class '" + std::string(cells[1]) + "'");
    }
    row.txn.msg_class = *cls;
    row.txn.sequence = parse_number<std::uint32_t>(cells[2], 10, "seq");
    row.txn.t_send = parse_number<std::uint64_t>(cells[3], 10, "t_send_ns");
    row.txn.t_recv = parse_number<std::uint64_t>(cells[4], 10, "t_recv_ns");
    row.txn.rtt = parse_number<std::uint64_t>(cells[5], 10, "rtt_ns");
    if (cells[6] != "0" && cells[6] != "1") {
        throw Error(ErrorCode::SchemaError, "retransmitted must be 0 or 1");
    }
    row.txn.retransmitted = cells[6] == "1";
    if (row.txn.sequence >= kPfcpSequenceLimit || row.txn.t_recv < row.txn.t_send ||
        row.txn.t_recv - row.txn.t_send != row.txn.rtt) {
        throw Error(ErrorCode::SchemaError, "inconsistent PFCP row");
    }
    return row;
}

CsvKind read_csv_header(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw Error(ErrorCode::SchemaError, "missing CSV header");
    }
    const auto h = chomp(header);
    if (h == kPairCsvHeader) {
        return CsvKind::Pairs;
    }
    if (h == kPfcpCsvHeader) {
        return CsvKind::Pfcp;
    }
    throw Error(ErrorCode::SchemaError, "unrecognised CSV header '" + std::string(h) + "'");
}

void for_each_pair_row(std::istream& in, const std::function<void(const PairRow&)>& fn) {
    for_each_row<PairRow>(in, parse_pair_row, fn);
}

void for_each_pfcp_row(std::istream& in, const std::function<void(const PfcpRow&)>& fn) {
    for_each_row<PfcpRow>(in, parse_pfcp_row, fn);
}

void write_cdf_csv(std::ostream& out, const DelayStats& stats, std::size_t resolution,
                   std::string_view metadata) {
    if (!metadata.empty()) {
        out << "# " << metadata << '\n';
    }
    out << kCdfCsvHeader << '\n';
    if (stats.count() == 0) {
        return;
    }
    char buf[64];
    for (const auto& [delay, fraction] : stats.cdf_points(resolution)) {
        std::snprintf(buf, sizeof buf, "%llu,%.6f\n", static_cast<unsigned long long>(delay), fraction);
        out << buf;
    }
}

}  // namespace slicelat
