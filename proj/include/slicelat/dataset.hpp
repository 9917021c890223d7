#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "slicelat/delay_stats.hpp"
#include "slicelat/matcher.hpp"
#include "slicelat/pfcp_tracker.hpp"

namespace slicelat {

inline constexpr std::string_view kPairCsvHeader =
    "slice,load,upf,teid,flow_key,t_m1_ns,t_m3_ns,delay_ns";
inline constexpr std::string_view kPfcpCsvHeader =
    "load,msg_class,seq,t_send_ns,t_recv_ns,rtt_ns,retransmitted";
inline constexpr std::string_view kCdfCsvHeader = "delay_ns,cum_fraction";

/// One matched-pair CSV row.
struct PairRow {
    std::string slice;
    std::string load;
    MatchedPair pair;
};

struct PfcpRow {
    std::string load;
    PfcpTransaction txn;
};

/// Formats a row without the trailing LF.
std::string format_pair_row(std::string_view slice, std::string_view load, const MatchedPair& pair);
std::string format_pfcp_row(std::string_view load, const PfcpTransaction& txn);

/// Parses one data row. Throws Error{SchemaError}.
PairRow parse_pair_row(std::string_view line);
PfcpRow parse_pfcp_row(std::string_view line);

enum class CsvKind { Pairs, Pfcp };

/// Reads the header line and identifies the dataset. Throws Error{SchemaError}
/// for an empty stream or an unrecognised header.
CsvKind read_csv_header(std::istream& in);

/// Streams the data rows after the header. Throws Error{SchemaError} with the
/// offending line number.
void for_each_pair_row(std::istream& in, const std::function<void(const PairRow&)>& fn);
void for_each_pfcp_row(std::istream& in, const std::function<void(const PfcpRow&)>& fn);

/// CDF CSV (`delay_ns,cum_fraction`); optional `# key=value` lines precede the
/// header.
void write_cdf_csv(std::ostream& out, const DelayStats& stats, std::size_t resolution,
                   std::string_view metadata = {});

}  // namespace slicelat
