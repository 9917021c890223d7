#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slicelat/probe_event.hpp"
#include "slicelat/wire.hpp"

namespace slicelat {

using namespace std::chrono_literals;

struct MatcherConfig {
    std::chrono::nanoseconds window = 10ms;
    std::size_t capacity = 500;
    std::chrono::nanoseconds reorder_slack = 1ms;

    /// Throws Error{InvalidConfig} unless window > 0, capacity > 0 and
    /// 0 <= reorder_slack < window.
    void validate() const;
};

/// One N3 -> N6 forwarding-delay sample.
struct MatchedPair {
    std::string ns;
    std::uint32_t teid = 0;
    FlowKey flow_key;
    std::uint64_t t_m1 = 0;
    std::uint64_t t_m3 = 0;
    std::uint64_t delay = 0;

    friend auto operator<=>(const MatchedPair&, const MatchedPair&) = default;
};

struct MatchAccounting {
    std::uint64_t m1_total = 0;
    std::uint64_t m3_total = 0;
    std::uint64_t matched = 0;
    std::uint64_t m1_evicted = 0;
    std::uint64_t m1_expired = 0;
    std::uint64_t m3_orphaned = 0;
    std::uint64_t malformed = 0;
    std::uint64_t pending_m1 = 0;
    std::uint64_t pending_m3 = 0;

    /// matched / max(m1_total, m3_total), so loss on either side lowers it;
    /// zero when no events were seen.
    [[nodiscard]] double match_rate() const noexcept;

    /// Both conservation identities.
    [[nodiscard]] bool conserved() const noexcept;

    MatchAccounting& operator+=(const MatchAccounting& other) noexcept;
    friend bool operator==(const MatchAccounting&, const MatchAccounting&) = default;
};

enum class ExpirationKind : std::uint8_t { M1Expired, M3Orphaned };

struct Expiration {
    ExpirationKind kind = ExpirationKind::M1Expired;
    std::string ns;
    FlowKey flow_key;
    std::uint64_t timestamp_ns = 0;

    friend bool operator==(const Expiration&, const Expiration&) = default;
};

/// Streaming M1/M3 correlator with one bounded buffer per namespace.
///
/// Matching rule: an M3 pairs with the buffered M1 of equal flow key that has
/// the smallest t_m1 (insertion order breaks ties) among those with
/// 0 <= t_m3 - t_m1 <= window. An M3 without a partner is held for
/// reorder_slack of stream time so an M1 that was interleaved behind it can
/// still claim it. A full buffer evicts its oldest-inserted entry.
///
/// Stream time per namespace is the largest timestamp seen. Before each event
/// is processed, buffered M1 entries older than window + reorder_slack and
/// held M3 entries older than reorder_slack are retired.
///
/// Single-writer; distinct Matcher instances may run concurrently.
class Matcher {
public:
    explicit Matcher(MatcherConfig config = {});

    /// Throws Error{WrongEventKind} for PFCP events and Error{InvalidEvent} for
    /// events missing their flow key.
    std::optional<MatchedPair> on_event(const ProbeEvent& event);

    /// Retires M1 entries with now - t_m1 > window and held M3 entries with
    /// now - t_m3 > reorder_slack in every namespace. Throws
    /// Error{ClockRegression} if `now` is more than reorder_slack behind a
    /// namespace's stream clock.
    std::vector<Expiration> flush(std::uint64_t now);

    /// Flushes far enough past the last event that nothing stays pending.
    std::vector<Expiration> drain();

    [[nodiscard]] MatchAccounting accounting() const;
    [[nodiscard]] MatchAccounting accounting(const std::string& ns) const;
    [[nodiscard]] std::vector<std::string> namespaces() const;
    [[nodiscard]] std::size_t buffered(const std::string& ns) const;

    void count_malformed(std::uint64_t n = 1) noexcept { malformed_ += n; }

    [[nodiscard]] const MatcherConfig& config() const noexcept { return config_; }

private:
    struct M1Entry {
        FlowKey key;
        std::uint32_t teid = 0;
        std::uint64_t t_m1 = 0;
    };
    struct M3Entry {
        FlowKey key;
        std::uint64_t t_m3 = 0;
    };
    struct Namespace {
        std::uint64_t clock = 0;
        std::uint64_t next_seq = 0;
        // insertion order
        std::map<std::uint64_t, M1Entry> m1;
        std::map<std::uint64_t, M3Entry> m3;
        // (timestamp, seq) ordering for retirement
        std::set<std::pair<std::uint64_t, std::uint64_t>> m1_by_time;
        std::set<std::pair<std::uint64_t, std::uint64_t>> m3_by_time;
        std::unordered_map<FlowKey, std::vector<std::uint64_t>> m1_by_key;
        std::unordered_map<FlowKey, std::vector<std::uint64_t>> m3_by_key;
        MatchAccounting acct;
    };

    void retire(const std::string& name, Namespace& ns, std::uint64_t now, std::uint64_t m1_limit,
                std::uint64_t m3_limit, std::vector<Expiration>* out);
    void erase_m1(Namespace& ns, std::uint64_t seq);
    void erase_m3(Namespace& ns, std::uint64_t seq);

    MatcherConfig config_;
    std::map<std::string, Namespace> namespaces_;
    std::uint64_t malformed_ = 0;
};

}  // namespace slicelat
