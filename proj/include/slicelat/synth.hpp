#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "slicelat/matcher.hpp"
#include "slicelat/pfcp_tracker.hpp"
#include "slicelat/probe_event.hpp"

namespace slicelat {

enum class SliceKind : std::uint8_t { eMBB, URLLC, mMTC };
enum class Transport : std::uint8_t { UdpCbr, UdpCalls, TcpLike };
enum class LoadLevel : std::uint8_t { Light, Medium, Heavy };

std::string_view to_string(SliceKind s) noexcept;
std::string_view to_string(Transport t) noexcept;
std::string_view to_string(LoadLevel l) noexcept;
std::optional<SliceKind> slice_from_string(std::string_view text) noexcept;
std::optional<LoadLevel> load_from_string(std::string_view text) noexcept;

/// UPF namespace serving each slice on the reference platform.
std::string_view default_namespace(SliceKind s) noexcept;

/// The generator's single pseudo-random source: std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. Variates are derived with the
/// transforms below rather than <random> distributions, which differ between
/// standard libraries.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    /// Standard normal (Box-Muller, cosine branch).
    double normal() noexcept;
    std::uint64_t bits() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Lognormal body mixed with a Pareto tail, truncated at `cap_ns`.
struct DelayModel {
    double median_ns = 40'000;
    double sigma = 0.6;
    double tail_weight = 0.0;
    double tail_scale_ns = 150'000;
    double tail_shape = 1.5;
    double cap_ns = 5'000'000;

    void validate() const;  // throws Error{InvalidProfile}
    /// Continuous delay in ns; integer delays are llround() of this.
    double sample(SynthRng& rng) const;
    /// Distribution function of `sample`.
    [[nodiscard]] double cdf(double x_ns) const;
};

struct SliceProfile {
    SliceKind name = SliceKind::eMBB;
    Transport transport = Transport::UdpCbr;
    double packet_rate = 0;  // packets per second
    DelayModel delay_model;
    unsigned flows = 1;
    std::string ns;
    std::uint32_t teid_base = 1;
    std::uint16_t packet_size = 1400;  // IPv4 total length
    unsigned packets_per_call = 3;     // UdpCalls only

    void validate() const;  // throws Error{InvalidProfile}
};

struct LoadCondition {
    LoadLevel name = LoadLevel::Light;
    double embb_rate_mbps = 5;
    double urllc_calls_per_s = 2;
    double duration_s = 600;

    /// Light 5 Mbps / 2 calls/s, Medium 20 / 4, Heavy 50 / 8; 600 s each.
    static LoadCondition standard(LoadLevel level);
};

struct ImpairmentModel {
    double m3_loss_prob = 0;
    double m1_loss_prob = 0;
    double reorder_prob = 0;
    std::chrono::nanoseconds reorder_jitter{0};
    double duplicate_prob = 0;

    void validate() const;  // throws Error{InvalidProfile}
};

/// Slice defaults: packet rate follows the load (eMBB from the iperf3 rate and
/// packet size, URLLC from the call rate); delay models are qualitative
/// choices placing medians in the tens of microseconds and P99 in the
/// hundreds (eMBB, URLLC) to about a thousand (mMTC) microseconds.
SliceProfile default_profile(SliceKind slice, const LoadCondition& load);

/// Event plus the stream-order key it was emitted under.
struct TimedEvent {
    std::uint64_t order_key = 0;
    ProbeEvent event;
};

/// Lazily generated forwarding-probe stream for one slice.
///
/// Every logical packet yields an M1 at its arrival time and an M3 one delay
/// sample later, each subject to loss and duplication. Stream order is the
/// timestamp plus an optional reorder offset, ties kept in generation order.
/// Memory stays bounded by the events inside the delay cap plus jitter.
class SyntheticStream {
public:
    SyntheticStream(SliceProfile profile, LoadCondition load, ImpairmentModel impairments,
                    std::uint64_t seed);

    std::optional<TimedEvent> next();
    [[nodiscard]] std::optional<std::uint64_t> peek_key();

    /// Ground-truth pairs (packets whose M1 and M3 both survive) generated
    /// since the last call, in generation order.
    std::vector<MatchedPair> take_ground_truth();

    [[nodiscard]] std::uint64_t packet_count() const noexcept { return total_packets_; }
    [[nodiscard]] const SliceProfile& profile() const noexcept { return profile_; }
    [[nodiscard]] const LoadCondition& load() const noexcept { return load_; }

private:
    struct Queued {
        std::uint64_t key;
        std::uint64_t seq;
        ProbeEvent event;
        bool operator>(const Queued& o) const noexcept {
            return key != o.key ? key > o.key : seq > o.seq;
        }
    };
    struct Flow {
        FiveTuple tuple;
        std::uint32_t teid = 0;
        std::uint16_t next_ip_id = 0;
    };

    [[nodiscard]] std::uint64_t arrival_ns(std::uint64_t index) const noexcept;
    void generate_packet();
    void enqueue(ProbeEvent ev, double reorder_draw, double jitter_draw);

    SliceProfile profile_;
    LoadCondition load_;
    ImpairmentModel impairments_;
    SynthRng rng_;
    std::vector<Flow> flows_;
    std::uint64_t total_packets_ = 0;
    std::uint64_t next_packet_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Queued, std::vector<Queued>, std::greater<>> heap_;
    std::vector<MatchedPair> truth_;
};

/// k-way merge of several streams by order key; ties go to the earlier stream.
class MergedStream {
public:
    explicit MergedStream(std::vector<SyntheticStream> streams);
    std::optional<TimedEvent> next();
    std::vector<MatchedPair> take_ground_truth();
    [[nodiscard]] std::vector<SyntheticStream>& streams() noexcept { return streams_; }

private:
    std::vector<SyntheticStream> streams_;
};

struct SyntheticTrace {
    std::vector<ProbeEvent> events;
    std::vector<MatchedPair> ground_truth;
};

/// Materialised stream; throws Error{InvalidProfile} on invalid inputs.
SyntheticTrace generate(const SliceProfile& profile, const LoadCondition& load,
                        const ImpairmentModel& impairments, std::uint64_t seed);

/// Lognormal round-trip model parameterised by its mean.
struct RttModel {
    double mean_ns = 125'000;
    double sigma = 0.2;
    double retransmit_prob = 0;
    double establishment_fraction = 0.1;

    void validate() const;  // throws Error{InvalidProfile}
};

struct PfcpTrace {
    std::vector<ProbeEvent> events;
    std::vector<PfcpTransaction> transactions;
};

/// Default N4 transaction rate per load: 41, 36 and 66 modifications per
/// 600 s run.
double default_pfcp_rate(LoadLevel level) noexcept;

/// Paired P4 send/recv events at `rate` transactions per second over the load
/// duration. A retransmitted transaction resends at half its RTT.
PfcpTrace generate_pfcp(const LoadCondition& load, const RttModel& rtt_model, double rate,
                        std::uint64_t seed);

/// Start of synthetic time; keeps every timestamp strictly positive.
inline constexpr std::uint64_t kSynthEpochNs = 1'000'000'000;

}  // namespace slicelat
