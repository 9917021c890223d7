#include "slicelat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "slicelat/error.hpp"

namespace slicelat {

namespace {

bool is_fraction(double p) {
    return p >= 0.0 && p < 1.0;
}

std::uint32_t ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
    return (static_cast<std::uint32_t>(a) << 24) | (static_cast<std::uint32_t>(b) << 16) |
           (static_cast<std::uint32_t>(c) << 8) | d;
}

std::uint64_t to_ns(double seconds) {
    return static_cast<std::uint64_t>(std::llround(seconds * 1e9));
}

}  // namespace

std::string_view to_string(SliceKind s) noexcept {
    switch (s) {
        case SliceKind::eMBB: return "eMBB";
        case SliceKind::URLLC: return "URLLC";
        case SliceKind::mMTC: return "mMTC";
    }
    return "?";
}

std::string_view to_string(Transport t) noexcept {
    switch (t) {
        case Transport::UdpCbr: return "UDP-CBR";
        case Transport::UdpCalls: return "UDP-calls";
        case Transport::TcpLike: return "TCP-like";
    }
    return "?";
}

std::string_view to_string(LoadLevel l) noexcept {
    switch (l) {
        case LoadLevel::Light: return "Light";
        case LoadLevel::Medium: return "Medium";
        case LoadLevel::Heavy: return "Heavy";
    }
    return "?";
}

std::optional<SliceKind> slice_from_string(std::string_view text) noexcept {
    for (auto s : {SliceKind::eMBB, SliceKind::URLLC, SliceKind::mMTC}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    return std::nullopt;
}

std::optional<LoadLevel> load_from_string(std::string_view text) noexcept {
    for (auto l : {LoadLevel::Light, LoadLevel::Medium, LoadLevel::Heavy}) {
        if (to_string(l) == text) {
            return l;
        }
    }
    return std::nullopt;
}

std::string_view default_namespace(SliceKind s) noexcept {
    switch (s) {
        case SliceKind::eMBB: return "upf1";
        case SliceKind::URLLC: return "upf2";
        case SliceKind::mMTC: return "upf3";
    }
    return "upf1";
}

double SynthRng::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void DelayModel::validate() const {
    const bool ok = median_ns > 0 && sigma > 0 && tail_weight >= 0 && tail_weight < 1 &&
                    tail_scale_ns > 0 && tail_shape > 0 && cap_ns > 0 && cdf(cap_ns) > 0;
    if (!ok) {
        throw Error(ErrorCode::InvalidProfile, "delay model parameters out of range");
    }
}

double DelayModel::sample(SynthRng& rng) const {
    // Rejection keeps the truncated shape exact; the cap sits far in the tail.
    for (;;) {
        const double pick = rng.uniform();
        const double u = rng.uniform();
        double x = 0;
        if (pick < tail_weight) {
            x = tail_scale_ns * std::pow(u, -1.0 / tail_shape);
        } else {
            const double z = std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * rng.uniform());
            x = median_ns * std::exp(sigma * z);
        }
        if (x <= cap_ns) {
            return x;
        }
    }
}

double DelayModel::cdf(double x_ns) const {
    auto untruncated = [this](double x) {
        if (x <= 0) {
            return 0.0;
        }
        const double body = 0.5 * std::erfc(-(std::log(x / median_ns) / sigma) / std::numbers::sqrt2);
        const double tail = x < tail_scale_ns ? 0.0 : 1.0 - std::pow(tail_scale_ns / x, tail_shape);
        return (1.0 - tail_weight) * body + tail_weight * tail;
    };
    if (x_ns >= cap_ns) {
        return 1.0;
    }
    return untruncated(x_ns) / untruncated(cap_ns);
}

void SliceProfile::validate() const {
    if (!(packet_rate > 0) || flows == 0 || !valid_namespace_id(ns) || packet_size < 20 ||
        (transport == Transport::UdpCalls && packets_per_call == 0)) {
        throw Error(ErrorCode::InvalidProfile,
                    "invalid profile for slice " + std::string(to_string(name)));
    }
    delay_model.validate();
}

LoadCondition LoadCondition::standard(LoadLevel level) {
    switch (level) {
        case LoadLevel::Light: return {LoadLevel::Light, 5, 2, 600};
        case LoadLevel::Medium: return {LoadLevel::Medium, 20, 4, 600};
        case LoadLevel::Heavy: return {LoadLevel::Heavy, 50, 8, 600};
    }
    return {};
}

void ImpairmentModel::validate() const {
    if (!is_fraction(m3_loss_prob) || !is_fraction(m1_loss_prob) || !is_fraction(reorder_prob) ||
        !is_fraction(duplicate_prob) || reorder_jitter.count() < 0) {
        throw Error(ErrorCode::InvalidProfile, "impairment probabilities must lie in [0, 1)");
    }
}

SliceProfile default_profile(SliceKind slice, const LoadCondition& load) {
    SliceProfile p;
    p.name = slice;
    p.ns = std::string(default_namespace(slice));
    switch (slice) {
        case SliceKind::eMBB:
            p.transport = Transport::UdpCbr;
            p.packet_size = 1400;
            p.packet_rate = load.embb_rate_mbps * 1e6 / (8.0 * p.packet_size);
            p.flows = 1;
            p.teid_base = 0x100;
            p.delay_model = {40'000, 0.6, 0.02, 150'000, 1.5, 5'000'000};
            break;
        case SliceKind::URLLC:
            p.transport = Transport::UdpCalls;
            p.packet_size = 200;
            p.packets_per_call = 3;
            p.packet_rate = load.urllc_calls_per_s * p.packets_per_call;
            p.flows = 4;
            p.teid_base = 0x200;
            p.delay_model = {65'000, 0.5, 0.01, 200'000, 2.0, 5'000'000};
            break;
        case SliceKind::mMTC:
            p.transport = Transport::TcpLike;
            p.packet_size = 52;
            p.packet_rate = 7'500;
            p.flows = 8;
            p.teid_base = 0x300;
            p.delay_model = {22'000, 0.5, 0.05, 200'000, 0.9, 5'000'000};
            break;
    }
    return p;
}

SyntheticStream::SyntheticStream(SliceProfile profile, LoadCondition load,
                                 ImpairmentModel impairments, std::uint64_t seed)
    : profile_(std::move(profile)), load_(load), impairments_(impairments), rng_(seed) {
    profile_.validate();
    impairments_.validate();
    if (!(load_.duration_s >= 0)) {
        throw Error(ErrorCode::InvalidProfile, "negative duration");
    }
    total_packets_ = static_cast<std::uint64_t>(std::llround(profile_.packet_rate * load_.duration_s));

    const auto slice_octet = static_cast<std::uint8_t>(1 + static_cast<int>(profile_.name));
    flows_.reserve(profile_.flows);
    for (unsigned f = 0; f < profile_.flows; ++f) {
        Flow flow;
        flow.teid = profile_.teid_base + f;
        flow.tuple.src_addr = ipv4(10, 45, slice_octet, static_cast<std::uint8_t>(2 + f % 250));
        switch (profile_.transport) {
            case Transport::UdpCbr:
                flow.tuple.protocol = kProtoUdp;
                flow.tuple.src_port = static_cast<std::uint16_t>(5001 + f);
                flow.tuple.dst_addr = ipv4(10, 46, 0, 1);
                flow.tuple.dst_port = 5201;
                break;
            case Transport::UdpCalls:
                flow.tuple.protocol = kProtoUdp;
                flow.tuple.src_port = static_cast<std::uint16_t>(16384 + 2 * f);
                flow.tuple.dst_addr = ipv4(10, 46, 0, 2);
                flow.tuple.dst_port = static_cast<std::uint16_t>(10000 + 2 * f);
                break;
            case Transport::TcpLike:
                flow.tuple.protocol = kProtoTcp;
                flow.tuple.src_port = static_cast<std::uint16_t>(40000 + f);
                flow.tuple.dst_addr = ipv4(10, 46, 0, 3);
                flow.tuple.dst_port = 80;
                break;
        }
        flow.next_ip_id = static_cast<std::uint16_t>(rng_.bits() & 0xFFFF);
        flows_.push_back(flow);
    }
}

std::uint64_t SyntheticStream::arrival_ns(std::uint64_t index) const noexcept {
    const double rate = profile_.packet_rate;
    const auto i = static_cast<double>(index);
    double t = 0;
    switch (profile_.transport) {
        case Transport::UdpCbr:
            t = i / rate;
            break;
        case Transport::UdpCalls: {
            const double ppc = profile_.packets_per_call;
            const double call_interval = ppc / rate;
            const double spacing = std::min(0.020, call_interval / ppc);
            t = std::floor(i / ppc) * call_interval + std::fmod(i, ppc) * spacing;
            break;
        }
        case Transport::TcpLike: {
            constexpr double kBurst = 8;
            const double spacing = std::min(15e-6, 0.5 / rate);
            t = std::floor(i / kBurst) * kBurst / rate + std::fmod(i, kBurst) * spacing;
            break;
        }
    }
    return kSynthEpochNs + to_ns(t);
}

void SyntheticStream::enqueue(ProbeEvent ev, double reorder_draw, double jitter_draw) {
    std::uint64_t key = ev.timestamp_ns;
    if (reorder_draw < impairments_.reorder_prob) {
        key += static_cast<std::uint64_t>(
            std::llround(jitter_draw * static_cast<double>(impairments_.reorder_jitter.count())));
    }
    heap_.push(Queued{key, seq_++, std::move(ev)});
}

void SyntheticStream::generate_packet() {
    const std::uint64_t index = next_packet_++;
    Flow& flow = flows_[index % flows_.size()];
    const std::uint16_t ip_id = flow.next_ip_id++;
    const FlowKey key = flow_key_digest(flow.tuple, ip_id, profile_.packet_size);
    const std::uint64_t t1 = arrival_ns(index);
    const auto delay = static_cast<std::uint64_t>(std::llround(profile_.delay_model.sample(rng_)));
    const std::uint64_t t3 = t1 + delay;

    // Fixed draw count per packet keeps streams aligned across impairment settings.
    const double m1_loss = rng_.uniform();
    const double m3_loss = rng_.uniform();
    const double m1_dup = rng_.uniform();
    const double m3_dup = rng_.uniform();
    const double m1_reorder = rng_.uniform();
    const double m1_jitter = rng_.uniform();
    const double m3_reorder = rng_.uniform();
    const double m3_jitter = rng_.uniform();

    const bool m1_kept = !(m1_loss < impairments_.m1_loss_prob);
    const bool m3_kept = !(m3_loss < impairments_.m3_loss_prob);
    if (m1_kept) {
        auto ev = ProbeEvent::m1(profile_.ns, key, flow.teid, t1);
        if (m1_dup < impairments_.duplicate_prob) {
            enqueue(ev, m1_reorder, m1_jitter);
        }
        enqueue(std::move(ev), m1_reorder, m1_jitter);
    }
    if (m3_kept) {
        auto ev = ProbeEvent::m3(profile_.ns, key, t3);
        if (m3_dup < impairments_.duplicate_prob) {
            enqueue(ev, m3_reorder, m3_jitter);
        }
        enqueue(std::move(ev), m3_reorder, m3_jitter);
    }
    if (m1_kept && m3_kept) {
        truth_.push_back(MatchedPair{profile_.ns, flow.teid, key, t1, t3, delay});
    }
}

std::optional<std::uint64_t> SyntheticStream::peek_key() {
    // Every future event is keyed at or after the next packet's arrival.
    while (next_packet_ < total_packets_ &&
           (heap_.empty() || heap_.top().key > arrival_ns(next_packet_))) {
        generate_packet();
    }
    if (heap_.empty()) {
        return std::nullopt;
    }
    return heap_.top().key;
}

std::optional<TimedEvent> SyntheticStream::next() {
    if (!peek_key()) {
        return std::nullopt;
    }
    // priority_queue::top is const; the event is copied out before pop.
    TimedEvent out{heap_.top().key, heap_.top().event};
    heap_.pop();
    return out;
}

std::vector<MatchedPair> SyntheticStream::take_ground_truth() {
    std::vector<MatchedPair> out;
    out.swap(truth_);
    return out;
}

MergedStream::MergedStream(std::vector<SyntheticStream> streams) : streams_(std::move(streams)) {}

std::optional<TimedEvent> MergedStream::next() {
    std::size_t best = streams_.size();
    std::uint64_t best_key = 0;
    for (std::size_t i = 0; i < streams_.size(); ++i) {
        const auto key = streams_[i].peek_key();
        if (key && (best == streams_.size() || *key < best_key)) {
            best = i;
            best_key = *key;
        }
    }
    if (best == streams_.size()) {
        return std::nullopt;
    }
    return streams_[best].next();
}

std::vector<MatchedPair> MergedStream::take_ground_truth() {
    std::vector<MatchedPair> out;
    for (auto& s : streams_) {
        auto part = s.take_ground_truth();
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

SyntheticTrace generate(const SliceProfile& profile, const LoadCondition& load,
                        const ImpairmentModel& impairments, std::uint64_t seed) {
    SyntheticStream stream(profile, load, impairments, seed);
    SyntheticTrace trace;
    while (auto ev = stream.next()) {
        trace.events.push_back(std::move(ev->event));
    }
    trace.ground_truth = stream.take_ground_truth();
    return trace;
}

void RttModel::validate() const {
    if (!(mean_ns > 0) || !(sigma > 0) || !(retransmit_prob >= 0 && retransmit_prob <= 1) ||
        !(establishment_fraction >= 0 && establishment_fraction <= 1)) {
        throw Error(ErrorCode::InvalidProfile, "RTT model parameters out of range");
    }
}

double default_pfcp_rate(LoadLevel level) noexcept {
    switch (level) {
        case LoadLevel::Light: return 41.0 / 600.0;
        case LoadLevel::Medium: return 36.0 / 600.0;
        case LoadLevel::Heavy: return 66.0 / 600.0;
    }
    return 0;
}

PfcpTrace generate_pfcp(const LoadCondition& load, const RttModel& rtt_model, double rate,
                        std::uint64_t seed) {
    rtt_model.validate();
    if (!(rate >= 0) || !(load.duration_s >= 0)) {
        throw Error(ErrorCode::InvalidProfile, "PFCP rate and duration must be non-negative");
    }
    PfcpTrace trace;
    const auto count = static_cast<std::uint64_t>(std::llround(rate * load.duration_s));
    if (count == 0) {
        return trace;
    }
    SynthRng rng(seed);
    const double median = rtt_model.mean_ns / std::exp(0.5 * rtt_model.sigma * rtt_model.sigma);
    auto seq = static_cast<std::uint32_t>(rng.bits() % kPfcpSequenceLimit);

    struct Stamped {
        std::uint64_t ts;
        std::uint64_t order;
        ProbeEvent ev;
    };
    std::vector<Stamped> stamped;
    std::uint64_t order = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const double phase = rng.uniform();
        const double kind = rng.uniform();
        const double retx = rng.uniform();
        const double z = rng.normal();

        const std::uint64_t t_send = kSynthEpochNs + to_ns((static_cast<double>(i) + 0.5 * phase) / rate);
        const auto rtt = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(median * std::exp(rtt_model.sigma * z))));
        const std::uint8_t request =
            kind < rtt_model.establishment_fraction ? kPfcpEstablishmentRequest : kPfcpModificationRequest;
        const bool retransmitted = retx < rtt_model.retransmit_prob;

        stamped.push_back({t_send, order++, ProbeEvent::pfcp_send(seq, request, t_send)});
        if (retransmitted) {
            const std::uint64_t t_resend = t_send + rtt / 2;
            stamped.push_back({t_resend, order++, ProbeEvent::pfcp_send(seq, request, t_resend)});
        }
        const auto response = static_cast<std::uint8_t>(request + 1);
        stamped.push_back({t_send + rtt, order++, ProbeEvent::pfcp_recv(seq, response, t_send + rtt)});

        trace.transactions.push_back(PfcpTransaction{seq, classify_pfcp_request(request), request, t_send,
                                                     t_send + rtt, rtt, retransmitted});
        seq = (seq + 1) % kPfcpSequenceLimit;
    }
    std::sort(stamped.begin(), stamped.end(), [](const Stamped& a, const Stamped& b) {
        return a.ts != b.ts ? a.ts < b.ts : a.order < b.order;
    });
    trace.events.reserve(stamped.size());
    for (auto& s : stamped) {
        trace.events.push_back(std::move(s.ev));
    }
    return trace;
}

}  // namespace slicelat
