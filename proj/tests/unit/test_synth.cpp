#include <cmath>

#include "doctest.h"
#include "slicelat/error.hpp"
#include "slicelat/matcher.hpp"
#include "slicelat/synth.hpp"

using namespace slicelat;

namespace {

// Truncated lognormal + Pareto mixture, written from the model definition.
struct MixtureCdf {
    double median, sigma, w, xm, alpha, cap;

    double raw(double x) const {
        if (x <= 0) return 0;
        const double z = (std::log(x) - std::log(median)) / sigma;
        const double body = 0.5 * (1.0 + std::erf(z / std::sqrt(2.0)));
        const double tail = x >= xm ? 1.0 - std::pow(xm / x, alpha) : 0.0;
        return (1 - w) * body + w * tail;
    }
    double operator()(double x) const { return x >= cap ? 1.0 : raw(x) / raw(cap); }
};

// Kolmogorov-Smirnov distance for integer-rounded samples: each value k
// stands for the interval [k - 0.5, k + 0.5).
double ks_distance(std::vector<std::uint64_t> xs, const MixtureCdf& F) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = static_cast<double>(xs[i]);
        d = std::max(d, (i + 1) / n - F(x + 0.5));
        d = std::max(d, F(x - 0.5) - i / n);
    }
    return d;
}

std::vector<std::string> lines_of(const SyntheticTrace& t) {
    std::vector<std::string> out;
    for (const auto& ev : t.events) out.push_back(emit_trace_line(ev));
    return out;
}

}  // namespace

TEST_CASE("load table") {
    const auto light = LoadCondition::standard(LoadLevel::Light);
    const auto medium = LoadCondition::standard(LoadLevel::Medium);
    const auto heavy = LoadCondition::standard(LoadLevel::Heavy);
    CHECK(light.embb_rate_mbps == 5);
    CHECK(medium.embb_rate_mbps == 20);
    CHECK(heavy.embb_rate_mbps == 50);
    CHECK(light.urllc_calls_per_s == 2);
    CHECK(medium.urllc_calls_per_s == 4);
    CHECK(heavy.urllc_calls_per_s == 8);
    for (const auto& l : {light, medium, heavy}) CHECK(l.duration_s == 600);
    CHECK(to_string(LoadLevel::Medium) == "Medium");
    CHECK(load_from_string("Heavy") == LoadLevel::Heavy);
    CHECK_FALSE(load_from_string("heavy"));
    CHECK(slice_from_string("URLLC") == SliceKind::URLLC);
}

TEST_CASE("default profiles") {
    const auto heavy = LoadCondition::standard(LoadLevel::Heavy);
    const auto embb = default_profile(SliceKind::eMBB, heavy);
    CHECK(embb.ns == "upf1");
    CHECK(embb.transport == Transport::UdpCbr);
    CHECK(embb.packet_rate == doctest::Approx(50e6 / (8 * 1400)));
    const auto urllc = default_profile(SliceKind::URLLC, heavy);
    CHECK(urllc.ns == "upf2");
    CHECK(urllc.packet_rate == doctest::Approx(8 * 3));
    const auto mmtc = default_profile(SliceKind::mMTC, heavy);
    CHECK(mmtc.ns == "upf3");
    CHECK(mmtc.transport == Transport::TcpLike);
    CHECK(mmtc.delay_model.tail_weight > 0);
    for (const auto& p : {embb, urllc, mmtc}) CHECK_NOTHROW(p.validate());
    CHECK(default_namespace(SliceKind::mMTC) == "upf3");
}

TEST_CASE("generate: invalid inputs") {
    const auto load = LoadCondition::standard(LoadLevel::Light);
    auto p = default_profile(SliceKind::eMBB, load);
    p.packet_rate = 0;
    CHECK_THROWS_AS(generate(p, load, {}, 1), Error);
    auto q = default_profile(SliceKind::eMBB, load);
    q.delay_model.sigma = -1;
    CHECK_THROWS_AS(generate(q, load, {}, 1), Error);
    ImpairmentModel bad;
    bad.m3_loss_prob = 1.0;
    CHECK_THROWS_AS(generate(default_profile(SliceKind::eMBB, load), load, bad, 1), Error);
    RttModel rtt;
    rtt.retransmit_prob = 2;
    CHECK_THROWS_AS(generate_pfcp(load, rtt, 1, 1), Error);
    try {
        generate(p, load, {}, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidProfile);
    }
}

TEST_CASE("generate: deterministic per seed") {
    auto load = LoadCondition::standard(LoadLevel::Medium);
    load.duration_s = 0.5;
    ImpairmentModel imp;
    imp.m3_loss_prob = 0.02;
    imp.reorder_prob = 0.05;
    imp.reorder_jitter = std::chrono::microseconds(500);
    imp.duplicate_prob = 0.01;
    const auto profile = default_profile(SliceKind::mMTC, load);
    const auto a = generate(profile, load, imp, 42);
    const auto b = generate(profile, load, imp, 42);
    const auto c = generate(profile, load, imp, 43);
    CHECK(lines_of(a) == lines_of(b));
    CHECK(a.ground_truth == b.ground_truth);
    CHECK(lines_of(a) != lines_of(c));
    for (const auto& ev : a.events) REQUIRE(ev.timestamp_ns > 0);
}

TEST_CASE("generate: lossless run yields exactly the ground truth") {
    auto load = LoadCondition::standard(LoadLevel::Light);
    auto profile = default_profile(SliceKind::eMBB, load);
    profile.packet_rate = 1000;
    load.duration_s = 1.0;
    const auto t = generate(profile, load, {}, 8);
    CHECK(t.ground_truth.size() == 1000);
    Matcher m;
    std::vector<MatchedPair> got;
    for (const auto& ev : t.events) {
        if (auto p = m.on_event(ev)) got.push_back(*p);
    }
    m.drain();
    auto truth = t.ground_truth;
    std::sort(got.begin(), got.end());
    std::sort(truth.begin(), truth.end());
    CHECK(got == truth);
    CHECK(m.accounting().match_rate() == 1.0);
}

TEST_CASE("generate: 1% M3 loss lands within 4 sigma of 0.99") {
    auto load = LoadCondition::standard(LoadLevel::Light);
    auto profile = default_profile(SliceKind::mMTC, load);
    profile.packet_rate = 10000;
    load.duration_s = 10;
    ImpairmentModel imp;
    imp.m3_loss_prob = 0.01;
    SyntheticStream stream(profile, load, imp, 77);
    Matcher m;
    while (auto item = stream.next()) m.on_event(item->event);
    m.drain();
    const auto a = m.accounting();
    CHECK(a.m1_total == 100000);
    const double sigma = std::sqrt(0.99 * 0.01 / 1e5);
    CHECK(std::abs(a.match_rate() - 0.99) <= 4 * sigma);
}

TEST_CASE("generate: rate fidelity") {
    for (auto level : {LoadLevel::Light, LoadLevel::Heavy}) {
        auto load = LoadCondition::standard(level);
        load.duration_s = 20;
        for (auto slice : {SliceKind::eMBB, SliceKind::URLLC, SliceKind::mMTC}) {
            const auto profile = default_profile(slice, load);
            const auto t = generate(profile, load, {}, 5);
            const double expected = profile.packet_rate * load.duration_s;
            const auto m1 = std::count_if(t.events.begin(), t.events.end(),
                                          [](const ProbeEvent& e) { return e.point == ProbePoint::M1; });
            CAPTURE(to_string(slice));
            CHECK(std::abs(static_cast<double>(m1) - expected) <= 0.01 * expected + 1);
        }
    }
}

TEST_CASE("generate: delay samples follow the configured model (KS, alpha 0.01)") {
    auto load = LoadCondition::standard(LoadLevel::Heavy);
    for (auto slice : {SliceKind::eMBB, SliceKind::URLLC, SliceKind::mMTC}) {
        auto profile = default_profile(slice, load);
        profile.packet_rate = 10000;
        load.duration_s = 10;
        const auto t = generate(profile, load, {}, 1234);
        REQUIRE(t.ground_truth.size() == 100000);
        std::vector<std::uint64_t> delays;
        for (const auto& p : t.ground_truth) delays.push_back(p.delay);
        const auto& dm = profile.delay_model;
        const MixtureCdf F{dm.median_ns, dm.sigma, dm.tail_weight, dm.tail_scale_ns, dm.tail_shape, dm.cap_ns};
        const double d = ks_distance(delays, F);
        CAPTURE(to_string(slice));
        CHECK(d < 1.628 / std::sqrt(100000.0));
        // The library's own CDF agrees with the independent one.
        for (double x : {1e3, 2e4, 5e4, 1e5, 4e5, 1e6, 4.9e6}) CHECK(dm.cdf(x) == doctest::Approx(F(x)).epsilon(1e-9));
    }
}

TEST_CASE("generate_pfcp") {
    const RttModel defaults;
    CHECK(defaults.mean_ns == 125'000);
    auto load = LoadCondition::standard(LoadLevel::Light);
    CHECK(generate_pfcp(load, defaults, 0.0, 1).events.empty());

    load.duration_s = 2000;
    const auto t = generate_pfcp(load, defaults, 1.0, 3);
    CHECK(t.transactions.size() == 2000);
    double sum = 0;
    for (const auto& x : t.transactions) sum += static_cast<double>(x.rtt);
    CHECK(sum / 2000 == doctest::Approx(125'000).epsilon(0.02));
    CHECK(t.events.size() == 4000);
    for (std::size_t i = 1; i < t.events.size(); ++i) REQUIRE(t.events[i].timestamp_ns >= t.events[i - 1].timestamp_ns);

    RttModel always;
    always.retransmit_prob = 1.0;
    load.duration_s = 100;
    const auto r = generate_pfcp(load, always, 0.5, 4);
    REQUIRE(r.transactions.size() == 50);
    for (const auto& x : r.transactions) CHECK(x.retransmitted);
    CHECK(r.events.size() == 150);

    // Default rates per load.
    CHECK(default_pfcp_rate(LoadLevel::Light) * 600 == doctest::Approx(41));
    CHECK(default_pfcp_rate(LoadLevel::Medium) * 600 == doctest::Approx(36));
    CHECK(default_pfcp_rate(LoadLevel::Heavy) * 600 == doctest::Approx(66));
}

TEST_CASE("merged stream preserves stream order") {
    auto load = LoadCondition::standard(LoadLevel::Light);
    load.duration_s = 1;
    std::vector<SyntheticStream> streams;
    for (auto s : {SliceKind::eMBB, SliceKind::URLLC, SliceKind::mMTC}) {
        streams.emplace_back(default_profile(s, load), load, ImpairmentModel{}, 10 + static_cast<int>(s));
    }
    MergedStream merged(std::move(streams));
    std::uint64_t prev = 0, n = 0;
    while (auto item = merged.next()) {
        REQUIRE(item->order_key >= prev);
        prev = item->order_key;
        ++n;
    }
    CHECK(n > 15000);
    CHECK(merged.take_ground_truth().size() == n / 2);
}
