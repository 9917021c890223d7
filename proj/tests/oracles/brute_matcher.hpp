#pragma once

// Quadratic reference correlator: plain vectors, linear scans, no indexes.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slicelat/matcher.hpp"

namespace oracle {

struct Counters {
    std::uint64_t m1_total = 0, m3_total = 0, matched = 0, evicted = 0, expired = 0, orphaned = 0;
    std::uint64_t pending_m1 = 0, pending_m3 = 0;
};

class BruteMatcher {
public:
    BruteMatcher(std::uint64_t window, std::size_t capacity, std::uint64_t slack)
        : window_(window), capacity_(capacity), slack_(slack) {}

    /// Returns the pair produced by this event, if any.
    std::vector<slicelat::MatchedPair> feed(const slicelat::ProbeEvent& ev) {
        std::vector<slicelat::MatchedPair> out;
        Ns& ns = spaces_[ev.ns];
        if (ev.timestamp_ns > ns.clock) {
            ns.clock = ev.timestamp_ns;
        }
        sweep(ns, ns.clock, window_ + slack_, slack_);
        const std::uint64_t key = ev.flow_key->digest;
        const std::uint64_t t = ev.timestamp_ns;
        if (ev.point == slicelat::ProbePoint::M1) {
            ns.c.m1_total++;
            int best = -1;
            for (std::size_t i = 0; i < ns.m3.size(); ++i) {
                const Rec& r = ns.m3[i];
                if (r.key != key || r.t < t || r.t - t > window_) continue;
                if (best < 0 || r.t < ns.m3[best].t || (r.t == ns.m3[best].t && r.seq < ns.m3[best].seq)) {
                    best = static_cast<int>(i);
                }
            }
            if (best >= 0) {
                const Rec r = ns.m3[best];
                ns.m3.erase(ns.m3.begin() + best);
                ns.c.matched++;
                out.push_back({ev.ns, *ev.teid, slicelat::FlowKey{key}, t, r.t, r.t - t});
                return out;
            }
            if (ns.m1.size() >= capacity_) {
                auto oldest = std::min_element(ns.m1.begin(), ns.m1.end(),
                                               [](const Rec& a, const Rec& b) { return a.seq < b.seq; });
                ns.m1.erase(oldest);
                ns.c.evicted++;
            }
            ns.m1.push_back({key, *ev.teid, t, next_seq_++});
            return out;
        }
        ns.c.m3_total++;
        int best = -1;
        for (std::size_t i = 0; i < ns.m1.size(); ++i) {
            const Rec& r = ns.m1[i];
            if (r.key != key || t < r.t || t - r.t > window_) continue;
            if (best < 0 || r.t < ns.m1[best].t || (r.t == ns.m1[best].t && r.seq < ns.m1[best].seq)) {
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) {
            const Rec r = ns.m1[best];
            ns.m1.erase(ns.m1.begin() + best);
            ns.c.matched++;
            out.push_back({ev.ns, r.teid, slicelat::FlowKey{key}, r.t, t, t - r.t});
            return out;
        }
        ns.m3.push_back({key, 0, t, next_seq_++});
        return out;
    }

    void drain() {
        std::uint64_t latest = 0;
        for (auto& [name, ns] : spaces_) latest = std::max(latest, ns.clock);
        const std::uint64_t now = latest + window_ + slack_ + 1;
        for (auto& [name, ns] : spaces_) sweep(ns, now, window_, slack_);
    }

    Counters totals() const {
        Counters t;
        for (const auto& [name, ns] : spaces_) {
            t.m1_total += ns.c.m1_total;
            t.m3_total += ns.c.m3_total;
            t.matched += ns.c.matched;
            t.evicted += ns.c.evicted;
            t.expired += ns.c.expired;
            t.orphaned += ns.c.orphaned;
            t.pending_m1 += ns.m1.size();
            t.pending_m3 += ns.m3.size();
        }
        return t;
    }

private:
    struct Rec {
        std::uint64_t key;
        std::uint32_t teid;
        std::uint64_t t;
        std::uint64_t seq;
    };
    struct Ns {
        std::uint64_t clock = 0;
        std::vector<Rec> m1, m3;
        Counters c;
    };

    static void sweep(Ns& ns, std::uint64_t now, std::uint64_t m1_age, std::uint64_t m3_age) {
        for (std::size_t i = 0; i < ns.m1.size();) {
            if (now > ns.m1[i].t && now - ns.m1[i].t > m1_age) {
                ns.m1.erase(ns.m1.begin() + static_cast<long>(i));
                ns.c.expired++;
            } else {
                ++i;
            }
        }
        for (std::size_t i = 0; i < ns.m3.size();) {
            if (now > ns.m3[i].t && now - ns.m3[i].t > m3_age) {
                ns.m3.erase(ns.m3.begin() + static_cast<long>(i));
                ns.c.orphaned++;
            } else {
                ++i;
            }
        }
    }

    std::uint64_t window_;
    std::size_t capacity_;
    std::uint64_t slack_;
    std::uint64_t next_seq_ = 0;
    std::map<std::string, Ns> spaces_;
};

}  // namespace oracle
