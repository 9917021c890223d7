#include "slicelat/matcher.hpp"

#include <algorithm>
#include <limits>

#include "slicelat/error.hpp"

namespace slicelat {

namespace {

std::uint64_t as_ns(std::chrono::nanoseconds d) {
    return static_cast<std::uint64_t>(d.count());
}

// now - ts > limit, without wrapping.
bool older_than(std::uint64_t ts, std::uint64_t now, std::uint64_t limit) {
    return now > ts && now - ts > limit;
}

void erase_from_index(std::unordered_map<FlowKey, std::vector<std::uint64_t>>& index, FlowKey key,
                      std::uint64_t seq) {
    auto it = index.find(key);
    if (it == index.end()) {
        return;
    }
    auto& seqs = it->second;
    seqs.erase(std::remove(seqs.begin(), seqs.end(), seq), seqs.end());
    if (seqs.empty()) {
        index.erase(it);
    }
}

}  // namespace

void MatcherConfig::validate() const {
    if (window.count() <= 0) {
        throw Error(ErrorCode::InvalidConfig, "window must be positive");
    }
    if (capacity == 0) {
        throw Error(ErrorCode::InvalidConfig, "capacity must be positive");
    }
    if (reorder_slack.count() < 0 || reorder_slack >= window) {
        throw Error(ErrorCode::InvalidConfig, "reorder_slack must be in [0, window)");
    }
}

double MatchAccounting::match_rate() const noexcept {
    const std::uint64_t denom = std::max(m1_total, m3_total);
    return denom == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(denom);
}

bool MatchAccounting::conserved() const noexcept {
    return matched + m1_evicted + m1_expired + pending_m1 == m1_total &&
           matched + m3_orphaned + pending_m3 == m3_total;
}

MatchAccounting& MatchAccounting::operator+=(const MatchAccounting& o) noexcept {
    m1_total += o.m1_total;
    m3_total += o.m3_total;
    matched += o.matched;
    m1_evicted += o.m1_evicted;
    m1_expired += o.m1_expired;
    m3_orphaned += o.m3_orphaned;
    malformed += o.malformed;
    pending_m1 += o.pending_m1;
    pending_m3 += o.pending_m3;
    return *this;
}

Matcher::Matcher(MatcherConfig config) : config_(config) {
    config_.validate();
}

void Matcher::erase_m1(Namespace& ns, std::uint64_t seq) {
    auto it = ns.m1.find(seq);
    ns.m1_by_time.erase({it->second.t_m1, seq});
    erase_from_index(ns.m1_by_key, it->second.key, seq);
    ns.m1.erase(it);
}

void Matcher::erase_m3(Namespace& ns, std::uint64_t seq) {
    auto it = ns.m3.find(seq);
    ns.m3_by_time.erase({it->second.t_m3, seq});
    erase_from_index(ns.m3_by_key, it->second.key, seq);
    ns.m3.erase(it);
}

void Matcher::retire(const std::string& name, Namespace& ns, std::uint64_t now,
                     std::uint64_t m1_limit, std::uint64_t m3_limit, std::vector<Expiration>* out) {
    while (!ns.m1_by_time.empty() && older_than(ns.m1_by_time.begin()->first, now, m1_limit)) {
        const auto [ts, seq] = *ns.m1_by_time.begin();
        if (out) {
            out->push_back({ExpirationKind::M1Expired, name, ns.m1.at(seq).key, ts});
        }
        erase_m1(ns, seq);
        ++ns.acct.m1_expired;
    }
    while (!ns.m3_by_time.empty() && older_than(ns.m3_by_time.begin()->first, now, m3_limit)) {
        const auto [ts, seq] = *ns.m3_by_time.begin();
        if (out) {
            out->push_back({ExpirationKind::M3Orphaned, name, ns.m3.at(seq).key, ts});
        }
        erase_m3(ns, seq);
        ++ns.acct.m3_orphaned;
    }
}

std::optional<MatchedPair> Matcher::on_event(const ProbeEvent& event) {
    if (!is_forwarding_point(event.point)) {
        throw Error(ErrorCode::WrongEventKind,
                    std::string(to_string(event.point)) + " event routed to the forwarding matcher");
    }
    if (!event.flow_key || (event.point == ProbePoint::M1 && !event.teid)) {
        throw Error(ErrorCode::InvalidEvent, "forwarding event without flow key");
    }
    const std::uint64_t window = as_ns(config_.window);
    const std::uint64_t slack = as_ns(config_.reorder_slack);
    const FlowKey key = *event.flow_key;
    const std::uint64_t ts = event.timestamp_ns;

    auto [ns_it, inserted] = namespaces_.try_emplace(event.ns);
    Namespace& ns = ns_it->second;
    ns.clock = std::max(ns.clock, ts);
    retire(ns_it->first, ns, ns.clock, window + slack, slack, nullptr);

    if (event.point == ProbePoint::M1) {
        ++ns.acct.m1_total;
        if (auto held = ns.m3_by_key.find(key); held != ns.m3_by_key.end()) {
            std::optional<std::uint64_t> best;
            std::uint64_t best_t = 0;
            for (std::uint64_t seq : held->second) {
                const std::uint64_t t3 = ns.m3.at(seq).t_m3;
                if (t3 < ts || t3 - ts > window) {
                    continue;
                }
                if (!best || t3 < best_t || (t3 == best_t && seq < *best)) {
                    best = seq;
                    best_t = t3;
                }
            }
            if (best) {
                erase_m3(ns, *best);
                ++ns.acct.matched;
                return MatchedPair{ns_it->first, *event.teid, key, ts, best_t, best_t - ts};
            }
        }
        if (ns.m1.size() >= config_.capacity) {
            erase_m1(ns, ns.m1.begin()->first);
            ++ns.acct.m1_evicted;
        }
        const std::uint64_t seq = ns.next_seq++;
        ns.m1.emplace(seq, M1Entry{key, *event.teid, ts});
        ns.m1_by_time.emplace(ts, seq);
        ns.m1_by_key[key].push_back(seq);
        return std::nullopt;
    }

    ++ns.acct.m3_total;
    if (auto cand = ns.m1_by_key.find(key); cand != ns.m1_by_key.end()) {
        std::optional<std::uint64_t> best;
        std::uint64_t best_t = 0;
        for (std::uint64_t seq : cand->second) {
            const std::uint64_t t1 = ns.m1.at(seq).t_m1;
            if (ts < t1 || ts - t1 > window) {
                continue;
            }
            if (!best || t1 < best_t || (t1 == best_t && seq < *best)) {
                best = seq;
                best_t = t1;
            }
        }
        if (best) {
            const std::uint32_t teid = ns.m1.at(*best).teid;
            erase_m1(ns, *best);
            ++ns.acct.matched;
            return MatchedPair{ns_it->first, teid, key, best_t, ts, ts - best_t};
        }
    }
    const std::uint64_t seq = ns.next_seq++;
    ns.m3.emplace(seq, M3Entry{key, ts});
    ns.m3_by_time.emplace(ts, seq);
    ns.m3_by_key[key].push_back(seq);
    return std::nullopt;
}

std::vector<Expiration> Matcher::flush(std::uint64_t now) {
    const std::uint64_t window = as_ns(config_.window);
    const std::uint64_t slack = as_ns(config_.reorder_slack);
    for (const auto& [name, ns] : namespaces_) {
        if (now < ns.clock && ns.clock - now > slack) {
            throw Error(ErrorCode::ClockRegression,
                        "flush at " + std::to_string(now) + " behind stream clock " +
                            std::to_string(ns.clock) + " of " + name);
        }
    }
    std::vector<Expiration> out;
    for (auto& [name, ns] : namespaces_) {
        ns.clock = std::max(ns.clock, now);
        retire(name, ns, now, window, slack, &out);
    }
    return out;
}

std::vector<Expiration> Matcher::drain() {
    std::uint64_t latest = 0;
    for (const auto& [name, ns] : namespaces_) {
        latest = std::max(latest, ns.clock);
    }
    const std::uint64_t pad = as_ns(config_.window) + as_ns(config_.reorder_slack) + 1;
    const std::uint64_t now = latest > std::numeric_limits<std::uint64_t>::max() - pad
                                  ? std::numeric_limits<std::uint64_t>::max()
                                  : latest + pad;
    return flush(now);
}

MatchAccounting Matcher::accounting(const std::string& name) const {
    auto it = namespaces_.find(name);
    if (it == namespaces_.end()) {
        return {};
    }
    MatchAccounting acct = it->second.acct;
    acct.pending_m1 = it->second.m1.size();
    acct.pending_m3 = it->second.m3.size();
    return acct;
}

MatchAccounting Matcher::accounting() const {
    MatchAccounting total;
    for (const auto& [name, ns] : namespaces_) {
        total += accounting(name);
    }
    total.malformed = malformed_;
    return total;
}

std::vector<std::string> Matcher::namespaces() const {
    std::vector<std::string> names;
    names.reserve(namespaces_.size());
    for (const auto& [name, ns] : namespaces_) {
        names.push_back(name);
    }
    return names;
}

std::size_t Matcher::buffered(const std::string& name) const {
    auto it = namespaces_.find(name);
    return it == namespaces_.end() ? 0 : it->second.m1.size();
}

}  // namespace slicelat
