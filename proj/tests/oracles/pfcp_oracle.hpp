#pragma once

// List-based reference for N4 request/response pairing.

#include <cstdint>
#include <optional>
#include <vector>

#include "slicelat/pfcp_tracker.hpp"

namespace oracle {

class PfcpOracle {
public:
    std::optional<slicelat::PfcpTransaction> feed(const slicelat::ProbeEvent& ev) {
        const std::uint32_t seq = ev.pfcp->sequence;
        const std::uint8_t mt = ev.pfcp->message_type;
        if (ev.point == slicelat::ProbePoint::PfcpSend) {
            for (auto& p : pending) {
                if (p.seq == seq) {
                    p.retx = true;
                    ++retransmissions;
                    return std::nullopt;
                }
            }
            if (have_last && last > seq && last - seq > (1u << 23)) {
                lost += pending.size();
                pending.clear();
            }
            have_last = true;
            last = seq;
            pending.push_back({seq, mt, ev.timestamp_ns, false});
            ++sends;
            return std::nullopt;
        }
        ++recvs;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const Req r = pending[i];
            if (r.seq != seq) continue;
            if (response_type(r.mt) != mt || ev.timestamp_ns < r.t) break;
            pending.erase(pending.begin() + static_cast<long>(i));
            ++transactions;
            slicelat::PfcpTransaction t;
            t.sequence = seq;
            t.request_type = r.mt;
            t.msg_class = r.mt == 50   ? slicelat::PfcpClass::Establishment
                          : r.mt == 52 ? slicelat::PfcpClass::Modification
                          : r.mt == 54 ? slicelat::PfcpClass::Deletion
                                       : slicelat::PfcpClass::Other;
            t.t_send = r.t;
            t.t_recv = ev.timestamp_ns;
            t.rtt = t.t_recv - t.t_send;
            t.retransmitted = r.retx;
            return t;
        }
        ++orphans;
        return std::nullopt;
    }

    void sweep(std::uint64_t now, std::uint64_t timeout) {
        for (std::size_t i = 0; i < pending.size();) {
            if (now > pending[i].t && now - pending[i].t > timeout) {
                pending.erase(pending.begin() + static_cast<long>(i));
                ++lost;
            } else {
                ++i;
            }
        }
    }

    std::uint64_t sends = 0, retransmissions = 0, recvs = 0, transactions = 0, orphans = 0, lost = 0;

    struct Req {
        std::uint32_t seq;
        std::uint8_t mt;
        std::uint64_t t;
        bool retx;
    };
    std::vector<Req> pending;

private:
    static int response_type(std::uint8_t req) {
        switch (req) {
            case 1: case 3: case 5: case 7: case 9: case 12: case 14: case 16:
            case 50: case 52: case 54: case 56:
                return req + 1;
            default:
                return -1;
        }
    }

    bool have_last = false;
    std::uint32_t last = 0;
};

}  // namespace oracle
