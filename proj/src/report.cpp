#include "slicelat/report.hpp"

#include <array>
#include <set>
#include <sstream>
#include <string_view>

namespace slicelat {

namespace {

constexpr std::array<std::string_view, 3> kSlices{"eMBB", "URLLC", "mMTC"};
constexpr std::array<std::string_view, 4> kClasses{"Establishment", "Modification", "Deletion", "Other"};
constexpr std::array<std::string_view, 3> kLoads{"Light", "Medium", "Heavy"};

template <std::size_t N>
std::size_t rank_of(const std::array<std::string_view, N>& known, const std::string& label) {
    for (std::size_t i = 0; i < N; ++i) {
        if (known[i] == label) {
            return i;
        }
    }
    return N;
}

bool label_less(const std::string& a, const std::string& b) {
    const auto ra = std::min(rank_of(kSlices, a), rank_of(kClasses, a) + 10);
    const auto rb = std::min(rank_of(kSlices, b), rank_of(kClasses, b) + 10);
    if (ra != rb) {
        return ra < rb;
    }
    return a < b;
}

bool load_less(const std::string& a, const std::string& b) {
    const auto ra = rank_of(kLoads, a);
    const auto rb = rank_of(kLoads, b);
    if (ra != rb) {
        return ra < rb;
    }
    return a < b;
}

std::string us_cell(std::uint64_t ns) {
    return std::to_string(to_whole_us(ns));
}

}  // namespace

bool LabelOrder::operator()(const std::pair<std::string, std::string>& a,
                            const std::pair<std::string, std::string>& b) const {
    if (a.first != b.first) {
        return label_less(a.first, b.first);
    }
    if (a.second != b.second) {
        return load_less(a.second, b.second);
    }
    return false;
}

std::uint64_t to_whole_us(std::uint64_t ns) noexcept {
    return (ns + 500) / 1000;
}

std::string render_forwarding_table(const ForwardingStats& stats) {
    std::set<std::pair<std::string, std::string>, LabelOrder> rows;
    for (auto slice : kSlices) {
        for (auto load : kLoads) {
            rows.emplace(std::string(slice), std::string(load));
        }
    }
    for (const auto& [key, s] : stats) {
        rows.insert(key);
    }

    std::ostringstream out;
    out << "| Slice | Load | N | P50 (µs) | P99 (µs) |\n";
    out << "|:------|:-----|--:|---------:|---------:|\n";
    for (const auto& key : rows) {
        auto it = stats.find(key);
        out << "| " << key.first << " | " << key.second << " | ";
        if (it == stats.end() || it->second.count() == 0) {
            out << "0 | no data | no data |\n";
            continue;
        }
        const DelayStats& s = it->second;
        out << s.count() << " | " << us_cell(s.quantile(0.50)) << " | " << us_cell(s.quantile(0.99)) << " |\n";
    }
    return out.str();
}

std::string render_pfcp_tables(const PfcpStats& stats) {
    std::set<std::string, decltype(&label_less)> classes(&label_less);
    classes.insert("Modification");
    for (const auto& [key, s] : stats) {
        classes.insert(key.first);
    }

    std::ostringstream out;
    bool first = true;
    for (const auto& cls : classes) {
        std::set<std::string, decltype(&load_less)> loads(&load_less);
        for (auto load : kLoads) {
            loads.emplace(load);
        }
        for (const auto& [key, s] : stats) {
            if (key.first == cls) {
                loads.insert(key.second);
            }
        }
        if (!first) {
            out << '\n';
        }
        first = false;
        out << "#### PFCP Session " << cls << " RTT\n\n";
        out << "| Load | N | Mean (µs) | P99 (µs) |\n";
        out << "|:-----|--:|----------:|---------:|\n";
        for (const auto& load : loads) {
            auto it = stats.find({cls, load});
            out << "| " << load << " | ";
            if (it == stats.end() || it->second.count() == 0) {
                out << "0 | no data | no data |\n";
                continue;
            }
            const DelayStats& s = it->second;
            const auto mean_ns = static_cast<std::uint64_t>(s.mean() + 0.5);
            out << s.count() << " | " << us_cell(mean_ns) << " | " << us_cell(s.quantile(0.99)) << " |\n";
        }
    }
    return out.str();
}

}  // namespace slicelat
