#include "slicelat/stats_json.hpp"

#include "slicelat/error.hpp"

namespace slicelat {

nlohmann::json stats_to_json(const DelayStats& stats) {
    nlohmann::json doc;
    doc["precision_bits"] = stats.layout().precision_bits;
    doc["max_value"] = stats.layout().max_value;
    doc["count"] = stats.count();
    doc["sum"] = stats.sum();
    doc["min"] = stats.min();
    doc["max"] = stats.max();
    doc["underflow"] = stats.underflow();
    doc["overflow"] = stats.overflow();
    if (stats.count() > 0) {
        doc["p50"] = stats.quantile(0.50);
        doc["p99"] = stats.quantile(0.99);
    }
    auto bins = nlohmann::json::array();
    const auto& counts = stats.bins();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] != 0) {
            bins.push_back({i, counts[i]});
        }
    }
    doc["bins"] = std::move(bins);
    return doc;
}

DelayStats stats_from_json(const nlohmann::json& doc) {
    try {
        HistogramLayout layout;
        layout.precision_bits = doc.at("precision_bits").get<unsigned>();
        layout.max_value = doc.at("max_value").get<std::uint64_t>();
        std::vector<std::uint64_t> bins(DelayStats(layout).bins().size(), 0);
        for (const auto& entry : doc.at("bins")) {
            const auto index = entry.at(0).get<std::size_t>();
            if (index >= bins.size()) {
                throw Error(ErrorCode::SchemaError, "bin index out of range");
            }
            bins[index] = entry.at(1).get<std::uint64_t>();
        }
        auto stats = DelayStats::restore(layout, doc.at("sum").get<std::uint64_t>(),
                                         doc.at("min").get<std::uint64_t>(), doc.at("max").get<std::uint64_t>(),
                                         doc.at("underflow").get<std::uint64_t>(),
                                         doc.at("overflow").get<std::uint64_t>(), std::move(bins));
        if (stats.count() != doc.at("count").get<std::uint64_t>()) {
            throw Error(ErrorCode::SchemaError, "count does not match bins");
        }
        return stats;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError) {
            throw;
        }
        throw Error(ErrorCode::SchemaError, e.what());
    }
}

nlohmann::json datasets_to_json(const ForwardingStats& forwarding, const PfcpStats& pfcp) {
    nlohmann::json doc;
    doc["forwarding"] = nlohmann::json::array();
    for (const auto& [key, stats] : forwarding) {
        doc["forwarding"].push_back({{"slice", key.first}, {"load", key.second}, {"stats", stats_to_json(stats)}});
    }
    doc["pfcp"] = nlohmann::json::array();
    for (const auto& [key, stats] : pfcp) {
        doc["pfcp"].push_back({{"msg_class", key.first}, {"load", key.second}, {"stats", stats_to_json(stats)}});
    }
    return doc;
}

}  // namespace slicelat
