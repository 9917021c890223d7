#pragma once

// Exact nearest-rank percentiles over a sorted copy of the samples.

#include <algorithm>
#include <cstdint>
#include <vector>

namespace oracle {

/// Value at rank ceil(pct * n / 100), computed in integers.
inline std::uint64_t exact_percentile(std::vector<std::uint64_t> samples, unsigned pct) {
    const std::uint64_t n = samples.size();
    std::uint64_t rank = (pct * n + 99) / 100;
    if (rank == 0) rank = 1;
    std::nth_element(samples.begin(), samples.begin() + static_cast<long>(rank - 1), samples.end());
    return samples[rank - 1];
}

inline std::uint64_t exact_percentile_sorted(const std::vector<std::uint64_t>& sorted, unsigned pct) {
    const std::uint64_t n = sorted.size();
    std::uint64_t rank = (pct * n + 99) / 100;
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
}

}  // namespace oracle
