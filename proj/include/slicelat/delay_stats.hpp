#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace slicelat {

/// Log-linear bin layout. Values below 2^(precision_bits+1) ns get exact
/// one-nanosecond bins; above that every power-of-two range is split into
/// 2^precision_bits linear bins, so a bin is never wider than
/// 2^-precision_bits of the values it holds. Zero goes to the underflow bin and
/// anything above max_value to the overflow bin.
struct HistogramLayout {
    unsigned precision_bits = 10;
    std::uint64_t max_value = 10'000'000'000;  // 10 s

    [[nodiscard]] std::size_t bin_count() const noexcept;
    [[nodiscard]] std::size_t bin_index(std::uint64_t value) const noexcept;  // 1 <= value <= max_value
    [[nodiscard]] std::uint64_t bin_lower(std::size_t index) const noexcept;
    [[nodiscard]] std::uint64_t bin_upper(std::size_t index) const noexcept;  // inclusive

    friend bool operator==(const HistogramLayout&, const HistogramLayout&) = default;
};

/// Nearest-rank position ceil(q * count), at least 1.
[[nodiscard]] std::uint64_t nearest_rank(double q, std::uint64_t count) noexcept;

/// Mergeable histogram summary of nanosecond delays.
class DelayStats {
public:
    explicit DelayStats(HistogramLayout layout = {});

    /// Throws Error{NegativeDelay}.
    void observe(std::int64_t delay_ns);
    void observe(std::uint64_t delay_ns) noexcept;

    /// Smallest bin upper bound b whose cumulative count reaches
    /// ceil(q * count), clamped to the observed [min, max]. Throws
    /// Error{EmptyStats} or Error{InvalidQuantile}.
    [[nodiscard]] std::uint64_t quantile(double q) const;

    /// (delay, cumulative fraction) at `resolution` evenly spaced quantiles,
    /// with repeated delays collapsed. The last point is (max, 1.0).
    [[nodiscard]] std::vector<std::pair<std::uint64_t, double>> cdf_points(std::size_t resolution) const;

    /// Throws Error{LayoutMismatch}.
    DelayStats& merge(const DelayStats& other);
    [[nodiscard]] static DelayStats merged(DelayStats a, const DelayStats& b);

    [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
    [[nodiscard]] std::uint64_t sum() const noexcept { return sum_; }
    [[nodiscard]] std::uint64_t min() const noexcept { return count_ ? min_ : 0; }
    [[nodiscard]] std::uint64_t max() const noexcept { return max_; }
    [[nodiscard]] double mean() const noexcept;
    [[nodiscard]] std::uint64_t underflow() const noexcept { return underflow_; }
    [[nodiscard]] std::uint64_t overflow() const noexcept { return overflow_; }
    [[nodiscard]] const std::vector<std::uint64_t>& bins() const noexcept { return bins_; }
    [[nodiscard]] const HistogramLayout& layout() const noexcept { return layout_; }

    /// Rebuilds a summary from its serialized parts. Throws Error{SchemaError}
    /// when the parts are inconsistent (bin count or totals).
    static DelayStats restore(HistogramLayout layout, std::uint64_t sum, std::uint64_t min,
                              std::uint64_t max, std::uint64_t underflow, std::uint64_t overflow,
                              std::vector<std::uint64_t> bins);

    friend bool operator==(const DelayStats&, const DelayStats&) = default;

private:
    HistogramLayout layout_;
    std::vector<std::uint64_t> bins_;
    std::uint64_t underflow_ = 0;
    std::uint64_t overflow_ = 0;
    std::uint64_t count_ = 0;
    std::uint64_t sum_ = 0;
    std::uint64_t min_ = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t max_ = 0;
};

}  // namespace slicelat
