#include "slicelat/delay_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "slicelat/error.hpp"

namespace slicelat {

std::size_t HistogramLayout::bin_count() const noexcept {
    return bin_index(max_value) + 1;
}

std::size_t HistogramLayout::bin_index(std::uint64_t value) const noexcept {
    const std::uint64_t exact_limit = std::uint64_t{1} << (precision_bits + 1);
    if (value < exact_limit) {
        return static_cast<std::size_t>(value);
    }
    const unsigned magnitude = static_cast<unsigned>(std::bit_width(value)) - 1;
    const unsigned shift = magnitude - precision_bits;
    const std::uint64_t sub = value >> shift;  // in [2^p, 2^(p+1))
    const std::uint64_t half = std::uint64_t{1} << precision_bits;
    return static_cast<std::size_t>(exact_limit + (shift - 1) * half + (sub - half));
}

std::uint64_t HistogramLayout::bin_lower(std::size_t index) const noexcept {
    const std::uint64_t exact_limit = std::uint64_t{1} << (precision_bits + 1);
    if (index < exact_limit) {
        return index;
    }
    const std::uint64_t half = std::uint64_t{1} << precision_bits;
    const std::uint64_t rel = index - exact_limit;
    const unsigned shift = static_cast<unsigned>(rel / half) + 1;
    const std::uint64_t sub = half + rel % half;
    return sub << shift;
}

std::uint64_t HistogramLayout::bin_upper(std::size_t index) const noexcept {
    const std::uint64_t exact_limit = std::uint64_t{1} << (precision_bits + 1);
    if (index < exact_limit) {
        return index;
    }
    const std::uint64_t half = std::uint64_t{1} << precision_bits;
    const unsigned shift = static_cast<unsigned>((index - exact_limit) / half) + 1;
    return bin_lower(index) + (std::uint64_t{1} << shift) - 1;
}

std::uint64_t nearest_rank(double q, std::uint64_t count) noexcept {
    const double r = q * static_cast<double>(count);
    // Absorb representation error such as 0.07 * 100 == 7.000000000000001.
    const double k = std::ceil(r - r * 1e-12);
    if (k < 1.0) {
        return 1;
    }
    return std::min(count, static_cast<std::uint64_t>(k));
}

DelayStats::DelayStats(HistogramLayout layout) : layout_(layout) {
    if (layout_.precision_bits < 1 || layout_.precision_bits > 20 ||
        layout_.max_value < (std::uint64_t{1} << (layout_.precision_bits + 1)) ||
        layout_.max_value > (std::uint64_t{1} << 62)) {
        throw Error(ErrorCode::InvalidConfig, "unsupported histogram layout");
    }
    bins_.assign(layout_.bin_count(), 0);
}

void DelayStats::observe(std::int64_t delay_ns) {
    if (delay_ns < 0) {
        throw Error(ErrorCode::NegativeDelay, "delay " + std::to_string(delay_ns) + " ns");
    }
    observe(static_cast<std::uint64_t>(delay_ns));
}

void DelayStats::observe(std::uint64_t delay_ns) noexcept {
    if (delay_ns == 0) {
        ++underflow_;
    } else if (delay_ns > layout_.max_value) {
        ++overflow_;
    } else {
        ++bins_[layout_.bin_index(delay_ns)];
    }
    ++count_;
    sum_ += delay_ns;
    min_ = std::min(min_, delay_ns);
    max_ = std::max(max_, delay_ns);
}

double DelayStats::mean() const noexcept {
    return count_ == 0 ? 0.0 : static_cast<double>(sum_) / static_cast<double>(count_);
}

std::uint64_t DelayStats::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::InvalidQuantile, "q = " + std::to_string(q));
    }
    if (count_ == 0) {
        throw Error(ErrorCode::EmptyStats, "quantile of empty statistics");
    }
    const std::uint64_t rank = nearest_rank(q, count_);
    std::uint64_t cumulative = underflow_;
    if (cumulative >= rank) {
        return 0;
    }
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        cumulative += bins_[i];
        if (cumulative >= rank) {
            return std::clamp(layout_.bin_upper(i), min_, max_);
        }
    }
    return max_;
}

std::vector<std::pair<std::uint64_t, double>> DelayStats::cdf_points(std::size_t resolution) const {
    if (count_ == 0) {
        throw Error(ErrorCode::EmptyStats, "CDF of empty statistics");
    }
    if (resolution == 0) {
        throw Error(ErrorCode::InvalidQuantile, "CDF resolution must be positive");
    }
    std::vector<std::pair<std::uint64_t, double>> points;
    const double total = static_cast<double>(count_);
    std::size_t step = 1;
    auto target = [&](std::size_t i) {
        return nearest_rank(static_cast<double>(i) / static_cast<double>(resolution), count_);
    };
    auto emit = [&](std::uint64_t value, std::uint64_t cumulative) {
        const double fraction = cumulative == count_ ? 1.0 : static_cast<double>(cumulative) / total;
        if (!points.empty() && points.back().first == value) {
            points.back().second = fraction;
        } else {
            points.emplace_back(value, fraction);
        }
    };

    std::uint64_t cumulative = underflow_;
    if (cumulative > 0) {
        while (step <= resolution && target(step) <= cumulative) {
            emit(0, cumulative);
            ++step;
        }
    }
    for (std::size_t i = 0; i < bins_.size() && step <= resolution; ++i) {
        if (bins_[i] == 0) {
            continue;
        }
        cumulative += bins_[i];
        bool hit = false;
        while (step <= resolution && target(step) <= cumulative) {
            hit = true;
            ++step;
        }
        if (hit) {
            emit(std::clamp(layout_.bin_upper(i), min_, max_), cumulative);
        }
    }
    if (step <= resolution) {
        emit(max_, count_);
    }
    return points;
}

DelayStats& DelayStats::merge(const DelayStats& other) {
    if (!(layout_ == other.layout_)) {
        throw Error(ErrorCode::LayoutMismatch, "cannot merge statistics with different bin layouts");
    }
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        bins_[i] += other.bins_[i];
    }
    underflow_ += other.underflow_;
    overflow_ += other.overflow_;
    count_ += other.count_;
    sum_ += other.sum_;
    min_ = std::min(min_, other.min_);
    max_ = std::max(max_, other.max_);
    return *this;
}

DelayStats DelayStats::merged(DelayStats a, const DelayStats& b) {
    a.merge(b);
    return a;
}

DelayStats DelayStats::restore(HistogramLayout layout, std::uint64_t sum, std::uint64_t min,
                               std::uint64_t max, std::uint64_t underflow, std::uint64_t overflow,
                               std::vector<std::uint64_t> bins) {
    DelayStats s(layout);
    if (bins.size() != s.bins_.size()) {
        throw Error(ErrorCode::SchemaError, "bin count does not match layout");
    }
    s.bins_ = std::move(bins);
    s.underflow_ = underflow;
    s.overflow_ = overflow;
    s.count_ = underflow + overflow;
    for (auto c : s.bins_) {
        s.count_ += c;
    }
    s.sum_ = sum;
    if (s.count_ > 0) {
        if (min > max) {
            throw Error(ErrorCode::SchemaError, "min exceeds max");
        }
        s.min_ = min;
        s.max_ = max;
    }
    return s;
}

}  // namespace slicelat
