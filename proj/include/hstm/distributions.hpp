#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hstm/traffic_matrix.hpp"

namespace hstm {

// Histogram of a degree distribution: n(d) = number of elements with
// degree exactly d.  Degrees and counts are both >= 1.
class DegreeHistogram {
public:
    DegreeHistogram() = default;

    static DegreeHistogram from_degrees(const DegreeVector& v) {
        std::vector<std::uint64_t> degrees;
        degrees.reserve(v.size());
        for (const auto& e : v.entries()) degrees.push_back(e.degree);
        return from_values(degrees);
    }

    static DegreeHistogram from_values(std::span<const std::uint64_t> values) {
        std::vector<std::uint64_t> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end());
        DegreeHistogram h;
        for (std::size_t i = 0; i < sorted.size();) {
            if (sorted[i] == 0) throw std::invalid_argument("hstm: zero degree in histogram");
            std::size_t j = i + 1;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            h.counts_.emplace_back(sorted[i], j - i);
            i = j;
        }
        h.total_ = sorted.size();
        return h;
    }

    // (degree, count) sorted by degree
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& counts() const { return counts_; }
    std::uint64_t total_count() const { return total_; }
    bool empty() const { return counts_.empty(); }
    std::uint64_t max_degree() const { return counts_.empty() ? 0 : counts_.back().first; }

private:
    std::vector<std::pair<std::uint64_t, std::uint64_t>> counts_;
    std::uint64_t total_ = 0;
};

inline DegreeHistogram histogram(const DegreeVector& v) { return DegreeHistogram::from_degrees(v); }
inline DegreeHistogram histogram(std::span<const std::uint64_t> values) {
    return DegreeHistogram::from_values(values);
}

// Cumulative probability P(d) at each observed degree, nondecreasing.
inline std::vector<std::pair<std::uint64_t, double>> cumulative_probability(const DegreeHistogram& h) {
    if (h.empty()) throw std::invalid_argument("hstm: cumulative of empty histogram");
    std::vector<std::pair<std::uint64_t, double>> out;
    out.reserve(h.counts().size());
    const auto norm = static_cast<double>(h.total_count());
    std::uint64_t cum = 0;
    for (const auto& [degree, count] : h.counts()) {
        cum += count;
        out.emplace_back(degree, static_cast<double>(cum) / norm);
    }
    return out;
}

// Probability mass pooled into binary logarithmic bins.  Bin 0 covers
// degree 1 exactly; bin i >= 1 covers degrees in (2^(i-1), 2^i].  Bins run
// through ceil(log2(d_max)), zero-mass bins included.
struct BinnedDistribution {
    struct Bin {
        unsigned index = 0;
        std::uint64_t upper_edge = 1;  // 2^index
        double mass = 0.0;

        friend bool operator==(const Bin&, const Bin&) = default;
    };

    std::vector<Bin> bins;

    double total_mass() const {
        double s = 0.0;
        for (const auto& b : bins) s += b.mass;
        return s;
    }

    friend bool operator==(const BinnedDistribution&, const BinnedDistribution&) = default;
};

inline unsigned log_bin_index(std::uint64_t degree) {
    // degree 1 -> 0; degree in (2^(i-1), 2^i] -> i
    unsigned i = 0;
    while ((1ull << i) < degree) ++i;
    return i;
}

// Bin masses are formed from integer bin counts and divided once by the
// normalization, so the masses of a nonempty histogram sum to 1 up to a
// few ulps regardless of how many degrees were pooled.
inline BinnedDistribution bin_distribution(const DegreeHistogram& h) {
    if (h.empty()) {
        throw std::invalid_argument("hstm: cannot bin an empty histogram");
    }
    if (h.max_degree() > (1ull << 63)) {
        throw std::invalid_argument("hstm: degree exceeds binnable range");
    }
    const unsigned top = log_bin_index(h.max_degree());
    std::vector<std::uint64_t> bin_counts(top + 1, 0);
    for (const auto& [degree, count] : h.counts()) {
        bin_counts[log_bin_index(degree)] += count;
    }
    BinnedDistribution d;
    d.bins.reserve(bin_counts.size());
    const auto norm = static_cast<double>(h.total_count());
    for (unsigned i = 0; i <= top; ++i) {
        d.bins.push_back({i, 1ull << i, static_cast<double>(bin_counts[i]) / norm});
    }
    return d;
}

// Per-bin mean and population standard deviation over a set of windows.
// Bins are aligned by index; a window that lacks a bin contributes mass 0
// there.  Means come from compensated sums (their total stays at 1 within
// a few ulps however many windows are folded in); variances come from
// Welford updates, so identical inputs give exactly zero deviation.
class DistributionStats {
public:
    void accumulate(const BinnedDistribution& dist) {
        if (dist.bins.size() > bins_.size()) grow(dist.bins.size());
        ++count_;
        const auto n = static_cast<double>(count_);
        for (std::size_t i = 0; i < bins_.size(); ++i) {
            const double x = i < dist.bins.size() ? dist.bins[i].mass : 0.0;
            auto& b = bins_[i];
            // compensated running sum
            const double y = x - b.compensation;
            const double t = b.sum + y;
            b.compensation = (t - b.sum) - y;
            b.sum = t;
            // Welford
            const double delta = x - b.mean;
            b.mean += delta / n;
            b.m2 += delta * (x - b.mean);
        }
    }

    std::uint64_t window_count() const { return count_; }
    std::size_t bin_count() const { return bins_.size(); }

    double mean(std::size_t bin) const { return bins_.at(bin).sum / static_cast<double>(count_); }

    double stddev(std::size_t bin) const {
        return std::sqrt(std::max(0.0, bins_.at(bin).m2 / static_cast<double>(count_)));
    }

    std::uint64_t upper_edge(std::size_t bin) const { return 1ull << bin; }

private:
    void grow(std::size_t n) {
        // a bin first seen now behaves as if every earlier window had
        // contributed mass 0 to it, which leaves mean and m2 at zero
        bins_.resize(n);
    }

    struct BinState {
        double sum = 0.0;
        double compensation = 0.0;
        double mean = 0.0;
        double m2 = 0.0;
    };

    std::vector<BinState> bins_;
    std::uint64_t count_ = 0;
};

inline DistributionStats window_stats(std::span<const BinnedDistribution> distributions) {
    if (distributions.empty()) {
        throw std::invalid_argument("hstm: window_stats needs at least one distribution");
    }
    DistributionStats stats;
    for (const auto& d : distributions) stats.accumulate(d);
    return stats;
}

}  // namespace hstm
