#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hstm/core.hpp"

namespace hstm {

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline unsigned log2_exact(std::uint64_t v) {
    if (!is_power_of_two(v)) throw std::invalid_argument("hstm: value is not a power of two");
    unsigned i = 0;
    while ((1ull << i) < v) ++i;
    return i;
}

struct ScalingSample {
    std::uint64_t window_size = 0;  // N_V
    double mean = 0.0;
    double stddev = 0.0;
};

// Fitted power law Q ~ c * N_V^alpha for one quantity across window
// sizes, from ordinary least squares on log2-log2 axes.
struct ScalingFit {
    std::string quantity;
    std::vector<ScalingSample> samples;
    double exponent = 0.0;        // alpha
    double intercept_log2 = 0.0;  // c with log2(Q) = alpha*log2(N_V) + c
    double rms_residual = 0.0;    // in log2 units
    bool simple_scaling = false;  // false: no simple scaling relation observed
};

inline constexpr double kDefaultResidualThreshold = 0.15;

inline ScalingFit fit_scaling(std::string quantity, std::span<const ScalingSample> samples,
                              double residual_threshold = kDefaultResidualThreshold) {
    if (samples.size() < 2) {
        throw std::invalid_argument("hstm: scaling fit needs at least two levels");
    }
    std::uint64_t prev = 0;
    for (const auto& s : samples) {
        if (!is_power_of_two(s.window_size)) {
            throw std::invalid_argument("hstm: window sizes must be powers of two");
        }
        if (s.window_size <= prev) {
            throw std::invalid_argument("hstm: window sizes must be strictly increasing");
        }
        if (!(s.mean > 0.0)) {
            throw std::invalid_argument("hstm: scaling fit requires positive means");
        }
        prev = s.window_size;
    }

    const auto n = static_cast<double>(samples.size());
    double sx = 0, sy = 0;
    for (const auto& s : samples) {
        sx += std::log2(static_cast<double>(s.window_size));
        sy += std::log2(s.mean);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        const double dx = std::log2(static_cast<double>(s.window_size)) - mx;
        const double dy = std::log2(s.mean) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    ScalingFit fit;
    fit.quantity = std::move(quantity);
    fit.samples.assign(samples.begin(), samples.end());
    fit.exponent = sxy / sxx;
    fit.intercept_log2 = my - fit.exponent * mx;
    double ss = 0;
    for (const auto& s : samples) {
        const double r = std::log2(s.mean) -
                         (fit.exponent * std::log2(static_cast<double>(s.window_size)) +
                          fit.intercept_log2);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    fit.simple_scaling = fit.rms_residual <= residual_threshold;
    return fit;
}

inline ScalingFit fit_scaling(std::string quantity, std::initializer_list<ScalingSample> samples,
                              double residual_threshold = kDefaultResidualThreshold) {
    return fit_scaling(std::move(quantity), std::span(samples.begin(), samples.size()),
                       residual_threshold);
}

// One per-level time series of quantity / N_V, in window order.
struct AlignmentCurve {
    std::uint64_t window_size = 0;
    std::vector<double> series;
};

// Scales each curve by (N_V / N_0)^beta, block-averages every curve down
// to the coarsest level's time grid, and returns the mean over time of
// the relative spread (max - min) / mean across levels.  A small value
// certifies that the scaled curves collapse onto each other.
inline double alignment_dispersion(std::span<const AlignmentCurve> curves, double beta,
                                   std::uint64_t reference_window) {
    if (curves.size() < 2) {
        throw std::invalid_argument("hstm: alignment check needs at least two levels");
    }
    std::size_t cells = ~std::size_t{0};
    for (const auto& c : curves) {
        if (c.series.empty()) throw std::invalid_argument("hstm: empty alignment curve");
        cells = std::min(cells, c.series.size());
    }

    std::vector<std::vector<double>> grid;  // [level][cell]
    grid.reserve(curves.size());
    for (const auto& c : curves) {
        const double scale =
            std::pow(static_cast<double>(c.window_size) / static_cast<double>(reference_window), beta);
        const std::size_t block = c.series.size() / cells;
        std::vector<double> row(cells);
        for (std::size_t cell = 0; cell < cells; ++cell) {
            double sum = 0;
            for (std::size_t k = 0; k < block; ++k) sum += c.series[cell * block + k];
            row[cell] = scale * sum / static_cast<double>(block);
        }
        grid.push_back(std::move(row));
    }

    double dispersion_sum = 0;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double lo = grid[0][cell], hi = grid[0][cell], sum = 0;
        for (const auto& row : grid) {
            lo = std::min(lo, row[cell]);
            hi = std::max(hi, row[cell]);
            sum += row[cell];
        }
        const double mean = sum / static_cast<double>(grid.size());
        if (mean > 0) dispersion_sum += (hi - lo) / mean;
    }
    return dispersion_sum / static_cast<double>(cells);
}

}  // namespace hstm
