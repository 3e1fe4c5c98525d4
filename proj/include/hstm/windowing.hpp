#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hstm/core.hpp"
#include "hstm/distributions.hpp"
#include "hstm/io.hpp"
#include "hstm/quantities.hpp"
#include "hstm/scaling.hpp"
#include "hstm/traffic_matrix.hpp"

namespace hstm {

// One analysis pass: constant-count windows of base_window valid packets
// at level 0, each higher level doubling the window by pairwise
// aggregation.
struct WindowSpec {
    std::uint64_t base_window = 0;  // N_V at level 0, power of two
    unsigned levels = 1;
    std::uint64_t start_index = 0;  // leaf windows skipped before analysis

    void validate() const {
        if (base_window < 2 || !is_power_of_two(base_window)) {
            throw std::invalid_argument("hstm: base window must be a power of two >= 2");
        }
        if (levels < 1) throw std::invalid_argument("hstm: hierarchy needs at least one level");
        if (log2_exact(base_window) + (levels - 1) > 63) {
            throw std::invalid_argument("hstm: top-level window size overflows uint64");
        }
    }

    std::uint64_t window_size(unsigned level) const { return base_window << level; }
};

// Splits a record list into consecutive disjoint windows of exactly
// `window` packets each; a trailing partial window is discarded.
inline std::vector<TrafficMatrix> partition(std::span<const PacketRecord> records,
                                            std::uint64_t window) {
    if (window == 0) throw std::invalid_argument("hstm: window size must be >= 1");
    std::vector<TrafficMatrix> out;
    for (std::size_t i = 0; i + window <= records.size(); i += window) {
        out.push_back(TrafficMatrix::from_records(records.subspan(i, window)));
    }
    return out;
}

template <class Fn>
void for_each_window(RecordSource& source, std::uint64_t window, Fn&& fn) {
    if (window == 0) throw std::invalid_argument("hstm: window size must be >= 1");
    std::vector<PacketRecord> buffer;
    buffer.reserve(window);
    while (auto rec = source.next()) {
        buffer.push_back(*rec);
        if (buffer.size() == window) {
            fn(TrafficMatrix::from_records(buffer));
            buffer.clear();
        }
    }
    // trailing partial window discarded
}

// Binary aggregation tree over a leaf-matrix stream.  Every completed
// window at every level is handed to the sink exactly once, in
// deterministic post-order; matrices are folded upward as soon as a
// sibling pair completes, so at most levels+1 matrices are resident at
// any moment regardless of stream length.
class HierarchyBuilder {
public:
    using Sink = std::function<void(unsigned level, std::uint64_t index, const TrafficMatrix&)>;

    HierarchyBuilder(unsigned levels, Sink sink) : levels_(levels), sink_(std::move(sink)) {
        if (levels < 1) throw std::invalid_argument("hstm: hierarchy needs at least one level");
        pending_.resize(levels);
        next_index_.assign(levels, 0);
    }

    void push_leaf(TrafficMatrix m) {
        retain(m);
        push(0, std::move(m));
    }

    // Unpaired matrices at every level are dropped; they belong to no
    // higher-level window.
    void finish() {
        for (auto& p : pending_) {
            if (p) {
                release(*p);
                p.reset();
            }
        }
    }

    std::uint64_t window_count(unsigned level) const { return next_index_.at(level); }
    unsigned peak_resident_matrices() const { return peak_count_; }
    std::uint64_t peak_resident_entries() const { return peak_entries_; }

private:
    void push(unsigned level, TrafficMatrix m) {
        const std::uint64_t index = next_index_[level]++;
        sink_(level, index, m);
        if (level + 1 >= levels_) {
            release(m);
            return;
        }
        if (!pending_[level]) {
            pending_[level] = std::move(m);
            return;
        }
        TrafficMatrix parent = add(*pending_[level], m);
        retain(parent);
        release(*pending_[level]);
        release(m);
        pending_[level].reset();
        push(level + 1, std::move(parent));
    }

    void retain(const TrafficMatrix& m) {
        ++count_;
        entries_ += m.nnz();
        peak_count_ = std::max(peak_count_, count_);
        peak_entries_ = std::max(peak_entries_, entries_);
    }

    void release(const TrafficMatrix& m) {
        --count_;
        entries_ -= m.nnz();
    }

    unsigned levels_;
    Sink sink_;
    std::vector<std::optional<TrafficMatrix>> pending_;
    std::vector<std::uint64_t> next_index_;
    unsigned count_ = 0;
    unsigned peak_count_ = 0;
    std::uint64_t entries_ = 0;
    std::uint64_t peak_entries_ = 0;
};

// Materialized form: level 0 is the leaf list, level k window m is the
// sum of level k-1 windows 2m and 2m+1; unpaired leftovers are dropped.
inline std::vector<std::vector<TrafficMatrix>> build_hierarchy(std::vector<TrafficMatrix> leaves,
                                                               unsigned levels) {
    if (levels < 1) throw std::invalid_argument("hstm: hierarchy needs at least one level");
    if (leaves.size() < (1ull << (levels - 1))) {
        throw std::invalid_argument("hstm: too few leaves for requested hierarchy depth");
    }
    std::vector<std::vector<TrafficMatrix>> out;
    out.push_back(std::move(leaves));
    for (unsigned k = 1; k < levels; ++k) {
        const auto& prev = out[k - 1];
        std::vector<TrafficMatrix> cur;
        cur.reserve(prev.size() / 2);
        for (std::size_t m = 0; m + 1 < prev.size(); m += 2) {
            cur.push_back(add(prev[m], prev[m + 1]));
        }
        out.push_back(std::move(cur));
    }
    return out;
}

// The five degree views a window can be binned by.
enum class DegreeType {
    source_packets,
    source_fanout,
    link_packets,
    destination_fanin,
    destination_packets,
};

inline constexpr std::array<DegreeType, 5> kAllDegreeTypes = {
    DegreeType::source_packets, DegreeType::source_fanout, DegreeType::link_packets,
    DegreeType::destination_fanin, DegreeType::destination_packets};

inline constexpr std::string_view degree_type_name(DegreeType t) {
    switch (t) {
        case DegreeType::source_packets: return "source_packets";
        case DegreeType::source_fanout: return "source_fanout";
        case DegreeType::link_packets: return "link_packets";
        case DegreeType::destination_fanin: return "destination_fanin";
        case DegreeType::destination_packets: return "destination_packets";
    }
    return "";
}

inline std::optional<DegreeType> degree_type_from_name(std::string_view name) {
    for (DegreeType t : kAllDegreeTypes) {
        if (degree_type_name(t) == name) return t;
    }
    return std::nullopt;
}

struct AnalysisRequest {
    std::optional<Quadrant> quadrant;  // analyze this quadrant of each window
    InternalNodes internal;            // consulted only when quadrant is set
    std::vector<DegreeType> distributions;
    unsigned threads = 1;
};

// Quantities of one window plus its requested binned distributions.  A
// distribution is absent when the window matrix is empty (nothing to
// normalize), which can happen under quadrant restriction.
struct WindowAnalysis {
    QuantityVector quantities;
    std::vector<std::optional<BinnedDistribution>> distributions;
};

inline WindowAnalysis analyze_window(const TrafficMatrix& m, std::span<const DegreeType> types) {
    WindowAnalysis wa;
    const DegreeVectorSet dv = degree_vectors(m);
    wa.quantities = compute_quantities(m, dv);
    wa.distributions.reserve(types.size());
    for (DegreeType t : types) {
        if (m.empty()) {
            wa.distributions.emplace_back(std::nullopt);
            continue;
        }
        switch (t) {
            case DegreeType::source_packets:
                wa.distributions.emplace_back(bin_distribution(histogram(dv.source_packets)));
                break;
            case DegreeType::source_fanout:
                wa.distributions.emplace_back(bin_distribution(histogram(dv.source_fanout)));
                break;
            case DegreeType::link_packets:
                wa.distributions.emplace_back(
                    bin_distribution(DegreeHistogram::from_values(dv.link_packets)));
                break;
            case DegreeType::destination_fanin:
                wa.distributions.emplace_back(bin_distribution(histogram(dv.destination_fanin)));
                break;
            case DegreeType::destination_packets:
                wa.distributions.emplace_back(bin_distribution(histogram(dv.destination_packets)));
                break;
        }
    }
    return wa;
}

struct LevelResult {
    unsigned level = 0;
    std::uint64_t window_size = 0;
    std::vector<QuantityVector> windows;               // one row per window, in time order
    std::vector<DistributionStats> distribution_stats;  // parallel to request.distributions
};

struct HierarchyEvaluation {
    std::vector<LevelResult> levels;
    unsigned peak_resident_matrices = 0;
    std::uint64_t peak_resident_entries = 0;
    std::uint64_t packets_consumed = 0;
};

// Streams the source once: partitions into leaf windows, folds the
// aggregation tree, and evaluates quantities and distributions for every
// window of every level.  Results are identical whatever the thread
// count; workers only ever analyze immutable window snapshots, and their
// results are folded in emission order.
inline HierarchyEvaluation evaluate_hierarchy(RecordSource& source, const WindowSpec& spec,
                                              const AnalysisRequest& request) {
    spec.validate();
    HierarchyEvaluation ev;
    ev.levels.reserve(spec.levels);
    for (unsigned k = 0; k < spec.levels; ++k) {
        LevelResult lr;
        lr.level = k;
        lr.window_size = spec.window_size(k);
        lr.distribution_stats.resize(request.distributions.size());
        ev.levels.push_back(std::move(lr));
    }

    auto integrate = [&ev, &request](unsigned level, const WindowAnalysis& wa) {
        auto& lr = ev.levels[level];
        lr.windows.push_back(wa.quantities);
        for (std::size_t i = 0; i < request.distributions.size(); ++i) {
            if (wa.distributions[i]) lr.distribution_stats[i].accumulate(*wa.distributions[i]);
        }
    };

    std::deque<std::pair<unsigned, std::future<WindowAnalysis>>> inflight;
    const unsigned threads = std::max(1u, request.threads);
    const std::size_t max_inflight = static_cast<std::size_t>(threads) * 2;
    auto drain_front = [&] {
        auto [level, fut] = std::move(inflight.front());
        inflight.pop_front();
        integrate(level, fut.get());
    };

    HierarchyBuilder builder(spec.levels, [&](unsigned level, std::uint64_t, const TrafficMatrix& m) {
        if (threads == 1) {
            integrate(level, analyze_window(m, request.distributions));
            return;
        }
        while (inflight.size() >= max_inflight) drain_front();
        inflight.emplace_back(level, std::async(std::launch::async,
                                                [snapshot = m, &request] {
                                                    return analyze_window(snapshot,
                                                                          request.distributions);
                                                }));
    });

    for (std::uint64_t skip = spec.start_index * spec.base_window; skip > 0; --skip) {
        if (!source.next()) break;
    }
    for_each_window(source, spec.base_window, [&](TrafficMatrix m) {
        if (request.quadrant) {
            m = quadrant(m, *request.quadrant, request.internal);
        }
        ev.packets_consumed += spec.base_window;
        builder.push_leaf(std::move(m));
    });
    builder.finish();
    while (!inflight.empty()) drain_front();

    ev.peak_resident_matrices = builder.peak_resident_matrices();
    ev.peak_resident_entries = builder.peak_resident_entries();
    return ev;
}

}  // namespace hstm
