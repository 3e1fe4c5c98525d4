#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hstm/anonymize.hpp"
#include "hstm/core.hpp"
#include "hstm/traffic_matrix.hpp"

namespace hstm {

// The scalar network quantities of one traffic matrix.
struct QuantityVector {
    std::uint64_t valid_packets = 0;
    std::uint64_t unique_links = 0;
    std::uint64_t max_link_packets = 0;
    std::uint64_t unique_sources = 0;
    std::uint64_t max_source_packets = 0;
    std::uint64_t max_source_fanout = 0;
    std::uint64_t unique_destinations = 0;
    std::uint64_t max_destination_packets = 0;
    std::uint64_t max_destination_fanin = 0;

    friend bool operator==(const QuantityVector&, const QuantityVector&) = default;
};

enum class QuantityId {
    valid_packets,
    unique_links,
    max_link_packets,
    unique_sources,
    max_source_packets,
    max_source_fanout,
    unique_destinations,
    max_destination_packets,
    max_destination_fanin,
};

inline constexpr std::array<QuantityId, 9> kAllQuantities = {
    QuantityId::valid_packets,        QuantityId::unique_links,
    QuantityId::max_link_packets,     QuantityId::unique_sources,
    QuantityId::max_source_packets,   QuantityId::max_source_fanout,
    QuantityId::unique_destinations,  QuantityId::max_destination_packets,
    QuantityId::max_destination_fanin,
};

inline constexpr std::string_view quantity_name(QuantityId id) {
    switch (id) {
        case QuantityId::valid_packets: return "valid_packets";
        case QuantityId::unique_links: return "unique_links";
        case QuantityId::max_link_packets: return "max_link_packets";
        case QuantityId::unique_sources: return "unique_sources";
        case QuantityId::max_source_packets: return "max_source_packets";
        case QuantityId::max_source_fanout: return "max_source_fanout";
        case QuantityId::unique_destinations: return "unique_destinations";
        case QuantityId::max_destination_packets: return "max_destination_packets";
        case QuantityId::max_destination_fanin: return "max_destination_fanin";
    }
    return "";
}

inline std::optional<QuantityId> quantity_from_name(std::string_view name) {
    for (QuantityId id : kAllQuantities) {
        if (quantity_name(id) == name) return id;
    }
    return std::nullopt;
}

inline std::uint64_t& quantity_value(QuantityVector& q, QuantityId id) {
    switch (id) {
        case QuantityId::valid_packets: return q.valid_packets;
        case QuantityId::unique_links: return q.unique_links;
        case QuantityId::max_link_packets: return q.max_link_packets;
        case QuantityId::unique_sources: return q.unique_sources;
        case QuantityId::max_source_packets: return q.max_source_packets;
        case QuantityId::max_source_fanout: return q.max_source_fanout;
        case QuantityId::unique_destinations: return q.unique_destinations;
        case QuantityId::max_destination_packets: return q.max_destination_packets;
        case QuantityId::max_destination_fanin: return q.max_destination_fanin;
    }
    return q.valid_packets;
}

inline std::uint64_t quantity_value(const QuantityVector& q, QuantityId id) {
    return quantity_value(const_cast<QuantityVector&>(q), id);
}

// The five per-node views of a traffic matrix: how many packets each
// source sends, how many distinct destinations it reaches, the packet
// count on each link, and the receiving-side mirrors.
struct DegreeVectorSet {
    DegreeVector source_packets;       // A 1
    DegreeVector source_fanout;        // |A|0 1
    DegreeVector destination_packets;  // 1^T A
    DegreeVector destination_fanin;    // 1^T |A|0
    std::vector<std::uint64_t> link_packets;  // entry values, in coordinate order
};

inline DegreeVectorSet degree_vectors(const TrafficMatrix& a) {
    DegreeVectorSet set;
    set.link_packets.reserve(a.nnz());
    for (const auto& e : a.entries()) set.link_packets.push_back(e.value);

    // row side: one scan of the (row, col)-sorted entries
    {
        std::vector<DegreeEntry> packets;
        std::vector<DegreeEntry> fanout;
        auto entries = a.entries();
        for (std::size_t i = 0; i < entries.size();) {
            NodeId row = entries[i].row;
            std::uint64_t sum = 0;
            std::uint64_t count = 0;
            while (i < entries.size() && entries[i].row == row) {
                sum = checked_add(sum, entries[i].value);
                ++count;
                ++i;
            }
            packets.push_back({row, sum});
            fanout.push_back({row, count});
        }
        set.source_packets = DegreeVector(std::move(packets));
        set.source_fanout = DegreeVector(std::move(fanout));
    }

    // column side: one sort of (col, value) pairs
    {
        std::vector<std::pair<NodeId, std::uint64_t>> cols;
        cols.reserve(a.nnz());
        for (const auto& e : a.entries()) cols.emplace_back(e.col, e.value);
        std::sort(cols.begin(), cols.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<DegreeEntry> packets;
        std::vector<DegreeEntry> fanin;
        for (std::size_t i = 0; i < cols.size();) {
            NodeId col = cols[i].first;
            std::uint64_t sum = 0;
            std::uint64_t count = 0;
            while (i < cols.size() && cols[i].first == col) {
                sum = checked_add(sum, cols[i].second);
                ++count;
                ++i;
            }
            packets.push_back({col, sum});
            fanin.push_back({col, count});
        }
        set.destination_packets = DegreeVector(std::move(packets));
        set.destination_fanin = DegreeVector(std::move(fanin));
    }
    return set;
}

inline QuantityVector compute_quantities(const TrafficMatrix& a, const DegreeVectorSet& d) {
    QuantityVector q;
    q.valid_packets = a.total();
    q.unique_links = a.nnz();
    q.max_link_packets = max_value(a);
    q.unique_sources = d.source_packets.size();
    q.max_source_packets = d.source_packets.max_degree();
    q.max_source_fanout = d.source_fanout.max_degree();
    q.unique_destinations = d.destination_packets.size();
    q.max_destination_packets = d.destination_packets.max_degree();
    q.max_destination_fanin = d.destination_fanin.max_degree();
    return q;
}

inline QuantityVector compute_quantities(const TrafficMatrix& a) {
    return compute_quantities(a, degree_vectors(a));
}

// Gateway quadrants: flows classified by whether each endpoint is inside
// or outside the gateway.
enum class Quadrant {
    ext_to_int,  // observed ingress
    int_to_ext,  // observed egress
    int_to_int,
    ext_to_ext,
};

inline constexpr std::string_view quadrant_name(Quadrant q) {
    switch (q) {
        case Quadrant::ext_to_int: return "ei";
        case Quadrant::int_to_ext: return "ie";
        case Quadrant::int_to_int: return "ii";
        case Quadrant::ext_to_ext: return "ee";
    }
    return "";
}

inline std::optional<Quadrant> quadrant_from_name(std::string_view name) {
    if (name == "ei") return Quadrant::ext_to_int;
    if (name == "ie") return Quadrant::int_to_ext;
    if (name == "ii") return Quadrant::int_to_int;
    if (name == "ee") return Quadrant::ext_to_ext;
    return std::nullopt;
}

inline constexpr std::array<Quadrant, 4> kAllQuadrants = {
    Quadrant::ext_to_int, Quadrant::int_to_ext, Quadrant::int_to_int, Quadrant::ext_to_ext};

// Internal-node membership.  When the analyzed stream was anonymized, the
// matrix carries permuted IDs; membership is then decided on the
// pre-image, so user-supplied sets keep referring to original IDs.
struct InternalNodes {
    IdSet set;
    std::optional<FeistelKey> stream_key;

    bool contains(NodeId id) const {
        return set.contains(stream_key ? deanonymize_id(id, *stream_key) : id);
    }
};

// Restriction of A to one quadrant.  The four quadrants are pairwise
// disjoint and sum entrywise to A.
inline TrafficMatrix quadrant(const TrafficMatrix& a, Quadrant which, const InternalNodes& internal) {
    const bool want_src_internal =
        which == Quadrant::int_to_ext || which == Quadrant::int_to_int;
    const bool want_dst_internal =
        which == Quadrant::ext_to_int || which == Quadrant::int_to_int;
    std::vector<MatrixEntry> out;
    NodeId cached_row = 0;
    bool cached_row_internal = false;
    bool have_cached = false;
    for (const auto& e : a.entries()) {
        if (!have_cached || e.row != cached_row) {
            cached_row = e.row;
            cached_row_internal = internal.contains(e.row);
            have_cached = true;
        }
        if (cached_row_internal != want_src_internal) continue;
        if (internal.contains(e.col) != want_dst_internal) continue;
        out.push_back(e);
    }
    return TrafficMatrix::from_entries(std::move(out));
}

}  // namespace hstm
