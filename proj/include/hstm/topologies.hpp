#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "hstm/core.hpp"
#include "hstm/io.hpp"
#include "hstm/quantities.hpp"

namespace hstm {

// Synthetic traffic families with known window-size scaling.  The first
// four are degenerate extremes (every packet a fresh link, one link
// total, one hub fanning in or out); zipf draws the external endpoint
// from a power-law rank distribution.
enum class TopologyKind {
    isolated_links,
    single_link,
    internal_supernode,
    external_supernode,
    zipf,
};

inline constexpr std::string_view topology_name(TopologyKind k) {
    switch (k) {
        case TopologyKind::isolated_links: return "isolated-links";
        case TopologyKind::single_link: return "single-link";
        case TopologyKind::internal_supernode: return "internal-supernode";
        case TopologyKind::external_supernode: return "external-supernode";
        case TopologyKind::zipf: return "zipf";
    }
    return "";
}

inline std::optional<TopologyKind> topology_from_name(std::string_view name) {
    for (TopologyKind k : {TopologyKind::isolated_links, TopologyKind::single_link,
                           TopologyKind::internal_supernode, TopologyKind::external_supernode,
                           TopologyKind::zipf}) {
        if (topology_name(k) == name) return k;
    }
    return std::nullopt;
}

// All generated internal ids live in [kInternalIdBase, kInternalIdBase +
// kInternalIdSpan); external ids start at kExternalIdBase.  The ranges
// are disjoint and far from zero so generated streams exercise wide ids.
inline constexpr NodeId kInternalIdBase = 1ull << 32;
inline constexpr NodeId kInternalIdSpan = 1ull << 30;
inline constexpr NodeId kExternalIdBase = 1ull << 40;

struct TopologySpec {
    TopologyKind kind = TopologyKind::single_link;
    std::uint64_t packets = 0;
    bool balanced = true;  // alternate external->internal / internal->external
    std::uint64_t seed = 0;
    // Supernode kinds: size of the round-robin peer pool; 0 draws a
    // fresh peer for every packet.
    std::uint64_t fixed_peers = 0;
    double zipf_exponent = 1.0;
    std::uint64_t zipf_population = 1ull << 24;
    std::uint64_t internal_population = 256;  // uniform internal side of zipf

    void validate() const {
        if (packets == 0) throw std::invalid_argument("hstm: topology needs at least one packet");
        if (balanced && packets % 2 != 0) {
            throw std::invalid_argument("hstm: balanced stream needs an even packet count");
        }
        if (kind == TopologyKind::zipf) {
            if (!(zipf_exponent > 0.0)) {
                throw std::invalid_argument("hstm: zipf exponent must be positive");
            }
            if (zipf_population == 0 || zipf_population > (1ull << 26)) {
                throw std::invalid_argument("hstm: zipf population must be in [1, 2^26]");
            }
            if (internal_population == 0 || internal_population > kInternalIdSpan) {
                throw std::invalid_argument("hstm: internal population out of range");
            }
        }
    }
};

// Deterministic for a given spec: identical (kind, packets, balanced,
// seed, ...) always yields the identical record stream on every
// platform, so generated corpora can be regenerated instead of stored.
class TopologyGenerator final : public RecordSource {
public:
    explicit TopologyGenerator(const TopologySpec& spec) : spec_(spec) {
        spec_.validate();
        rng_.seed(spec_.seed);
        if (spec_.kind == TopologyKind::zipf) {
            cumulative_.reserve(spec_.zipf_population);
            double acc = 0.0;
            for (std::uint64_t rank = 1; rank <= spec_.zipf_population; ++rank) {
                acc += spec_.zipf_exponent == 1.0
                           ? 1.0 / static_cast<double>(rank)
                           : std::pow(static_cast<double>(rank), -spec_.zipf_exponent);
                cumulative_.push_back(acc);
            }
        }
    }

    std::optional<PacketRecord> next() override {
        if (emitted_ == spec_.packets) return std::nullopt;
        const bool ext_to_int = !spec_.balanced || emitted_ % 2 == 0;
        ++emitted_;
        switch (spec_.kind) {
            case TopologyKind::isolated_links: {
                const NodeId i = fresh_internal();
                const NodeId e = fresh_external();
                return orient(e, i, ext_to_int);
            }
            case TopologyKind::single_link:
                return orient(kExternalIdBase, kInternalIdBase, ext_to_int);
            case TopologyKind::internal_supernode:
                return orient(next_peer_external(ext_to_int), kInternalIdBase, ext_to_int);
            case TopologyKind::external_supernode:
                return orient(kExternalIdBase, next_peer_internal(ext_to_int), ext_to_int);
            case TopologyKind::zipf: {
                const NodeId e = kExternalIdBase + zipf_rank();
                const NodeId i = kInternalIdBase + uniform_below(spec_.internal_population);
                return orient(e, i, ext_to_int);
            }
        }
        return std::nullopt;
    }

    // The declared internal range, independent of how many internal ids
    // the stream actually used.
    IdSet internal_set() const {
        return IdSet::single_range(kInternalIdBase, kInternalIdBase + kInternalIdSpan - 1);
    }

private:
    static PacketRecord orient(NodeId external, NodeId internal, bool ext_to_int) {
        return ext_to_int ? PacketRecord{external, internal} : PacketRecord{internal, external};
    }

    NodeId fresh_internal() {
        if (next_internal_ >= kInternalIdSpan) {
            throw std::length_error("hstm: internal id range exhausted");
        }
        return kInternalIdBase + next_internal_++;
    }

    NodeId fresh_external() { return kExternalIdBase + next_external_++; }

    // Fresh peers share one counter (distinct ids across directions); a
    // fixed pool cycles per direction, so each direction visits the whole
    // pool in order.
    NodeId next_peer_external(bool ext_to_int) {
        if (spec_.fixed_peers == 0) return fresh_external();
        return kExternalIdBase + peer_cursor_[ext_to_int]++ % spec_.fixed_peers;
    }

    NodeId next_peer_internal(bool ext_to_int) {
        if (spec_.fixed_peers == 0) return fresh_internal();
        return kInternalIdBase + peer_cursor_[ext_to_int]++ % spec_.fixed_peers;
    }

    // [0, 1) with 53 uniform mantissa bits; fixed mapping keeps streams
    // identical across standard libraries.
    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::uint64_t uniform_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
        std::uint64_t x = rng_();
        while (rem != 0 && x >= 0 - rem) x = rng_();
        return x % n;
    }

    std::uint64_t zipf_rank() {
        const double u = uniform01() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto idx = static_cast<std::uint64_t>(it - cumulative_.begin());
        return idx < spec_.zipf_population ? idx : spec_.zipf_population - 1;
    }

    TopologySpec spec_;
    std::mt19937_64 rng_;
    std::uint64_t emitted_ = 0;
    std::uint64_t next_internal_ = 0;
    std::uint64_t next_external_ = 0;
    std::uint64_t peer_cursor_[2] = {0, 0};
    std::vector<double> cumulative_;
};

inline std::vector<PacketRecord> generate(const TopologySpec& spec) {
    TopologyGenerator gen(spec);
    return read_all(gen);
}

// The analytic scaling exponent of a quantity versus window size for a
// balanced stream of the given kind restricted to the given quadrant,
// with the default fresh-peer supernode reading.  nullopt where no
// single exponent is defined (zipf, or a quadrant the stream never
// touches).
inline std::optional<int> expected_exponent(TopologyKind kind, QuantityId q, Quadrant quad) {
    if (quad != Quadrant::ext_to_int && quad != Quadrant::int_to_ext) return std::nullopt;
    // Supernode fan mirrors when the stream direction or the hub side
    // flips; internal-hub ext->int behaves like external-hub int->ext.
    const bool hub_receives = (kind == TopologyKind::internal_supernode) ==
                              (quad == Quadrant::ext_to_int);
    switch (kind) {
        case TopologyKind::isolated_links:
            switch (q) {
                case QuantityId::valid_packets:
                case QuantityId::unique_links:
                case QuantityId::unique_sources:
                case QuantityId::unique_destinations:
                    return 1;
                default:
                    return 0;
            }
        case TopologyKind::single_link:
            switch (q) {
                case QuantityId::valid_packets:
                case QuantityId::max_link_packets:
                case QuantityId::max_source_packets:
                case QuantityId::max_destination_packets:
                    return 1;
                default:
                    return 0;
            }
        case TopologyKind::internal_supernode:
        case TopologyKind::external_supernode:
            switch (q) {
                case QuantityId::valid_packets:
                case QuantityId::unique_links:
                    return 1;
                case QuantityId::unique_sources:
                    return hub_receives ? 1 : 0;
                case QuantityId::unique_destinations:
                    return hub_receives ? 0 : 1;
                case QuantityId::max_destination_packets:
                case QuantityId::max_destination_fanin:
                    return hub_receives ? 1 : 0;
                case QuantityId::max_source_packets:
                case QuantityId::max_source_fanout:
                    return hub_receives ? 0 : 1;
                default:
                    return 0;
            }
        case TopologyKind::zipf:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace hstm
