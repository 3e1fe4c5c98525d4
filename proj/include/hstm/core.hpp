#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hstm {

using NodeId = std::uint64_t;

// One source-destination event in stream order.
struct PacketRecord {
    NodeId src = 0;
    NodeId dst = 0;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
        throw std::overflow_error("hstm: uint64 counter overflow");
    }
    return r;
}

// Maps dotted-quad IPv4 to the canonical 32-bit integer ID.
inline std::optional<NodeId> parse_ipv4(std::string_view text) {
    NodeId value = 0;
    int octets = 0;
    const char* p = text.data();
    const char* end = p + text.size();
    while (octets < 4) {
        unsigned octet = 0;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || octet > 255) return std::nullopt;
        value = (value << 8) | octet;
        ++octets;
        p = next;
        if (octets < 4) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return value;
}

// Immutable membership set over 64-bit IDs: explicit IDs plus inclusive
// ranges.  Storage and lookup cost scale with the number of pieces, never
// with the extent of the ID space.
class IdSet {
public:
    IdSet() = default;

    IdSet(std::vector<NodeId> ids, std::vector<std::pair<NodeId, NodeId>> ranges)
        : ids_(std::move(ids)), ranges_(std::move(ranges)) {
        for (const auto& [lo, hi] : ranges_) {
            if (lo > hi) throw std::invalid_argument("hstm: IdSet range with lo > hi");
        }
        normalize();
    }

    static IdSet single_range(NodeId lo, NodeId hi) { return IdSet({}, {{lo, hi}}); }

    // Grammar: comma-separated tokens, each one of
    //   <id>            unsigned decimal
    //   <lo>-<hi>       inclusive decimal range
    //   a.b.c.d         IPv4 address (mapped to its 32-bit value)
    //   a.b.c.d/<bits>  IPv4 CIDR block (mapped to a range)
    static IdSet parse(std::string_view text) {
        std::vector<NodeId> ids;
        std::vector<std::pair<NodeId, NodeId>> ranges;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t comma = text.find(',', pos);
            if (comma == std::string_view::npos) comma = text.size();
            std::string_view token = trim(text.substr(pos, comma - pos));
            pos = comma + 1;
            if (token.empty()) continue;
            parse_token(token, ids, ranges);
        }
        return IdSet(std::move(ids), std::move(ranges));
    }

    // One token per line; '#' starts a comment; blank lines ignored.
    static IdSet from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("hstm: cannot open id-set file: " + path);
        std::vector<NodeId> ids;
        std::vector<std::pair<NodeId, NodeId>> ranges;
        std::string line;
        while (std::getline(in, line)) {
            std::string_view sv = line;
            if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
            sv = trim(sv);
            if (sv.empty()) continue;
            parse_token(sv, ids, ranges);
        }
        return IdSet(std::move(ids), std::move(ranges));
    }

    bool contains(NodeId id) const {
        if (std::binary_search(ids_.begin(), ids_.end(), id)) return true;
        auto it = std::upper_bound(ranges_.begin(), ranges_.end(), id,
                                   [](NodeId v, const auto& r) { return v < r.first; });
        if (it == ranges_.begin()) return false;
        --it;
        return id >= it->first && id <= it->second;
    }

    bool empty() const { return ids_.empty() && ranges_.empty(); }

    bool intersects(const IdSet& other) const {
        for (NodeId id : ids_) {
            if (other.contains(id)) return true;
        }
        for (NodeId id : other.ids_) {
            if (contains(id)) return true;
        }
        for (const auto& [lo, hi] : ranges_) {
            for (const auto& [olo, ohi] : other.ranges_) {
                if (lo <= ohi && olo <= hi) return true;
            }
        }
        return false;
    }

    const std::vector<NodeId>& ids() const { return ids_; }
    const std::vector<std::pair<NodeId, NodeId>>& ranges() const { return ranges_; }

private:
    static std::string_view trim(std::string_view sv) {
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r')) {
            sv.remove_prefix(1);
        }
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r')) {
            sv.remove_suffix(1);
        }
        return sv;
    }

    static NodeId parse_endpoint(std::string_view token) {
        if (token.find('.') != std::string_view::npos) {
            if (auto v = parse_ipv4(token)) return *v;
            throw std::invalid_argument("hstm: bad IPv4 in id-set token: " + std::string(token));
        }
        NodeId v = 0;
        auto [next, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || next != token.data() + token.size()) {
            throw std::invalid_argument("hstm: bad id-set token: " + std::string(token));
        }
        return v;
    }

    static void parse_token(std::string_view token, std::vector<NodeId>& ids,
                            std::vector<std::pair<NodeId, NodeId>>& ranges) {
        if (auto slash = token.find('/'); slash != std::string_view::npos) {
            auto base = parse_ipv4(token.substr(0, slash));
            if (!base) throw std::invalid_argument("hstm: bad CIDR base: " + std::string(token));
            unsigned bits = 0;
            std::string_view tail = token.substr(slash + 1);
            auto [next, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), bits);
            if (ec != std::errc{} || next != tail.data() + tail.size() || bits > 32) {
                throw std::invalid_argument("hstm: bad CIDR width: " + std::string(token));
            }
            NodeId span = bits == 0 ? 0xFFFFFFFFull : ((1ull << (32 - bits)) - 1);
            NodeId lo = *base & ~span;
            ranges.emplace_back(lo, lo + span);
            return;
        }
        if (auto dash = token.find('-'); dash != std::string_view::npos) {
            NodeId lo = parse_endpoint(trim(token.substr(0, dash)));
            NodeId hi = parse_endpoint(trim(token.substr(dash + 1)));
            if (lo > hi) throw std::invalid_argument("hstm: id-set range with lo > hi: " + std::string(token));
            ranges.emplace_back(lo, hi);
            return;
        }
        ids.push_back(parse_endpoint(token));
    }

    void normalize() {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
        std::sort(ranges_.begin(), ranges_.end());
        std::vector<std::pair<NodeId, NodeId>> merged;
        for (const auto& r : ranges_) {
            if (!merged.empty() && r.first <= merged.back().second + 1 &&
                merged.back().second != ~0ull) {
                merged.back().second = std::max(merged.back().second, r.second);
            } else if (!merged.empty() && r.first <= merged.back().second) {
                merged.back().second = std::max(merged.back().second, r.second);
            } else {
                merged.push_back(r);
            }
        }
        ranges_ = std::move(merged);
        // drop singleton ids already covered by a range
        std::erase_if(ids_, [this](NodeId id) {
            auto it = std::upper_bound(ranges_.begin(), ranges_.end(), id,
                                       [](NodeId v, const auto& r) { return v < r.first; });
            if (it == ranges_.begin()) return false;
            --it;
            return id >= it->first && id <= it->second;
        });
    }

    std::vector<NodeId> ids_;
    std::vector<std::pair<NodeId, NodeId>> ranges_;
};

}  // namespace hstm
