#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hstm/core.hpp"

namespace hstm {

// 128-bit key for the ID-space permutation.
struct FeistelKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    // Exactly 32 hex digits, optional 0x prefix.
    static FeistelKey from_hex(std::string_view text) {
        if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
        if (text.size() != 32) {
            throw std::invalid_argument("hstm: anonymization key must be 32 hex digits");
        }
        auto nib = [](char c) -> std::uint64_t {
            if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
            if (c >= 'A' && c <= 'F') return static_cast<std::uint64_t>(c - 'A' + 10);
            throw std::invalid_argument("hstm: anonymization key has non-hex digit");
        };
        FeistelKey key;
        for (int i = 0; i < 16; ++i) key.hi = (key.hi << 4) | nib(text[static_cast<std::size_t>(i)]);
        for (int i = 16; i < 32; ++i) key.lo = (key.lo << 4) | nib(text[static_cast<std::size_t>(i)]);
        return key;
    }

    friend bool operator==(const FeistelKey&, const FeistelKey&) = default;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::array<std::uint64_t, 4> feistel_round_keys(const FeistelKey& key) {
    std::array<std::uint64_t, 4> rk{};
    for (std::uint64_t i = 0; i < 4; ++i) {
        rk[i] = mix64(key.hi + i * 0xa0761d6478bd642full) ^ mix64(key.lo + i * 0xe7037ed1a0b428dbull);
    }
    return rk;
}

inline std::uint32_t feistel_round(std::uint32_t half, std::uint64_t round_key) {
    return static_cast<std::uint32_t>(mix64(round_key ^ half));
}

}  // namespace detail

// Four-round balanced Feistel network over the 64-bit ID space.  A true
// permutation: distinct inputs always map to distinct outputs, so degree
// structure is preserved exactly under relabeling.
inline NodeId anonymize_id(NodeId id, const FeistelKey& key) {
    const auto rk = detail::feistel_round_keys(key);
    auto left = static_cast<std::uint32_t>(id >> 32);
    auto right = static_cast<std::uint32_t>(id);
    for (int round = 0; round < 4; ++round) {
        std::uint32_t next = left ^ detail::feistel_round(right, rk[static_cast<std::size_t>(round)]);
        left = right;
        right = next;
    }
    return (static_cast<NodeId>(left) << 32) | right;
}

// Inverse permutation (rounds applied backwards).
inline NodeId deanonymize_id(NodeId id, const FeistelKey& key) {
    const auto rk = detail::feistel_round_keys(key);
    auto left = static_cast<std::uint32_t>(id >> 32);
    auto right = static_cast<std::uint32_t>(id);
    for (int round = 3; round >= 0; --round) {
        std::uint32_t prev = right ^ detail::feistel_round(left, rk[static_cast<std::size_t>(round)]);
        right = left;
        left = prev;
    }
    return (static_cast<NodeId>(left) << 32) | right;
}

// Same permutation applied to both endpoints.
inline PacketRecord anonymize(const PacketRecord& rec, const FeistelKey& key) {
    return {anonymize_id(rec.src, key), anonymize_id(rec.dst, key)};
}

}  // namespace hstm
