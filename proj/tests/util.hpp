#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hstm/core.hpp"

namespace testutil {

// Dense-ish random stream: small ID space so duplicate links, shared
// sources, and shared destinations all occur.
inline std::vector<hstm::PacketRecord> random_records(std::mt19937_64& rng, std::size_t count,
                                                      std::uint64_t id_space) {
    std::vector<hstm::PacketRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back({rng() % id_space, rng() % id_space});
    }
    return out;
}

// Heavy-tailed variant: endpoint popularity ~ rank^-1 over a small rank
// table, so windows mix supernodes with leaves.
inline std::vector<hstm::PacketRecord> zipfish_records(std::mt19937_64& rng, std::size_t count,
                                                       std::uint64_t id_space) {
    auto draw = [&] {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto r = static_cast<std::uint64_t>(
            static_cast<double>(id_space) * u * u);  // quadratic bias toward low ranks
        return r < id_space ? r : id_space - 1;
    };
    std::vector<hstm::PacketRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back({draw(), draw()});
    return out;
}

}  // namespace testutil
