#pragma once

#include <charconv>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hstm/distributions.hpp"
#include "hstm/io.hpp"
#include "hstm/quantities.hpp"
#include "hstm/scaling.hpp"
#include "hstm/windowing.hpp"

namespace hstm {

// Shortest-round-trip decimal text for a double; what every TSV and JSON
// writer below uses, so files diff cleanly across runs.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(path.string(), 0, false, "cannot open for writing");
    return out;
}

inline void finish_out(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError(path.string(), 0, false, "write failed");
}

}  // namespace detail

// One row per window in time order; columns are the nine scalar
// quantities of that window's matrix.
inline void write_quantity_table(const std::filesystem::path& path, const LevelResult& level) {
    auto out = detail::open_out(path);
    out << "window";
    for (QuantityId q : kAllQuantities) out << '\t' << quantity_name(q);
    out << '\n';
    for (std::size_t w = 0; w < level.windows.size(); ++w) {
        out << w;
        for (QuantityId q : kAllQuantities) out << '\t' << quantity_value(level.windows[w], q);
        out << '\n';
    }
    detail::finish_out(out, path);
}

inline void write_quantity_json(const std::filesystem::path& path, const LevelResult& level) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t w = 0; w < level.windows.size(); ++w) {
        nlohmann::json row{{"window", w}};
        for (QuantityId q : kAllQuantities) {
            row[std::string(quantity_name(q))] = quantity_value(level.windows[w], q);
        }
        rows.push_back(std::move(row));
    }
    nlohmann::json doc{{"window_size", level.window_size}, {"windows", std::move(rows)}};
    auto out = detail::open_out(path);
    out << doc.dump(2) << '\n';
    detail::finish_out(out, path);
}

// Per-bin mean and standard deviation of the binned probability mass
// across the level's windows.
inline void write_distribution_table(const std::filesystem::path& path,
                                     const DistributionStats& stats) {
    auto out = detail::open_out(path);
    out << "bin\tupper_edge\tmean\tstd\n";
    for (std::size_t b = 0; b < stats.bin_count(); ++b) {
        out << b << '\t' << stats.upper_edge(b) << '\t' << format_double(stats.mean(b)) << '\t'
            << format_double(stats.stddev(b)) << '\n';
    }
    detail::finish_out(out, path);
}

inline void write_distribution_json(const std::filesystem::path& path,
                                    const DistributionStats& stats) {
    nlohmann::json bins = nlohmann::json::array();
    for (std::size_t b = 0; b < stats.bin_count(); ++b) {
        bins.push_back({{"bin", b},
                        {"upper_edge", stats.upper_edge(b)},
                        {"mean", stats.mean(b)},
                        {"std", stats.stddev(b)}});
    }
    nlohmann::json doc{{"window_count", stats.window_count()}, {"bins", std::move(bins)}};
    auto out = detail::open_out(path);
    out << doc.dump(2) << '\n';
    detail::finish_out(out, path);
}

// One row per quantity: fitted exponent, fit quality, the verdict the
// residual threshold implies, and the cross-level alignment dispersion
// at beta = 1 - exponent (nan when undefined).
inline void write_scaling_table(const std::filesystem::path& path,
                                std::span<const ScalingFit> fits,
                                std::span<const double> dispersions) {
    auto out = detail::open_out(path);
    out << "quantity\texponent\tintercept_log2\trms_residual\tverdict\tdispersion\n";
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        out << f.quantity << '\t' << format_double(f.exponent) << '\t'
            << format_double(f.intercept_log2) << '\t' << format_double(f.rms_residual) << '\t'
            << (f.simple_scaling ? "scaling" : "none") << '\t' << format_double(dispersions[i])
            << '\n';
    }
    detail::finish_out(out, path);
}

inline void write_scaling_json(const std::filesystem::path& path,
                               std::span<const ScalingFit> fits,
                               std::span<const double> dispersions) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : f.samples) {
            samples.push_back(
                {{"window_size", s.window_size}, {"mean", s.mean}, {"std", s.stddev}});
        }
        rows.push_back({{"quantity", f.quantity},
                        {"exponent", f.exponent},
                        {"intercept_log2", f.intercept_log2},
                        {"rms_residual", f.rms_residual},
                        {"verdict", f.simple_scaling ? "scaling" : "none"},
                        {"dispersion", dispersions[i]},
                        {"samples", std::move(samples)}});
    }
    auto out = detail::open_out(path);
    out << nlohmann::json{{"quantities", std::move(rows)}}.dump(2) << '\n';
    detail::finish_out(out, path);
}

inline std::string quantity_table_name(unsigned log2_window) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "quantities_level%02u.tsv", log2_window);
    return buf;
}

inline std::string distribution_table_name(DegreeType type, unsigned log2_window) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "dist_%s_level%02u.tsv",
                  std::string(degree_type_name(type)).c_str(), log2_window);
    return buf;
}

// Parses a table written by write_quantity_table.  Column order is taken
// from the header, so reordered or hand-edited files still load.
inline std::vector<QuantityVector> read_quantity_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string(), 0, false, "cannot open");
    std::string line;
    std::uint64_t line_number = 0;

    auto split = [](std::string_view sv) {
        std::vector<std::string_view> fields;
        while (true) {
            const auto tab = sv.find('\t');
            fields.push_back(sv.substr(0, tab));
            if (tab == std::string_view::npos) break;
            sv.remove_prefix(tab + 1);
        }
        return fields;
    };

    if (!std::getline(in, line)) throw IoError(path.string(), 1, true, "missing header");
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::optional<QuantityId>> columns;
    for (std::string_view field : split(line)) {
        columns.push_back(quantity_from_name(field));
        if (!columns.back() && field != "window") {
            throw IoError(path.string(), line_number, true,
                          "unknown column '" + std::string(field) + "'");
        }
    }

    std::vector<QuantityVector> rows;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != columns.size()) {
            throw IoError(path.string(), line_number, true, "wrong field count");
        }
        QuantityVector qv{};
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!columns[i]) continue;
            std::uint64_t value = 0;
            const auto [ptr, ec] =
                std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), value);
            if (ec != std::errc{} || ptr != fields[i].data() + fields[i].size()) {
                throw IoError(path.string(), line_number, true, "malformed count");
            }
            quantity_value(qv, *columns[i]) = value;
        }
        rows.push_back(qv);
    }
    return rows;
}

struct LevelTable {
    std::uint64_t window_size = 0;
    std::vector<QuantityVector> windows;
};

// Loads every quantities_levelNN.tsv under dir, ordered by window size.
// The two digits in the name are log2 of the window size.
inline std::vector<LevelTable> read_quantity_tables(const std::filesystem::path& dir) {
    std::map<unsigned, std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        unsigned level = 0;
        if (std::sscanf(name.c_str(), "quantities_level%2u.tsv", &level) == 1 &&
            name == quantity_table_name(level)) {
            found.emplace(level, entry.path());
        }
    }
    std::vector<LevelTable> tables;
    for (const auto& [level, path] : found) {
        tables.push_back({std::uint64_t{1} << level, read_quantity_table(path)});
    }
    return tables;
}

}  // namespace hstm
