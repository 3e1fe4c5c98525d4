// hstm — hierarchical streaming traffic-matrix analyzer.
//
//   hstm generate   synthesize a packet stream with known structure
//   hstm analyze    build the window hierarchy and emit per-level tables
//   hstm scaling    fit scaling exponents across previously written tables
//
// Exit codes: 0 success, 2 bad arguments, 3 input/processing failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hstm/hstm.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

hstm::IdSet parse_internal_arg(const std::string& arg) {
    if (!arg.empty() && arg.front() == '@') {
        return hstm::IdSet::from_file(arg.substr(1));
    }
    return hstm::IdSet::parse(arg);
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
    std::string topology = "single-link";
    std::uint64_t packets = 0;
    bool balanced = true;
    std::uint64_t seed = 0;
    std::uint64_t fixed_peers = 0;
    double zipf_s = 1.0;
    std::uint64_t population = 1ull << 24;
    std::uint64_t internal_population = 256;
    std::string out;
};

int run_generate(const GenerateOptions& opt) {
    const auto kind = hstm::topology_from_name(opt.topology);
    if (!kind) throw UsageError("unknown topology '" + opt.topology + "'");

    hstm::TopologySpec spec;
    spec.kind = *kind;
    spec.packets = opt.packets;
    spec.balanced = opt.balanced;
    spec.seed = opt.seed;
    spec.fixed_peers = opt.fixed_peers;
    spec.zipf_exponent = opt.zipf_s;
    spec.zipf_population = opt.population;
    spec.internal_population = opt.internal_population;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    hstm::TopologyGenerator gen(spec);
    const auto format = hstm::detect_format(opt.out);
    std::uint64_t written = 0;
    hstm::TrafficMatrix links;             // running union of links, folded in chunks
    std::vector<hstm::PacketRecord> chunk;
    constexpr std::size_t kChunk = 1 << 20;
    auto fold_chunk = [&] {
        links = add(links, hstm::zero_norm(hstm::TrafficMatrix::from_records(chunk)));
        chunk.clear();
    };

    auto pump = [&](auto& writer) {
        while (auto rec = gen.next()) {
            writer.write(*rec);
            ++written;
            chunk.push_back(*rec);
            if (chunk.size() == kChunk) fold_chunk();
        }
        writer.close();
    };
    if (format == hstm::StreamFormat::csv) {
        hstm::CsvRecordWriter writer(opt.out);
        pump(writer);
    } else {
        hstm::BinaryRecordWriter writer(opt.out);
        pump(writer);
    }
    if (!chunk.empty()) fold_chunk();

    const std::filesystem::path sidecar = opt.out + ".internal";
    {
        std::ofstream side(sidecar, std::ios::trunc);
        side << hstm::kInternalIdBase << '-'
             << hstm::kInternalIdBase + hstm::kInternalIdSpan - 1 << '\n';
        if (!side.flush()) {
            throw hstm::IoError(sidecar.string(), 0, false, "write failed");
        }
    }

    std::printf("wrote %llu packets, %llu unique links to %s (internal set: %s)\n",
                static_cast<unsigned long long>(written),
                static_cast<unsigned long long>(links.nnz()), opt.out.c_str(),
                sidecar.string().c_str());
    return 0;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeOptions {
    std::string input;
    std::string input_format = "auto";
    std::uint64_t window = 0;
    unsigned levels = 1;
    std::uint64_t start_window = 0;
    std::string internal;
    std::string quadrant;
    std::string allow_src, deny_src, allow_dst, deny_dst;
    std::string anonymize_key;
    std::string out_dir = ".";
    std::string format = "tsv";
    std::string distributions = "all";
    unsigned threads = 1;
};

std::vector<hstm::DegreeType> parse_distributions(const std::string& arg) {
    std::vector<hstm::DegreeType> out;
    if (arg == "none") return out;
    if (arg == "all") {
        out.assign(hstm::kAllDegreeTypes.begin(), hstm::kAllDegreeTypes.end());
        return out;
    }
    std::string_view rest = arg;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto name = rest.substr(0, comma);
        const auto type = hstm::degree_type_from_name(name);
        if (!type) throw UsageError("unknown distribution '" + std::string(name) + "'");
        out.push_back(*type);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

int run_analyze(const AnalyzeOptions& opt) {
    hstm::WindowSpec window_spec{opt.window, opt.levels, opt.start_window};
    try {
        window_spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (opt.format != "tsv" && opt.format != "json") {
        throw UsageError("--format must be tsv or json");
    }
    if (opt.threads == 0) throw UsageError("--threads must be >= 1");

    hstm::AnalysisRequest request;
    request.distributions = parse_distributions(opt.distributions);
    request.threads = opt.threads;

    std::optional<hstm::FeistelKey> key;
    if (!opt.anonymize_key.empty()) {
        try {
            key = hstm::FeistelKey::from_hex(opt.anonymize_key);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }

    if (!opt.quadrant.empty()) {
        const auto quad = hstm::quadrant_from_name(opt.quadrant);
        if (!quad) throw UsageError("--quadrant must be one of ei, ie, ii, ee");
        if (opt.internal.empty()) throw UsageError("--quadrant requires --internal");
        request.quadrant = *quad;
    }
    if (!opt.internal.empty()) {
        try {
            request.internal.set = parse_internal_arg(opt.internal);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        request.internal.stream_key = key;
    }

    hstm::ValidityFilter filter;
    try {
        if (!opt.allow_src.empty()) filter.src_allow = hstm::IdSet::parse(opt.allow_src);
        if (!opt.deny_src.empty()) filter.src_deny = hstm::IdSet::parse(opt.deny_src);
        if (!opt.allow_dst.empty()) filter.dst_allow = hstm::IdSet::parse(opt.allow_dst);
        if (!opt.deny_dst.empty()) filter.dst_deny = hstm::IdSet::parse(opt.deny_dst);
        filter.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    std::optional<hstm::StreamFormat> format_override;
    if (opt.input_format == "hstm") {
        format_override = hstm::StreamFormat::binary;
    } else if (opt.input_format == "csv") {
        format_override = hstm::StreamFormat::csv;
    } else if (opt.input_format != "auto") {
        throw UsageError("--input-format must be auto, hstm, or csv");
    }

    std::unique_ptr<hstm::RecordSource> source =
        hstm::open_record_source(opt.input, format_override);
    if (!filter.empty()) {
        source = std::make_unique<hstm::FilteredSource>(std::move(source), filter);
    }
    if (key) {
        source = std::make_unique<hstm::AnonymizedSource>(std::move(source), *key);
    }

    const auto evaluation = hstm::evaluate_hierarchy(*source, window_spec, request);
    if (evaluation.levels.empty() || evaluation.levels[0].windows.empty()) {
        throw std::runtime_error("no complete window in input: need at least " +
                                 std::to_string(window_spec.base_window) + " valid packets");
    }

    const std::filesystem::path out_dir = opt.out_dir;
    std::filesystem::create_directories(out_dir);
    const bool json = opt.format == "json";
    const unsigned base_log2 = hstm::log2_exact(window_spec.base_window);
    for (const auto& level : evaluation.levels) {
        const unsigned log2_window = base_log2 + level.level;
        const auto tsv = out_dir / hstm::quantity_table_name(log2_window);
        hstm::write_quantity_table(tsv, level);
        if (json) {
            auto path = tsv;
            hstm::write_quantity_json(path.replace_extension(".json"), level);
        }
        for (std::size_t d = 0; d < request.distributions.size(); ++d) {
            const auto dist_tsv =
                out_dir / hstm::distribution_table_name(request.distributions[d], log2_window);
            hstm::write_distribution_table(dist_tsv, level.distribution_stats[d]);
            if (json) {
                auto path = dist_tsv;
                hstm::write_distribution_json(path.replace_extension(".json"),
                                              level.distribution_stats[d]);
            }
        }
    }

    std::printf("analyzed %llu packets: %zu levels (window %llu..%llu), %zu windows at level 0\n",
                static_cast<unsigned long long>(evaluation.packets_consumed),
                evaluation.levels.size(),
                static_cast<unsigned long long>(evaluation.levels.front().window_size),
                static_cast<unsigned long long>(evaluation.levels.back().window_size),
                evaluation.levels[0].windows.size());
    return 0;
}

// ----------------------------------------------------------------- scaling

struct ScalingOptions {
    std::string in_dir;
    std::string out;
    std::string format = "tsv";
    double residual_threshold = hstm::kDefaultResidualThreshold;
};

int run_scaling(const ScalingOptions& opt) {
    if (opt.format != "tsv" && opt.format != "json") {
        throw UsageError("--format must be tsv or json");
    }
    if (!(opt.residual_threshold >= 0.0)) {
        throw UsageError("--residual-threshold must be >= 0");
    }
    const auto tables = hstm::read_quantity_tables(opt.in_dir);
    if (tables.size() < 2) {
        throw std::runtime_error("need quantity tables for at least two window sizes in " +
                                 opt.in_dir);
    }

    std::vector<hstm::ScalingFit> fits;
    std::vector<double> dispersions;
    for (hstm::QuantityId q : hstm::kAllQuantities) {
        const std::string name(hstm::quantity_name(q));

        std::vector<hstm::ScalingSample> samples;
        std::vector<hstm::AlignmentCurve> curves;
        bool fittable = true;
        for (const auto& table : tables) {
            if (table.windows.empty()) {
                throw std::runtime_error("empty quantity table for window size " +
                                         std::to_string(table.window_size) + " in " + opt.in_dir);
            }
            hstm::AlignmentCurve curve{table.window_size, {}};
            curve.series.reserve(table.windows.size());
            double sum = 0.0;
            double sq = 0.0;
            for (const auto& row : table.windows) {
                const auto v = static_cast<double>(quantity_value(row, q));
                curve.series.push_back(v / static_cast<double>(table.window_size));
                sum += v;
                sq += v * v;
            }
            const auto n = static_cast<double>(table.windows.size());
            const double mean = sum / n;
            if (!(mean > 0.0)) fittable = false;
            samples.push_back({table.window_size, mean, std::sqrt(std::max(0.0, sq / n - mean * mean))});
            curves.push_back(std::move(curve));
        }

        if (!fittable) {
            hstm::ScalingFit fit;
            fit.quantity = name;
            fit.samples = std::move(samples);
            fit.exponent = std::numeric_limits<double>::quiet_NaN();
            fit.intercept_log2 = std::numeric_limits<double>::quiet_NaN();
            fit.rms_residual = std::numeric_limits<double>::quiet_NaN();
            fit.simple_scaling = false;
            fits.push_back(std::move(fit));
            dispersions.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }

        auto fit = hstm::fit_scaling(name, samples, opt.residual_threshold);
        const double beta = 1.0 - fit.exponent;
        dispersions.push_back(hstm::alignment_dispersion(curves, beta, tables.front().window_size));
        fits.push_back(std::move(fit));
    }

    const std::filesystem::path out_path = opt.out;
    if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
    hstm::write_scaling_table(out_path, fits, dispersions);
    if (opt.format == "json") {
        auto json_path = out_path;
        hstm::write_scaling_json(json_path.replace_extension(".json"), fits, dispersions);
    }

    for (std::size_t i = 0; i < fits.size(); ++i) {
        std::printf("%-24s alpha=%8.4f residual=%.4f %s\n", fits[i].quantity.c_str(),
                    fits[i].exponent, fits[i].rms_residual,
                    fits[i].simple_scaling ? "scaling" : "none");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical streaming traffic-matrix analyzer"};
    app.require_subcommand(1);

    GenerateOptions gen_opt;
    auto* gen = app.add_subcommand("generate", "synthesize a packet stream");
    gen->add_option("--topology", gen_opt.topology,
                    "isolated-links, single-link, internal-supernode, external-supernode, zipf")
        ->capture_default_str();
    gen->add_option("--packets", gen_opt.packets, "number of packets")->required();
    gen->add_flag("--balanced,!--unbalanced", gen_opt.balanced,
                  "alternate packet direction (default balanced)");
    gen->add_option("--seed", gen_opt.seed, "rng seed")->capture_default_str();
    gen->add_option("--fixed-peers", gen_opt.fixed_peers,
                    "supernode peer-pool size (0 = fresh peer per packet)")
        ->capture_default_str();
    gen->add_option("--zipf-s", gen_opt.zipf_s, "zipf exponent")->capture_default_str();
    gen->add_option("--population", gen_opt.population, "zipf external population")
        ->capture_default_str();
    gen->add_option("--internal-population", gen_opt.internal_population,
                    "zipf internal population")
        ->capture_default_str();
    gen->add_option("--out", gen_opt.out, "output path (.csv for text, else binary)")->required();

    AnalyzeOptions an_opt;
    auto* an = app.add_subcommand("analyze", "hierarchical window analysis");
    an->add_option("--input", an_opt.input, "packet stream path")->required();
    an->add_option("--input-format", an_opt.input_format, "auto, hstm, or csv")
        ->capture_default_str();
    an->add_option("--window", an_opt.window, "base window size (power of two)")->required();
    an->add_option("--levels", an_opt.levels, "number of hierarchy levels")
        ->capture_default_str();
    an->add_option("--start-window", an_opt.start_window, "base windows to skip before analysis")
        ->capture_default_str();
    an->add_option("--internal", an_opt.internal,
                   "internal node set (ids/ranges/CIDRs, or @file)");
    an->add_option("--quadrant", an_opt.quadrant, "ei, ie, ii, or ee (requires --internal)");
    an->add_option("--allow-src", an_opt.allow_src, "keep only these source ids");
    an->add_option("--deny-src", an_opt.deny_src, "drop these source ids");
    an->add_option("--allow-dst", an_opt.allow_dst, "keep only these destination ids");
    an->add_option("--deny-dst", an_opt.deny_dst, "drop these destination ids");
    an->add_option("--anonymize-key", an_opt.anonymize_key, "128-bit hex key");
    an->add_option("--out-dir", an_opt.out_dir, "output directory")->capture_default_str();
    an->add_option("--format", an_opt.format, "tsv (default) or json (writes both)")
        ->capture_default_str();
    an->add_option("--distributions", an_opt.distributions,
                   "all, none, or comma-separated degree types")
        ->capture_default_str();
    an->add_option("--threads", an_opt.threads, "worker threads for window analysis")
        ->capture_default_str();

    ScalingOptions sc_opt;
    auto* sc = app.add_subcommand("scaling", "fit exponents across window sizes");
    sc->add_option("--in-dir", sc_opt.in_dir, "directory with quantities_levelNN.tsv")
        ->required();
    sc->add_option("--out", sc_opt.out, "output table path")->required();
    sc->add_option("--format", sc_opt.format, "tsv (default) or json (writes both)")
        ->capture_default_str();
    sc->add_option("--residual-threshold", sc_opt.residual_threshold,
                   "rms residual above which the verdict is 'none'")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) return run_generate(gen_opt);
        if (an->parsed()) return run_analyze(an_opt);
        if (sc->parsed()) return run_scaling(sc_opt);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "hstm: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hstm: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
