// Acceptance gate: exercises the analysis pipeline end to end against
// independent oracles and analytic expectations.  Prints one line per
// criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hstm/hstm.hpp"
#include "oracle.hpp"
#include "util.hpp"

using namespace hstm;

namespace {

struct Criterion {
    explicit Criterion(std::string n) : name(std::move(n)) {}

    std::string name;
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            detail = msg;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------
// 1. The sparse pipeline agrees exactly with nested-loop brute force.

Criterion criterion_oracle_equivalence() {
    Criterion c{"oracle equivalence on random streams"};
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    for (int round = 0; round < 100 && c.ok; ++round) {
        const auto records = round % 2 == 0 ? testutil::random_records(rng, 4096, 512)
                                            : testutil::zipfish_records(rng, 4096, 1 << 16);
        const auto a = TrafficMatrix::from_records(records);
        const auto dv = degree_vectors(a);
        const auto maps = oracle::degree_maps(records);

        c.require(compute_quantities(a, dv) == oracle::quantities(records),
                  "scalar quantities diverge from brute force at round " + std::to_string(round));
        c.require(dv.source_packets ==
                      DegreeVector(oracle::as_degree_entries(maps.source_packets)),
                  "source_packets vector diverges");
        c.require(dv.source_fanout == DegreeVector(oracle::as_degree_entries(maps.fanout)),
                  "source_fanout vector diverges");
        c.require(dv.destination_packets ==
                      DegreeVector(oracle::as_degree_entries(maps.destination_packets)),
                  "destination_packets vector diverges");
        c.require(dv.destination_fanin == DegreeVector(oracle::as_degree_entries(maps.fanin)),
                  "destination_fanin vector diverges");
        std::vector<std::uint64_t> links;
        for (const auto& [link, count] : maps.link_packets) links.push_back(count);
        c.require(dv.link_packets == links, "link_packets multiset diverges");
    }
    const double elapsed = seconds_since(start);
    c.require(elapsed < 10.0, "took " + fmt(elapsed) + " s, budget 10 s");
    c.detail = c.ok ? "100 streams of 4096 packets, " + fmt(elapsed) + " s" : c.detail;
    return c;
}

// ---------------------------------------------------------------------
// 2. Every aggregated window equals direct construction from records.

Criterion criterion_hierarchy_consistency() {
    Criterion c{"hierarchy consistency against direct construction"};
    std::mt19937_64 rng(2);
    const WindowSpec spec{256, 9, 0};  // window sizes 256 .. 65536
    const auto records = testutil::zipfish_records(rng, 2 * (256u << 8), 1 << 14);

    std::vector<std::vector<TrafficMatrix>> streamed(spec.levels);
    HierarchyBuilder builder(spec.levels,
                             [&](unsigned level, std::uint64_t, const TrafficMatrix& m) {
                                 streamed[level].push_back(m);
                             });
    VectorSource source(records);
    for_each_window(source, spec.base_window,
                    [&](TrafficMatrix m) { builder.push_leaf(std::move(m)); });
    builder.finish();

    for (unsigned k = 0; k < spec.levels && c.ok; ++k) {
        const std::uint64_t window = spec.window_size(k);
        c.require(streamed[k].size() == records.size() / window,
                  "wrong window count at level " + std::to_string(k));
        for (std::size_t w = 0; c.ok && w < streamed[k].size(); ++w) {
            const auto direct = TrafficMatrix::from_records(
                std::span(records).subspan(w * window, window));
            c.require(streamed[k][w] == direct, "matrix mismatch at level " + std::to_string(k) +
                                                    " window " + std::to_string(w));
            c.require(compute_quantities(streamed[k][w]) == compute_quantities(direct),
                      "quantity mismatch at level " + std::to_string(k));
        }
    }
    if (c.ok) c.detail = "levels 0..8 over N_V0 = 256, exact";
    return c;
}

// ---------------------------------------------------------------------
// 3. Binned distributions conserve probability; cdf is monotone.

Criterion criterion_distribution_conservation() {
    Criterion c{"distribution conservation and monotone cdf"};

    std::vector<std::uint64_t> worked;
    for (int i = 0; i < 6; ++i) worked.push_back(1);
    for (int i = 0; i < 2; ++i) worked.push_back(2);
    worked.push_back(3);
    worked.push_back(8);
    const auto example = bin_distribution(DegreeHistogram::from_values(worked));
    c.require(example.bins.size() == 4 && example.bins[0].mass == 6.0 / 10.0 &&
                  example.bins[1].mass == 2.0 / 10.0 && example.bins[2].mass == 1.0 / 10.0 &&
                  example.bins[3].mass == 1.0 / 10.0,
              "four-bin worked example not reproduced exactly");

    std::mt19937_64 rng(3);
    for (int round = 0; round < 500 && c.ok; ++round) {
        const auto records = round % 2 == 0 ? testutil::random_records(rng, 2048, 96)
                                            : testutil::zipfish_records(rng, 2048, 4096);
        const auto dv = degree_vectors(TrafficMatrix::from_records(records));
        for (DegreeType type : kAllDegreeTypes) {
            const auto wa = analyze_window(TrafficMatrix::from_records(records),
                                           std::span(&type, 1));
            const auto& dist = *wa.distributions[0];
            c.require(std::abs(dist.total_mass() - 1.0) <= 1e-12,
                      "masses sum to " + fmt(dist.total_mass()) + " for " +
                          std::string(degree_type_name(type)));
            for (const auto& bin : dist.bins) {
                c.require(bin.mass >= 0.0, "negative bin mass");
            }
        }
        const auto cdf = cumulative_probability(histogram(dv.source_packets));
        for (std::size_t i = 1; i < cdf.size(); ++i) {
            c.require(cdf[i].second >= cdf[i - 1].second, "cdf not nondecreasing");
        }
        c.require(cdf.back().second == 1.0, "cdf does not end at 1");
    }
    if (c.ok) c.detail = "500 windows x 5 degree types, |sum - 1| <= 1e-12";
    return c;
}

// ---------------------------------------------------------------------
// 4. Full pipeline recovers the analytic exponents of the four simple
//    topologies on both observable quadrants.

Criterion criterion_topology_exponents() {
    Criterion c{"analytic exponents of the simple topologies"};
    const auto start = std::chrono::steady_clock::now();
    const WindowSpec spec{1 << 10, 7, 0};  // N_V 2^10 .. 2^16
    constexpr double kTolerance = 0.05;

    for (TopologyKind kind : {TopologyKind::isolated_links, TopologyKind::single_link,
                              TopologyKind::internal_supernode, TopologyKind::external_supernode}) {
        for (Quadrant quad : {Quadrant::ext_to_int, Quadrant::int_to_ext}) {
            TopologySpec topo;
            topo.kind = kind;
            topo.packets = 1 << 18;
            TopologyGenerator gen(topo);

            AnalysisRequest request;
            request.quadrant = quad;
            request.internal = InternalNodes{gen.internal_set(), std::nullopt};
            const auto evaluation = evaluate_hierarchy(gen, spec, request);

            for (QuantityId q : kAllQuantities) {
                const auto expected = expected_exponent(kind, q, quad);
                if (!expected) continue;
                std::vector<ScalingSample> samples;
                for (const auto& level : evaluation.levels) {
                    double sum = 0;
                    for (const auto& w : level.windows) {
                        sum += static_cast<double>(quantity_value(w, q));
                    }
                    samples.push_back(
                        {level.window_size, sum / static_cast<double>(level.windows.size()), 0});
                }
                const auto fit = fit_scaling(std::string(quantity_name(q)), samples);
                if (std::abs(fit.exponent - static_cast<double>(*expected)) > kTolerance) {
                    c.require(false, std::string(topology_name(kind)) + "/" +
                                         std::string(quadrant_name(quad)) + "/" +
                                         std::string(quantity_name(q)) + ": alpha " +
                                         fmt(fit.exponent) + " vs expected " +
                                         std::to_string(*expected));
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    c.require(elapsed < 60.0, "took " + fmt(elapsed) + " s, budget 60 s");
    if (c.ok) {
        c.detail = "4 topologies x 2 quadrants, N_V 2^10..2^16, |alpha - expected| <= 0.05, " +
                   fmt(elapsed) + " s";
    }
    return c;
}

// ---------------------------------------------------------------------
// 5. Heavy-tailed source popularity: sublinear unique-source growth and
//    cross-level collapse under the fitted exponent.

Criterion criterion_sublinear_regime() {
    Criterion c{"sublinear unique-source scaling with alignment collapse"};
    TopologySpec topo;
    topo.kind = TopologyKind::zipf;
    topo.packets = 1 << 22;
    topo.seed = 1;
    topo.zipf_exponent = 1.0;
    topo.zipf_population = 1 << 24;
    TopologyGenerator gen(topo);

    const WindowSpec spec{1 << 14, 7, 0};  // N_V 2^14 .. 2^20
    AnalysisRequest request;
    request.quadrant = Quadrant::ext_to_int;
    request.internal = InternalNodes{gen.internal_set(), std::nullopt};
    const auto evaluation = evaluate_hierarchy(gen, spec, request);

    std::vector<ScalingSample> samples;
    std::vector<AlignmentCurve> curves;
    for (const auto& level : evaluation.levels) {
        AlignmentCurve curve{level.window_size, {}};
        double sum = 0;
        for (const auto& w : level.windows) {
            const auto v = static_cast<double>(w.unique_sources);
            curve.series.push_back(v / static_cast<double>(level.window_size));
            sum += v;
        }
        samples.push_back(
            {level.window_size, sum / static_cast<double>(level.windows.size()), 0});
        curves.push_back(std::move(curve));
    }

    const auto fit = fit_scaling("unique_sources", samples);
    c.require(fit.exponent > 0.3 && fit.exponent < 0.9,
              "alpha " + fmt(fit.exponent) + " outside (0.3, 0.9)");
    const double dispersion =
        alignment_dispersion(curves, 1.0 - fit.exponent, spec.base_window);
    c.require(dispersion < 0.05, "dispersion " + fmt(dispersion) + " >= 5%");
    if (c.ok) {
        c.detail = "alpha = " + fmt(fit.exponent) + ", dispersion at beta = 1 - alpha: " +
                   fmt(100 * dispersion) + "%";
    }
    return c;
}

// ---------------------------------------------------------------------
// 6. The four quadrants partition any matrix exactly.

Criterion criterion_quadrant_partition() {
    Criterion c{"quadrant partition of random matrices"};
    std::mt19937_64 rng(6);
    for (int round = 0; round < 200 && c.ok; ++round) {
        const auto a =
            TrafficMatrix::from_records(testutil::random_records(rng, 500, 1 + rng() % 128));
        // random internal set: two ranges with arbitrary bounds
        const std::uint64_t lo1 = rng() % 64, hi1 = lo1 + rng() % 32;
        const std::uint64_t lo2 = rng() % 128, hi2 = lo2 + rng() % 64;
        const InternalNodes internal{
            IdSet::parse(std::to_string(lo1) + "-" + std::to_string(hi1) + "," +
                         std::to_string(lo2) + "-" + std::to_string(hi2)),
            std::nullopt};

        TrafficMatrix sum;
        std::uint64_t nnz_total = 0;
        for (Quadrant quad : kAllQuadrants) {
            const auto part = quadrant(a, quad, internal);
            nnz_total += part.nnz();
            sum = add(sum, part);
        }
        c.require(sum == a, "quadrants do not sum back to the matrix");
        c.require(nnz_total == a.nnz(), "quadrants share coordinates");
    }
    if (c.ok) c.detail = "200 random matrices and internal sets, exact";
    return c;
}

// ---------------------------------------------------------------------
// 7. Keyed permutation of the ID space changes no quantity and no
//    binned distribution.

Criterion criterion_anonymization_invariance() {
    Criterion c{"anonymization invariance of quantities and distributions"};
    const auto key = FeistelKey::from_hex("00112233445566778899aabbccddeeff");
    std::mt19937_64 rng(7);
    const std::vector<DegreeType> all(kAllDegreeTypes.begin(), kAllDegreeTypes.end());
    for (int round = 0; round < 50 && c.ok; ++round) {
        const auto records = round % 2 == 0 ? testutil::random_records(rng, 4096, 256)
                                            : testutil::zipfish_records(rng, 4096, 1 << 20);
        std::vector<PacketRecord> anonymized;
        anonymized.reserve(records.size());
        for (const auto& r : records) anonymized.push_back(anonymize(r, key));

        const auto before = analyze_window(TrafficMatrix::from_records(records), all);
        const auto after = analyze_window(TrafficMatrix::from_records(anonymized), all);
        c.require(before.quantities == after.quantities, "quantities changed under anonymization");
        for (std::size_t d = 0; c.ok && d < all.size(); ++d) {
            const auto& x = *before.distributions[d];
            const auto& y = *after.distributions[d];
            c.require(x.bins.size() == y.bins.size(), "bin count changed under anonymization");
            for (std::size_t b = 0; c.ok && b < x.bins.size(); ++b) {
                c.require(x.bins[b].mass == y.bins[b].mass,
                          "bin mass changed under anonymization");
            }
        }
    }
    if (c.ok) c.detail = "50 streams, quantities and all binned distributions identical";
    return c;
}

// ---------------------------------------------------------------------
// 8. Performance: month-scale window hierarchy on a 10^7-packet stream,
//    single-threaded, bounded working set; wide IDs cost nothing; the
//    threaded path reproduces the sequential results exactly.

Criterion criterion_performance() {
    Criterion c{"performance and memory contract"};
    TopologySpec topo;
    topo.kind = TopologyKind::zipf;
    topo.packets = 10'000'000;
    topo.balanced = true;
    topo.seed = 8;
    topo.internal_population = 1 << 16;
    const auto records = generate(topo);

    const WindowSpec spec{1 << 12, 9, 0};  // N_V 2^12 .. 2^20
    AnalysisRequest request;
    request.distributions.assign(kAllDegreeTypes.begin(), kAllDegreeTypes.end());

    const auto start = std::chrono::steady_clock::now();
    VectorSource source(records);
    const auto evaluation = evaluate_hierarchy(source, spec, request);
    const double elapsed = seconds_since(start);

    c.require(elapsed < 60.0, "single-threaded run took " + fmt(elapsed) + " s, budget 60 s");
    c.require(evaluation.levels[0].windows.size() == topo.packets / spec.base_window,
              "wrong leaf window count");
    c.require(evaluation.peak_resident_matrices <= spec.levels + 1,
              "peak resident matrices " + std::to_string(evaluation.peak_resident_matrices));
    c.require(evaluation.peak_resident_entries <= 3 * (spec.base_window << (spec.levels - 1)),
              "resident entries grew beyond the top window bound");

    // Wide IDs: same windowing over IDs spread across the full 64-bit
    // space; cost tracks entries (here: packets), not ID magnitudes.
    {
        std::mt19937_64 rng(88);
        const auto wide = testutil::random_records(rng, 1 << 16, UINT64_MAX);
        VectorSource wide_source(wide);
        const auto wide_eval = evaluate_hierarchy(wide_source, WindowSpec{1 << 12, 5, 0}, request);
        c.require(wide_eval.peak_resident_entries <= 3ull * (1 << 16),
                  "wide-ID run allocated beyond entry-proportional bounds");
        c.require(wide_eval.levels.back().windows.size() == 1, "wide-ID run lost windows");
    }

    // Thread-count independence, compared field-for-field and bit-for-bit.
    {
        std::vector<PacketRecord> slice(records.begin(), records.begin() + 1'000'000);
        VectorSource seq_source(slice);
        const auto seq = evaluate_hierarchy(seq_source, WindowSpec{1 << 12, 6, 0}, request);
        auto threaded_request = request;
        threaded_request.threads = 4;
        VectorSource par_source(slice);
        const auto par = evaluate_hierarchy(par_source, WindowSpec{1 << 12, 6, 0},
                                            threaded_request);
        for (std::size_t k = 0; c.ok && k < seq.levels.size(); ++k) {
            c.require(seq.levels[k].windows == par.levels[k].windows,
                      "threaded quantities differ at level " + std::to_string(k));
            for (std::size_t d = 0; c.ok && d < request.distributions.size(); ++d) {
                const auto& a = seq.levels[k].distribution_stats[d];
                const auto& b = par.levels[k].distribution_stats[d];
                c.require(a.bin_count() == b.bin_count(), "threaded bin counts differ");
                for (std::size_t bin = 0; c.ok && bin < a.bin_count(); ++bin) {
                    c.require(a.mean(bin) == b.mean(bin) && a.stddev(bin) == b.stddev(bin),
                              "threaded distribution stats differ");
                }
            }
        }
    }

    if (c.ok) {
        c.detail = "10^7 packets, N_V 2^12..2^20, " + fmt(elapsed) +
                   " s single-threaded; peak resident " +
                   std::to_string(evaluation.peak_resident_matrices) + " matrices";
    }
    return c;
}

}  // namespace

int main() {
    const Criterion results[] = {
        criterion_oracle_equivalence(),      criterion_hierarchy_consistency(),
        criterion_distribution_conservation(), criterion_topology_exponents(),
        criterion_sublinear_regime(),        criterion_quadrant_partition(),
        criterion_anonymization_invariance(), criterion_performance(),
    };

    int failures = 0;
    int index = 0;
    for (const auto& c : results) {
        ++index;
        if (c.ok) {
            std::printf("[PASS] %d. %s (%s)\n", index, c.name.c_str(), c.detail.c_str());
        } else {
            ++failures;
            std::printf("[FAIL] %d. %s: %s\n", index, c.name.c_str(), c.detail.c_str());
        }
    }
    return failures == 0 ? 0 : 1;
}
