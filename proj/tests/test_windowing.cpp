#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "hstm/io.hpp"
#include "hstm/windowing.hpp"
#include "util.hpp"

using hstm::PacketRecord;
using hstm::TrafficMatrix;
using hstm::WindowSpec;

namespace {

std::vector<hstm::LevelResult> evaluate(const std::vector<PacketRecord>& records,
                                        const WindowSpec& spec,
                                        const hstm::AnalysisRequest& request) {
    hstm::VectorSource source(records);
    return hstm::evaluate_hierarchy(source, spec, request).levels;
}

hstm::AnalysisRequest all_distributions() {
    hstm::AnalysisRequest request;
    request.distributions.assign(hstm::kAllDegreeTypes.begin(), hstm::kAllDegreeTypes.end());
    return request;
}

}  // namespace

TEST_CASE("partition worked example") {
    const std::vector<PacketRecord> records = {{1, 2}, {1, 2}, {1, 2}, {4, 2},
                                               {1, 2}, {1, 2}, {1, 2}, {1, 2}};
    const auto windows = hstm::partition(records, 4);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0] == TrafficMatrix::from_entries({{1, 2, 3}, {4, 2, 1}}));
    CHECK(windows[1] == TrafficMatrix::from_entries({{1, 2, 4}}));
}

TEST_CASE("partition discards the trailing partial window") {
    std::mt19937_64 rng(1);
    const auto records = testutil::random_records(rng, 10, 8);
    const auto windows = hstm::partition(records, 4);
    REQUIRE(windows.size() == 2);
    for (const auto& w : windows) CHECK(w.total() == 4);

    CHECK(hstm::partition(records, 16).empty());
    CHECK(hstm::partition(records, 1).size() == 10);
    CHECK_THROWS_AS(hstm::partition(records, 0), std::invalid_argument);
}

TEST_CASE("streaming windows match materialized partition") {
    std::mt19937_64 rng(2);
    const auto records = testutil::random_records(rng, 1037, 32);
    const auto expected = hstm::partition(records, 64);

    hstm::VectorSource source(records);
    std::vector<TrafficMatrix> got;
    hstm::for_each_window(source, 64, [&](TrafficMatrix m) { got.push_back(std::move(m)); });
    REQUIRE(got == expected);
}

TEST_CASE("build_hierarchy pairs adjacent windows") {
    std::mt19937_64 rng(3);
    std::vector<TrafficMatrix> leaves;
    for (int i = 0; i < 5; ++i) {
        leaves.push_back(TrafficMatrix::from_records(testutil::random_records(rng, 16, 8)));
    }
    const auto levels = hstm::build_hierarchy(leaves, 2);
    REQUIRE(levels.size() == 2);
    REQUIRE(levels[1].size() == 2);  // fifth leaf dropped
    CHECK(levels[1][0] == add(leaves[0], leaves[1]));
    CHECK(levels[1][1] == add(leaves[2], leaves[3]));

    const auto three = hstm::build_hierarchy(leaves, 3);
    REQUIRE(three[2].size() == 1);
    CHECK(three[2][0] == add(add(leaves[0], leaves[1]), add(leaves[2], leaves[3])));

    CHECK_THROWS_AS(hstm::build_hierarchy(leaves, 4), std::invalid_argument);
}

TEST_CASE("window spec validation") {
    CHECK_THROWS_AS((WindowSpec{3, 1, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((WindowSpec{0, 1, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((WindowSpec{4, 0, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((WindowSpec{1ull << 62, 3, 0}).validate(), std::invalid_argument);
    CHECK_NOTHROW((WindowSpec{4, 8, 0}).validate());
}

TEST_CASE("hierarchy levels equal direct construction from records") {
    std::mt19937_64 rng(4);
    const auto records = testutil::zipfish_records(rng, 4 * 300 + 3, 128);
    const WindowSpec spec{4, 3, 0};

    const auto leaves = hstm::partition(records, spec.base_window);
    const auto direct = hstm::build_hierarchy(leaves, spec.levels);

    hstm::VectorSource source(records);
    std::vector<std::vector<TrafficMatrix>> streamed(spec.levels);
    hstm::HierarchyBuilder builder(
        spec.levels, [&](unsigned level, std::uint64_t index, const TrafficMatrix& m) {
            REQUIRE(index == streamed[level].size());
            streamed[level].push_back(m);
        });
    hstm::for_each_window(source, spec.base_window,
                          [&](TrafficMatrix m) { builder.push_leaf(std::move(m)); });
    builder.finish();

    REQUIRE(streamed.size() == direct.size());
    for (unsigned k = 0; k < spec.levels; ++k) {
        REQUIRE(streamed[k] == direct[k]);
        for (const auto& m : streamed[k]) {
            CHECK(m.total() == spec.window_size(k));  // every window holds its exact budget
        }
    }
}

TEST_CASE("builder keeps a bounded working set") {
    std::mt19937_64 rng(5);
    const unsigned levels = 6;
    hstm::HierarchyBuilder builder(levels, [](unsigned, std::uint64_t, const TrafficMatrix&) {});
    for (int leaf = 0; leaf < 1000; ++leaf) {
        builder.push_leaf(TrafficMatrix::from_records(testutil::random_records(rng, 8, 16)));
    }
    builder.finish();
    CHECK(builder.window_count(0) == 1000);
    CHECK(builder.window_count(5) == 31);
    CHECK(builder.peak_resident_matrices() <= levels + 1);
}

TEST_CASE("evaluate_hierarchy matches per-window recomputation") {
    std::mt19937_64 rng(6);
    const auto records = testutil::zipfish_records(rng, 8 * 64, 256);
    const WindowSpec spec{8, 4, 0};
    const auto request = all_distributions();
    const auto levels = evaluate(records, spec, request);

    const auto direct = hstm::build_hierarchy(hstm::partition(records, spec.base_window),
                                              spec.levels);
    REQUIRE(levels.size() == direct.size());
    for (unsigned k = 0; k < spec.levels; ++k) {
        REQUIRE(levels[k].window_size == spec.window_size(k));
        REQUIRE(levels[k].windows.size() == direct[k].size());

        hstm::DistributionStats expected[5];
        for (std::size_t w = 0; w < direct[k].size(); ++w) {
            REQUIRE(levels[k].windows[w] == compute_quantities(direct[k][w]));
            const auto wa = analyze_window(direct[k][w], request.distributions);
            for (std::size_t d = 0; d < 5; ++d) expected[d].accumulate(*wa.distributions[d]);
        }
        for (std::size_t d = 0; d < 5; ++d) {
            const auto& got = levels[k].distribution_stats[d];
            REQUIRE(got.window_count() == expected[d].window_count());
            REQUIRE(got.bin_count() == expected[d].bin_count());
            for (std::size_t b = 0; b < got.bin_count(); ++b) {
                CHECK(got.mean(b) == expected[d].mean(b));
                CHECK(got.stddev(b) == expected[d].stddev(b));
            }
        }
    }
}

TEST_CASE("evaluate_hierarchy with a quadrant restricts leaves before folding") {
    std::mt19937_64 rng(7);
    const auto records = testutil::random_records(rng, 16 * 32, 64);
    const WindowSpec spec{16, 3, 0};

    hstm::AnalysisRequest request;
    request.quadrant = hstm::Quadrant::ext_to_int;
    request.internal.set = hstm::IdSet::parse("0-31");
    const auto levels = evaluate(records, spec, request);

    std::vector<TrafficMatrix> restricted;
    for (const auto& leaf : hstm::partition(records, spec.base_window)) {
        restricted.push_back(quadrant(leaf, hstm::Quadrant::ext_to_int, request.internal));
    }
    const auto direct = hstm::build_hierarchy(restricted, spec.levels);
    for (unsigned k = 0; k < spec.levels; ++k) {
        REQUIRE(levels[k].windows.size() == direct[k].size());
        for (std::size_t w = 0; w < direct[k].size(); ++w) {
            REQUIRE(levels[k].windows[w] == compute_quantities(direct[k][w]));
        }
    }
}

TEST_CASE("start_index skips leading windows") {
    std::mt19937_64 rng(8);
    const auto records = testutil::random_records(rng, 4 * 10, 16);
    const auto skipped = evaluate(records, WindowSpec{4, 1, 3}, {});
    const auto full = evaluate(records, WindowSpec{4, 1, 0}, {});
    REQUIRE(skipped[0].windows.size() == 7);
    for (std::size_t w = 0; w < 7; ++w) REQUIRE(skipped[0].windows[w] == full[0].windows[w + 3]);
}

TEST_CASE("threaded evaluation is bit-identical to sequential") {
    std::mt19937_64 rng(9);
    const auto records = testutil::zipfish_records(rng, 8 * 128, 512);
    const WindowSpec spec{8, 4, 0};
    auto request = all_distributions();

    const auto sequential = evaluate(records, spec, request);
    request.threads = 4;
    const auto threaded = evaluate(records, spec, request);

    REQUIRE(threaded.size() == sequential.size());
    for (std::size_t k = 0; k < sequential.size(); ++k) {
        REQUIRE(threaded[k].windows == sequential[k].windows);
        for (std::size_t d = 0; d < request.distributions.size(); ++d) {
            const auto& a = sequential[k].distribution_stats[d];
            const auto& b = threaded[k].distribution_stats[d];
            REQUIRE(a.bin_count() == b.bin_count());
            for (std::size_t bin = 0; bin < a.bin_count(); ++bin) {
                REQUIRE(a.mean(bin) == b.mean(bin));      // exact, not approximate
                REQUIRE(a.stddev(bin) == b.stddev(bin));
            }
        }
    }
}

TEST_CASE("empty stream evaluates to empty levels") {
    const auto levels = evaluate({}, WindowSpec{4, 2, 0}, {});
    REQUIRE(levels.size() == 2);
    CHECK(levels[0].windows.empty());
    CHECK(levels[1].windows.empty());
}
