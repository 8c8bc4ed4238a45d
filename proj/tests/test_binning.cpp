#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "histql/binning.hpp"
#include "test_support.hpp"

using namespace histql;
using testsupport::thrown_code;

TEST_CASE("ewb_bin endpoints and midpoint") {
    CHECK(ewb_bin(0.0, 0.0, 10.0, 60) == 1);   // value = min, ceil(0) clamps to 1
    CHECK(ewb_bin(10.0, 0.0, 10.0, 60) == 60); // value = max
    CHECK(ewb_bin(5.0, 0.0, 10.0, 60) == 30);  // ceil(60 * 0.5)
}

TEST_CASE("ewb_bin clamps out-of-range values") {
    CHECK(ewb_bin(-3.0, 0.0, 10.0, 60) == 1);
    CHECK(ewb_bin(1000.0, 0.0, 10.0, 60) == 60);
}

TEST_CASE("ewb_bin degenerate range maps everything to bin 1") {
    CHECK(ewb_bin(7.0, 7.0, 7.0, 60) == 1);
    CHECK(ewb_bin(-99.0, 7.0, 7.0, 60) == 1);
}

TEST_CASE("eqrb_fit hand example with ties across a boundary") {
    const std::vector<double> values = {10, 20, 20, 30};
    CHECK(eqrb_row_bins(values, 2) == std::vector<int>{1, 1, 2, 2});

    const QuantizationMetadata meta = eqrb_fit(values, 2, "f");
    CHECK(meta.global_min == 10.0);
    CHECK(meta.global_max == 30.0);
    REQUIRE(meta.bin_bounds.size() == 2);
    CHECK(meta.bin_bounds[0].bin == 1);
    CHECK(meta.bin_bounds[0].local_min == 10.0);
    CHECK(meta.bin_bounds[0].local_max == 20.0);
    CHECK(meta.bin_bounds[1].bin == 2);
    CHECK(meta.bin_bounds[1].local_min == 20.0);
    CHECK(meta.bin_bounds[1].local_max == 30.0);
}

TEST_CASE("eqrb_fit single row lands in the top bin") {
    const std::vector<double> values = {7};
    CHECK(eqrb_row_bins(values, 5) == std::vector<int>{5});
    const QuantizationMetadata meta = eqrb_fit(values, 5);
    REQUIRE(meta.bin_bounds.size() == 1);
    CHECK(meta.bin_bounds[0].bin == 5);
    CHECK(meta.bin_bounds[0].local_min == 7.0);
    CHECK(meta.bin_bounds[0].local_max == 7.0);
}

TEST_CASE("eqrb with b=1 puts every row in bin 1") {
    const std::vector<double> values = {5, 1, 9, 2, 2, 8};
    for (int bin : eqrb_row_bins(values, 1)) CHECK(bin == 1);
}

TEST_CASE("eqrb_fit rejects empty input") {
    CHECK(thrown_code([] { eqrb_fit({}, 3); }) == errc::empty_input);
}

TEST_CASE("lookup_bin on EQRB metadata") {
    const QuantizationMetadata meta = eqrb_fit(std::vector<double>{10, 20, 20, 30}, 2);
    CHECK(lookup_bin(20.0, meta) == 1);   // smallest bin whose local_max covers 20
    CHECK(lookup_bin(1000.0, meta) == 2); // above global max clamps to top bin
    CHECK(lookup_bin(-5.0, meta) == 1);   // below global min clamps to bottom bin
    CHECK(lookup_bin(25.0, meta) == 2);
}

TEST_CASE("lookup_bin on EWB metadata clamps below range") {
    QuantizationMetadata meta;
    meta.method = BinningMethod::EWB;
    meta.bins_b = 60;
    meta.global_min = 0.0;
    meta.global_max = 10.0;
    CHECK(lookup_bin(-3.0, meta) == 1);
    CHECK(lookup_bin(11.0, meta) == 60);
}

TEST_CASE("bin range property on random value/meta pairs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 100000; ++i) {
        const int b = static_cast<int>(rng() % 64) + 1;
        double lo = dist(rng), hi = dist(rng);
        if (lo > hi) std::swap(lo, hi);
        const int bin = ewb_bin(dist(rng), lo, hi, b);
        REQUIRE(bin >= 1);
        REQUIRE(bin <= b);
    }
}

TEST_CASE("EWB monotonicity") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-100.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int b = static_cast<int>(rng() % 32) + 1;
        std::vector<double> values(200);
        for (auto& v : values) v = dist(rng);
        std::sort(values.begin(), values.end());
        int prev = 1;
        for (double v : values) {
            const int bin = ewb_bin(v, -50.0, 50.0, b);
            REQUIRE(bin >= prev);
            prev = bin;
        }
    }
}

TEST_CASE("EQRB bins are balanced to within one row") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t m = rng() % 500 + 1;
        const int b = static_cast<int>(rng() % 8) + 1;
        std::vector<double> values(m);
        for (auto& v : values) v = static_cast<double>(rng() % 50); // tie-heavy
        const auto bins = eqrb_row_bins(values, b);
        std::map<int, int> counts;
        for (int bin : bins) counts[bin]++;
        int lo = INT_MAX, hi = 0;
        for (const auto& [bin, c] : counts) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (m >= static_cast<size_t>(b))
            CHECK(hi - lo <= 1);
    }
}

TEST_CASE("lookup_bin is deterministic") {
    const QuantizationMetadata meta = eqrb_fit(std::vector<double>{1, 2, 2, 3, 9}, 3);
    for (double v : {-1.0, 1.0, 2.0, 2.5, 3.0, 10.0})
        CHECK(lookup_bin(v, meta) == lookup_bin(v, meta));
}

TEST_CASE("quantization SQL fragments") {
    const Dialect sqlite = sqlite_dialect();
    const std::vector<ColumnSpec> feats = {{"Elevation", ColumnKind::numeric, ColumnRole::feature}};

    SECTION("EWB fit fragment transcribes the formula") {
        const auto q = render_quantization_exprs(feats, BinningMethod::EWB, 60, QuantMode::fit, sqlite);
        REQUIRE(q.bin_exprs.size() == 1);
        const std::string& expr = q.bin_exprs[0].second;
        CHECK(expr.find("CEIL(60.0 * (t.Elevation - s.Elevation_min) / (s.Elevation_max - s.Elevation_min))") !=
              std::string::npos);
        CHECK(q.stats_select_list.find("MIN(Elevation) AS Elevation_min") != std::string::npos);
    }
    SECTION("EQRB fit fragment uses a rank window") {
        const auto q = render_quantization_exprs(feats, BinningMethod::EQRB, 39, QuantMode::fit, sqlite,
                                                 std::string("t.rid"));
        const std::string& expr = q.bin_exprs[0].second;
        CHECK(expr.find("CEIL(39.0 * ROW_NUMBER() OVER (ORDER BY t.Elevation, t.rid) / s.m)") !=
              std::string::npos);
    }
    SECTION("b=1 clamp folds every value to bin 1") {
        const std::string clamp = clamped_bin_expr("q.Elevation", 1, sqlite);
        CHECK(clamp == "CAST(CASE WHEN q.Elevation < 1 THEN 1 WHEN q.Elevation > 1 THEN 1 ELSE q.Elevation END AS INTEGER)");
    }
    SECTION("EQRB without key on a dialect lacking implicit rowid fails") {
        CHECK(thrown_code([&] {
                  render_quantization_exprs(feats, BinningMethod::EQRB, 5, QuantMode::fit, mysql_dialect());
              }) == errc::dialect_unsupported);
    }
    SECTION("eval fragments consult the QMT table") {
        const auto q = render_quantization_exprs(feats, BinningMethod::EQRB, 5, QuantMode::eval, sqlite,
                                                 std::nullopt, "m1_QMT");
        CHECK(q.bin_exprs[0].second.find("SELECT MIN(bin) FROM m1_QMT WHERE feature_name = 'Elevation' AND local_max >= t.Elevation") !=
              std::string::npos);
        const auto e = render_quantization_exprs(feats, BinningMethod::EWB, 5, QuantMode::eval, sqlite,
                                                 std::nullopt, "m1_QMT");
        REQUIRE(e.eval_joins.size() == 1);
        CHECK(e.eval_joins[0].find("FROM m1_QMT WHERE feature_name = 'Elevation'") != std::string::npos);
    }
}

TEST_CASE("ewb degenerate all-equal input still bins") {
    const QuantizationMetadata meta = ewb_fit(std::vector<double>{4, 4, 4, 4}, 8);
    REQUIRE(meta.bin_bounds.size() == 1);
    CHECK(meta.bin_bounds[0].bin == 1);
    CHECK(lookup_bin(4.0, meta) == 1);
}
