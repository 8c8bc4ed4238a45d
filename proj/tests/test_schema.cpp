#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "histql/schema.hpp"
#include "test_support.hpp"

using namespace histql;
using testsupport::covertype_config;
using testsupport::covertype_schema;
using testsupport::thrown_code;

TEST_CASE("validate_config accepts the five-feature covertype model") {
    const auto schema = covertype_schema();
    const auto config = covertype_config();
    const ValidatedConfig v = validate_config(config, schema);
    CHECK(v.config() == config);
    CHECK(v.training_table() == "covertype_train");
    CHECK(v.features().size() == 5);
    CHECK(v.features()[0].kind == ColumnKind::numeric);
    CHECK(v.features()[1].kind == ColumnKind::categorical);
    CHECK(v.target().name == "Cover_Type");
    CHECK(v.numeric_features().size() == 3);
}

TEST_CASE("validate_config is idempotent") {
    const auto schema = covertype_schema();
    const auto config = covertype_config();
    const ValidatedConfig once = validate_config(config, schema);
    const ValidatedConfig twice = validate_config(once.config(), schema);
    CHECK(once.config() == twice.config());
}

TEST_CASE("validate_config rejects bad inputs") {
    const auto schema = covertype_schema();
    auto config = covertype_config();

    SECTION("empty feature list") {
        config.features.clear();
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::duplicate_feature);
    }
    SECTION("duplicate feature") {
        config.features = {"Elevation", "Elevation"};
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::duplicate_feature);
    }
    SECTION("target listed as feature") {
        config.features = {"Elevation", "Cover_Type"};
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::target_is_feature);
    }
    SECTION("unknown feature column") {
        config.features = {"Elevation", "Latitude"};
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::unknown_column);
    }
    SECTION("unknown target column") {
        config.target = "Tree_Kind";
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::unknown_column);
    }
    SECTION("bad model id") {
        config.model_id = "1model";
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::bad_identifier);
    }
    SECTION("model id too long") {
        config.model_id = std::string(kMaxModelIdLength + 1, 'a');
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::bad_identifier);
    }
    SECTION("bad bin count") {
        config.bins_b = 0;
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::bad_bin_count);
    }
    SECTION("reserved column name as feature") {
        ModelConfig c = config;
        c.features = {"Elevation", "cnt"};
        CHECK(thrown_code([&] { validate_config(c, schema); }) == errc::bad_identifier);
    }
    SECTION("unknown key column") {
        config.key_column = "row_key";
        CHECK(thrown_code([&] { validate_config(config, schema); }) == errc::unknown_column);
    }
}

TEST_CASE("identifier charset") {
    CHECK(is_identifier("Elevation"));
    CHECK(is_identifier("a_b_c9"));
    CHECK_FALSE(is_identifier(""));
    CHECK_FALSE(is_identifier("_leading"));
    CHECK_FALSE(is_identifier("9lead"));
    CHECK_FALSE(is_identifier("has-dash"));
    CHECK_FALSE(is_identifier("has space"));
    CHECK_FALSE(is_identifier("quote\"d"));
}

TEST_CASE("table names round-trip through parse_table_name") {
    const std::array<TemplateId, 7> ids = {TemplateId::QT, TemplateId::QMT, TemplateId::M,
                                           TemplateId::MAJ, TemplateId::QE, TemplateId::QE_IX,
                                           TemplateId::P};
    std::mt19937_64 rng(7);
    const std::string alphabet = "abcXYZ019_";
    for (int i = 0; i < 500; ++i) {
        std::string id(1, static_cast<char>('a' + rng() % 26));
        const size_t extra = rng() % 12;
        for (size_t k = 0; k < extra; ++k) id += alphabet[rng() % alphabet.size()];
        const TemplateId t = ids[rng() % ids.size()];
        const auto parsed = parse_table_name(model_table_name(id, t));
        REQUIRE(parsed.has_value());
        CHECK(parsed->first == id);
        CHECK(parsed->second == t);
    }
    CHECK_FALSE(parse_table_name("no_suffix_here").has_value());
    CHECK_FALSE(parse_table_name("_QT").has_value());
    CHECK_FALSE(parse_table_name("plain").has_value());
}
