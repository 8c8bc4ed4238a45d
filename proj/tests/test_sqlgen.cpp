#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "histql/sqlgen.hpp"
#include "histql/sqlite_db.hpp"
#include "support/golden_set.hpp"
#include "test_support.hpp"

using namespace histql;
using testsupport::covertype_config;
using testsupport::covertype_schema;
using testsupport::thrown_code;

namespace {

TableSchema eval_schema() { return covertype_schema("covertype_eval"); }

} // namespace

TEST_CASE("golden: every (dialect, template) render is byte-identical") {
    // Run with HISTQL_UPDATE_GOLDEN=1 to regenerate after an intentional change.
    const bool update = std::getenv("HISTQL_UPDATE_GOLDEN") != nullptr;
    for (const auto& entry : testsupport::golden_entries()) {
        const std::filesystem::path path = std::filesystem::path(HISTQL_GOLDEN_DIR) / entry.rel_path;
        const std::string content = entry.content + "\n";
        if (update) {
            std::filesystem::create_directories(path.parent_path());
            std::ofstream out(path, std::ios::binary);
            out << content;
            continue;
        }
        std::ifstream in(path, std::ios::binary);
        INFO("golden file: " << path << " (set HISTQL_UPDATE_GOLDEN=1 to regenerate)");
        REQUIRE(in.good());
        std::ostringstream expected;
        expected << in.rdbuf();
        CHECK(expected.str() == content);
    }
}

TEST_CASE("rendering is pure") {
    const auto v = validate_config(covertype_config(), covertype_schema());
    for (const auto& dialect_name : dialect_names()) {
        const Dialect& dialect = get_dialect(dialect_name);
        const auto a = render_pipeline_train(v, dialect);
        const auto b = render_pipeline_train(v, dialect);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].sql_text == b[i].sql_text);
    }
}

TEST_CASE("name discipline: produced tables follow <model_id>_<template_id>") {
    const auto v = validate_config(covertype_config(), covertype_schema());
    const Dialect& dialect = sqlite_dialect();
    auto stmts = render_pipeline_train(v, dialect);
    const auto plan = render_pipeline_predict(v, eval_schema(), dialect);
    stmts.insert(stmts.end(), plan.statements.begin(), plan.statements.end());
    for (const auto& stmt : stmts) {
        if (!stmt.produces_table) continue;
        const auto parsed = parse_table_name(*stmt.produces_table);
        REQUIRE(parsed.has_value());
        CHECK(parsed->first == "m1");
        CHECK(parsed->second == stmt.template_id);
        CHECK(stmt.sql_text.starts_with("CREATE TABLE " + *stmt.produces_table + " AS"));
        CHECK(stmt.sql_text.find("{{") == std::string::npos);
    }
}

TEST_CASE("no dialect leakage between rendered texts") {
    const auto v = validate_config(covertype_config(BinningMethod::EQRB, 39), covertype_schema());
    for (const auto& dialect_name : dialect_names()) {
        const Dialect& dialect = get_dialect(dialect_name);
        std::string all;
        for (const auto& s : render_pipeline_train(v, dialect)) all += s.sql_text + "\n";
        for (const auto& s : render_pipeline_predict(v, eval_schema(), dialect).statements)
            all += s.sql_text + "\n";
        all += render_table_list_query("m1", dialect) + "\n";
        if (dialect_name == "sqlite") {
            CHECK(all.find("SIGNED") == std::string::npos);
            CHECK(all.find("information_schema") == std::string::npos);
            CHECK(all.find("`") == std::string::npos);
        } else {
            CHECK(all.find("rowid") == std::string::npos);
            CHECK(all.find("sqlite_master") == std::string::npos);
            CHECK(all.find("IF NOT EXISTS") == std::string::npos);
            CHECK(all.find("\"") == std::string::npos);
        }
    }
}

TEST_CASE("statement order is sufficient on a fresh database") {
    SqliteConnection conn(":memory:");
    conn.execute("CREATE TABLE t (rid INTEGER, a NUMERIC, c TEXT, y TEXT)");
    conn.execute("INSERT INTO t VALUES (1, 1.5, 'u', 'A'), (2, 2.5, 'v', 'B'), (3, 9.0, 'u', 'A')");
    conn.execute("CREATE TABLE t_eval (rid INTEGER, a NUMERIC, c TEXT, y TEXT)");
    conn.execute("INSERT INTO t_eval VALUES (1, 2.0, 'u', 'A')");

    TableSchema schema{"t",
                       {{"rid", ColumnKind::numeric, ColumnRole::ignored},
                        {"a", ColumnKind::numeric, ColumnRole::feature},
                        {"c", ColumnKind::categorical, ColumnRole::feature},
                        {"y", ColumnKind::categorical, ColumnRole::target}},
                       -1};
    ModelConfig config;
    config.model_id = "seq";
    config.features = {"a", "c"};
    config.target = "y";
    config.binning = BinningMethod::EQRB;
    config.bins_b = 2;
    config.key_column = "rid";
    const auto v = validate_config(config, schema);

    for (const auto& stmt : render_pipeline_train(v, conn.dialect())) conn.execute(stmt.sql_text);
    TableSchema ev = schema;
    ev.table_name = "t_eval";
    for (const auto& stmt : render_pipeline_predict(v, ev, conn.dialect()).statements)
        conn.execute(stmt.sql_text);
    CHECK(std::get<int64_t>(conn.query("SELECT COUNT(*) FROM seq_P").rows[0][0]) == 1);
}

TEST_CASE("zero numeric features degenerates QT to a projection") {
    TableSchema schema{"t",
                       {{"c", ColumnKind::categorical, ColumnRole::feature},
                        {"y", ColumnKind::categorical, ColumnRole::target}},
                       -1};
    ModelConfig config;
    config.model_id = "m2";
    config.features = {"c"};
    config.target = "y";
    config.binning = BinningMethod::EWB;
    config.bins_b = 4;
    const auto v = validate_config(config, schema);
    const auto stmts = render_pipeline_train(v, sqlite_dialect());

    CHECK(stmts[0].sql_text ==
          "CREATE TABLE m2_QT AS\n"
          "SELECT\n"
          "  t.y AS y,\n"
          "  t.c AS c\n"
          "FROM t t\n"
          "WHERE t.c IS NOT NULL AND t.y IS NOT NULL");
    CHECK(stmts[1].sql_text.find("CREATE TABLE m2_QMT (") == 0); // empty metadata table

    SqliteConnection conn(":memory:");
    conn.execute("CREATE TABLE t (c TEXT, y TEXT)");
    conn.execute("INSERT INTO t VALUES ('u', 'A'), ('v', 'B')");
    for (const auto& stmt : stmts) conn.execute(stmt.sql_text);
    CHECK(conn.query("SELECT * FROM m2_QMT").rows.empty());
}

TEST_CASE("distribution export contract") {
    const auto v = validate_config(covertype_config(), covertype_schema());
    CHECK(thrown_code([&] { render_distribution_export(v, {"Elevation"}, 3, sqlite_dialect()); }) ==
          errc::dims_out_of_range);
    CHECK(thrown_code([&] {
              render_distribution_export(v, {"Elevation", "Soil_Type"}, 1, sqlite_dialect());
          }) == errc::dims_out_of_range);
    CHECK(thrown_code([&] { render_distribution_export(v, {"Aspect"}, 1, sqlite_dialect()); }) ==
          errc::unknown_column); // not a model feature
}

TEST_CASE("rank query respects kinds and skips non-features") {
    const auto ranked =
        render_rank_query(covertype_schema(), "Cover_Type", BinningMethod::EWB, 39, sqlite_dialect());
    CHECK(ranked.size() == 7); // rid (ignored) and the target are skipped
    for (const auto& [feature, stmt] : ranked) {
        CHECK(feature != "rid");
        CHECK(feature != "Cover_Type");
        if (feature == "Wilderness_Area" || feature == "Soil_Type")
            CHECK(stmt.sql_text.find("CEIL") == std::string::npos);
        else
            CHECK(stmt.sql_text.find("CEIL(39.0 * ") != std::string::npos);
    }
}
