#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "histql/db.hpp"
#include "histql/error.hpp"
#include "histql/schema.hpp"
#include "histql/sqlgen.hpp"

namespace histql {

// Handle on a trained model: the materialized count table plus the bits the
// client keeps around (majority class, row count). Everything heavy stays in
// the database.
struct ContingencyModel {
    ValidatedConfig config;
    std::string qt_table;
    std::string qmt_table;
    std::string m_table;
    std::string maj_table;
    Value majority_class;
    int64_t trained_row_count = 0;
};

struct EvaluationReport {
    int64_t total_rows = 0;
    int64_t correct_rows = 0;
    double accuracy = 0.0;
    int64_t fallback_rows = 0;
    double wall_time_seconds = 0.0;
};

struct RankEntry {
    std::string feature;
    double mi_bits = 0.0;
};

namespace detail {

inline void run_step(DbConnection& conn, const RenderedStatement& stmt) {
    try {
        conn.execute(stmt.sql_text);
    } catch (const error& e) {
        raise(errc::sql_execution,
              "template " + std::string(template_name(stmt.template_id)) + " failed: " + e.what());
    }
}

inline int64_t count_rows(DbConnection& conn, const std::string& table) {
    auto r = conn.query("SELECT COUNT(*) FROM " + table);
    return std::get<int64_t>(r.rows.at(0).at(0));
}

inline std::vector<std::string> model_tables(DbConnection& conn, const std::string& model_id) {
    auto r = conn.query(render_table_list_query(model_id, conn.dialect()));
    std::vector<std::string> names;
    for (const auto& row : r.rows) names.push_back(std::get<std::string>(row.at(0)));
    return names;
}

inline TableSchema introspect(DbConnection& conn, const std::string& table) {
    TableSchema s;
    s.table_name = table;
    for (const auto& [name, type] : conn.table_columns(table))
        s.columns.push_back(ColumnSpec{name, ColumnKind::categorical, ColumnRole::feature});
    return s;
}

} // namespace detail

inline int drop_model(DbConnection& conn, const std::string& model_id) {
    const auto names = detail::model_tables(conn, model_id);
    for (const auto& n : names) conn.execute("DROP TABLE IF EXISTS " + n);
    return static_cast<int>(names.size());
}

inline ContingencyModel train(DbConnection& conn, const ValidatedConfig& config, bool force = false,
                              std::ostream* warnings = nullptr) {
    const auto existing = detail::model_tables(conn, config.model_id());
    if (!existing.empty()) {
        if (!force)
            raise(errc::table_exists, "tables with prefix '" + config.model_id() +
                                          "_' already exist (pass force to replace them)");
        drop_model(conn, config.model_id());
    }

    const auto statements = render_pipeline_train(config, conn.dialect());
    for (const auto& stmt : statements) {
        detail::run_step(conn, stmt);
        if (stmt.template_id == TemplateId::QT) {
            if (detail::count_rows(conn, *stmt.produces_table) == 0) {
                drop_model(conn, config.model_id());
                raise(errc::empty_training_table,
                      "no complete rows in training table '" + config.training_table() + "'");
            }
        }
    }

    ContingencyModel model{config,
                           config.table_for(TemplateId::QT),
                           config.table_for(TemplateId::QMT),
                           config.table_for(TemplateId::M),
                           config.table_for(TemplateId::MAJ),
                           std::monostate{},
                           0};
    model.trained_row_count = detail::count_rows(conn, model.qt_table);
    auto maj = conn.query("SELECT " + config.target().name + " FROM " + model.maj_table);
    model.majority_class = maj.rows.at(0).at(0);
    (void)warnings;
    return model;
}

struct PredictOutcome {
    std::string p_table;
    std::string key_column;
    std::optional<std::string> carried;
    double wall_time_seconds = 0.0;
};

inline PredictOutcome predict_detailed(DbConnection& conn, const ContingencyModel& model,
                                       const std::string& eval_table,
                                       const std::optional<std::string>& carry_column = {},
                                       std::ostream* warnings = nullptr) {
    for (const auto& t : {model.m_table, model.qmt_table, model.maj_table})
        if (!table_exists(conn, t))
            raise(errc::missing_model_tables, "model table '" + t + "' does not exist");
    if (!table_exists(conn, eval_table))
        raise(errc::missing_feature_column, "evaluation table '" + eval_table + "' does not exist");

    const TableSchema eval_schema = detail::introspect(conn, eval_table);
    auto plan = render_pipeline_predict(model.config, eval_schema, conn.dialect(), carry_column);

    conn.execute("DROP TABLE IF EXISTS " + model.config.table_for(TemplateId::QE));
    conn.execute("DROP TABLE IF EXISTS " + model.config.table_for(TemplateId::P));

    const auto start = std::chrono::steady_clock::now();
    for (const auto& stmt : plan.statements) {
        if (stmt.template_id == TemplateId::QE_IX) {
            // Advisory: the index only speeds up the P join.
            try {
                conn.execute(stmt.sql_text);
            } catch (const error& e) {
                if (warnings) *warnings << "warning: QE_IX skipped: " << e.what() << "\n";
            }
        } else {
            detail::run_step(conn, stmt);
        }
    }
    const auto stop = std::chrono::steady_clock::now();

    PredictOutcome out;
    out.p_table = model.config.table_for(TemplateId::P);
    out.key_column = plan.key_column;
    out.carried = plan.carried;
    out.wall_time_seconds = std::chrono::duration<double>(stop - start).count();
    return out;
}

inline std::string predict(DbConnection& conn, const ContingencyModel& model,
                           const std::string& eval_table, std::ostream* warnings = nullptr) {
    return predict_detailed(conn, model, eval_table, std::nullopt, warnings).p_table;
}

inline EvaluationReport evaluate(DbConnection& conn, const ContingencyModel& model,
                                 const std::string& eval_table, const std::string& truth_column,
                                 std::ostream* warnings = nullptr) {
    const auto outcome = predict_detailed(conn, model, eval_table, truth_column, warnings);
    if (!outcome.carried)
        raise(errc::invalid_argument, "truth column '" + truth_column + "' was not carried into P");

    auto r = conn.query("SELECT COUNT(*), SUM(CASE WHEN predicted = " + *outcome.carried +
                        " THEN 1 ELSE 0 END), SUM(1 - matched) FROM " + outcome.p_table);
    EvaluationReport report;
    report.total_rows = std::get<int64_t>(r.rows.at(0).at(0));
    if (report.total_rows > 0) {
        report.correct_rows = std::get<int64_t>(r.rows.at(0).at(1));
        report.fallback_rows = std::get<int64_t>(r.rows.at(0).at(2));
        report.accuracy = static_cast<double>(report.correct_rows) / static_cast<double>(report.total_rows);
    }
    report.wall_time_seconds = outcome.wall_time_seconds;
    return report;
}

// ---------------------------------------------------------------------------
// Mutual information. The database returns compact (x, y, count) aggregates;
// the log arithmetic happens here, in bits.

inline double mutual_information_bits(const QueryResult& counts) {
    std::map<Value, int64_t, ValueLess> mx, my;
    int64_t m = 0;
    for (const auto& row : counts.rows) {
        const int64_t c = std::get<int64_t>(row.at(2));
        mx[row.at(0)] += c;
        my[row.at(1)] += c;
        m += c;
    }
    if (m == 0) return 0.0;
    double mi = 0.0;
    for (const auto& row : counts.rows) {
        const int64_t c = std::get<int64_t>(row.at(2));
        if (c == 0) continue;
        const double ratio = (static_cast<double>(c) * static_cast<double>(m)) /
                             (static_cast<double>(mx[row.at(0)]) * static_cast<double>(my[row.at(1)]));
        mi += (static_cast<double>(c) / static_cast<double>(m)) * std::log2(ratio);
    }
    return mi;
}

inline std::vector<RankEntry> rank(DbConnection& conn, const TableSchema& schema,
                                   const std::string& target, BinningMethod binning, int b) {
    std::vector<RankEntry> out;
    for (const auto& [feature, stmt] : render_rank_query(schema, target, binning, b, conn.dialect())) {
        QueryResult counts;
        try {
            counts = conn.query(stmt.sql_text);
        } catch (const error& e) {
            raise(errc::sql_execution, "template RANK failed for '" + feature + "': " + e.what());
        }
        out.push_back(RankEntry{feature, mutual_information_bits(counts)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.mi_bits != b.mi_bits) return a.mi_bits > b.mi_bits;
        return a.feature < b.feature;
    });
    return out;
}

inline QueryResult export_distribution(DbConnection& conn, const ContingencyModel& model,
                                       const std::vector<std::string>& dims_features, int dims) {
    const auto stmt = render_distribution_export(model.config, dims_features, dims, conn.dialect());
    try {
        return conn.query(stmt.sql_text);
    } catch (const error& e) {
        raise(errc::sql_execution,
              "template " + std::string(template_name(stmt.template_id)) + " failed: " + e.what());
    }
}

} // namespace histql
