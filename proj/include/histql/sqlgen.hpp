#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "histql/binning.hpp"
#include "histql/dialect.hpp"
#include "histql/error.hpp"
#include "histql/schema.hpp"
#include "histql/sql_templates.hpp"

namespace histql {

struct RenderedStatement {
    TemplateId template_id;
    std::string sql_text;
    std::optional<std::string> produces_table;
};

namespace detail {

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Completeness filter excluding rows with NULL in any selected column.
inline std::string null_filter(const ValidatedConfig& v, const std::string& prefix) {
    std::vector<std::string> terms;
    for (const auto& f : v.features()) terms.push_back(prefix + f.name + " IS NOT NULL");
    terms.push_back(prefix + v.target().name + " IS NOT NULL");
    return join(terms, " AND ");
}

inline std::vector<std::string> feature_names(const ValidatedConfig& v) {
    std::vector<std::string> out;
    for (const auto& f : v.features()) out.push_back(f.name);
    return out;
}

inline RenderedStatement make_statement(TemplateId id, std::string sql,
                                        std::optional<std::string> table = {}) {
    if (sql.find("{{") != std::string::npos)
        raise(errc::invalid_argument, "unresolved placeholder in rendered statement");
    return RenderedStatement{id, std::move(sql), std::move(table)};
}

inline std::optional<std::string> fit_key_expr(const ValidatedConfig& v, const Dialect& dialect) {
    if (v.key_column()) return "t." + *v.key_column();
    if (dialect.implicit_rowid) return "t." + *dialect.implicit_rowid;
    return std::nullopt;
}

} // namespace detail

// LIKE pattern matching every table of one model: `<model_id>\_%`.
inline std::string model_table_pattern(const std::string& model_id) {
    std::string escaped;
    for (char c : model_id) {
        if (c == '_' || c == '%' || c == '\\') escaped += '\\';
        escaped += c;
    }
    return escaped + "\\_%";
}

inline std::string render_table_list_query(const std::string& model_id, const Dialect& dialect) {
    return render_template(dialect.table_list_query,
                           {{"pattern", sql_string_literal(model_table_pattern(model_id))}});
}

// ---------------------------------------------------------------------------
// Training pipeline: QT -> QMT -> M -> MAJ.

inline std::vector<RenderedStatement> render_pipeline_train(const ValidatedConfig& v,
                                                            const Dialect& dialect) {
    if (!dialect.supports_create_table_as)
        raise(errc::dialect_unsupported, "dialect '" + dialect.name + "' lacks CREATE TABLE AS");

    const std::string& train = v.training_table();
    const int b = v.bins();
    const auto numerics = v.numeric_features();
    const std::string filter_t = detail::null_filter(v, "t.");
    const std::string filter_plain = detail::null_filter(v, "");
    const auto key_expr = detail::fit_key_expr(v, dialect);
    const auto quant = render_quantization_exprs(numerics, v.binning(), b, QuantMode::fit, dialect, key_expr);

    std::map<std::string, std::string> expr_of;
    for (const auto& [f, e] : quant.bin_exprs) expr_of[f] = e;

    std::vector<RenderedStatement> out;

    // QT
    {
        std::vector<std::string> lines;
        std::string source;
        std::string where;
        if (numerics.empty()) {
            lines.push_back("  t." + v.target().name + " AS " + v.target().name);
            for (const auto& f : v.features()) lines.push_back("  t." + f.name + " AS " + f.name);
            source = train + " t";
            where = "\nWHERE " + filter_t;
        } else {
            std::vector<std::string> inner;
            inner.push_back("    t." + v.target().name + " AS " + v.target().name);
            for (const auto& f : v.features()) {
                if (f.kind == ColumnKind::numeric)
                    inner.push_back("    " + expr_of.at(f.name) + " AS " + f.name);
                else
                    inner.push_back("    t." + f.name + " AS " + f.name);
            }
            source = "(\n  SELECT\n" + detail::join(inner, ",\n") + "\n  FROM " + train +
                     " t\n  CROSS JOIN (SELECT " + quant.stats_select_list + " FROM " + train +
                     " WHERE " + filter_plain + ") s\n  WHERE " + filter_t + "\n) q";
            lines.push_back("  q." + v.target().name + " AS " + v.target().name);
            for (const auto& f : v.features()) {
                if (f.kind == ColumnKind::numeric)
                    lines.push_back("  " + clamped_bin_expr("q." + f.name, b, dialect) + " AS " + f.name);
                else
                    lines.push_back("  q." + f.name + " AS " + f.name);
            }
        }
        const std::string table = v.table_for(TemplateId::QT);
        out.push_back(detail::make_statement(
            TemplateId::QT,
            render_template(templates::kQt, {{"table", table},
                                             {"select_list", detail::join(lines, ",\n")},
                                             {"source", source},
                                             {"where", where}}),
            table));
    }

    // QMT
    {
        const std::string table = v.table_for(TemplateId::QMT);
        std::string sql;
        if (numerics.empty()) {
            sql = render_template(templates::kQmtEmpty, {{"table", table},
                                                         {"text_type", dialect.ddl_text_type},
                                                         {"integer_type", dialect.ddl_integer_type},
                                                         {"real_ddl_type", dialect.ddl_numeric_type}});
        } else {
            std::vector<std::string> branches;
            for (const auto& f : numerics) {
                branches.push_back(render_template(
                    templates::kQmtBranch,
                    {{"feature", f.name},
                     {"clamped_bin", clamped_bin_expr("q.rawbin", b, dialect)},
                     {"real_type", dialect.real_cast_type},
                     {"b", std::to_string(b)},
                     {"bin_expr", expr_of.at(f.name)},
                     {"train", train},
                     {"stats_list", quant.stats_select_list},
                     {"stats_where", " WHERE " + filter_plain},
                     {"where", "  WHERE " + filter_t + "\n"}}));
            }
            sql = render_template(templates::kQmt,
                                  {{"table", table}, {"branches", detail::join(branches, "\nUNION ALL\n")}});
        }
        out.push_back(detail::make_statement(TemplateId::QMT, std::move(sql), table));
    }

    // M
    {
        const std::string table = v.table_for(TemplateId::M);
        auto cols = detail::feature_names(v);
        cols.push_back(v.target().name);
        out.push_back(detail::make_statement(
            TemplateId::M,
            render_template(templates::kM, {{"table", table},
                                            {"columns", detail::join(cols, ", ")},
                                            {"qt_table", v.table_for(TemplateId::QT)}}),
            table));
    }

    // MAJ
    {
        const std::string table = v.table_for(TemplateId::MAJ);
        out.push_back(detail::make_statement(
            TemplateId::MAJ,
            render_template(templates::kMaj, {{"table", table},
                                              {"target", v.target().name},
                                              {"qt_table", v.table_for(TemplateId::QT)}}),
            table));
    }

    return out;
}

// ---------------------------------------------------------------------------
// Prediction pipeline: QE -> QE_IX -> P.

struct PredictPlan {
    std::vector<RenderedStatement> statements;
    std::string key_column;                 // key column name in QE/P
    std::optional<std::string> carried;     // truth column carried through, if any
};

inline PredictPlan render_pipeline_predict(const ValidatedConfig& v, const TableSchema& eval_table,
                                           const Dialect& dialect,
                                           const std::optional<std::string>& carry_column = {}) {
    if (!dialect.supports_create_table_as)
        raise(errc::dialect_unsupported, "dialect '" + dialect.name + "' lacks CREATE TABLE AS");
    if (dialect.window_functions == WindowFunctionSyntax::none)
        raise(errc::dialect_unsupported,
              "dialect '" + dialect.name + "' lacks window functions required by the P step");

    for (const auto& f : v.features())
        if (!eval_table.find(f.name))
            raise(errc::missing_feature_column,
                  "evaluation table '" + eval_table.table_name + "' lacks feature '" + f.name + "'");

    std::optional<std::string> carried = carry_column;
    if (carried) {
        if (!eval_table.find(*carried))
            raise(errc::unknown_column,
                  "column '" + *carried + "' not in evaluation table '" + eval_table.table_name + "'");
    } else if (eval_table.find(v.target().name)) {
        carried = v.target().name;
    }

    std::string key_name;
    std::string key_expr;
    if (v.key_column() && eval_table.find(*v.key_column())) {
        key_name = *v.key_column();
        key_expr = "t." + key_name;
    } else {
        key_name = "rid";
        key_expr = dialect.generated_key_expr;
        if (dialect.implicit_rowid) key_expr = "t." + *dialect.implicit_rowid;
    }
    if (carried && *carried == key_name) carried.reset();

    const std::string& eval = eval_table.table_name;
    const int b = v.bins();
    const auto numerics = v.numeric_features();
    const std::string qmt = v.table_for(TemplateId::QMT);
    const auto quant =
        render_quantization_exprs(numerics, v.binning(), b, QuantMode::eval, dialect, std::nullopt, qmt);
    std::map<std::string, std::string> expr_of;
    for (const auto& [f, e] : quant.bin_exprs) expr_of[f] = e;

    std::vector<RenderedStatement> stmts;

    // QE
    {
        std::vector<std::string> lines;
        std::string source;
        if (numerics.empty()) {
            lines.push_back("  " + key_expr + " AS " + key_name);
            if (carried) lines.push_back("  t." + *carried + " AS " + *carried);
            for (const auto& f : v.features()) lines.push_back("  t." + f.name + " AS " + f.name);
            source = eval + " t";
        } else {
            std::vector<std::string> inner;
            inner.push_back("    " + key_expr + " AS " + key_name);
            if (carried) inner.push_back("    t." + *carried + " AS " + *carried);
            for (const auto& f : v.features()) {
                if (f.kind == ColumnKind::numeric)
                    inner.push_back("    " + expr_of.at(f.name) + " AS " + f.name);
                else
                    inner.push_back("    t." + f.name + " AS " + f.name);
            }
            std::string joins;
            for (const auto& j : quant.eval_joins) joins += "\n  CROSS JOIN " + j;
            source = "(\n  SELECT\n" + detail::join(inner, ",\n") + "\n  FROM " + eval + " t" + joins +
                     "\n) q";
            lines.push_back("  q." + key_name + " AS " + key_name);
            if (carried) lines.push_back("  q." + *carried + " AS " + *carried);
            for (const auto& f : v.features()) {
                if (f.kind == ColumnKind::numeric)
                    lines.push_back("  " + clamped_bin_expr("q." + f.name, b, dialect) + " AS " + f.name);
                else
                    lines.push_back("  q." + f.name + " AS " + f.name);
            }
        }
        const std::string table = v.table_for(TemplateId::QE);
        stmts.push_back(detail::make_statement(
            TemplateId::QE,
            render_template(templates::kQe, {{"table", table},
                                             {"select_list", detail::join(lines, ",\n")},
                                             {"source", source}}),
            table));
    }

    // QE_IX (advisory index on the quantized feature columns)
    stmts.push_back(detail::make_statement(
        TemplateId::QE_IX,
        render_template(dialect.index_create_syntax,
                        {{"index", model_table_name(v.model_id(), TemplateId::QE_IX)},
                         {"table", v.table_for(TemplateId::QE)},
                         {"columns", detail::join(detail::feature_names(v), ", ")}})));

    // P
    {
        const std::string table = v.table_for(TemplateId::P);
        std::vector<std::string> conds;
        for (const auto& f : v.features()) conds.push_back("e." + f.name + " = w." + f.name);
        stmts.push_back(detail::make_statement(
            TemplateId::P,
            render_template(templates::kP,
                            {{"table", table},
                             {"key", key_name},
                             {"carry", carried ? "  e." + *carried + " AS " + *carried + ",\n" : ""},
                             {"target", v.target().name},
                             {"maj_table", v.table_for(TemplateId::MAJ)},
                             {"qe_table", v.table_for(TemplateId::QE)},
                             {"feature_columns", detail::join(detail::feature_names(v), ", ")},
                             {"m_table", v.table_for(TemplateId::M)},
                             {"join_condition", detail::join(conds, " AND ")}}),
            table));
    }

    return PredictPlan{std::move(stmts), key_name, carried};
}

// ---------------------------------------------------------------------------
// Mutual-information rank queries, one compact aggregate per feature.

inline std::vector<std::pair<std::string, RenderedStatement>> render_rank_query(
    const TableSchema& schema, const std::string& target, BinningMethod binning, int b,
    const Dialect& dialect) {
    if (b < 1) raise(errc::bad_bin_count, "bins_b must be >= 1");
    const ColumnSpec* tgt = schema.find(target);
    if (!tgt) raise(errc::unknown_column, "target '" + target + "' not in table '" + schema.table_name + "'");

    std::optional<std::string> key_expr;
    if (schema.find("rid"))
        key_expr = "t.rid";
    else if (dialect.implicit_rowid)
        key_expr = "t." + *dialect.implicit_rowid;

    std::vector<std::pair<std::string, RenderedStatement>> out;
    for (const auto& col : schema.columns) {
        if (col.role != ColumnRole::feature || col.name == target) continue;
        std::string sql;
        if (col.kind == ColumnKind::categorical) {
            sql = render_template(templates::kRankCategorical,
                                  {{"feature", col.name}, {"target", target}, {"train", schema.table_name}});
        } else {
            const auto quant =
                render_quantization_exprs({col}, binning, b, QuantMode::fit, dialect, key_expr);
            const std::string pair_filter_t =
                "t." + col.name + " IS NOT NULL AND t." + target + " IS NOT NULL";
            const std::string pair_filter =
                col.name + " IS NOT NULL AND " + target + " IS NOT NULL";
            sql = render_template(templates::kRankNumeric,
                                  {{"clamped_bin", clamped_bin_expr("q.rawbin", b, dialect)},
                                   {"bin_expr", quant.bin_exprs.front().second},
                                   {"target", target},
                                   {"train", schema.table_name},
                                   {"stats_list", quant.stats_select_list},
                                   {"stats_where", pair_filter},
                                   {"where", pair_filter_t}});
        }
        out.emplace_back(col.name, detail::make_statement(TemplateId::RANK, std::move(sql)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Class-distribution export over 1 or 2 model features (the rows behind the
// 1d/2d probability views).

inline RenderedStatement render_distribution_export(const ValidatedConfig& v,
                                                    const std::vector<std::string>& dims_features,
                                                    int dims, const Dialect& dialect) {
    if (dims != 1 && dims != 2)
        raise(errc::dims_out_of_range, "dims must be 1 or 2, got " + std::to_string(dims));
    if (static_cast<int>(dims_features.size()) != dims)
        raise(errc::dims_out_of_range, "expected " + std::to_string(dims) + " feature(s), got " +
                                           std::to_string(dims_features.size()));
    for (const auto& f : dims_features) {
        const bool known = std::any_of(v.features().begin(), v.features().end(),
                                       [&](const ColumnSpec& c) { return c.name == f; });
        if (!known)
            raise(errc::unknown_column, "'" + f + "' is not a feature of model '" + v.model_id() + "'");
    }
    return detail::make_statement(
        dims == 1 ? TemplateId::EXPORT1D : TemplateId::EXPORT2D,
        render_template(templates::kExport, {{"dims_columns", detail::join(dims_features, ", ")},
                                             {"target", v.target().name},
                                             {"real_type", dialect.real_cast_type},
                                             {"m_table", v.table_for(TemplateId::M)}}));
}

} // namespace histql
