#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "histql/db.hpp"
#include "histql/error.hpp"
#include "histql/schema.hpp"
#include "histql/sql_templates.hpp"
#include "histql/value.hpp"

namespace histql {

// A group of one-hot binary columns to collapse back into one categorical
// column. Labels default to the source column names.
struct PivotGroup {
    std::string new_column;
    std::vector<std::string> source_columns;
    std::vector<std::string> labels;
    ColumnRole role = ColumnRole::feature;
};

struct SplitSpec {
    double train_fraction = 0.8;
    int64_t seed = 1;
};

// Contents of a schema sidecar file: the delimited file's column layout plus
// optional reverse-pivot instructions.
struct IngestSpec {
    TableSchema schema;
    bool has_header = false;
    std::vector<PivotGroup> pivot_groups;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
        const size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(pos)));
            break;
        }
        fields.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return fields;
}

inline Value parse_field(const std::string& field, ColumnKind kind, size_t line_no) {
    if (field.empty()) return std::monostate{};
    if (kind == ColumnKind::categorical) return field;
    double d = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), d);
    if (ec != std::errc{} || end != field.data() + field.size())
        raise(errc::parse_error, "line " + std::to_string(line_no) + ": '" + field + "' is not numeric");
    if (field.find_first_of(".eE") == std::string::npos) {
        int64_t i = 0;
        const auto [iend, iec] = std::from_chars(field.data(), field.data() + field.size(), i);
        if (iec == std::errc{} && iend == field.data() + field.size()) return i;
    }
    return d;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

// Loads a delimited file (comma separator, '.' decimal point, UTF-8) into a
// fresh table. Adds a leading `rid` column numbering data rows 1..n in file
// order; that key drives deterministic splits and EQRB tie-breaks.
inline int64_t load_csv(DbConnection& conn, const std::string& path, const TableSchema& schema,
                        const std::string& table_name, bool has_header = false) {
    if (!is_identifier(table_name)) raise(errc::bad_identifier, "bad table name '" + table_name + "'");
    for (const auto& c : schema.columns) {
        if (!is_identifier(c.name)) raise(errc::bad_identifier, "bad column name '" + c.name + "'");
        if (c.name == "rid") raise(errc::bad_identifier, "'rid' is reserved for the generated key");
    }
    if (schema.columns.empty()) raise(errc::schema_mismatch, "schema declares no columns");

    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");

    const Dialect& d = conn.dialect();
    std::string ddl = "CREATE TABLE " + table_name + " (\n  rid " + d.ddl_integer_type;
    for (const auto& c : schema.columns)
        ddl += ",\n  " + c.name + " " +
               (c.kind == ColumnKind::numeric ? d.ddl_numeric_type : d.ddl_text_type);
    ddl += "\n)";
    conn.execute("DROP TABLE IF EXISTS " + table_name);
    conn.execute(ddl);

    std::vector<std::string> columns{"rid"};
    for (const auto& c : schema.columns) columns.push_back(c.name);

    std::string line;
    size_t line_no = 0;
    if (has_header) {
        if (!std::getline(in, line)) raise(errc::schema_mismatch, "missing header row");
        ++line_no;
        const auto names = detail::split_line(line);
        if (names.size() != schema.columns.size())
            raise(errc::schema_mismatch, "header has " + std::to_string(names.size()) +
                                             " columns, schema declares " +
                                             std::to_string(schema.columns.size()));
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] != schema.columns[i].name)
                raise(errc::schema_mismatch, "header column " + std::to_string(i + 1) + " is '" +
                                                 names[i] + "', expected '" + schema.columns[i].name + "'");
    }

    conn.execute("BEGIN");
    int64_t rid = 0;
    std::vector<std::vector<Value>> batch;
    constexpr size_t kBatchRows = 4096;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
            const auto fields = detail::split_line(line);
            if (fields.size() != schema.columns.size())
                raise(errc::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(schema.columns.size()) + " fields, got " +
                                             std::to_string(fields.size()));
            std::vector<Value> row;
            row.reserve(fields.size() + 1);
            row.emplace_back(++rid);
            for (size_t i = 0; i < fields.size(); ++i)
                row.push_back(detail::parse_field(fields[i], schema.columns[i].kind, line_no));
            batch.push_back(std::move(row));
            if (batch.size() >= kBatchRows) {
                conn.insert_rows(table_name, columns, batch);
                batch.clear();
            }
        }
        conn.insert_rows(table_name, columns, batch);
    } catch (...) {
        conn.execute("ROLLBACK");
        throw;
    }
    conn.execute("COMMIT");
    return rid;
}

// Collapses each group's one-hot columns into a single categorical column
// whose value is the label of the unique hot column. strict mode rejects
// rows that are not exactly one-hot; lenient mode maps them to NULL.
inline std::string reverse_pivot(DbConnection& conn, const std::string& table,
                                 const std::vector<PivotGroup>& groups, bool strict,
                                 std::string out_table = {}) {
    if (groups.empty()) raise(errc::invalid_argument, "no pivot groups given");
    if (out_table.empty()) out_table = table + "_rp";
    if (!is_identifier(out_table)) raise(errc::bad_identifier, "bad table name '" + out_table + "'");

    const auto cols = conn.table_columns(table);
    if (cols.empty()) raise(errc::unknown_column, "table '" + table + "' does not exist");

    std::set<std::string> column_names;
    for (const auto& [name, type] : cols) column_names.insert(name);

    std::map<std::string, const PivotGroup*> first_source_of;
    std::set<std::string> consumed;
    for (const auto& g : groups) {
        if (g.source_columns.size() < 2)
            raise(errc::invalid_argument, "pivot group '" + g.new_column + "' needs >= 2 source columns");
        if (!is_identifier(g.new_column))
            raise(errc::bad_identifier, "bad column name '" + g.new_column + "'");
        if (column_names.count(g.new_column))
            raise(errc::invalid_argument, "pivot target '" + g.new_column + "' already exists in table");
        const auto& labels = g.labels.empty() ? g.source_columns : g.labels;
        if (labels.size() != g.source_columns.size())
            raise(errc::invalid_argument, "pivot group '" + g.new_column + "': label count mismatch");
        if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
            raise(errc::invalid_argument, "pivot group '" + g.new_column + "': duplicate labels");
        for (const auto& s : g.source_columns) {
            if (!column_names.count(s))
                raise(errc::unknown_column, "pivot source '" + s + "' not in table '" + table + "'");
            if (!consumed.insert(s).second)
                raise(errc::invalid_argument, "column '" + s + "' appears in two pivot groups");
        }
        first_source_of[g.source_columns.front()] = &g;
    }

    // Sources must hold only 0/1.
    for (const auto& g : groups) {
        std::string bad;
        for (const auto& s : g.source_columns) {
            if (!bad.empty()) bad += " OR ";
            bad += s + " IS NULL OR " + s + " NOT IN (0, 1)";
        }
        auto r = conn.query("SELECT COUNT(*) FROM " + table + " WHERE " + bad);
        if (std::get<int64_t>(r.rows.at(0).at(0)) > 0)
            raise(errc::not_binary, "pivot group '" + g.new_column + "' has non-binary values");
    }

    if (strict) {
        for (const auto& g : groups) {
            std::string sum;
            for (const auto& s : g.source_columns) {
                if (!sum.empty()) sum += " + ";
                sum += s;
            }
            auto r = conn.query("SELECT SUM(CASE WHEN (" + sum + ") = 0 THEN 1 ELSE 0 END)," +
                                " SUM(CASE WHEN (" + sum + ") > 1 THEN 1 ELSE 0 END) FROM " + table);
            const auto& row = r.rows.at(0);
            const int64_t zeros = is_null(row.at(0)) ? 0 : std::get<int64_t>(row.at(0));
            const int64_t multis = is_null(row.at(1)) ? 0 : std::get<int64_t>(row.at(1));
            if (zeros > 0)
                raise(errc::zero_hot, "pivot group '" + g.new_column + "': " + std::to_string(zeros) +
                                          " rows with no hot column");
            if (multis > 0)
                raise(errc::multi_hot, "pivot group '" + g.new_column + "': " + std::to_string(multis) +
                                           " rows with several hot columns");
        }
    }

    std::vector<std::string> select;
    for (const auto& [name, type] : cols) {
        const auto it = first_source_of.find(name);
        if (it != first_source_of.end()) {
            const PivotGroup& g = *it->second;
            const auto& labels = g.labels.empty() ? g.source_columns : g.labels;
            std::string sum;
            for (const auto& s : g.source_columns) {
                if (!sum.empty()) sum += " + ";
                sum += s;
            }
            std::string expr = "CASE WHEN (" + sum + ") <> 1 THEN NULL";
            for (size_t i = 0; i < g.source_columns.size(); ++i)
                expr += " WHEN " + g.source_columns[i] + " = 1 THEN " + sql_string_literal(labels[i]);
            expr += " END AS " + g.new_column;
            select.push_back("  " + expr);
        } else if (!consumed.count(name)) {
            select.push_back("  " + name);
        }
    }

    std::string sql = "CREATE TABLE " + out_table + " AS\nSELECT\n";
    for (size_t i = 0; i < select.size(); ++i) sql += select[i] + (i + 1 < select.size() ? ",\n" : "\n");
    sql += "FROM " + table;
    conn.execute("DROP TABLE IF EXISTS " + out_table);
    conn.execute(sql);
    return out_table;
}

// Seeded hash on the stable row id; every row lands in exactly one output
// table and reruns reproduce the same split on any dialect.
inline std::pair<std::string, std::string> split(DbConnection& conn, const std::string& table,
                                                 const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        raise(errc::invalid_argument,
              "train_fraction must be strictly between 0 and 1, got " + format_double(spec.train_fraction));

    std::string key = "rid";
    bool has_rid = false;
    for (const auto& [name, type] : conn.table_columns(table))
        if (name == "rid") has_rid = true;
    if (!has_rid) {
        if (!conn.dialect().implicit_rowid)
            raise(errc::invalid_argument, "table '" + table +
                                              "' has no rid column and dialect '" + conn.dialect().name +
                                              "' has no implicit row id");
        key = *conn.dialect().implicit_rowid;
    }

    const uint64_t seedmix = detail::splitmix64(static_cast<uint64_t>(spec.seed)) % 2147483648ull;
    const std::string h1 =
        "((" + key + " + " + std::to_string(seedmix) + ") * 1103515245 + 12345) % 2147483648";
    const std::string h2 = "((" + h1 + ") * (" + h1 + ") + (" + h1 + ")) % 2147483648";
    const std::string h3 = "((" + h2 + ") * 1103515245 + 12345) % 2147483648";
    const std::string frac = "(" + h3 + ") / 2147483648.0";
    const std::string cond = frac + " < " + format_double(spec.train_fraction);

    const std::string train_table = table + "_train";
    const std::string eval_table = table + "_eval";
    conn.execute("DROP TABLE IF EXISTS " + train_table);
    conn.execute("DROP TABLE IF EXISTS " + eval_table);
    conn.execute("CREATE TABLE " + train_table + " AS\nSELECT * FROM " + table + "\nWHERE " + cond);
    conn.execute("CREATE TABLE " + eval_table + " AS\nSELECT * FROM " + table + "\nWHERE NOT (" + cond +
                 ")");
    return {train_table, eval_table};
}

// ---------------------------------------------------------------------------
// Schema sidecar: a JSON file declaring column names, kinds, roles and pivot
// groups for a delimited file.

inline IngestSpec parse_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(errc::parse_error, "sidecar '" + path + "': " + e.what());
    }

    const auto kind_of = [&](const std::string& s) {
        if (s == "numeric") return ColumnKind::numeric;
        if (s == "categorical") return ColumnKind::categorical;
        raise(errc::parse_error, "sidecar: unknown kind '" + s + "'");
    };
    const auto role_of = [&](const std::string& s) {
        if (s == "feature") return ColumnRole::feature;
        if (s == "target") return ColumnRole::target;
        if (s == "ignored") return ColumnRole::ignored;
        raise(errc::parse_error, "sidecar: unknown role '" + s + "'");
    };

    IngestSpec spec;
    try {
        spec.schema.table_name = j.value("table", "");
        spec.has_header = j.value("has_header", false);
        for (const auto& c : j.at("columns")) {
            ColumnSpec col;
            col.name = c.at("name").get<std::string>();
            col.kind = kind_of(c.value("kind", "categorical"));
            col.role = role_of(c.value("role", "feature"));
            spec.schema.columns.push_back(std::move(col));
        }
        if (j.contains("pivot_groups")) {
            for (const auto& g : j.at("pivot_groups")) {
                PivotGroup group;
                group.new_column = g.at("new_column").get<std::string>();
                for (const auto& s : g.at("source_columns")) group.source_columns.push_back(s.get<std::string>());
                if (g.contains("labels"))
                    for (const auto& l : g.at("labels")) group.labels.push_back(l.get<std::string>());
                group.role = role_of(g.value("role", "feature"));
                spec.pivot_groups.push_back(std::move(group));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        raise(errc::parse_error, "sidecar '" + path + "': " + e.what());
    }
    for (const auto& g : spec.pivot_groups)
        for (const auto& s : g.source_columns)
            if (!spec.schema.find(s))
                raise(errc::parse_error, "sidecar: pivot source '" + s + "' is not a declared column");
    return spec;
}

// Schema of the table reverse_pivot produces from this spec: pass-through
// columns keep their position, each group's new column replaces its first
// source column.
inline TableSchema pivoted_schema(const IngestSpec& spec) {
    TableSchema out;
    out.table_name = spec.schema.table_name;
    std::map<std::string, const PivotGroup*> first_source_of;
    std::set<std::string> consumed;
    for (const auto& g : spec.pivot_groups) {
        first_source_of[g.source_columns.front()] = &g;
        for (const auto& s : g.source_columns) consumed.insert(s);
    }
    for (const auto& c : spec.schema.columns) {
        const auto it = first_source_of.find(c.name);
        if (it != first_source_of.end())
            out.columns.push_back(ColumnSpec{it->second->new_column, ColumnKind::categorical, it->second->role});
        else if (!consumed.count(c.name))
            out.columns.push_back(c);
    }
    return out;
}

} // namespace histql
