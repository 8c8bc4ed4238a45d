#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "histql/error.hpp"

namespace histql {

enum class WindowFunctionSyntax { standard, none };

// Syntax differences between SQL engines, consumed by the renderer.
// Statements are otherwise standard SQL; identifiers stay unquoted because
// the schema layer restricts them to [A-Za-z][A-Za-z0-9_]*.
struct Dialect {
    std::string name;
    std::string identifier_quote;
    bool supports_create_table_as = true;
    WindowFunctionSyntax window_functions = WindowFunctionSyntax::standard;
    std::string ceil_function = "CEIL";
    // Index DDL with {{index}}, {{table}}, {{columns}} placeholders.
    std::string index_create_syntax;
    // CAST target type names.
    std::string integer_cast_type;
    std::string real_cast_type;
    // Column type names for tables the ingester creates.
    std::string ddl_integer_type;
    std::string ddl_numeric_type;
    std::string ddl_text_type;
    // Expression naming the engine's implicit per-row id, when one exists.
    std::optional<std::string> implicit_rowid;
    // Expression generating a fresh row number when no key is available.
    std::string generated_key_expr;
    // Catalog query listing table names LIKE {{pattern}} (escape char '\').
    std::string table_list_query;
    size_t max_identifier_length = 0; // 0 = effectively unbounded

    std::string quote(const std::string& ident) const {
        return identifier_quote + ident + identifier_quote;
    }
};

inline Dialect sqlite_dialect() {
    Dialect d;
    d.name = "sqlite";
    d.identifier_quote = "\"";
    d.supports_create_table_as = true;
    d.window_functions = WindowFunctionSyntax::standard;
    d.ceil_function = "CEIL";
    d.index_create_syntax = "CREATE INDEX IF NOT EXISTS {{index}} ON {{table}} ({{columns}})";
    d.integer_cast_type = "INTEGER";
    d.real_cast_type = "REAL";
    d.ddl_integer_type = "INTEGER";
    d.ddl_numeric_type = "NUMERIC";
    d.ddl_text_type = "TEXT";
    d.implicit_rowid = "rowid";
    d.generated_key_expr = "rowid";
    d.table_list_query =
        "SELECT name FROM sqlite_master WHERE type = 'table' AND name LIKE {{pattern}} ESCAPE '\\'";
    d.max_identifier_length = 0;
    return d;
}

inline Dialect mysql_dialect() {
    Dialect d;
    d.name = "mysql";
    d.identifier_quote = "`";
    d.supports_create_table_as = true;
    d.window_functions = WindowFunctionSyntax::standard;
    d.ceil_function = "CEIL";
    d.index_create_syntax = "CREATE INDEX {{index}} ON {{table}} ({{columns}})";
    d.integer_cast_type = "SIGNED";
    d.real_cast_type = "DOUBLE";
    d.ddl_integer_type = "BIGINT";
    d.ddl_numeric_type = "DOUBLE";
    d.ddl_text_type = "VARCHAR(255)";
    d.implicit_rowid = std::nullopt;
    d.generated_key_expr = "ROW_NUMBER() OVER ()";
    d.table_list_query =
        "SELECT table_name FROM information_schema.tables "
        "WHERE table_schema = DATABASE() AND table_name LIKE {{pattern}} ESCAPE '\\'";
    d.max_identifier_length = 64;
    return d;
}

inline const Dialect& get_dialect(const std::string& name) {
    static const std::map<std::string, Dialect> registry = {
        {"sqlite", sqlite_dialect()},
        {"mysql", mysql_dialect()},
    };
    auto it = registry.find(name);
    if (it == registry.end())
        raise(errc::dialect_unsupported, "no dialect registered under '" + name + "'");
    return it->second;
}

inline std::vector<std::string> dialect_names() { return {"sqlite", "mysql"}; }

} // namespace histql
