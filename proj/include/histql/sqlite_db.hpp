#pragma once

#include <sqlite3.h>

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "histql/db.hpp"
#include "histql/error.hpp"
#include "histql/schema.hpp"

namespace histql {

namespace detail {

struct SqliteCloser {
    void operator()(sqlite3* db) const noexcept {
        if (db) sqlite3_close_v2(db);
    }
};

struct StmtFinalizer {
    void operator()(sqlite3_stmt* s) const noexcept {
        if (s) sqlite3_finalize(s);
    }
};

using StmtPtr = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

inline void sqlite_ceil_udf(sqlite3_context* ctx, int, sqlite3_value** argv) {
    if (sqlite3_value_type(argv[0]) == SQLITE_NULL) {
        sqlite3_result_null(ctx);
    } else if (sqlite3_value_type(argv[0]) == SQLITE_INTEGER) {
        sqlite3_result_int64(ctx, sqlite3_value_int64(argv[0]));
    } else {
        sqlite3_result_double(ctx, std::ceil(sqlite3_value_double(argv[0])));
    }
}

} // namespace detail

// Embedded backend over the sqlite3 C API. Use ":memory:" for a throwaway
// database.
class SqliteConnection final : public DbConnection {
public:
    explicit SqliteConnection(const std::string& path) : dialect_(sqlite_dialect()) {
        sqlite3* raw = nullptr;
        if (sqlite3_open(path.c_str(), &raw) != SQLITE_OK) {
            const std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
            sqlite3_close_v2(raw);
            raise(errc::io_error, "cannot open database '" + path + "': " + msg);
        }
        db_.reset(raw);
        ensure_ceil();
    }

    const Dialect& dialect() const override { return dialect_; }

    void execute(const std::string& sql) override {
        char* errmsg = nullptr;
        if (sqlite3_exec(db_.get(), sql.c_str(), nullptr, nullptr, &errmsg) != SQLITE_OK) {
            std::string msg = errmsg ? errmsg : sqlite3_errmsg(db_.get());
            sqlite3_free(errmsg);
            raise(errc::sql_execution, msg);
        }
    }

    QueryResult query(const std::string& sql) override {
        detail::StmtPtr stmt = prepare(sql);
        QueryResult result;
        const int ncols = sqlite3_column_count(stmt.get());
        for (int i = 0; i < ncols; ++i) result.columns.emplace_back(sqlite3_column_name(stmt.get(), i));
        int rc;
        while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) {
            std::vector<Value> row;
            row.reserve(static_cast<size_t>(ncols));
            for (int i = 0; i < ncols; ++i) row.push_back(read_column(stmt.get(), i));
            result.rows.push_back(std::move(row));
        }
        if (rc != SQLITE_DONE) raise(errc::sql_execution, sqlite3_errmsg(db_.get()));
        return result;
    }

    std::vector<std::pair<std::string, std::string>> table_columns(const std::string& table) override {
        if (!is_identifier(table)) raise(errc::bad_identifier, "bad table name '" + table + "'");
        auto info = query("PRAGMA table_info(" + table + ")");
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& row : info.rows)
            out.emplace_back(std::get<std::string>(row[1]),
                             std::holds_alternative<std::string>(row[2]) ? std::get<std::string>(row[2]) : "");
        return out;
    }

    void insert_rows(const std::string& table, const std::vector<std::string>& columns,
                     const std::vector<std::vector<Value>>& rows) override {
        if (rows.empty()) return;
        std::string sql = "INSERT INTO " + table + " (";
        for (size_t i = 0; i < columns.size(); ++i) sql += (i ? ", " : "") + columns[i];
        sql += ") VALUES (";
        for (size_t i = 0; i < columns.size(); ++i) sql += i ? ", ?" : "?";
        sql += ")";
        detail::StmtPtr stmt = prepare(sql);
        for (const auto& row : rows) {
            if (row.size() != columns.size())
                raise(errc::arity_mismatch, "row width does not match column list");
            for (size_t i = 0; i < row.size(); ++i) bind(stmt.get(), static_cast<int>(i) + 1, row[i]);
            if (sqlite3_step(stmt.get()) != SQLITE_DONE)
                raise(errc::sql_execution, sqlite3_errmsg(db_.get()));
            sqlite3_reset(stmt.get());
            sqlite3_clear_bindings(stmt.get());
        }
    }

private:
    detail::StmtPtr prepare(const std::string& sql) {
        sqlite3_stmt* raw = nullptr;
        if (sqlite3_prepare_v2(db_.get(), sql.c_str(), -1, &raw, nullptr) != SQLITE_OK) {
            std::string msg = sqlite3_errmsg(db_.get());
            sqlite3_finalize(raw);
            raise(errc::sql_execution, msg);
        }
        return detail::StmtPtr(raw);
    }

    static Value read_column(sqlite3_stmt* stmt, int i) {
        switch (sqlite3_column_type(stmt, i)) {
        case SQLITE_NULL:
            return std::monostate{};
        case SQLITE_INTEGER:
            return static_cast<int64_t>(sqlite3_column_int64(stmt, i));
        case SQLITE_FLOAT:
            return sqlite3_column_double(stmt, i);
        default:
            return std::string(reinterpret_cast<const char*>(sqlite3_column_text(stmt, i)));
        }
    }

    static void bind(sqlite3_stmt* stmt, int idx, const Value& v) {
        switch (v.index()) {
        case 0: sqlite3_bind_null(stmt, idx); break;
        case 1: sqlite3_bind_int64(stmt, idx, std::get<int64_t>(v)); break;
        case 2: sqlite3_bind_double(stmt, idx, std::get<double>(v)); break;
        default:
            sqlite3_bind_text(stmt, idx, std::get<std::string>(v).c_str(), -1, SQLITE_TRANSIENT);
        }
    }

    // Older sqlite builds ship without SQLITE_ENABLE_MATH_FUNCTIONS; provide
    // CEIL ourselves when the built-in is absent.
    void ensure_ceil() {
        sqlite3_stmt* probe = nullptr;
        if (sqlite3_prepare_v2(db_.get(), "SELECT CEIL(0.5)", -1, &probe, nullptr) == SQLITE_OK) {
            sqlite3_finalize(probe);
            return;
        }
        sqlite3_finalize(probe);
        sqlite3_create_function(db_.get(), "CEIL", 1, SQLITE_UTF8 | SQLITE_DETERMINISTIC, nullptr,
                                detail::sqlite_ceil_udf, nullptr, nullptr);
    }

    std::unique_ptr<sqlite3, detail::SqliteCloser> db_;
    Dialect dialect_;
};

} // namespace histql
