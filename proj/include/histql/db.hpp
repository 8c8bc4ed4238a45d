#pragma once

#include <string>
#include <utility>
#include <vector>

#include "histql/dialect.hpp"
#include "histql/value.hpp"

namespace histql {

struct QueryResult {
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

// Minimal connection surface the executor needs. All pipeline state lives in
// database tables; result sets coming back through query() are the small
// aggregates (rank counts, evaluation tallies, metadata reads).
class DbConnection {
public:
    virtual ~DbConnection() = default;

    virtual const Dialect& dialect() const = 0;

    // Runs one statement that produces no rows.
    virtual void execute(const std::string& sql) = 0;

    // Runs one statement and collects its rows.
    virtual QueryResult query(const std::string& sql) = 0;

    // (name, declared type) per column; empty when the table does not exist.
    virtual std::vector<std::pair<std::string, std::string>> table_columns(const std::string& table) = 0;

    // Bulk insert through a prepared statement.
    virtual void insert_rows(const std::string& table, const std::vector<std::string>& columns,
                             const std::vector<std::vector<Value>>& rows) = 0;
};

inline bool table_exists(DbConnection& conn, const std::string& table) {
    return !conn.table_columns(table).empty();
}

} // namespace histql
