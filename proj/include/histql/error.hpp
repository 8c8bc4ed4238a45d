#pragma once

#include <stdexcept>
#include <string>

namespace histql {

enum class errc {
    unknown_column,
    duplicate_feature,
    target_is_feature,
    bad_identifier,
    bad_bin_count,
    empty_input,
    dialect_unsupported,
    table_exists,
    sql_execution,
    empty_training_table,
    missing_model_tables,
    missing_feature_column,
    dims_out_of_range,
    parse_error,
    schema_mismatch,
    io_error,
    not_binary,
    multi_hot,
    zero_hot,
    arity_mismatch,
    invalid_argument,
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::unknown_column:        return "UnknownColumn";
    case errc::duplicate_feature:     return "DuplicateFeature";
    case errc::target_is_feature:     return "TargetIsFeature";
    case errc::bad_identifier:        return "BadIdentifier";
    case errc::bad_bin_count:         return "BadBinCount";
    case errc::empty_input:           return "EmptyInput";
    case errc::dialect_unsupported:   return "DialectUnsupported";
    case errc::table_exists:          return "TableExists";
    case errc::sql_execution:         return "SqlExecution";
    case errc::empty_training_table:  return "EmptyTrainingTable";
    case errc::missing_model_tables:  return "MissingModelTables";
    case errc::missing_feature_column:return "MissingFeatureColumn";
    case errc::dims_out_of_range:     return "DimsOutOfRange";
    case errc::parse_error:           return "ParseError";
    case errc::schema_mismatch:       return "SchemaMismatch";
    case errc::io_error:              return "IoError";
    case errc::not_binary:            return "NotBinary";
    case errc::multi_hot:             return "MultiHot";
    case errc::zero_hot:              return "ZeroHot";
    case errc::arity_mismatch:        return "ArityMismatch";
    case errc::invalid_argument:      return "InvalidArgument";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw error(code, what); }

} // namespace histql
