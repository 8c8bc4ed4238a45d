#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "histql/error.hpp"

namespace histql {

enum class ColumnKind { categorical, numeric };
enum class ColumnRole { feature, target, ignored };
enum class BinningMethod { EQRB, EWB };

inline std::string_view binning_name(BinningMethod m) {
    return m == BinningMethod::EQRB ? "EQRB" : "EWB";
}

inline BinningMethod binning_from_name(std::string_view s) {
    std::string up(s);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "EQRB") return BinningMethod::EQRB;
    if (up == "EWB") return BinningMethod::EWB;
    raise(errc::invalid_argument, "unknown binning method '" + std::string(s) + "' (expected EQRB or EWB)");
}

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::categorical;
    ColumnRole role = ColumnRole::feature;
};

struct TableSchema {
    std::string table_name;
    std::vector<ColumnSpec> columns;
    int64_t row_count_hint = -1; // -1 = unknown

    const ColumnSpec* find(std::string_view name) const {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct ModelConfig {
    std::string model_id;
    std::vector<std::string> features;
    std::string target;
    BinningMethod binning = BinningMethod::EWB;
    int bins_b = 1;
    // Optional stable key column used for deterministic EQRB tie-breaks and
    // for keying prediction rows. Tables loaded by the ingester carry "rid".
    std::optional<std::string> key_column;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Pipeline step and auxiliary statement identifiers. The first six name the
// tables/index of one model (`<model_id>_<template_id>`).
enum class TemplateId { QT, QMT, M, MAJ, QE, QE_IX, P, RANK, EXPORT1D, EXPORT2D };

inline std::string_view template_name(TemplateId t) {
    switch (t) {
    case TemplateId::QT:       return "QT";
    case TemplateId::QMT:      return "QMT";
    case TemplateId::M:        return "M";
    case TemplateId::MAJ:      return "MAJ";
    case TemplateId::QE:       return "QE";
    case TemplateId::QE_IX:    return "QE_IX";
    case TemplateId::P:        return "P";
    case TemplateId::RANK:     return "RANK";
    case TemplateId::EXPORT1D: return "EXPORT1D";
    case TemplateId::EXPORT2D: return "EXPORT2D";
    }
    return "";
}

// Steps that materialize a `<model_id>_<template_id>` table.
inline constexpr std::array<TemplateId, 6> kTableTemplates = {
    TemplateId::QT, TemplateId::QMT, TemplateId::M,
    TemplateId::MAJ, TemplateId::QE, TemplateId::P,
};

inline bool is_identifier(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin() + 1, s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

// 64 (MySQL identifier limit, the most restrictive shipped dialect)
// minus the longest template suffix "_QE_IX".
inline constexpr size_t kMaxModelIdLength = 58;

inline std::string model_table_name(std::string_view model_id, TemplateId t) {
    return std::string(model_id) + "_" + std::string(template_name(t));
}

// Inverse of model_table_name for the table-producing steps (and QE_IX).
inline std::optional<std::pair<std::string, TemplateId>> parse_table_name(std::string_view name) {
    static constexpr std::array<TemplateId, 7> ids = {
        TemplateId::QE_IX, TemplateId::QMT, TemplateId::MAJ, TemplateId::QE,
        TemplateId::QT, TemplateId::M, TemplateId::P,
    };
    for (TemplateId t : ids) {
        const std::string suffix = "_" + std::string(template_name(t));
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            std::string_view prefix = name.substr(0, name.size() - suffix.size());
            if (is_identifier(prefix)) return std::make_pair(std::string(prefix), t);
        }
    }
    return std::nullopt;
}

// Column names the pipeline generates itself; rejected as feature/target
// names so rendered statements never alias two columns identically.
inline bool is_reserved_column(std::string_view name) {
    return name == "rid" || name == "cnt" || name == "predicted" || name == "matched";
}

class ValidatedConfig;
inline ValidatedConfig validate_config(const ModelConfig& config, const TableSchema& schema);

// A ModelConfig that passed validate_config, with feature/target specs
// resolved against the training table schema. Only validate_config builds one.
class ValidatedConfig {
public:
    const ModelConfig& config() const { return config_; }
    const std::string& model_id() const { return config_.model_id; }
    const std::string& training_table() const { return training_table_; }
    const std::vector<ColumnSpec>& features() const { return features_; }
    const ColumnSpec& target() const { return target_; }
    const std::optional<std::string>& key_column() const { return config_.key_column; }
    BinningMethod binning() const { return config_.binning; }
    int bins() const { return config_.bins_b; }

    std::string table_for(TemplateId t) const { return model_table_name(config_.model_id, t); }

    std::vector<ColumnSpec> numeric_features() const {
        std::vector<ColumnSpec> out;
        for (const auto& f : features_)
            if (f.kind == ColumnKind::numeric) out.push_back(f);
        return out;
    }

private:
    friend ValidatedConfig validate_config(const ModelConfig&, const TableSchema&);
    ValidatedConfig() = default;

    ModelConfig config_;
    std::string training_table_;
    std::vector<ColumnSpec> features_;
    ColumnSpec target_;
};

inline ValidatedConfig validate_config(const ModelConfig& config, const TableSchema& schema) {
    if (!is_identifier(config.model_id))
        raise(errc::bad_identifier, "model_id '" + config.model_id + "' is not a valid identifier");
    if (config.model_id.size() > kMaxModelIdLength)
        raise(errc::bad_identifier, "model_id '" + config.model_id + "' exceeds " +
                                        std::to_string(kMaxModelIdLength) + " characters");
    if (!is_identifier(schema.table_name))
        raise(errc::bad_identifier, "table name '" + schema.table_name + "' is not a valid identifier");
    if (config.bins_b < 1)
        raise(errc::bad_bin_count, "bins_b must be >= 1, got " + std::to_string(config.bins_b));
    if (config.features.empty())
        raise(errc::duplicate_feature, "feature list is empty");

    std::set<std::string> seen;
    for (const auto& f : config.features) {
        if (!is_identifier(f))
            raise(errc::bad_identifier, "feature '" + f + "' is not a valid identifier");
        if (is_reserved_column(f))
            raise(errc::bad_identifier, "feature '" + f + "' is a reserved column name");
        if (!seen.insert(f).second)
            raise(errc::duplicate_feature, "feature '" + f + "' listed twice");
        if (f == config.target)
            raise(errc::target_is_feature, "'" + f + "' is both feature and target");
    }
    if (!is_identifier(config.target))
        raise(errc::bad_identifier, "target '" + config.target + "' is not a valid identifier");
    if (is_reserved_column(config.target))
        raise(errc::bad_identifier, "target '" + config.target + "' is a reserved column name");

    ValidatedConfig v;
    for (const auto& f : config.features) {
        const ColumnSpec* col = schema.find(f);
        if (!col) raise(errc::unknown_column, "feature '" + f + "' not in table '" + schema.table_name + "'");
        v.features_.push_back(*col);
    }
    const ColumnSpec* target = schema.find(config.target);
    if (!target)
        raise(errc::unknown_column, "target '" + config.target + "' not in table '" + schema.table_name + "'");
    v.target_ = *target;

    if (config.key_column) {
        if (!is_identifier(*config.key_column))
            raise(errc::bad_identifier, "key column '" + *config.key_column + "' is not a valid identifier");
        if (!schema.find(*config.key_column))
            raise(errc::unknown_column,
                  "key column '" + *config.key_column + "' not in table '" + schema.table_name + "'");
        if (*config.key_column == config.target)
            raise(errc::invalid_argument, "key column cannot be the target");
        if (seen.count(*config.key_column))
            raise(errc::invalid_argument, "key column cannot be a feature");
    }

    v.config_ = config;
    v.training_table_ = schema.table_name;
    return v;
}

} // namespace histql
