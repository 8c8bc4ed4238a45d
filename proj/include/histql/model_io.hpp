#pragma once

// Model descriptor file support for the CLI: everything needed to rebuild a
// ContingencyModel handle in a later process. The heavyweight state stays in
// the database; this is configuration plus the two small trained scalars.

#include <fstream>
#include <string>

#include <json.hpp>

#include "histql/executor.hpp"
#include "histql/schema.hpp"

namespace histql {

namespace detail {

inline nlohmann::json value_to_json(const Value& v) {
    switch (v.index()) {
    case 0: return nullptr;
    case 1: return std::get<int64_t>(v);
    case 2: return std::get<double>(v);
    default: return std::get<std::string>(v);
    }
}

inline Value value_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::monostate{};
    if (j.is_number_integer()) return j.get<int64_t>();
    if (j.is_number_float()) return j.get<double>();
    return j.get<std::string>();
}

} // namespace detail

inline nlohmann::json model_to_json(const ContingencyModel& model) {
    const ValidatedConfig& v = model.config;
    nlohmann::json j;
    j["model_id"] = v.model_id();
    j["training_table"] = v.training_table();
    j["binning"] = std::string(binning_name(v.binning()));
    j["bins"] = v.bins();
    j["target"] = {{"name", v.target().name},
                   {"kind", v.target().kind == ColumnKind::numeric ? "numeric" : "categorical"}};
    j["features"] = nlohmann::json::array();
    for (const auto& f : v.features())
        j["features"].push_back({{"name", f.name},
                                 {"kind", f.kind == ColumnKind::numeric ? "numeric" : "categorical"}});
    if (v.key_column()) j["key_column"] = *v.key_column();
    j["majority_class"] = detail::value_to_json(model.majority_class);
    j["trained_row_count"] = model.trained_row_count;
    return j;
}

inline ContingencyModel model_from_json(const nlohmann::json& j) {
    const auto kind_of = [](const std::string& s) {
        return s == "numeric" ? ColumnKind::numeric : ColumnKind::categorical;
    };

    TableSchema schema;
    schema.table_name = j.at("training_table").get<std::string>();
    ModelConfig config;
    config.model_id = j.at("model_id").get<std::string>();
    config.binning = binning_from_name(j.at("binning").get<std::string>());
    config.bins_b = j.at("bins").get<int>();
    config.target = j.at("target").at("name").get<std::string>();
    schema.columns.push_back(
        ColumnSpec{config.target, kind_of(j.at("target").at("kind").get<std::string>()), ColumnRole::target});
    for (const auto& f : j.at("features")) {
        const std::string name = f.at("name").get<std::string>();
        config.features.push_back(name);
        schema.columns.push_back(
            ColumnSpec{name, kind_of(f.at("kind").get<std::string>()), ColumnRole::feature});
    }
    if (j.contains("key_column")) {
        config.key_column = j.at("key_column").get<std::string>();
        schema.columns.push_back(ColumnSpec{*config.key_column, ColumnKind::numeric, ColumnRole::ignored});
    }

    ValidatedConfig validated = validate_config(config, schema);
    ContingencyModel model{validated,
                           validated.table_for(TemplateId::QT),
                           validated.table_for(TemplateId::QMT),
                           validated.table_for(TemplateId::M),
                           validated.table_for(TemplateId::MAJ),
                           detail::value_from_json(j.at("majority_class")),
                           j.at("trained_row_count").get<int64_t>()};
    return model;
}

inline void save_model_file(const ContingencyModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(errc::io_error, "cannot write '" + path + "'");
    out << model_to_json(model).dump(2) << "\n";
}

inline ContingencyModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_error, "cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(errc::parse_error, std::string("model file: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace histql
