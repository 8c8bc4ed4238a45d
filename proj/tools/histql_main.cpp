// histql — multidimensional-histogram classifier that trains and predicts
// inside a SQL database. Subcommands wire ingestion, ranking, training,
// prediction, evaluation, SQL inspection and distribution export into a
// batch workflow; see README.md for an end-to-end walkthrough.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "histql/histql.hpp"
#include "histql/model_io.hpp"

namespace {

using namespace histql;

struct GlobalOptions {
    std::string db_path;
    std::string dialect = "sqlite";
    int verbosity = 0;
};

std::unique_ptr<DbConnection> open_connection(const GlobalOptions& g) {
    if (g.dialect != "sqlite")
        raise(errc::dialect_unsupported,
              "only the sqlite dialect can execute in this build; '" + g.dialect +
                  "' is available for rendering (show-sql)");
    if (g.db_path.empty())
        raise(errc::invalid_argument, "no database given (use --db or set HISTQL_DB)");
    return std::make_unique<SqliteConnection>(g.db_path);
}

ColumnKind kind_from_declared_type(std::string type) {
    for (auto& c : type) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const char* marker : {"INT", "REAL", "NUM", "DOUB", "FLOA", "DEC"})
        if (type.find(marker) != std::string::npos) return ColumnKind::numeric;
    return ColumnKind::categorical;
}

TableSchema introspect_schema(DbConnection& conn, const std::string& table, const std::string& target) {
    const auto cols = conn.table_columns(table);
    if (cols.empty()) raise(errc::unknown_column, "table '" + table + "' does not exist");
    TableSchema schema;
    schema.table_name = table;
    for (const auto& [name, type] : cols) {
        ColumnSpec spec;
        spec.name = name;
        spec.kind = kind_from_declared_type(type);
        if (name == target)
            spec.role = ColumnRole::target;
        else if (name == "rid")
            spec.role = ColumnRole::ignored;
        else
            spec.role = ColumnRole::feature;
        schema.columns.push_back(std::move(spec));
    }
    return schema;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= csv.size()) {
        const size_t comma = csv.find(',', pos);
        const std::string item =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string default_model_file(const std::string& model_id) { return model_id + ".model.json"; }

ValidatedConfig build_config(DbConnection& conn, const std::string& table, const std::string& target,
                             const std::vector<std::string>& features, BinningMethod binning, int bins,
                             const std::string& model_id) {
    TableSchema schema = introspect_schema(conn, table, target);
    ModelConfig config;
    config.model_id = model_id;
    config.features = features;
    config.target = target;
    config.binning = binning;
    config.bins_b = bins;
    if (schema.find("rid")) config.key_column = "rid";
    return validate_config(config, schema);
}

int64_t count_rows(DbConnection& conn, const std::string& table) {
    auto r = conn.query("SELECT COUNT(*) FROM " + table);
    return std::get<int64_t>(r.rows.at(0).at(0));
}

// ---------------------------------------------------------------------------

int cmd_ingest(const GlobalOptions& g, const std::string& csv_path, const std::string& sidecar_path,
               std::string table, bool lenient) {
    auto conn = open_connection(g);
    IngestSpec spec = parse_sidecar(sidecar_path);
    if (table.empty()) table = spec.schema.table_name;
    if (table.empty()) raise(errc::invalid_argument, "no table name (use --table or the sidecar)");

    const bool pivot = !spec.pivot_groups.empty();
    const std::string load_table = pivot ? table + "_raw" : table;
    const int64_t rows = load_csv(*conn, csv_path, spec.schema, load_table, spec.has_header);
    std::cout << rows << " rows loaded\n";
    if (pivot) {
        reverse_pivot(*conn, load_table, spec.pivot_groups, /*strict=*/!lenient, table);
        conn->execute("DROP TABLE " + load_table);
        std::cout << "reverse pivot -> " << table << " (" << conn->table_columns(table).size()
                  << " columns)\n";
    }
    return 0;
}

int cmd_split(const GlobalOptions& g, const std::string& table, double fraction, int64_t seed) {
    auto conn = open_connection(g);
    const auto [train_table, eval_table] = split(*conn, table, SplitSpec{fraction, seed});
    std::cout << "train: " << train_table << " (" << count_rows(*conn, train_table) << " rows)\n";
    std::cout << "eval: " << eval_table << " (" << count_rows(*conn, eval_table) << " rows)\n";
    return 0;
}

int cmd_rank(const GlobalOptions& g, const std::string& table, const std::string& target,
             const std::string& binning, int bins, const std::string& format) {
    auto conn = open_connection(g);
    const TableSchema schema = introspect_schema(*conn, table, target);
    const auto ranking = rank(*conn, schema, target, binning_from_name(binning), bins);
    if (format == "csv") {
        std::cout << "feature,mi_bits\n";
        for (const auto& e : ranking) std::printf("%s,%.17g\n", e.feature.c_str(), e.mi_bits);
    } else {
        size_t width = 7;
        for (const auto& e : ranking) width = std::max(width, e.feature.size());
        std::printf("%-*s mi_bits\n", static_cast<int>(width), "feature");
        for (const auto& e : ranking)
            std::printf("%-*s %.6f\n", static_cast<int>(width), e.feature.c_str(), e.mi_bits);
    }
    return 0;
}

int cmd_train(const GlobalOptions& g, const std::string& table, const std::string& target,
              const std::string& features_csv, const std::string& binning, int bins,
              const std::string& model_id, bool force, std::string model_file) {
    auto conn = open_connection(g);
    const auto features = split_list(features_csv);
    const ValidatedConfig config =
        build_config(*conn, table, target, features, binning_from_name(binning), bins, model_id);

    const auto start = std::chrono::steady_clock::now();
    const ContingencyModel model = train(*conn, config, force, &std::cerr);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (model_file.empty()) model_file = default_model_file(model_id);
    save_model_file(model, model_file);

    std::cout << "model " << model_id << " trained on " << table << "\n";
    std::cout << "trained_row_count: " << model.trained_row_count << "\n";
    std::cout << "majority_class: " << to_display(model.majority_class) << "\n";
    std::printf("elapsed_seconds: %.1f\n", seconds);
    std::cout << "model descriptor written to " << model_file << "\n";
    return 0;
}

ContingencyModel load_model(const std::string& model_id, std::string model_file) {
    if (model_file.empty()) model_file = default_model_file(model_id);
    ContingencyModel model = load_model_file(model_file);
    if (!model_id.empty() && model.config.model_id() != model_id)
        raise(errc::invalid_argument, "model file '" + model_file + "' describes model '" +
                                          model.config.model_id() + "', not '" + model_id + "'");
    return model;
}

int cmd_predict(const GlobalOptions& g, const std::string& eval_table, const std::string& model_id,
                const std::string& model_file) {
    auto conn = open_connection(g);
    const ContingencyModel model = load_model(model_id, model_file);
    const PredictOutcome outcome = predict_detailed(*conn, model, eval_table, std::nullopt, &std::cerr);
    std::cout << "prediction table: " << outcome.p_table << "\n";
    std::cout << "rows: " << count_rows(*conn, outcome.p_table) << "\n";
    std::printf("elapsed_seconds: %.1f\n", outcome.wall_time_seconds);
    return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& eval_table, const std::string& model_id,
                 std::string truth, const std::string& model_file) {
    auto conn = open_connection(g);
    const ContingencyModel model = load_model(model_id, model_file);
    if (truth.empty()) truth = model.config.target().name;
    const EvaluationReport report = evaluate(*conn, model, eval_table, truth, &std::cerr);
    std::cout << "rows: " << report.total_rows << "\n";
    std::cout << "correct: " << report.correct_rows << "\n";
    std::printf("accuracy: %.4f\n", report.accuracy);
    std::cout << "fallback_rows: " << report.fallback_rows << "\n";
    std::printf("elapsed_seconds: %.1f\n", report.wall_time_seconds);
    return 0;
}

int cmd_show_sql(const GlobalOptions& g, const std::string& step, const std::string& table,
                 const std::string& target, const std::string& features_csv, const std::string& binning,
                 int bins, const std::string& model_id, std::string eval_table,
                 const std::string& sidecar_path) {
    const Dialect& dialect = get_dialect(g.dialect);

    TableSchema schema;
    if (!sidecar_path.empty()) {
        schema = pivoted_schema(parse_sidecar(sidecar_path));
        if (!table.empty()) schema.table_name = table;
        schema.columns.push_back(ColumnSpec{"rid", ColumnKind::numeric, ColumnRole::ignored});
    } else {
        auto conn = open_connection(g);
        schema = introspect_schema(*conn, table, target);
    }

    ModelConfig config;
    config.model_id = model_id;
    config.features = split_list(features_csv);
    config.target = target;
    config.binning = binning_from_name(binning);
    config.bins_b = bins;
    if (schema.find("rid")) config.key_column = "rid";
    const ValidatedConfig validated = validate_config(config, schema);

    if (eval_table.empty()) eval_table = schema.table_name + "_eval";
    TableSchema eval_schema;
    eval_schema.table_name = eval_table;
    eval_schema.columns = schema.columns; // assume the eval table mirrors training

    std::vector<RenderedStatement> statements;
    std::string lowered = step;
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    const auto train_stmts = render_pipeline_train(validated, dialect);
    const auto predict_plan = render_pipeline_predict(validated, eval_schema, dialect);
    if (lowered == "all") {
        statements = train_stmts;
        statements.insert(statements.end(), predict_plan.statements.begin(),
                          predict_plan.statements.end());
    } else if (lowered == "rank") {
        for (auto& [feature, stmt] : render_rank_query(schema, target, config.binning, bins, dialect))
            statements.push_back(stmt);
    } else if (lowered == "export1d" || lowered == "export2d") {
        std::vector<std::string> dims_features{config.features.at(0)};
        if (lowered == "export2d") {
            if (config.features.size() < 2)
                raise(errc::dims_out_of_range, "export2d needs two features");
            dims_features.push_back(config.features.at(1));
        }
        statements.push_back(render_distribution_export(validated, dims_features,
                                                        lowered == "export1d" ? 1 : 2, dialect));
    } else {
        bool found = false;
        for (const auto& stmt : train_stmts)
            if (lowered == [&] {
                    std::string n(template_name(stmt.template_id));
                    for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                    return n;
                }()) {
                statements.push_back(stmt);
                found = true;
            }
        for (const auto& stmt : predict_plan.statements)
            if (lowered == [&] {
                    std::string n(template_name(stmt.template_id));
                    for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                    return n;
                }()) {
                statements.push_back(stmt);
                found = true;
            }
        if (!found)
            raise(errc::invalid_argument,
                  "unknown step '" + step + "' (expected qt, qmt, m, maj, qe, qe_ix, p, rank, "
                  "export1d, export2d or all)");
    }

    for (const auto& stmt : statements) std::cout << stmt.sql_text << ";\n\n";
    return 0;
}

int cmd_export_dist(const GlobalOptions& g, int dims, const std::string& features_csv,
                    const std::string& model_id, const std::string& out_path,
                    const std::string& model_file) {
    auto conn = open_connection(g);
    const ContingencyModel model = load_model(model_id, model_file);
    const auto dims_features = split_list(features_csv);
    const QueryResult result = export_distribution(*conn, model, dims_features, dims);

    std::ofstream out(out_path);
    if (!out) raise(errc::io_error, "cannot write '" + out_path + "'");
    for (size_t i = 0; i < result.columns.size(); ++i) out << (i ? "," : "") << result.columns[i];
    out << "\n";
    for (const auto& row : result.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            if (std::holds_alternative<double>(row[i])) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(row[i]));
                out << buf;
            } else {
                out << to_display(row[i]);
            }
        }
        out << "\n";
    }
    std::cout << "wrote " << result.rows.size() << " rows to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multidimensional-histogram classification via generated SQL"};
    app.require_subcommand(1);

    GlobalOptions g;
    if (const char* env = std::getenv("HISTQL_DB")) g.db_path = env;
    app.add_option("--db", g.db_path, "database file (or HISTQL_DB)");
    app.add_option("--dialect", g.dialect, "SQL dialect (sqlite, mysql)")->capture_default_str();
    app.add_flag("-v,--verbose", g.verbosity, "more output");

    std::string csv_path, sidecar_path, table, target, features, binning, model_id, model_file;
    std::string eval_table, truth, format = "table", out_path, step;
    int bins = 0, dims = 0;
    double fraction = 0.8;
    int64_t seed = 1;
    bool force = false, lenient = false;

    auto* ingest = app.add_subcommand("ingest", "load a delimited file (with optional reverse pivot)");
    ingest->add_option("--csv", csv_path, "input file")->required();
    ingest->add_option("--schema", sidecar_path, "schema sidecar (JSON)")->required();
    ingest->add_option("--table", table, "target table (default: sidecar's)");
    ingest->add_flag("--lenient", lenient, "map bad one-hot rows to NULL instead of failing");

    auto* split_cmd = app.add_subcommand("split", "deterministic seeded train/eval split");
    split_cmd->add_option("--table", table)->required();
    split_cmd->add_option("--fraction", fraction, "train fraction")->capture_default_str();
    split_cmd->add_option("--seed", seed)->capture_default_str();

    auto* rank_cmd = app.add_subcommand("rank", "rank features by mutual information with the target");
    rank_cmd->add_option("--table", table)->required();
    rank_cmd->add_option("--target", target)->required();
    rank_cmd->add_option("--binning", binning, "EQRB or EWB")->default_val("EQRB");
    rank_cmd->add_option("--bins", bins, "bin count b")->default_val(39);
    rank_cmd->add_option("--format", format, "table or csv")->capture_default_str();

    auto* train_cmd = app.add_subcommand("train", "materialize the model tables");
    train_cmd->add_option("--table", table)->required();
    train_cmd->add_option("--target", target)->required();
    train_cmd->add_option("--features", features, "comma-separated feature list")->required();
    train_cmd->add_option("--binning", binning, "EQRB or EWB")->default_val("EWB");
    train_cmd->add_option("--bins", bins, "bin count b")->default_val(60);
    train_cmd->add_option("--model-id", model_id)->required();
    train_cmd->add_flag("--force", force, "replace existing model tables");
    train_cmd->add_option("--model-file", model_file, "descriptor path (default <model-id>.model.json)");

    auto* predict_cmd = app.add_subcommand("predict", "create the prediction table for an eval table");
    predict_cmd->add_option("--eval-table", eval_table)->required();
    predict_cmd->add_option("--model-id", model_id)->required();
    predict_cmd->add_option("--model-file", model_file);

    auto* eval_cmd = app.add_subcommand("evaluate", "predict and score against a truth column");
    eval_cmd->add_option("--eval-table", eval_table)->required();
    eval_cmd->add_option("--model-id", model_id)->required();
    eval_cmd->add_option("--truth", truth, "truth column (default: the model target)");
    eval_cmd->add_option("--model-file", model_file);

    auto* show = app.add_subcommand("show-sql", "print rendered statements without executing");
    show->add_option("step", step, "qt|qmt|m|maj|qe|qe_ix|p|rank|export1d|export2d|all")->required();
    show->add_option("--table", table);
    show->add_option("--target", target)->required();
    show->add_option("--features", features)->required();
    show->add_option("--binning", binning)->default_val("EWB");
    show->add_option("--bins", bins)->default_val(60);
    show->add_option("--model-id", model_id)->default_val("m1");
    show->add_option("--eval-table", eval_table);
    show->add_option("--schema", sidecar_path, "render offline from a schema sidecar");

    auto* export_cmd = app.add_subcommand("export-dist", "export class distribution over 1-2 features");
    export_cmd->add_option("--dims", dims, "1 or 2")->required();
    export_cmd->add_option("--features", features)->required();
    export_cmd->add_option("--model-id", model_id)->required();
    export_cmd->add_option("--out", out_path)->required();
    export_cmd->add_option("--model-file", model_file);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(g, csv_path, sidecar_path, table, lenient);
        if (*split_cmd) return cmd_split(g, table, fraction, seed);
        if (*rank_cmd) return cmd_rank(g, table, target, binning, bins, format);
        if (*train_cmd) return cmd_train(g, table, target, features, binning, bins, model_id, force, model_file);
        if (*predict_cmd) return cmd_predict(g, eval_table, model_id, model_file);
        if (*eval_cmd) return cmd_evaluate(g, eval_table, model_id, truth, model_file);
        if (*show) return cmd_show_sql(g, step, table, target, features, binning, bins, model_id,
                                       eval_table, sidecar_path);
        if (*export_cmd) return cmd_export_dist(g, dims, features, model_id, out_path, model_file);
    } catch (const histql::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
