#pragma once

// Canonical rendering set pinned by the golden files: the covertype model
// rendered for every dialect, both binning methods where the method changes
// the text. Shared by the unit suite and the acceptance runner so both
// compare exactly the same bytes.

#include <string>
#include <vector>

#include "histql/sqlgen.hpp"
#include "../test_support.hpp"

namespace testsupport {

struct GoldenEntry {
    std::string rel_path; // e.g. "sqlite/qt_ewb.sql"
    std::string content;  // statement text, no trailing newline
};

inline std::vector<GoldenEntry> golden_entries() {
    using namespace histql;
    std::vector<GoldenEntry> out;
    for (const std::string dialect_name : {"sqlite", "mysql"}) {
        const Dialect& dialect = get_dialect(dialect_name);
        for (const auto method : {BinningMethod::EWB, BinningMethod::EQRB}) {
            const bool ewb = method == BinningMethod::EWB;
            const std::string tag = ewb ? "ewb" : "eqrb";
            const int b = ewb ? 60 : 39;
            const auto v = validate_config(covertype_config(method, b), covertype_schema());

            const auto train_stmts = render_pipeline_train(v, dialect);
            out.push_back({dialect_name + "/qt_" + tag + ".sql", train_stmts[0].sql_text});
            out.push_back({dialect_name + "/qmt_" + tag + ".sql", train_stmts[1].sql_text});
            if (ewb) {
                out.push_back({dialect_name + "/m.sql", train_stmts[2].sql_text});
                out.push_back({dialect_name + "/maj.sql", train_stmts[3].sql_text});
            }

            const auto plan = render_pipeline_predict(v, covertype_schema("covertype_eval"), dialect);
            out.push_back({dialect_name + "/qe_" + tag + ".sql", plan.statements[0].sql_text});
            if (ewb) {
                out.push_back({dialect_name + "/qe_ix.sql", plan.statements[1].sql_text});
                out.push_back({dialect_name + "/p.sql", plan.statements[2].sql_text});
            }

            std::string combined;
            for (const auto& [feature, stmt] :
                 render_rank_query(covertype_schema(), "Cover_Type", method, b, dialect))
                combined += "-- feature: " + feature + "\n" + stmt.sql_text + ";\n\n";
            out.push_back({dialect_name + "/rank_" + tag + ".sql", combined});
        }
        const auto v = validate_config(covertype_config(), covertype_schema());
        out.push_back({dialect_name + "/export1d.sql",
                       render_distribution_export(v, {"Elevation"}, 1, dialect).sql_text});
        out.push_back({dialect_name + "/export2d.sql",
                       render_distribution_export(v, {"Elevation", "Wilderness_Area"}, 2, dialect).sql_text});
    }
    return out;
}

} // namespace testsupport
