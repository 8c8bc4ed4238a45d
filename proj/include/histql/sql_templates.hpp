#pragma once

#include <map>
#include <string>
#include <string_view>

#include "histql/error.hpp"

namespace histql {

// Statement skeletons, one named resource per pipeline step. Placeholders
// use {{name}} syntax and are filled with computed fragments; dialect
// differences arrive as substitution values, never as template copies.
namespace templates {

inline constexpr std::string_view kQt =
    "CREATE TABLE {{table}} AS\n"
    "SELECT\n"
    "{{select_list}}\n"
    "FROM {{source}}{{where}}";

inline constexpr std::string_view kQmt =
    "CREATE TABLE {{table}} AS\n"
    "{{branches}}";

// One UNION ALL branch of the QMT statement, aggregating a single numeric
// feature into the (feature_name, bin, local/global extrema, b) layout.
inline constexpr std::string_view kQmtBranch =
    "SELECT\n"
    "  '{{feature}}' AS feature_name,\n"
    "  {{clamped_bin}} AS bin,\n"
    "  CAST(MIN(q.val) AS {{real_type}}) AS local_min,\n"
    "  CAST(MAX(q.val) AS {{real_type}}) AS local_max,\n"
    "  CAST(MIN(q.gmin) AS {{real_type}}) AS global_min,\n"
    "  CAST(MAX(q.gmax) AS {{real_type}}) AS global_max,\n"
    "  {{b}} AS b\n"
    "FROM (\n"
    "  SELECT t.{{feature}} AS val, s.{{feature}}_min AS gmin, s.{{feature}}_max AS gmax, {{bin_expr}} AS rawbin\n"
    "  FROM {{train}} t\n"
    "  CROSS JOIN (SELECT {{stats_list}} FROM {{train}}{{stats_where}}) s\n"
    "{{where}}"
    ") q\n"
    "GROUP BY {{clamped_bin}}";

// Zero numeric features: the metadata table still exists, just empty.
inline constexpr std::string_view kQmtEmpty =
    "CREATE TABLE {{table}} (\n"
    "  feature_name {{text_type}},\n"
    "  bin {{integer_type}},\n"
    "  local_min {{real_ddl_type}},\n"
    "  local_max {{real_ddl_type}},\n"
    "  global_min {{real_ddl_type}},\n"
    "  global_max {{real_ddl_type}},\n"
    "  b {{integer_type}}\n"
    ")";

inline constexpr std::string_view kM =
    "CREATE TABLE {{table}} AS\n"
    "SELECT {{columns}}, COUNT(*) AS cnt\n"
    "FROM {{qt_table}}\n"
    "GROUP BY {{columns}}";

inline constexpr std::string_view kMaj =
    "CREATE TABLE {{table}} AS\n"
    "SELECT {{target}}, COUNT(*) AS cnt\n"
    "FROM {{qt_table}}\n"
    "GROUP BY {{target}}\n"
    "ORDER BY cnt DESC, {{target}} ASC\n"
    "LIMIT 1";

inline constexpr std::string_view kQe =
    "CREATE TABLE {{table}} AS\n"
    "SELECT\n"
    "{{select_list}}\n"
    "FROM {{source}}";

inline constexpr std::string_view kP =
    "CREATE TABLE {{table}} AS\n"
    "SELECT\n"
    "  e.{{key}} AS {{key}},\n"
    "{{carry}}"
    "  COALESCE(w.predicted, (SELECT {{target}} FROM {{maj_table}})) AS predicted,\n"
    "  CASE WHEN w.predicted IS NULL THEN 0 ELSE 1 END AS matched\n"
    "FROM {{qe_table}} e\n"
    "LEFT JOIN (\n"
    "  SELECT {{feature_columns}}, {{target}} AS predicted\n"
    "  FROM (\n"
    "    SELECT {{feature_columns}}, {{target}}, ROW_NUMBER() OVER (PARTITION BY {{feature_columns}} ORDER BY cnt DESC, {{target}} ASC) AS rn\n"
    "    FROM {{m_table}}\n"
    "  ) ranked\n"
    "  WHERE ranked.rn = 1\n"
    ") w\n"
    "ON {{join_condition}}";

inline constexpr std::string_view kRankCategorical =
    "SELECT j.x AS x, j.y AS y, COUNT(*) AS cnt\n"
    "FROM (\n"
    "  SELECT t.{{feature}} AS x, t.{{target}} AS y\n"
    "  FROM {{train}} t\n"
    "  WHERE t.{{feature}} IS NOT NULL AND t.{{target}} IS NOT NULL\n"
    ") j\n"
    "GROUP BY j.x, j.y\n"
    "ORDER BY x, y";

inline constexpr std::string_view kRankNumeric =
    "SELECT {{clamped_bin}} AS x, q.y AS y, COUNT(*) AS cnt\n"
    "FROM (\n"
    "  SELECT {{bin_expr}} AS rawbin, t.{{target}} AS y\n"
    "  FROM {{train}} t\n"
    "  CROSS JOIN (SELECT {{stats_list}} FROM {{train}} WHERE {{stats_where}}) s\n"
    "  WHERE {{where}}\n"
    ") q\n"
    "GROUP BY {{clamped_bin}}, q.y\n"
    "ORDER BY x, y";

inline constexpr std::string_view kExport =
    "SELECT {{dims_columns}}, {{target}}, CAST(SUM(cnt) AS {{real_type}}) / SUM(SUM(cnt)) OVER (PARTITION BY {{dims_columns}}) AS proportion\n"
    "FROM {{m_table}}\n"
    "GROUP BY {{dims_columns}}, {{target}}\n"
    "ORDER BY {{dims_columns}}, {{target}}";

} // namespace templates

// Single-pass {{name}} substitution. Unknown or leftover placeholders are
// render bugs, not user errors, so they throw.
inline std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    size_t pos = 0;
    while (pos < tpl.size()) {
        const size_t open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        const size_t close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos)
            raise(errc::invalid_argument, "unterminated placeholder in template");
        const std::string key(tpl.substr(open + 2, close - open - 2));
        const auto it = values.find(key);
        if (it == values.end())
            raise(errc::invalid_argument, "unresolved template placeholder '" + key + "'");
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

inline std::string sql_string_literal(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'') out += '\'';
    }
    out += '\'';
    return out;
}

} // namespace histql
