#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "histql/dialect.hpp"
#include "histql/error.hpp"
#include "histql/schema.hpp"

namespace histql {

struct BinBounds {
    int bin = 0;
    double local_min = 0.0;
    double local_max = 0.0;
};

// Per-feature quantization state persisted in the QMT table:
// (feature_name, bin, local_min, local_max, global_min, global_max, b).
// Only bins observed during training appear in bin_bounds.
struct QuantizationMetadata {
    std::string feature;
    BinningMethod method = BinningMethod::EWB;
    int bins_b = 1;
    double global_min = 0.0;
    double global_max = 0.0;
    std::vector<BinBounds> bin_bounds; // sorted by bin index
};

// Equal width binning: bin = ceil(b * (value - min) / (max - min)),
// clamped into [1, b]. A collapsed range maps everything to bin 1.
inline int ewb_bin(double value, double global_min, double global_max, int b) {
    if (global_max == global_min) return 1;
    const double raw = std::ceil(static_cast<double>(b) * (value - global_min) / (global_max - global_min));
    if (!(raw >= 1.0)) return 1;
    if (raw > static_cast<double>(b)) return b;
    return static_cast<int>(raw);
}

// Equal quantized rank binning row assignment: bin = ceil(b * rownum / m)
// with rownum the 1-based position under (value ASC, row order ASC).
inline std::vector<int> eqrb_row_bins(std::span<const double> values, int b) {
    if (values.empty()) raise(errc::empty_input, "eqrb binning needs at least one value");
    if (b < 1) raise(errc::bad_bin_count, "bins_b must be >= 1");
    const size_t m = values.size();
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t bb) {
        if (values[a] != values[bb]) return values[a] < values[bb];
        return a < bb;
    });
    std::vector<int> bins(m);
    for (size_t pos = 0; pos < m; ++pos) {
        const double rownum = static_cast<double>(pos + 1);
        bins[order[pos]] = static_cast<int>(std::ceil(static_cast<double>(b) * rownum / static_cast<double>(m)));
    }
    return bins;
}

namespace detail {

inline QuantizationMetadata bounds_from_assignment(std::span<const double> values,
                                                   std::span<const int> bins, BinningMethod method,
                                                   int b, std::string feature) {
    QuantizationMetadata meta;
    meta.feature = std::move(feature);
    meta.method = method;
    meta.bins_b = b;
    meta.global_min = *std::min_element(values.begin(), values.end());
    meta.global_max = *std::max_element(values.begin(), values.end());
    std::vector<std::optional<BinBounds>> slots(static_cast<size_t>(b) + 1);
    for (size_t i = 0; i < values.size(); ++i) {
        auto& slot = slots[static_cast<size_t>(bins[i])];
        if (!slot) {
            slot = BinBounds{bins[i], values[i], values[i]};
        } else {
            slot->local_min = std::min(slot->local_min, values[i]);
            slot->local_max = std::max(slot->local_max, values[i]);
        }
    }
    for (auto& slot : slots)
        if (slot) meta.bin_bounds.push_back(*slot);
    return meta;
}

} // namespace detail

inline QuantizationMetadata eqrb_fit(std::span<const double> values, int b, std::string feature = {}) {
    const auto bins = eqrb_row_bins(values, b);
    return detail::bounds_from_assignment(values, bins, BinningMethod::EQRB, b, std::move(feature));
}

inline QuantizationMetadata ewb_fit(std::span<const double> values, int b, std::string feature = {}) {
    if (values.empty()) raise(errc::empty_input, "ewb binning needs at least one value");
    if (b < 1) raise(errc::bad_bin_count, "bins_b must be >= 1");
    const double gmin = *std::min_element(values.begin(), values.end());
    const double gmax = *std::max_element(values.begin(), values.end());
    std::vector<int> bins(values.size());
    for (size_t i = 0; i < values.size(); ++i) bins[i] = ewb_bin(values[i], gmin, gmax, b);
    return detail::bounds_from_assignment(values, bins, BinningMethod::EWB, b, std::move(feature));
}

// Maps an evaluation-time value onto a trained bin. EWB reuses the global
// extrema; EQRB picks the smallest listed bin whose local_max covers the
// value, and out-of-range values clamp to the extreme listed bins.
inline int lookup_bin(double value, const QuantizationMetadata& meta) {
    if (meta.method == BinningMethod::EWB)
        return ewb_bin(value, meta.global_min, meta.global_max, meta.bins_b);
    for (const auto& bb : meta.bin_bounds)
        if (bb.local_max >= value) return bb.bin;
    return meta.bin_bounds.back().bin;
}

// ---------------------------------------------------------------------------
// SQL fragments implementing the two formulas, consumed by the generator.

enum class QuantMode { fit, eval };

struct QuantizationSql {
    // Select list for the one-row stats subquery joined while fitting
    // (count + per-feature extrema). Empty when there is nothing numeric.
    std::string stats_select_list;
    // Per numeric feature: unclamped bin expression referencing alias t
    // (data), s (fit stats) or q_<feature> (eval metadata).
    std::vector<std::pair<std::string, std::string>> bin_exprs;
    // Eval mode: FROM-clause sources reading the QMT table, one per feature.
    std::vector<std::string> eval_joins;
};

namespace detail {

inline std::string real_literal(int b) { return std::to_string(b) + ".0"; }

} // namespace detail

// Clamps a computed bin reference into [1, b] and fixes its type to integer.
// NULL (a NULL eval feature) passes through untouched.
inline std::string clamped_bin_expr(const std::string& ref, int b, const Dialect& dialect) {
    const std::string bs = std::to_string(b);
    return "CAST(CASE WHEN " + ref + " < 1 THEN 1 WHEN " + ref + " > " + bs + " THEN " + bs +
           " ELSE " + ref + " END AS " + dialect.integer_cast_type + ")";
}

// Renders the per-feature quantization expressions for the fit path (QT,
// QMT, RANK) or the eval path (QE, reading the materialized QMT table).
// `key_expr` is the stable tie-break column for EQRB rank windows;
// `qmt_table` is only consulted in eval mode.
inline QuantizationSql render_quantization_exprs(const std::vector<ColumnSpec>& numeric_features,
                                                 BinningMethod method, int b, QuantMode mode,
                                                 const Dialect& dialect,
                                                 const std::optional<std::string>& key_expr = {},
                                                 const std::string& qmt_table = {}) {
    if (method == BinningMethod::EQRB && dialect.window_functions == WindowFunctionSyntax::none &&
        mode == QuantMode::fit)
        raise(errc::dialect_unsupported,
              "dialect '" + dialect.name + "' lacks window functions required by EQRB");

    QuantizationSql out;
    const std::string b_real = detail::real_literal(b);
    const std::string& ceil_fn = dialect.ceil_function;

    if (mode == QuantMode::fit) {
        std::string stats = "COUNT(*) AS m";
        for (const auto& f : numeric_features)
            stats += ", MIN(" + f.name + ") AS " + f.name + "_min, MAX(" + f.name + ") AS " + f.name + "_max";
        out.stats_select_list = std::move(stats);

        for (const auto& f : numeric_features) {
            std::string expr;
            if (method == BinningMethod::EWB) {
                const std::string lo = "s." + f.name + "_min";
                const std::string hi = "s." + f.name + "_max";
                expr = "CASE WHEN " + hi + " = " + lo + " THEN 1 ELSE " + ceil_fn + "(" + b_real +
                       " * (t." + f.name + " - " + lo + ") / (" + hi + " - " + lo + ")) END";
            } else {
                if (!key_expr)
                    raise(errc::dialect_unsupported,
                          "EQRB needs a declared key column for deterministic ranking on dialect '" +
                              dialect.name + "'");
                expr = ceil_fn + "(" + b_real + " * ROW_NUMBER() OVER (ORDER BY t." + f.name + ", " +
                       *key_expr + ") / s.m)";
            }
            out.bin_exprs.emplace_back(f.name, std::move(expr));
        }
        return out;
    }

    for (const auto& f : numeric_features) {
        std::string expr;
        if (method == BinningMethod::EWB) {
            const std::string alias = "q_" + f.name;
            out.eval_joins.push_back("(SELECT MIN(global_min) AS gmin, MAX(global_max) AS gmax FROM " +
                                     qmt_table + " WHERE feature_name = '" + f.name + "') AS " + alias);
            expr = "CASE WHEN t." + f.name + " IS NULL THEN NULL WHEN " + alias + ".gmax = " + alias +
                   ".gmin THEN 1 ELSE " + ceil_fn + "(" + b_real + " * (t." + f.name + " - " + alias +
                   ".gmin) / (" + alias + ".gmax - " + alias + ".gmin)) END";
        } else {
            expr = "CASE WHEN t." + f.name + " IS NULL THEN NULL ELSE COALESCE((SELECT MIN(bin) FROM " +
                   qmt_table + " WHERE feature_name = '" + f.name + "' AND local_max >= t." + f.name +
                   "), (SELECT MAX(bin) FROM " + qmt_table + " WHERE feature_name = '" + f.name +
                   "')) END";
        }
        out.bin_exprs.emplace_back(f.name, std::move(expr));
    }
    return out;
}

} // namespace histql
