#pragma once

// Direct in-memory reference implementation of the estimator: joint counts
// over (quantized) value combinations, argmax prediction with majority
// fallback, and plug-in mutual information. Used as ground truth by the
// equivalence tests; deliberately does not share any code with the binning
// or sqlgen modules.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "histql/error.hpp"
#include "histql/schema.hpp"
#include "histql/value.hpp"

namespace histql::oracle {

struct InMemoryDataset {
    std::vector<ColumnKind> feature_kinds;
    std::vector<std::vector<Value>> features; // rows x feature_kinds.size()
    std::vector<Value> targets;               // one per row

    size_t row_count() const { return targets.size(); }
};

namespace detail {

struct VecLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        const size_t n = std::min(a.size(), b.size());
        for (size_t i = 0; i < n; ++i) {
            if (value_less(a[i], b[i])) return true;
            if (value_less(b[i], a[i])) return false;
        }
        return a.size() < b.size();
    }
};

} // namespace detail

using CountsByTarget = std::map<Value, int64_t, ValueLess>;
using Contingency = std::map<std::vector<Value>, CountsByTarget, detail::VecLess>;

// Own quantizer: sort + formula, no calls into the binning module.
struct Quantizer {
    BinningMethod method = BinningMethod::EWB;
    int b = 1;
    double gmin = 0.0;
    double gmax = 0.0;
    struct Bound {
        int bin;
        double lo;
        double hi;
    };
    std::vector<Bound> bounds;       // observed bins, ascending
    std::vector<int> training_bins;  // one per training value, input order

    int lookup(double v) const {
        if (method == BinningMethod::EWB) {
            if (gmax == gmin) return 1;
            const double raw = std::ceil(static_cast<double>(b) * (v - gmin) / (gmax - gmin));
            if (!(raw >= 1.0)) return 1;
            if (raw > static_cast<double>(b)) return b;
            return static_cast<int>(raw);
        }
        for (const auto& bd : bounds)
            if (bd.hi >= v) return bd.bin;
        return bounds.back().bin;
    }
};

inline Quantizer fit_quantizer(const std::vector<double>& values, BinningMethod method, int b) {
    if (values.empty()) raise(errc::empty_input, "oracle quantizer needs at least one value");
    Quantizer q;
    q.method = method;
    q.b = b;
    q.gmin = values.front();
    q.gmax = values.front();
    for (double v : values) {
        q.gmin = std::min(q.gmin, v);
        q.gmax = std::max(q.gmax, v);
    }
    q.training_bins.resize(values.size());
    if (method == BinningMethod::EWB) {
        for (size_t i = 0; i < values.size(); ++i) {
            const double v = values[i];
            int bin = 1;
            if (q.gmax != q.gmin) {
                const double raw = std::ceil(static_cast<double>(b) * (v - q.gmin) / (q.gmax - q.gmin));
                bin = raw < 1.0 ? 1 : (raw > static_cast<double>(b) ? b : static_cast<int>(raw));
            }
            q.training_bins[i] = bin;
        }
    } else {
        std::vector<std::pair<double, size_t>> order;
        order.reserve(values.size());
        for (size_t i = 0; i < values.size(); ++i) order.emplace_back(values[i], i);
        std::sort(order.begin(), order.end());
        const double m = static_cast<double>(values.size());
        for (size_t pos = 0; pos < order.size(); ++pos) {
            const int bin =
                static_cast<int>(std::ceil(static_cast<double>(b) * static_cast<double>(pos + 1) / m));
            q.training_bins[order[pos].second] = bin;
        }
    }
    std::map<int, Quantizer::Bound> by_bin;
    for (size_t i = 0; i < values.size(); ++i) {
        const int bin = q.training_bins[i];
        auto it = by_bin.find(bin);
        if (it == by_bin.end()) {
            by_bin.emplace(bin, Quantizer::Bound{bin, values[i], values[i]});
        } else {
            it->second.lo = std::min(it->second.lo, values[i]);
            it->second.hi = std::max(it->second.hi, values[i]);
        }
    }
    for (const auto& [bin, bound] : by_bin) q.bounds.push_back(bound);
    return q;
}

// Trained state: per-feature quantizers plus the full contingency counts.
struct FittedModel {
    std::vector<std::optional<Quantizer>> quantizers; // per feature, numeric only
    Contingency counts;
    Value majority;
    int64_t trained_rows = 0;
};

inline std::vector<size_t> complete_row_indices(const InMemoryDataset& ds) {
    std::vector<size_t> keep;
    for (size_t r = 0; r < ds.row_count(); ++r) {
        bool ok = !is_null(ds.targets[r]);
        for (const auto& v : ds.features[r]) ok = ok && !is_null(v);
        if (ok) keep.push_back(r);
    }
    return keep;
}

inline FittedModel fit(const InMemoryDataset& ds, BinningMethod method, int b) {
    FittedModel model;
    const auto keep = complete_row_indices(ds);
    if (keep.empty()) raise(errc::empty_training_table, "oracle: no complete training rows");
    model.trained_rows = static_cast<int64_t>(keep.size());

    const size_t nfeat = ds.feature_kinds.size();
    model.quantizers.resize(nfeat);
    for (size_t f = 0; f < nfeat; ++f) {
        if (ds.feature_kinds[f] != ColumnKind::numeric) continue;
        std::vector<double> column;
        column.reserve(keep.size());
        for (size_t r : keep) column.push_back(as_double(ds.features[r][f]));
        model.quantizers[f] = fit_quantizer(column, method, b);
    }

    CountsByTarget class_counts;
    for (size_t i = 0; i < keep.size(); ++i) {
        const size_t r = keep[i];
        std::vector<Value> combo;
        combo.reserve(nfeat);
        for (size_t f = 0; f < nfeat; ++f) {
            if (model.quantizers[f])
                combo.emplace_back(static_cast<int64_t>(model.quantizers[f]->training_bins[i]));
            else
                combo.push_back(ds.features[r][f]);
        }
        model.counts[std::move(combo)][ds.targets[r]] += 1;
        class_counts[ds.targets[r]] += 1;
    }

    int64_t best = -1;
    for (const auto& [cls, c] : class_counts) {
        if (c > best) {
            best = c;
            model.majority = cls;
        }
    }
    return model;
}

inline double joint_probability(const InMemoryDataset& ds, const FittedModel& model,
                                const std::vector<Value>& feature_combo,
                                const std::optional<Value>& target = {}) {
    if (feature_combo.size() != ds.feature_kinds.size())
        raise(errc::arity_mismatch, "combination arity does not match feature count");
    std::vector<Value> combo;
    combo.reserve(feature_combo.size());
    for (size_t f = 0; f < feature_combo.size(); ++f) {
        if (model.quantizers[f] && !is_null(feature_combo[f]))
            combo.emplace_back(static_cast<int64_t>(model.quantizers[f]->lookup(as_double(feature_combo[f]))));
        else
            combo.push_back(feature_combo[f]);
    }
    const auto it = model.counts.find(combo);
    if (it == model.counts.end()) return 0.0;
    int64_t c = 0;
    if (target) {
        const auto jt = it->second.find(*target);
        c = jt == it->second.end() ? 0 : jt->second;
    } else {
        for (const auto& [cls, n] : it->second) c += n;
    }
    return static_cast<double>(c) / static_cast<double>(model.trained_rows);
}

struct Prediction {
    Value cls;
    bool matched = false;
};

inline Prediction predict_row(const FittedModel& model, const std::vector<ColumnKind>& kinds,
                              const std::vector<Value>& eval_features) {
    Prediction out{model.majority, false};
    std::vector<Value> combo;
    combo.reserve(eval_features.size());
    for (size_t f = 0; f < eval_features.size(); ++f) {
        if (is_null(eval_features[f])) return out; // NULL feature -> fallback
        if (model.quantizers[f])
            combo.emplace_back(static_cast<int64_t>(model.quantizers[f]->lookup(as_double(eval_features[f]))));
        else
            combo.push_back(eval_features[f]);
    }
    (void)kinds;
    const auto it = model.counts.find(combo);
    if (it == model.counts.end() || it->second.empty()) return out;
    int64_t best = -1;
    for (const auto& [cls, c] : it->second) {
        if (c > best) {
            best = c;
            out.cls = cls;
        }
    }
    out.matched = true;
    return out;
}

inline Prediction predict(const InMemoryDataset& ds, BinningMethod method, int b,
                          const std::vector<Value>& eval_features) {
    const FittedModel model = fit(ds, method, b);
    return predict_row(model, ds.feature_kinds, eval_features);
}

// ---------------------------------------------------------------------------
// Plug-in mutual information in bits over two columns; numeric columns are
// quantized with a fresh fit over the complete pairs, mirroring the rank
// queries' per-pair NULL handling.

inline double entropy_bits(const std::vector<Value>& values) {
    CountsByTarget counts;
    int64_t m = 0;
    for (const auto& v : values) {
        if (is_null(v)) continue;
        counts[v] += 1;
        ++m;
    }
    double h = 0.0;
    for (const auto& [v, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(m);
        h -= p * std::log2(p);
    }
    return h;
}

inline double mutual_information(const std::vector<Value>& x, ColumnKind x_kind,
                                 const std::vector<Value>& y, ColumnKind y_kind, BinningMethod method,
                                 int b) {
    if (x.size() != y.size()) raise(errc::arity_mismatch, "column lengths differ");
    std::vector<size_t> keep;
    for (size_t i = 0; i < x.size(); ++i)
        if (!is_null(x[i]) && !is_null(y[i])) keep.push_back(i);
    if (keep.empty()) return 0.0;

    const auto project = [&](const std::vector<Value>& col, ColumnKind kind) {
        std::vector<Value> out;
        out.reserve(keep.size());
        if (kind == ColumnKind::numeric) {
            std::vector<double> nums;
            nums.reserve(keep.size());
            for (size_t i : keep) nums.push_back(as_double(col[i]));
            const Quantizer q = fit_quantizer(nums, method, b);
            for (int bin : q.training_bins) out.emplace_back(static_cast<int64_t>(bin));
        } else {
            for (size_t i : keep) out.push_back(col[i]);
        }
        return out;
    };
    const std::vector<Value> xs = project(x, x_kind);
    const std::vector<Value> ys = project(y, y_kind);

    std::map<std::pair<Value, Value>, int64_t,
             bool (*)(const std::pair<Value, Value>&, const std::pair<Value, Value>&)>
        joint([](const std::pair<Value, Value>& a, const std::pair<Value, Value>& b) {
            if (value_less(a.first, b.first)) return true;
            if (value_less(b.first, a.first)) return false;
            return value_less(a.second, b.second);
        });
    CountsByTarget mx, my;
    const int64_t m = static_cast<int64_t>(keep.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        joint[{xs[i], ys[i]}] += 1;
        mx[xs[i]] += 1;
        my[ys[i]] += 1;
    }
    double mi = 0.0;
    for (const auto& [pair, c] : joint) {
        const double ratio = (static_cast<double>(c) * static_cast<double>(m)) /
                             (static_cast<double>(mx[pair.first]) * static_cast<double>(my[pair.second]));
        mi += (static_cast<double>(c) / static_cast<double>(m)) * std::log2(ratio);
    }
    return mi;
}

} // namespace histql::oracle
