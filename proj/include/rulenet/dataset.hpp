#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rulenet/bitvec.hpp"
#include "rulenet/csv.hpp"
#include "rulenet/random.hpp"
#include "rulenet/schema.hpp"

namespace rulenet {

// One-hot encoded binary classification data. labels.get(i) is true iff
// instance i carries the positive (minority) class.
struct EncodedDataset {
    std::shared_ptr<const AttributeSchema> schema;
    std::vector<BitVec> features;  // one packed row per instance, width n_literals
    BitVec labels;
    std::string positive_class;
    std::string negative_class;

    std::size_t n_instances() const { return features.size(); }
    std::size_t n_literals() const { return schema ? schema->n_literals() : 0; }
};

struct FoldPlan {
    std::size_t n_folds = 0;
    std::vector<std::size_t> assignments;  // per-instance fold index
    std::uint64_t seed = 0;
};

inline RawTable load_csv(const std::string& path, const std::string& label_column,
                         const IngestOptions& options = {}) {
    RawTable table = read_csv_file(path, options);
    if (!table.has_column(label_column))
        throw std::invalid_argument("label column '" + label_column + "' not found");
    return table;
}

namespace detail {

inline bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

inline bool is_numeric_column(const RawTable& table, std::size_t col) {
    bool any_known = false;
    double v;
    for (const auto& row : table.rows) {
        if (!row[col]) continue;
        any_known = true;
        if (!parse_number(*row[col], v)) return false;
    }
    return any_known;
}

inline void warn(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

}  // namespace detail

inline bool is_numeric_column(const RawTable& table, const std::string& column) {
    return detail::is_numeric_column(table, table.column_index(column));
}

// Replace a numeric column by equal-frequency quantile bins "q1".."qk".
// Cut points are the order statistics of the known values in this table;
// unknown cells pass through unchanged.
inline RawTable discretize(const RawTable& table, const std::string& column,
                           std::size_t n_bins) {
    if (n_bins < 2) throw std::invalid_argument("n_bins must be at least 2");
    const std::size_t col = table.column_index(column);

    std::vector<double> values;
    values.reserve(table.n_rows());
    for (const auto& row : table.rows) {
        if (!row[col]) continue;
        double v;
        if (!detail::parse_number(*row[col], v))
            throw std::invalid_argument("column '" + column + "' has non-numeric cell '" +
                                        *row[col] + "'");
        values.push_back(v);
    }
    std::sort(values.begin(), values.end());

    // Inclusive upper edges: bin i (1-based) holds v <= cuts[i-1].
    std::vector<double> cuts;
    const std::size_t n = values.size();
    for (std::size_t i = 1; i < n_bins && n > 0; ++i) {
        const std::size_t pos = i * n / n_bins;
        if (pos == 0) continue;
        cuts.push_back(values[pos - 1]);
    }

    RawTable out = table;
    for (auto& row : out.rows) {
        if (!row[col]) continue;
        double v;
        detail::parse_number(*row[col], v);
        std::size_t bin = cuts.size();
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            if (v <= cuts[i]) {
                bin = i;
                break;
            }
        }
        row[col] = "q" + std::to_string(bin + 1);
    }
    return out;
}

// One-hot encode a nominal table and fix the label mapping: the minority
// class becomes the positive label, ties broken toward the
// lexicographically smaller class name. Rows with unknown label are
// dropped; attributes with fewer than 2 distinct known values are dropped.
inline EncodedDataset encode(const RawTable& table, const std::string& label_column,
                             std::vector<std::string>* warnings = nullptr) {
    const std::size_t label_col = table.column_index(label_column);

    std::vector<std::size_t> kept_rows;
    std::map<std::string, std::size_t> class_counts;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (!table.rows[r][label_col]) continue;
        kept_rows.push_back(r);
        ++class_counts[*table.rows[r][label_col]];
    }
    if (kept_rows.size() < table.n_rows())
        detail::warn(warnings, "dropped " + std::to_string(table.n_rows() - kept_rows.size()) +
                                   " row(s) with unknown label");
    if (class_counts.size() != 2)
        throw std::invalid_argument("expected exactly 2 classes, found " +
                                    std::to_string(class_counts.size()));

    // std::map iterates in lexicographic key order, so at equal counts the
    // first entry is the smaller name.
    auto it = class_counts.begin();
    const auto& first = *it;
    const auto& second = *++it;
    std::string positive = first.first, negative = second.first;
    if (second.second < first.second) std::swap(positive, negative);

    std::vector<Attribute> attrs;
    std::vector<std::size_t> attr_cols;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (c == label_col) continue;
        if (detail::is_numeric_column(table, c))
            throw std::invalid_argument("column '" + table.columns[c] +
                                        "' is numeric; discretize it first");
        std::set<std::string> distinct;
        for (auto r : kept_rows)
            if (table.rows[r][c]) distinct.insert(*table.rows[r][c]);
        if (distinct.size() < 2) {
            detail::warn(warnings, "dropped column '" + table.columns[c] +
                                       "' with fewer than 2 distinct values");
            continue;
        }
        attrs.push_back({table.columns[c], {distinct.begin(), distinct.end()}});
        attr_cols.push_back(c);
    }

    EncodedDataset data;
    data.schema = std::make_shared<AttributeSchema>(std::move(attrs));
    data.positive_class = positive;
    data.negative_class = negative;
    data.labels = BitVec(kept_rows.size());
    data.features.reserve(kept_rows.size());
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
        const auto& row = table.rows[kept_rows[i]];
        BitVec bits(data.schema->n_literals());
        for (std::size_t a = 0; a < attr_cols.size(); ++a) {
            const auto& cell = row[attr_cols[a]];
            if (!cell) continue;  // unknown: all literals of this attribute stay false
            if (auto v = data.schema->find_value(a, *cell))
                bits.set(data.schema->literal_index(a, *v));
        }
        data.features.push_back(std::move(bits));
        if (*row[label_col] == positive) data.labels.set(i);
    }
    return data;
}

// Encode feature rows against an existing schema (model application path).
// Unseen nominal values encode as unknown; missing schema attributes in the
// table are an error listing the offending columns.
inline std::vector<BitVec> encode_with_schema(const RawTable& table,
                                              const AttributeSchema& schema,
                                              std::size_t* unseen_values = nullptr,
                                              std::vector<std::string>* warnings = nullptr) {
    std::vector<std::size_t> attr_cols(schema.n_attributes());
    std::vector<std::string> missing;
    for (std::size_t a = 0; a < schema.n_attributes(); ++a) {
        const auto& name = schema.attribute(a).name;
        if (!table.has_column(name)) {
            missing.push_back(name);
            continue;
        }
        attr_cols[a] = table.column_index(name);
    }
    if (!missing.empty()) {
        std::string msg = "data is missing model columns:";
        for (const auto& m : missing) msg += " '" + m + "'";
        throw std::invalid_argument(msg);
    }

    std::size_t unseen = 0;
    std::vector<BitVec> rows;
    rows.reserve(table.n_rows());
    for (const auto& row : table.rows) {
        BitVec bits(schema.n_literals());
        for (std::size_t a = 0; a < schema.n_attributes(); ++a) {
            const auto& cell = row[attr_cols[a]];
            if (!cell) continue;
            if (auto v = schema.find_value(a, *cell))
                bits.set(schema.literal_index(a, *v));
            else
                ++unseen;  // unseen value behaves like unknown
        }
        rows.push_back(std::move(bits));
    }
    if (unseen > 0)
        detail::warn(warnings, "encoded " + std::to_string(unseen) +
                                   " unseen attribute value(s) as unknown");
    if (unseen_values) *unseen_values = unseen;
    return rows;
}

// Encode a labeled row subset against an existing schema and label mapping.
// Rows whose label is unknown or not one of the two classes are dropped.
inline EncodedDataset encode_labeled(const RawTable& table,
                                     const std::vector<std::size_t>& row_indices,
                                     std::shared_ptr<const AttributeSchema> schema,
                                     const std::string& label_column,
                                     const std::string& positive_class,
                                     const std::string& negative_class,
                                     std::vector<std::string>* warnings = nullptr) {
    const std::size_t label_col = table.column_index(label_column);
    RawTable sub;
    sub.columns = table.columns;
    std::vector<bool> is_positive;
    std::size_t dropped = 0;
    for (auto r : row_indices) {
        const auto& cell = table.rows[r][label_col];
        if (!cell || (*cell != positive_class && *cell != negative_class)) {
            ++dropped;
            continue;
        }
        sub.rows.push_back(table.rows[r]);
        is_positive.push_back(*cell == positive_class);
    }
    if (dropped > 0)
        detail::warn(warnings,
                     "dropped " + std::to_string(dropped) + " row(s) with unknown label");

    EncodedDataset data;
    data.schema = schema;
    data.positive_class = positive_class;
    data.negative_class = negative_class;
    data.features = encode_with_schema(sub, *schema, nullptr, warnings);
    data.labels = BitVec(sub.n_rows());
    for (std::size_t i = 0; i < is_positive.size(); ++i)
        if (is_positive[i]) data.labels.set(i);
    return data;
}

inline EncodedDataset subset(const EncodedDataset& data,
                             const std::vector<std::size_t>& rows) {
    EncodedDataset out;
    out.schema = data.schema;
    out.positive_class = data.positive_class;
    out.negative_class = data.negative_class;
    out.features.reserve(rows.size());
    out.labels = BitVec(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.push_back(data.features[rows[i]]);
        if (data.labels.get(rows[i])) out.labels.set(i);
    }
    return out;
}

// Swap the positive/negative orientation of the labels in place.
inline EncodedDataset flipped_labels(EncodedDataset data) {
    data.labels = ~data.labels;
    std::swap(data.positive_class, data.negative_class);
    return data;
}

// True when the current positive class is not the minority of these labels
// (ties resolved toward the lexicographically smaller class name).
inline bool orientation_needs_flip(const EncodedDataset& data) {
    const std::size_t pos = data.labels.count();
    const std::size_t neg = data.n_instances() - pos;
    if (pos != neg) return pos > neg;
    return data.positive_class > data.negative_class;
}

inline FoldPlan make_folds(std::size_t n_instances, std::size_t n_folds,
                           std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("n_folds must be at least 2");
    if (n_instances < n_folds)
        throw std::invalid_argument("fewer instances than folds");
    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.assignments.resize(n_instances);
    const auto order = shuffled_indices(n_instances, seed);
    for (std::size_t p = 0; p < order.size(); ++p)
        plan.assignments[order[p]] = p % n_folds;
    return plan;
}

// Round-robin per class; the negative stream continues where the positive
// one stopped so total fold sizes still differ by at most 1.
inline FoldPlan make_stratified_folds(const BitVec& labels, std::size_t n_folds,
                                      std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("n_folds must be at least 2");
    if (labels.size() < n_folds)
        throw std::invalid_argument("fewer instances than folds");
    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.assignments.resize(labels.size());
    const auto order = shuffled_indices(labels.size(), seed);
    std::size_t next = 0;
    for (bool positive : {true, false}) {
        for (auto i : order) {
            if (labels.get(i) != positive) continue;
            plan.assignments[i] = next % n_folds;
            ++next;
        }
    }
    return plan;
}

// Single seeded shuffle, then consecutive slices; the final partial slice
// is kept so the slices cover every index exactly once.
inline std::vector<std::vector<std::size_t>> minibatches(std::size_t n_instances,
                                                         std::size_t batch_size,
                                                         std::uint64_t seed) {
    if (batch_size < 1 || batch_size > n_instances)
        throw std::invalid_argument("batch_size out of range");
    const auto order = shuffled_indices(n_instances, seed);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n_instances; start += batch_size) {
        const std::size_t end = std::min(start + batch_size, n_instances);
        batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
}

inline std::vector<std::vector<std::size_t>> minibatches(const EncodedDataset& data,
                                                         std::size_t batch_size,
                                                         std::uint64_t seed) {
    return minibatches(data.n_instances(), batch_size, seed);
}

inline std::size_t default_batch_size(std::size_t n_instances) {
    if (n_instances < 1) throw std::invalid_argument("empty dataset");
    const auto r = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(n_instances))));
    return std::max<std::size_t>(1, r);
}

}  // namespace rulenet
