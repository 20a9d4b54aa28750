#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rulenet/dataset.hpp"
#include "rulenet/trace.hpp"
#include "rulenet/trainer.hpp"

namespace rulenet {

inline double accuracy(const BitVec& predictions, const BitVec& labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("predictions/labels length mismatch");
    if (predictions.empty()) throw std::invalid_argument("empty input");
    return static_cast<double>(BitVec::match_count(predictions, labels)) /
           static_cast<double>(predictions.size());
}

namespace detail {

// Shortest round-trip decimal form; keeps trace/report files deterministic.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

// Collects per-mini-batch accuracy samples and writes the trace CSV.
// Single-writer: owned by one training run.
class TraceRecorder {
public:
    void record(const TraceRecord& rec) {
        if (!records_.empty() && rec.batch_index <= records_.back().batch_index)
            throw std::invalid_argument("batch_index must be strictly increasing");
        records_.push_back(rec);
    }

    const std::vector<TraceRecord>& records() const { return records_; }

    TraceSink sink() {
        return [this](const TraceRecord& rec) { record(rec); };
    }

    void write_csv(std::ostream& out) const {
        out << "batch,minibatch_acc,train_acc,test_acc\n";
        for (const auto& r : records_) {
            out << r.batch_index << ',' << detail::format_double(r.minibatch_accuracy)
                << ',' << detail::format_double(r.train_accuracy) << ',';
            if (r.test_accuracy) out << detail::format_double(*r.test_accuracy);
            out << '\n';
        }
    }

    void write_csv_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write trace file: " + path);
        write_csv(out);
    }

private:
    std::vector<TraceRecord> records_;
};

struct BenchmarkResult {
    std::string dataset_name;
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation over folds
    double wall_time_seconds = 0.0;
    TrainConfig config;
};

struct BenchmarkError {
    std::string dataset_name;
    std::string message;
};

struct CrossValidationOptions {
    bool stratified = false;
    std::string dataset_name;
};

// k-fold cross validation. Fold membership comes from `seed`; each fold
// trains with a seed derived from config.seed and the fold index, on the
// other folds, with the label orientation re-derived from that training
// portion (the minority class of the training folds is the positive
// label, so no test labels influence the mapping).
inline BenchmarkResult cross_validate(const EncodedDataset& data,
                                      const TrainConfig& config, std::size_t n_folds,
                                      std::uint64_t seed,
                                      const CrossValidationOptions& options = {}) {
    config.validate();
    if (n_folds < 2) throw std::invalid_argument("n_folds must be at least 2");
    const auto start = std::chrono::steady_clock::now();

    const FoldPlan plan = options.stratified
                              ? make_stratified_folds(data.labels, n_folds, seed)
                              : make_folds(data.n_instances(), n_folds, seed);

    BenchmarkResult result;
    result.dataset_name = options.dataset_name;
    result.config = config;
    for (std::size_t fold = 0; fold < n_folds; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < plan.assignments.size(); ++i)
            (plan.assignments[i] == fold ? test_rows : train_rows).push_back(i);

        EncodedDataset train = subset(data, train_rows);
        const bool flipped = orientation_needs_flip(train);
        if (flipped) train = flipped_labels(std::move(train));

        TrainConfig fold_config = config;
        fold_config.seed = mix_seed(config.seed, fold + 1);
        const RuleNetwork network = fit(train, fold_config);

        const EncodedDataset test = subset(data, test_rows);
        BitVec predictions = predict(test.features, network);
        if (flipped) predictions = ~predictions;
        result.fold_accuracies.push_back(accuracy(predictions, test.labels));
    }

    double sum = 0.0;
    for (double a : result.fold_accuracies) sum += a;
    result.mean_accuracy = sum / static_cast<double>(n_folds);
    double sq = 0.0;
    for (double a : result.fold_accuracies) {
        const double d = a - result.mean_accuracy;
        sq += d * d;
    }
    result.std_accuracy =
        n_folds > 1 ? std::sqrt(sq / static_cast<double>(n_folds - 1)) : 0.0;
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

inline nlohmann::ordered_json benchmark_report_json(
    const std::vector<BenchmarkResult>& results,
    const std::vector<BenchmarkError>& errors = {},
    const std::map<std::string, double>& reference = {}) {
    nlohmann::ordered_json report;
    report["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json item;
        item["dataset"] = r.dataset_name;
        item["fold_accuracies"] = r.fold_accuracies;
        item["mean_accuracy"] = r.mean_accuracy;
        item["std_accuracy"] = r.std_accuracy;
        if (auto it = reference.find(r.dataset_name); it != reference.end())
            item["reference_accuracy"] = it->second;
        item["wall_time_seconds"] = r.wall_time_seconds;
        item["config"] = config_to_json(r.config);
        report["results"].push_back(std::move(item));
    }
    if (!errors.empty()) {
        report["errors"] = nlohmann::ordered_json::array();
        for (const auto& e : errors)
            report["errors"].push_back({{"dataset", e.dataset_name}, {"message", e.message}});
    }
    return report;
}

// Plain-text table: one row per dataset, network accuracy and the
// optional user-supplied reference column side by side.
inline std::string benchmark_report_table(
    const std::vector<BenchmarkResult>& results,
    const std::vector<BenchmarkError>& errors = {},
    const std::map<std::string, double>& reference = {}) {
    std::size_t name_width = std::string("Dataset").size();
    for (const auto& r : results) name_width = std::max(name_width, r.dataset_name.size());
    for (const auto& e : errors) name_width = std::max(name_width, e.dataset_name.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width + 2)) << "Dataset"
        << std::right << std::setw(9) << "Network";
    if (!reference.empty()) out << std::setw(11) << "Reference";
    out << '\n';
    out << std::string(name_width + 2 + 9 + (reference.empty() ? 0 : 11), '-') << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& r : results) {
        out << std::left << std::setw(static_cast<int>(name_width + 2)) << r.dataset_name
            << std::right << std::setw(9) << r.mean_accuracy;
        if (!reference.empty()) {
            if (auto it = reference.find(r.dataset_name); it != reference.end())
                out << std::setw(11) << it->second;
            else
                out << std::setw(11) << "-";
        }
        out << '\n';
    }
    for (const auto& e : errors) {
        out << std::left << std::setw(static_cast<int>(name_width + 2)) << e.dataset_name
            << "error: " << e.message << '\n';
    }
    return out.str();
}

}  // namespace rulenet
