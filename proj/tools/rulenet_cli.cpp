// rulenet command line: train / predict / benchmark / trace / export-dnf.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulenet/boolnet.hpp"
#include "rulenet/csv.hpp"
#include "rulenet/dataset.hpp"
#include "rulenet/eval.hpp"
#include "rulenet/model_io.hpp"
#include "rulenet/trainer.hpp"

namespace {

struct CommonOpts {
    std::string data_path;
    std::string label_column;
    std::string config_path;
    std::string missing_token = "?";
    std::size_t bins = 0;  // 0 = reject numeric columns
};

struct HyperFlags {
    std::size_t rules = 0;
    std::string batch_size;
    std::size_t max_flips = 0;
    double init_literals = 0.0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& flags) {
    cmd->add_option("--rules", flags.rules, "Number of rules (default 20)");
    cmd->add_option("--batch-size", flags.batch_size,
                    "Mini-batch size, a count or 'auto' = round(sqrt(n)) (default auto)");
    cmd->add_option("--max-flips", flags.max_flips, "Max flips per mini-batch (default 2)");
    cmd->add_option("--init-literals", flags.init_literals,
                    "Expected literals per rule at initialization (default 3)");
    cmd->add_option("--epochs", flags.epochs, "Passes over the training data (default 1)");
    cmd->add_option("--seed", flags.seed, "Random seed (default 0)");
}

// Precedence: CLI flag > config file > built-in default.
rulenet::TrainConfig effective_config(const CLI::App* cmd, const HyperFlags& flags,
                                      const std::string& config_path) {
    rulenet::TrainConfig config;
    if (!config_path.empty()) config = rulenet::read_train_config_file(config_path);
    if (cmd->count("--rules")) config.n_rules = flags.rules;
    if (cmd->count("--batch-size")) {
        if (flags.batch_size == "auto") {
            config.batch_size = 0;
        } else {
            try {
                config.batch_size = std::stoull(flags.batch_size);
            } catch (const std::exception&) {
                throw std::invalid_argument("--batch-size expects a count or 'auto'");
            }
            if (config.batch_size == 0)
                throw std::invalid_argument("--batch-size must be positive");
        }
    }
    if (cmd->count("--max-flips")) config.max_flips_per_batch = flags.max_flips;
    if (cmd->count("--init-literals")) config.init_expected_literals = flags.init_literals;
    if (cmd->count("--epochs")) config.epochs = flags.epochs;
    if (cmd->count("--seed")) config.seed = flags.seed;
    config.validate();
    return config;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Load a CSV and discretize its numeric columns when --bins is given.
rulenet::RawTable load_table(const CommonOpts& opts) {
    rulenet::IngestOptions ingest;
    ingest.missing_token = opts.missing_token;
    rulenet::RawTable table = rulenet::load_csv(opts.data_path, opts.label_column, ingest);
    if (opts.bins > 0) {
        for (const auto& column : table.columns) {
            if (column == opts.label_column) continue;
            if (!rulenet::is_numeric_column(table, column)) continue;
            table = rulenet::discretize(table, column, opts.bins);
            std::cerr << "note: discretized numeric column '" << column << "' into "
                      << opts.bins << " bins\n";
        }
    }
    return table;
}

std::string describe_config(const rulenet::TrainConfig& config, std::size_t effective_batch) {
    std::ostringstream out;
    out << "rules=" << config.n_rules << " batch_size=";
    if (config.batch_size == 0)
        out << "auto(" << effective_batch << ")";
    else
        out << config.batch_size;
    out << " max_flips=" << config.max_flips_per_batch
        << " init_literals=" << config.init_expected_literals << " epochs=" << config.epochs
        << " seed=" << config.seed;
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

int cmd_train(const CommonOpts& opts, const CLI::App* cmd, const HyperFlags& flags,
              const std::string& out_path, const std::string& trace_path) {
    const auto config = effective_config(cmd, flags, opts.config_path);
    const auto table = load_table(opts);
    std::vector<std::string> warnings;
    const auto data = rulenet::encode(table, opts.label_column, &warnings);
    print_warnings(warnings);

    const std::size_t batch = config.resolve_batch_size(data.n_instances());
    std::cout << "data: " << opts.data_path << " (" << data.n_instances() << " instances, "
              << data.n_literals() << " literals, positive class '" << data.positive_class
              << "')\n";
    std::cout << "config: " << describe_config(config, batch) << "\n";

    rulenet::TraceRecorder recorder;
    const auto network = rulenet::fit(data, config,
                                      trace_path.empty() ? rulenet::TraceSink{}
                                                         : recorder.sink());
    if (!trace_path.empty()) {
        recorder.write_csv_file(trace_path);
        std::cout << "trace written to " << trace_path << "\n";
    }
    rulenet::save_model_file(out_path, network, config);

    const double train_acc =
        rulenet::accuracy(rulenet::predict(data.features, network), data.labels);
    std::cout << "final training accuracy: " << rulenet::detail::format_double(train_acc)
              << " (selected " << network.or_layer.count_selected() << " of "
              << network.and_layer.n_rules() << " rules)\n";
    std::cout << "model written to " << out_path << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& missing_token, const std::string& out_path) {
    const auto model = rulenet::load_model_file(model_path);
    rulenet::IngestOptions ingest;
    ingest.missing_token = missing_token;
    const auto table = rulenet::read_csv_file(data_path, ingest);

    std::vector<std::string> warnings;
    const auto rows = rulenet::encode_with_schema(table, model.network.and_layer.schema(),
                                                  nullptr, &warnings);
    print_warnings(warnings);
    if (rows.empty()) std::cerr << "warning: input file has no data rows\n";

    std::ostringstream out;
    out << "prediction\n";
    if (!rows.empty()) {
        const auto pred = rulenet::predict(rows, model.network);
        for (std::size_t i = 0; i < rows.size(); ++i)
            out << (pred.get(i) ? model.network.positive_class
                                : model.network.negative_class)
                << "\n";
    }
    if (out_path.empty())
        std::cout << out.str();
    else
        write_text_file(out_path, out.str());
    return 0;
}

int cmd_benchmark(const std::vector<std::string>& data_paths,
                  const std::vector<std::string>& labels, const CLI::App* cmd,
                  const HyperFlags& flags, const CommonOpts& opts, std::size_t folds,
                  std::uint64_t fold_seed, bool stratified,
                  const std::string& reference_path, const std::string& out_path) {
    const auto config = effective_config(cmd, flags, opts.config_path);
    if (labels.size() > 1 && labels.size() != data_paths.size())
        throw std::invalid_argument("--label must be given once or once per --data");

    std::map<std::string, double> reference;
    if (!reference_path.empty()) {
        std::ifstream in(reference_path);
        if (!in) throw std::invalid_argument("cannot open reference file: " + reference_path);
        nlohmann::json j;
        in >> j;
        for (const auto& [name, value] : j.items()) reference[name] = value.get<double>();
    }

    std::vector<rulenet::BenchmarkResult> results;
    std::vector<rulenet::BenchmarkError> errors;
    for (std::size_t d = 0; d < data_paths.size(); ++d) {
        const std::string name = std::filesystem::path(data_paths[d]).stem().string();
        try {
            CommonOpts ds_opts = opts;
            ds_opts.data_path = data_paths[d];
            ds_opts.label_column = labels.empty()
                                       ? std::string{}
                                       : labels[labels.size() == 1 ? 0 : d];
            rulenet::IngestOptions ingest;
            ingest.missing_token = opts.missing_token;
            if (ds_opts.label_column.empty()) {
                // default: last column is the label
                const auto table = rulenet::read_csv_file(ds_opts.data_path, ingest);
                if (table.n_cols() == 0) throw std::runtime_error("no columns");
                ds_opts.label_column = table.columns.back();
            }
            const auto table = load_table(ds_opts);
            std::vector<std::string> warnings;
            const auto data = rulenet::encode(table, ds_opts.label_column, &warnings);
            print_warnings(warnings);

            rulenet::CrossValidationOptions cv;
            cv.stratified = stratified;
            cv.dataset_name = name;
            results.push_back(rulenet::cross_validate(data, config, folds, fold_seed, cv));
        } catch (const std::exception& e) {
            errors.push_back({name, e.what()});
        }
    }

    std::cout << rulenet::benchmark_report_table(results, errors, reference);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report file: " + out_path);
        out << rulenet::benchmark_report_json(results, errors, reference).dump(2) << '\n';
        std::cout << "report written to " << out_path << "\n";
    }
    return errors.empty() ? 0 : 1;
}

int cmd_trace(const CommonOpts& opts, const CLI::App* cmd, const HyperFlags& flags,
              double holdout_fraction, const std::string& trace_path,
              const std::string& model_out) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw std::invalid_argument("--holdout must be strictly between 0 and 1");
    const auto config = effective_config(cmd, flags, opts.config_path);
    const auto table = load_table(opts);

    // Deterministic holdout split before encoding; the label mapping and
    // the value universe come from the training portion only.
    const std::size_t label_col = table.column_index(opts.label_column);
    std::vector<std::size_t> labeled_rows;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        if (table.rows[r][label_col]) labeled_rows.push_back(r);
    if (labeled_rows.size() < table.n_rows())
        std::cerr << "warning: dropped " << table.n_rows() - labeled_rows.size()
                  << " row(s) with unknown label\n";
    if (labeled_rows.size() < 2) throw std::invalid_argument("not enough labeled rows");

    // Salt keeps the split stream independent of the epoch shuffles.
    const auto order = rulenet::shuffled_indices(
        labeled_rows.size(), rulenet::mix_seed(config.seed, 0x9000));
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(holdout_fraction * static_cast<double>(labeled_rows.size())));
    n_test = std::min(std::max<std::size_t>(n_test, 1), labeled_rows.size() - 1);

    rulenet::RawTable train_table;
    train_table.columns = table.columns;
    std::vector<std::size_t> test_rows;
    for (std::size_t p = 0; p < order.size(); ++p) {
        const std::size_t row = labeled_rows[order[p]];
        if (p < labeled_rows.size() - n_test)
            train_table.rows.push_back(table.rows[row]);
        else
            test_rows.push_back(row);
    }

    std::vector<std::string> warnings;
    const auto train = rulenet::encode(train_table, opts.label_column, &warnings);
    const auto holdout =
        rulenet::encode_labeled(table, test_rows, train.schema, opts.label_column,
                                train.positive_class, train.negative_class, &warnings);
    print_warnings(warnings);

    const std::size_t batch = config.resolve_batch_size(train.n_instances());
    std::cout << "split: " << train.n_instances() << " train / " << holdout.n_instances()
              << " test (holdout " << holdout_fraction << ")\n";
    std::cout << "config: " << describe_config(config, batch) << "\n";

    rulenet::TraceRecorder recorder;
    const auto network = rulenet::fit(train, config, recorder.sink(), &holdout);
    recorder.write_csv_file(trace_path);
    std::cout << "trace written to " << trace_path << " (" << recorder.records().size()
              << " mini-batches)\n";

    if (!model_out.empty()) {
        rulenet::save_model_file(model_out, network, config);
        std::cout << "model written to " << model_out << "\n";
    }
    const double train_acc =
        rulenet::accuracy(rulenet::predict(train.features, network), train.labels);
    const double test_acc =
        holdout.n_instances() > 0
            ? rulenet::accuracy(rulenet::predict(holdout.features, network), holdout.labels)
            : 0.0;
    std::cout << "final training accuracy: " << rulenet::detail::format_double(train_acc)
              << ", test accuracy: " << rulenet::detail::format_double(test_acc) << "\n";
    return 0;
}

int cmd_export_dnf(const std::string& model_path, const std::string& out_path) {
    const auto model = rulenet::load_model_file(model_path);
    const std::string text = rulenet::to_dnf(model.network);
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DNF rule set learner: a three-layer boolean network trained by greedy "
                 "literal flips over mini-batches"};
    app.require_subcommand(1);

    CommonOpts opts;
    HyperFlags flags;

    auto* train = app.add_subcommand("train", "Train a model and write it as JSON");
    train->add_option("--data", opts.data_path, "Training CSV")->required();
    train->add_option("--label", opts.label_column, "Label column name")->required();
    train->add_option("--config", opts.config_path, "Config file (key = value lines)");
    train->add_option("--missing", opts.missing_token, "Missing value token (default '?')");
    train->add_option("--bins", opts.bins,
                      "Discretize numeric columns into this many equal-frequency bins");
    add_hyper_flags(train, flags);
    std::string out_path = "model.json";
    std::string trace_path;
    train->add_option("--out", out_path, "Model output path (default model.json)");
    train->add_option("--trace-out", trace_path, "Also write a per-mini-batch trace CSV");

    auto* predictc = app.add_subcommand("predict", "Predict class names for a CSV");
    std::string model_path;
    predictc->add_option("--model", model_path, "Model JSON path")->required();
    predictc->add_option("--data", opts.data_path, "Input CSV")->required();
    predictc->add_option("--missing", opts.missing_token, "Missing value token");
    std::string pred_out;
    predictc->add_option("--out", pred_out, "Predictions CSV path (default stdout)");

    auto* bench = app.add_subcommand("benchmark", "Cross-validated accuracy on datasets");
    std::vector<std::string> bench_data, bench_labels;
    bench->add_option("--data", bench_data, "Dataset CSV (repeatable)")->required();
    bench->add_option("--label", bench_labels,
                      "Label column; one for all datasets or one per --data "
                      "(default: last column)");
    bench->add_option("--config", opts.config_path, "Config file");
    bench->add_option("--missing", opts.missing_token, "Missing value token");
    bench->add_option("--bins", opts.bins, "Discretize numeric columns");
    add_hyper_flags(bench, flags);
    std::size_t folds = 10;
    std::uint64_t fold_seed = 0;
    bool stratified = false;
    std::string reference_path, report_path;
    bench->add_option("--folds", folds, "Number of CV folds (default 10)");
    bench->add_option("--fold-seed", fold_seed, "Seed for fold assignment (default 0)");
    bench->add_flag("--stratified", stratified, "Stratify folds by class");
    bench->add_option("--reference", reference_path,
                      "JSON file of reference accuracies to show side by side");
    bench->add_option("--out", report_path, "Report JSON path");

    auto* trace = app.add_subcommand("trace",
                                     "Train with a holdout split and write the "
                                     "per-mini-batch accuracy trace");
    trace->add_option("--data", opts.data_path, "Training CSV")->required();
    trace->add_option("--label", opts.label_column, "Label column name")->required();
    trace->add_option("--config", opts.config_path, "Config file");
    trace->add_option("--missing", opts.missing_token, "Missing value token");
    trace->add_option("--bins", opts.bins, "Discretize numeric columns");
    add_hyper_flags(trace, flags);
    double holdout = 0.2;
    std::string trace_out = "trace.csv";
    std::string trace_model_out;
    trace->add_option("--holdout", holdout, "Holdout fraction (default 0.2)");
    trace->add_option("--trace-out", trace_out, "Trace CSV path (default trace.csv)");
    trace->add_option("--out", trace_model_out, "Also write the trained model JSON");

    auto* exportc = app.add_subcommand("export-dnf", "Write a model as a DNF rule list");
    exportc->add_option("--model", model_path, "Model JSON path")->required();
    std::string dnf_out;
    exportc->add_option("--out", dnf_out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (train->parsed())
            return cmd_train(opts, train, flags, out_path, trace_path);
        if (predictc->parsed())
            return cmd_predict(model_path, opts.data_path, opts.missing_token, pred_out);
        if (bench->parsed())
            return cmd_benchmark(bench_data, bench_labels, bench, flags, opts, folds,
                                 fold_seed, stratified, reference_path, report_path);
        if (trace->parsed())
            return cmd_trace(opts, trace, flags, holdout, trace_out, trace_model_out);
        if (exportc->parsed()) return cmd_export_dnf(model_path, dnf_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
