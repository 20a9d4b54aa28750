#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rulenet/boolnet.hpp"
#include "rulenet/dataset.hpp"
#include "rulenet/random.hpp"
#include "rulenet/trace.hpp"

namespace rulenet {

struct TrainConfig {
    std::size_t n_rules = 20;
    std::size_t batch_size = 0;  // 0 = auto: round(sqrt(n_instances))
    std::size_t max_flips_per_batch = 2;
    double init_expected_literals = 3.0;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_rules < 1) throw std::invalid_argument("n_rules must be at least 1");
        if (!(init_expected_literals > 0.0))
            throw std::invalid_argument("init_expected_literals must be positive");
        if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    }

    std::size_t resolve_batch_size(std::size_t n_instances) const {
        if (batch_size == 0) return std::min(default_batch_size(n_instances), n_instances);
        return batch_size;
    }
};

struct FlipEvaluation {
    Flip flip;
    double batch_accuracy_after = 0.0;
    double delta = 0.0;  // batch accuracy after minus before, same batch
};

// Minimal key = value config file ("#" comments, optional quotes).
// Recognized keys match the CLI flags: rules, batch_size, max_flips,
// init_literals, epochs, seed.
inline TrainConfig read_train_config(std::istream& in) {
    TrainConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);

        try {
            if (key == "rules") {
                config.n_rules = std::stoull(value);
            } else if (key == "batch_size") {
                config.batch_size = (value == "auto") ? 0 : std::stoull(value);
            } else if (key == "max_flips") {
                config.max_flips_per_batch = std::stoull(value);
            } else if (key == "init_literals") {
                config.init_expected_literals = std::stod(value);
            } else if (key == "epochs") {
                config.epochs = std::stoull(value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else {
                throw std::invalid_argument("unknown config key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": bad value for '" + key + "'");
        }
    }
    config.validate();
    return config;
}

inline TrainConfig read_train_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return read_train_config(in);
}

inline nlohmann::ordered_json config_to_json(const TrainConfig& config) {
    nlohmann::ordered_json j;
    j["rules"] = config.n_rules;
    if (config.batch_size == 0)
        j["batch_size"] = "auto";
    else
        j["batch_size"] = config.batch_size;
    j["max_flips"] = config.max_flips_per_batch;
    j["init_literals"] = config.init_expected_literals;
    j["epochs"] = config.epochs;
    j["seed"] = config.seed;
    return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig config;
    config.n_rules = j.at("rules").get<std::size_t>();
    const auto& bs = j.at("batch_size");
    config.batch_size = bs.is_string() ? 0 : bs.get<std::size_t>();
    config.max_flips_per_batch = j.at("max_flips").get<std::size_t>();
    config.init_expected_literals = j.at("init_literals").get<double>();
    config.epochs = j.at("epochs").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.validate();
    return config;
}

// Each attribute enters a rule with probability init_expected_literals/|A|
// (capped at 1), with a uniformly chosen value, so a rule starts with
// about that many literals of distinct attributes.
inline AndLayer init_and_layer(std::shared_ptr<const AttributeSchema> schema,
                               const TrainConfig& config, Rng& rng) {
    config.validate();
    if (schema->n_attributes() < 1)
        throw std::invalid_argument("schema has no attributes");
    const double p = std::min(
        1.0, config.init_expected_literals / static_cast<double>(schema->n_attributes()));
    std::vector<BitVec> rules(config.n_rules, BitVec(schema->n_literals()));
    for (auto& mask : rules) {
        for (std::size_t a = 0; a < schema->n_attributes(); ++a) {
            if (!rng.bernoulli(p)) continue;
            const auto& values = schema->attribute(a).values;
            mask.set(schema->literal_index(a, rng.index(values.size())));
        }
    }
    return AndLayer(std::move(schema), std::move(rules));
}

// All rules start in the rule set.
inline OrLayer init_or_layer(std::size_t n_rules) {
    if (n_rules < 1) throw std::invalid_argument("n_rules must be at least 1");
    return OrLayer(n_rules, true);
}

// Every legal single flip, rule-major then by literal index. Each (rule,
// literal) entry yields exactly one flip, so the sequence has
// n_rules * n_literals elements.
inline std::vector<Flip> enumerate_flips(const AndLayer& layer) {
    std::vector<Flip> flips;
    flips.reserve(layer.n_rules() * layer.n_literals());
    for (std::size_t j = 0; j < layer.n_rules(); ++j)
        for (std::size_t l = 0; l < layer.n_literals(); ++l)
            flips.push_back(plan_flip(layer, j, l));
    return flips;
}

// Accuracy of the network with the flip applied (OR layer unchanged) on
// the given batch, and the change relative to the unflipped network.
inline FlipEvaluation evaluate_flip(const RuleNetwork& network, const Flip& flip,
                                    const std::vector<BitVec>& batch_features,
                                    const BitVec& batch_labels) {
    if (batch_features.size() != batch_labels.size() || batch_features.empty())
        throw std::invalid_argument("batch features/labels size mismatch");
    const double n = static_cast<double>(batch_labels.size());
    const BitVec base = predict(batch_features, network);
    RuleNetwork flipped(apply_flip(network.and_layer, flip), network.or_layer,
                        network.positive_class, network.negative_class);
    const BitVec after = predict(batch_features, flipped);
    FlipEvaluation eval;
    eval.flip = flip;
    eval.batch_accuracy_after =
        static_cast<double>(BitVec::match_count(after, batch_labels)) / n;
    eval.delta = eval.batch_accuracy_after -
                 static_cast<double>(BitVec::match_count(base, batch_labels)) / n;
    return eval;
}

// Batch features transposed to per-literal bit columns, so one rule's
// activation column is the AND of its literals' columns.
class LiteralColumns {
public:
    LiteralColumns(const EncodedDataset& data, const std::vector<std::size_t>& batch)
        : batch_size_(batch.size()),
          columns_(data.n_literals(), BitVec(batch.size())),
          labels_(batch.size()) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            data.features[batch[i]].for_each_set(
                [&](std::size_t l) { columns_[l].set(i); });
            if (data.labels.get(batch[i])) labels_.set(i);
        }
    }

    std::size_t batch_size() const { return batch_size_; }
    const BitVec& labels() const { return labels_; }
    const BitVec& column(std::size_t literal) const { return columns_.at(literal); }

    BitVec rule_activation(const BitVec& mask) const {
        BitVec acc(batch_size_, true);
        mask.for_each_set([&](std::size_t l) { acc &= columns_[l]; });
        return acc;
    }

private:
    std::size_t batch_size_;
    std::vector<BitVec> columns_;
    BitVec labels_;
};

struct BatchStepResult {
    RuleNetwork network;
    std::vector<FlipEvaluation> applied;
    double batch_accuracy = 0.0;  // after the applied flips
};

namespace detail {

// (correct count, direction, rule, literal) with the documented tie
// order: higher count wins, then Remove before Add, then lower rule
// index, then lower literal index.
struct FlipChoice {
    std::size_t correct = 0;
    FlipDirection direction = FlipDirection::Add;
    std::size_t rule = 0;
    std::size_t literal = 0;
    bool valid = false;

    bool beats(const FlipChoice& other) const {
        if (!other.valid) return true;
        if (correct != other.correct) return correct > other.correct;
        if (direction != other.direction) return direction == FlipDirection::Remove;
        if (rule != other.rule) return rule < other.rule;
        return literal < other.literal;
    }
};

}  // namespace detail

// One mini-batch step: up to max_flips_per_batch greedy rounds. Each
// round scores every candidate flip against the current state and applies
// the best one if it strictly improves batch accuracy. Candidate scoring
// recomputes only the affected rule's activation column; the other rules'
// columns are cached (tests assert this path equals full recomputation).
inline BatchStepResult train_on_batch(RuleNetwork network,
                                      const std::vector<std::size_t>& batch,
                                      const EncodedDataset& data,
                                      const TrainConfig& config) {
    if (batch.empty()) throw std::invalid_argument("empty mini-batch");
    const LiteralColumns cols(data, batch);
    const BitVec& labels = cols.labels();
    const std::size_t n = cols.batch_size();
    const std::size_t n_rules = network.and_layer.n_rules();
    const auto& schema = network.and_layer.schema();

    std::vector<BitVec> columns(n_rules);
    for (std::size_t j = 0; j < n_rules; ++j)
        columns[j] = cols.rule_activation(network.and_layer.rule_mask(j));

    BatchStepResult result{std::move(network), {}, 0.0};
    std::size_t base_correct = 0;
    for (std::size_t round = 0; round < config.max_flips_per_batch + 1; ++round) {
        // OR of the selected columns other than j, via prefix/suffix sweeps.
        std::vector<BitVec> prefix(n_rules + 1, BitVec(n)), suffix(n_rules + 1, BitVec(n));
        for (std::size_t j = 0; j < n_rules; ++j) {
            prefix[j + 1] = prefix[j];
            if (result.network.or_layer.selected(j)) prefix[j + 1] |= columns[j];
        }
        for (std::size_t j = n_rules; j-- > 0;) {
            suffix[j] = suffix[j + 1];
            if (result.network.or_layer.selected(j)) suffix[j] |= columns[j];
        }
        base_correct = BitVec::match_count(prefix[n_rules], labels);
        if (round == config.max_flips_per_batch) break;

        detail::FlipChoice best;
        BitVec best_column;
        for (std::size_t j = 0; j < n_rules; ++j) {
            // Flips in unselected rules cannot change predictions (delta 0),
            // and a zero delta is never applied.
            if (!result.network.or_layer.selected(j)) continue;
            const BitVec others = prefix[j] | suffix[j + 1];
            const BitVec& mask = result.network.and_layer.rule_mask(j);
            for (std::size_t l = 0; l < schema.n_literals(); ++l) {
                BitVec column(0);
                FlipDirection direction;
                if (mask.get(l)) {
                    direction = FlipDirection::Remove;
                    BitVec new_mask = mask;
                    new_mask.reset(l);
                    column = cols.rule_activation(new_mask);
                } else {
                    direction = FlipDirection::Add;
                    const auto evicted = result.network.and_layer.literal_of_attribute(
                        j, schema.attribute_of(l));
                    if (evicted) {
                        BitVec new_mask = mask;
                        new_mask.reset(*evicted);
                        new_mask.set(l);
                        column = cols.rule_activation(new_mask);
                    } else {
                        column = columns[j] & cols.column(l);
                    }
                }
                const std::size_t correct = BitVec::match_count(others | column, labels);
                detail::FlipChoice candidate{correct, direction, j, l, true};
                if (candidate.beats(best)) {
                    best = candidate;
                    best_column = std::move(column);
                }
            }
        }
        if (!best.valid || best.correct <= base_correct) break;

        const Flip flip = plan_flip(result.network.and_layer, best.rule, best.literal);
        result.network.and_layer = apply_flip(result.network.and_layer, flip);
        columns[best.rule] = std::move(best_column);
        FlipEvaluation eval;
        eval.flip = flip;
        eval.batch_accuracy_after =
            static_cast<double>(best.correct) / static_cast<double>(n);
        eval.delta = static_cast<double>(best.correct - base_correct) /
                     static_cast<double>(n);
        result.applied.push_back(std::move(eval));
    }
    result.batch_accuracy = static_cast<double>(base_correct) / static_cast<double>(n);
    return result;
}

// Final OR-layer rebuild on the full training data: reset to all-false,
// then greedily add the rule whose inclusion raises training accuracy the
// most, while any strictly positive gain exists (ties: lowest rule index).
inline RuleNetwork reselect_rules(RuleNetwork network, const EncodedDataset& data) {
    const std::size_t n_rules = network.and_layer.n_rules();
    const auto columns = and_forward(data.features, network.and_layer);
    const std::size_t n = data.n_instances();

    OrLayer selection(n_rules, false);
    BitVec pred(n);
    std::size_t correct = BitVec::match_count(pred, data.labels);
    while (true) {
        std::size_t best_rule = n_rules;
        std::size_t best_correct = correct;
        for (std::size_t j = 0; j < n_rules; ++j) {
            if (selection.selected(j)) continue;
            const std::size_t c = BitVec::match_count(pred | columns[j], data.labels);
            if (c > best_correct) {
                best_correct = c;
                best_rule = j;
            }
        }
        if (best_rule == n_rules) break;
        selection = selection.with_rule(best_rule, true);
        pred |= columns[best_rule];
        correct = best_correct;
    }
    return RuleNetwork(std::move(network.and_layer), std::move(selection),
                       std::move(network.positive_class),
                       std::move(network.negative_class));
}

// Whole training procedure: random AND initialization, all-true OR layer,
// greedy flips over shuffled mini-batches (one shuffle per epoch), then
// the OR re-selection pass on the full training data. Deterministic for a
// fixed (data, config, holdout).
inline RuleNetwork fit(const EncodedDataset& data, const TrainConfig& config,
                       const TraceSink& sink = nullptr,
                       const EncodedDataset* holdout = nullptr) {
    config.validate();
    if (data.n_instances() == 0) throw std::invalid_argument("empty dataset");
    if (holdout && holdout->n_literals() != data.n_literals())
        throw std::invalid_argument("holdout schema does not match training data");

    Rng rng(config.seed);
    AndLayer and_layer = init_and_layer(data.schema, config, rng);
    RuleNetwork network(std::move(and_layer), init_or_layer(config.n_rules),
                        data.positive_class, data.negative_class);

    const std::size_t batch_size = config.resolve_batch_size(data.n_instances());
    std::size_t batch_index = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& batch :
             minibatches(data, batch_size, mix_seed(config.seed, epoch + 1))) {
            auto step = train_on_batch(std::move(network), batch, data, config);
            network = std::move(step.network);
            ++batch_index;
            if (sink) {
                TraceRecord record;
                record.batch_index = batch_index;
                record.minibatch_accuracy = step.batch_accuracy;
                record.train_accuracy =
                    static_cast<double>(
                        BitVec::match_count(predict(data.features, network), data.labels)) /
                    static_cast<double>(data.n_instances());
                if (holdout && holdout->n_instances() > 0)
                    record.test_accuracy =
                        static_cast<double>(BitVec::match_count(
                            predict(holdout->features, network), holdout->labels)) /
                        static_cast<double>(holdout->n_instances());
                sink(record);
            }
        }
    }
    return reselect_rules(std::move(network), data);
}

}  // namespace rulenet
