#pragma once

#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulenet/boolnet.hpp"
#include "rulenet/trainer.hpp"

namespace rulenet {

struct ModelFile {
    RuleNetwork network;
    TrainConfig config;
};

// Model JSON: schema (attribute/value order), rules as literal lists,
// selected rule indices, class names, and the training config. Reload
// contract: load(save(m)) predicts identically to m on every input.
inline nlohmann::ordered_json model_to_json(const RuleNetwork& network,
                                            const TrainConfig& config) {
    const auto& schema = network.and_layer.schema();
    nlohmann::ordered_json j;
    j["format"] = "rulenet-model";
    j["version"] = 1;
    j["positive_class"] = network.positive_class;
    j["negative_class"] = network.negative_class;
    j["schema"] = schema.to_json();

    nlohmann::ordered_json rules = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < network.and_layer.n_rules(); ++r) {
        nlohmann::ordered_json literals = nlohmann::ordered_json::array();
        for (auto l : network.and_layer.rule_literals(r)) {
            const auto [attr, value] = schema.literal_name(l);
            literals.push_back({{"attribute", attr}, {"value", value}});
        }
        rules.push_back(std::move(literals));
    }
    j["rules"] = std::move(rules);

    std::vector<std::size_t> selected;
    for (std::size_t r = 0; r < network.or_layer.n_rules(); ++r)
        if (network.or_layer.selected(r)) selected.push_back(r);
    j["selected"] = selected;
    j["config"] = config_to_json(config);
    return j;
}

inline void save_model(std::ostream& out, const RuleNetwork& network,
                       const TrainConfig& config) {
    out << model_to_json(network, config).dump(2) << '\n';
}

inline void save_model_file(const std::string& path, const RuleNetwork& network,
                            const TrainConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    save_model(out, network, config);
}

inline ModelFile load_model(std::istream& in) {
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "rulenet-model")
        throw std::runtime_error("not a rulenet model file");

    auto schema = std::make_shared<AttributeSchema>(
        AttributeSchema::from_json(j.at("schema")));
    const auto& rules_json = j.at("rules");
    if (rules_json.empty()) throw std::runtime_error("model has no rules");

    std::vector<BitVec> masks;
    for (const auto& rule : rules_json) {
        BitVec mask(schema->n_literals());
        for (const auto& lit : rule) {
            const auto name = lit.at("attribute").get<std::string>();
            const auto value = lit.at("value").get<std::string>();
            const auto attr = schema->find_attribute(name);
            if (!attr) throw std::runtime_error("model literal names unknown attribute '" +
                                                name + "'");
            const auto val = schema->find_value(*attr, value);
            if (!val) throw std::runtime_error("model literal names unknown value '" +
                                               value + "' of attribute '" + name + "'");
            mask.set(schema->literal_index(*attr, *val));
        }
        masks.push_back(std::move(mask));
    }

    OrLayer or_layer(masks.size(), false);
    for (auto idx : j.at("selected").get<std::vector<std::size_t>>()) {
        if (idx >= masks.size()) throw std::runtime_error("selected rule index out of range");
        or_layer = or_layer.with_rule(idx, true);
    }

    AndLayer and_layer(schema, std::move(masks));
    RuleNetwork network(std::move(and_layer), std::move(or_layer),
                        j.at("positive_class").get<std::string>(),
                        j.at("negative_class").get<std::string>());
    return ModelFile{std::move(network), config_from_json(j.at("config"))};
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace rulenet
