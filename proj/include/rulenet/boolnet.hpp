#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rulenet/bitvec.hpp"
#include "rulenet/schema.hpp"

namespace rulenet {

// Declaration order is the tie order used by the trainer: at equal
// accuracy gain a removal beats an addition.
enum class FlipDirection { Remove, Add };

// A single-entry change to the AND layer. On Add, `evicted` lists the
// currently-set literals of the same attribute in that rule (at most one,
// given the layer invariant); they are cleared when the flip is applied.
struct Flip {
    std::size_t rule = 0;
    std::size_t literal = 0;
    FlipDirection direction = FlipDirection::Add;
    std::vector<std::size_t> evicted;
};

// Literal-membership masks, one per rule. Invariant: within a rule, at
// most one literal of each attribute is set, so no rule can contain
// contradictory literals.
class AndLayer {
public:
    AndLayer(std::shared_ptr<const AttributeSchema> schema, std::size_t n_rules)
        : schema_(std::move(schema)),
          rules_(n_rules, BitVec(schema_->n_literals())) {
        if (n_rules < 1) throw std::invalid_argument("n_rules must be at least 1");
    }

    AndLayer(std::shared_ptr<const AttributeSchema> schema, std::vector<BitVec> rules)
        : schema_(std::move(schema)), rules_(std::move(rules)) {
        if (rules_.empty()) throw std::invalid_argument("n_rules must be at least 1");
        for (const auto& mask : rules_) {
            if (mask.size() != schema_->n_literals())
                throw std::invalid_argument("rule mask width does not match schema");
        }
        for (std::size_t j = 0; j < rules_.size(); ++j)
            for (std::size_t a = 0; a < schema_->n_attributes(); ++a)
                if (count_in_attribute(j, a) > 1)
                    throw std::invalid_argument("rule has contradictory literals");
    }

    const AttributeSchema& schema() const { return *schema_; }
    std::shared_ptr<const AttributeSchema> schema_ptr() const { return schema_; }
    std::size_t n_rules() const { return rules_.size(); }
    std::size_t n_literals() const { return schema_->n_literals(); }

    const BitVec& rule_mask(std::size_t rule) const { return rules_.at(rule); }
    bool literal_set(std::size_t rule, std::size_t literal) const {
        return rules_.at(rule).get(literal);
    }

    // Literal of `attribute` currently set in `rule`, if any.
    std::optional<std::size_t> literal_of_attribute(std::size_t rule,
                                                    std::size_t attribute) const {
        const auto [first, last] = schema_->attribute_span(attribute);
        for (std::size_t l = first; l < last; ++l)
            if (rules_.at(rule).get(l)) return l;
        return std::nullopt;
    }

    std::vector<std::size_t> rule_literals(std::size_t rule) const {
        return rules_.at(rule).set_bits();
    }

private:
    std::size_t count_in_attribute(std::size_t rule, std::size_t attribute) const {
        const auto [first, last] = schema_->attribute_span(attribute);
        std::size_t c = 0;
        for (std::size_t l = first; l < last; ++l)
            if (rules_[rule].get(l)) ++c;
        return c;
    }

    friend AndLayer apply_flip(const AndLayer&, const Flip&);

    std::shared_ptr<const AttributeSchema> schema_;
    std::vector<BitVec> rules_;
};

// Rule-set membership: selected rules form the disjunction.
class OrLayer {
public:
    explicit OrLayer(std::size_t n_rules, bool value = false)
        : selected_(n_rules, value) {}
    explicit OrLayer(BitVec selected) : selected_(std::move(selected)) {}

    std::size_t n_rules() const { return selected_.size(); }
    bool selected(std::size_t rule) const { return selected_.get(rule); }
    std::size_t count_selected() const { return selected_.count(); }
    const BitVec& mask() const { return selected_; }

    OrLayer with_rule(std::size_t rule, bool value) const {
        OrLayer out(*this);
        out.selected_.set(rule, value);
        return out;
    }

private:
    BitVec selected_;
};

struct RuleNetwork {
    AndLayer and_layer;
    OrLayer or_layer;
    std::string positive_class;
    std::string negative_class;

    RuleNetwork(AndLayer al, OrLayer ol, std::string positive, std::string negative)
        : and_layer(std::move(al)),
          or_layer(std::move(ol)),
          positive_class(std::move(positive)),
          negative_class(std::move(negative)) {
        if (and_layer.n_rules() != or_layer.n_rules())
            throw std::invalid_argument("AND/OR layer sizes disagree");
    }
};

// Rule activations as per-rule columns over the batch. Rule j fires on
// instance i iff every literal of rule j is set in row i; with the mask
// and the row inverted this is one boolean matrix product, which reduces
// to a word-parallel subset test. A rule with no literals fires everywhere.
inline std::vector<BitVec> and_forward(const std::vector<BitVec>& rows,
                                       const AndLayer& layer) {
    std::vector<BitVec> columns(layer.n_rules(), BitVec(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != layer.n_literals())
            throw std::invalid_argument("feature width does not match layer");
        for (std::size_t j = 0; j < layer.n_rules(); ++j)
            if (layer.rule_mask(j).is_subset_of(rows[i])) columns[j].set(i);
    }
    return columns;
}

// Disjunction over the selected rules' activation columns.
inline BitVec or_forward(const std::vector<BitVec>& rule_columns, const OrLayer& layer,
                         std::size_t batch_size) {
    if (rule_columns.size() != layer.n_rules())
        throw std::invalid_argument("activation width does not match layer");
    BitVec out(batch_size);
    for (std::size_t j = 0; j < rule_columns.size(); ++j) {
        if (rule_columns[j].size() != batch_size)
            throw std::invalid_argument("activation column size mismatch");
        if (layer.selected(j)) out |= rule_columns[j];
    }
    return out;
}

inline BitVec predict(const std::vector<BitVec>& rows, const RuleNetwork& network) {
    return or_forward(and_forward(rows, network.and_layer), network.or_layer, rows.size());
}

// Build the flip for (rule, literal) from the layer's current state:
// a set entry yields a Remove, a clear entry an Add with its eviction.
inline Flip plan_flip(const AndLayer& layer, std::size_t rule, std::size_t literal) {
    Flip flip;
    flip.rule = rule;
    flip.literal = literal;
    if (layer.literal_set(rule, literal)) {
        flip.direction = FlipDirection::Remove;
    } else {
        flip.direction = FlipDirection::Add;
        if (auto evicted = layer.literal_of_attribute(rule, layer.schema().attribute_of(literal)))
            flip.evicted.push_back(*evicted);
    }
    return flip;
}

inline AndLayer apply_flip(const AndLayer& layer, const Flip& flip) {
    if (flip.rule >= layer.n_rules() || flip.literal >= layer.n_literals())
        throw std::invalid_argument("flip out of range");
    const bool set = layer.literal_set(flip.rule, flip.literal);
    if (flip.direction == FlipDirection::Add) {
        if (set) throw std::invalid_argument("Add flip targets an already-set literal");
        const auto current =
            layer.literal_of_attribute(flip.rule, layer.schema().attribute_of(flip.literal));
        std::vector<std::size_t> expected;
        if (current) expected.push_back(*current);
        if (flip.evicted != expected)
            throw std::invalid_argument("flip eviction list does not match layer state");
    } else {
        if (!set) throw std::invalid_argument("Remove flip targets a clear literal");
        if (!flip.evicted.empty())
            throw std::invalid_argument("Remove flip cannot evict literals");
    }

    AndLayer out(layer);
    BitVec& mask = out.rules_[flip.rule];
    for (auto e : flip.evicted) mask.reset(e);
    mask.set(flip.literal, flip.direction == FlipDirection::Add);
    return out;
}

// Human-readable DNF listing of the selected rules. The format parses
// back via parse_dnf.
inline std::string to_dnf(const RuleNetwork& network) {
    const auto& schema = network.and_layer.schema();
    std::ostringstream out;
    out << "# positive class: " << network.positive_class << "\n";
    out << "# default class: " << network.negative_class << "\n";
    out << "# selected rules: " << network.or_layer.count_selected() << " of "
        << network.or_layer.n_rules() << "\n";
    if (network.or_layer.count_selected() == 0) {
        out << "# no rules selected; every instance predicts the default class '"
            << network.negative_class << "'\n";
        return out.str();
    }
    for (std::size_t j = 0; j < network.and_layer.n_rules(); ++j) {
        if (!network.or_layer.selected(j)) continue;
        const auto literals = network.and_layer.rule_literals(j);
        if (literals.empty()) {
            out << "TRUE";
        } else {
            for (std::size_t k = 0; k < literals.size(); ++k) {
                if (k > 0) out << " AND ";
                const auto [attr, value] = schema.literal_name(literals[k]);
                out << attr << "=" << value;
            }
        }
        out << " => " << network.positive_class << "\n";
    }
    return out.str();
}

// Parse a to_dnf document back into a network over the given schema. The
// result has one rule per listed line, all selected; it predicts
// identically to the network that produced the document.
inline RuleNetwork parse_dnf(const std::string& text,
                             std::shared_ptr<const AttributeSchema> schema) {
    std::string positive, negative;
    std::vector<BitVec> rules;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string pos_key = "# positive class: ";
            const std::string neg_key = "# default class: ";
            if (line.rfind(pos_key, 0) == 0) positive = line.substr(pos_key.size());
            if (line.rfind(neg_key, 0) == 0) negative = line.substr(neg_key.size());
            continue;
        }
        const auto arrow = line.rfind(" => ");
        if (arrow == std::string::npos)
            throw std::invalid_argument("malformed rule line: " + line);
        const std::string body = line.substr(0, arrow);
        BitVec mask(schema->n_literals());
        if (body != "TRUE") {
            std::size_t start = 0;
            while (start <= body.size()) {
                auto stop = body.find(" AND ", start);
                const std::string token =
                    body.substr(start, stop == std::string::npos ? stop : stop - start);
                const auto eq = token.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("malformed literal: " + token);
                const std::string attr_name = token.substr(0, eq);
                const std::string value = token.substr(eq + 1);
                const auto attr = schema->find_attribute(attr_name);
                if (!attr) throw std::invalid_argument("unknown attribute: " + attr_name);
                const auto val = schema->find_value(*attr, value);
                if (!val)
                    throw std::invalid_argument("unknown value '" + value +
                                                "' for attribute " + attr_name);
                mask.set(schema->literal_index(*attr, *val));
                if (stop == std::string::npos) break;
                start = stop + 5;
            }
        }
        rules.push_back(std::move(mask));
    }
    const bool none_selected = rules.empty();
    if (none_selected) rules.emplace_back(schema->n_literals());
    const std::size_t n_rules = rules.size();
    AndLayer and_layer(schema, std::move(rules));
    return RuleNetwork(std::move(and_layer), OrLayer(n_rules, !none_selected), positive,
                       negative);
}

}  // namespace rulenet
