#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rulenet {

struct Attribute {
    std::string name;
    std::vector<std::string> values;
};

// Ordered nominal attributes and the bijection between (attribute, value)
// pairs and literal indices. Attribute and value order is fixed at
// construction and preserved through serialization.
class AttributeSchema {
public:
    AttributeSchema() = default;

    explicit AttributeSchema(std::vector<Attribute> attributes)
        : attributes_(std::move(attributes)) {
        offsets_.reserve(attributes_.size() + 1);
        offsets_.push_back(0);
        for (const auto& attr : attributes_) {
            if (attr.values.size() < 2)
                throw std::invalid_argument("attribute '" + attr.name +
                                            "' has fewer than 2 values");
            offsets_.push_back(offsets_.back() + attr.values.size());
        }
        attr_of_literal_.reserve(n_literals());
        for (std::size_t a = 0; a < attributes_.size(); ++a)
            attr_of_literal_.insert(attr_of_literal_.end(), attributes_[a].values.size(), a);
    }

    std::size_t n_attributes() const { return attributes_.size(); }
    std::size_t n_literals() const { return offsets_.empty() ? 0 : offsets_.back(); }
    const std::vector<Attribute>& attributes() const { return attributes_; }
    const Attribute& attribute(std::size_t a) const { return attributes_.at(a); }

    std::size_t literal_index(std::size_t attr, std::size_t value) const {
        return offsets_.at(attr) + value;
    }

    std::size_t attribute_of(std::size_t literal) const { return attr_of_literal_.at(literal); }

    // [first, last) literal range of one attribute.
    std::pair<std::size_t, std::size_t> attribute_span(std::size_t attr) const {
        return {offsets_.at(attr), offsets_.at(attr + 1)};
    }

    std::optional<std::size_t> find_attribute(const std::string& name) const {
        for (std::size_t a = 0; a < attributes_.size(); ++a)
            if (attributes_[a].name == name) return a;
        return std::nullopt;
    }

    std::optional<std::size_t> find_value(std::size_t attr, const std::string& value) const {
        const auto& vals = attributes_.at(attr).values;
        for (std::size_t v = 0; v < vals.size(); ++v)
            if (vals[v] == value) return v;
        return std::nullopt;
    }

    std::pair<std::string, std::string> literal_name(std::size_t literal) const {
        const std::size_t a = attribute_of(literal);
        return {attributes_[a].name, attributes_[a].values[literal - offsets_[a]]};
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json attrs = nlohmann::ordered_json::array();
        for (const auto& attr : attributes_)
            attrs.push_back({{"name", attr.name}, {"values", attr.values}});
        return attrs;
    }

    static AttributeSchema from_json(const nlohmann::json& j) {
        std::vector<Attribute> attrs;
        for (const auto& item : j) {
            Attribute a;
            a.name = item.at("name").get<std::string>();
            a.values = item.at("values").get<std::vector<std::string>>();
            attrs.push_back(std::move(a));
        }
        return AttributeSchema(std::move(attrs));
    }

    friend bool operator==(const AttributeSchema& a, const AttributeSchema& b) {
        if (a.attributes_.size() != b.attributes_.size()) return false;
        for (std::size_t i = 0; i < a.attributes_.size(); ++i)
            if (a.attributes_[i].name != b.attributes_[i].name ||
                a.attributes_[i].values != b.attributes_[i].values)
                return false;
        return true;
    }

private:
    std::vector<Attribute> attributes_;
    std::vector<std::size_t> offsets_;        // literal index of each attribute's first value
    std::vector<std::size_t> attr_of_literal_;
};

}  // namespace rulenet
