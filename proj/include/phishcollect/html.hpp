#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phishcollect::html {

struct Attribute {
    std::string name;   // lowercased
    std::string value;  // entity-decoded
};

enum class NodeKind { Document, Element, Text };

struct Node {
    NodeKind kind = NodeKind::Element;
    std::string tag;  // lowercased; empty for text and document nodes
    std::vector<Attribute> attributes;
    std::string text;  // text nodes; raw content for script/style/textarea/title
    std::size_t parent = 0;
    std::vector<std::size_t> children;

    /// First attribute with this (lowercase) name; duplicates after the first
    /// are kept in `attributes` but ignored here, like a browser.
    const std::string* attr(std::string_view name) const;
    bool has_attr(std::string_view name) const { return attr(name) != nullptr; }
};

/// A lenient DOM built by an error-tolerant tokenizer: unclosed tags stay
/// open until end of input, stray end tags are dropped, void elements never
/// take children, and script/style bodies are raw text.
class Document {
public:
    explicit Document(std::string_view html);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(std::size_t index) const { return nodes_[index]; }

    /// Indices of every element with this tag, in document order.
    std::vector<std::size_t> elements(std::string_view tag) const;

    /// Concatenated text of all descendant text nodes.
    std::string text_content(std::size_t index) const;

    template <typename Fn>
    void for_each_element(Fn&& fn) const {
        for (const Node& n : nodes_) {
            if (n.kind == NodeKind::Element) fn(n);
        }
    }

private:
    std::vector<Node> nodes_;
};

std::string decode_entities(std::string_view text);

/// Whitespace-separated tokens of an attribute such as rel, lowercased.
std::vector<std::string> split_tokens(std::string_view value);

}  // namespace phishcollect::html
