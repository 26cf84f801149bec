#include "phishcollect/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <utility>

namespace phishcollect::html {
namespace {

constexpr std::array kVoidElements = {"area", "base",  "br",     "col",   "embed",
                                      "hr",   "img",   "input",  "link",  "meta",
                                      "param", "source", "track", "wbr", "keygen"};

constexpr std::array kRawTextElements = {"script", "style",    "textarea", "title",
                                         "xmp",    "noembed",  "noframes", "iframe"};

template <std::size_t N>
bool contains(const std::array<const char*, N>& set, std::string_view v) {
    return std::find(set.begin(), set.end(), v) != set.end();
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

struct NamedEntity {
    std::string_view name;
    std::uint32_t codepoint;
};

constexpr std::array<NamedEntity, 12> kNamedEntities = {{
    {"amp", '&'},
    {"lt", '<'},
    {"gt", '>'},
    {"quot", '"'},
    {"apos", '\''},
    {"nbsp", 0xA0},
    {"copy", 0xA9},
    {"reg", 0xAE},
    {"trade", 0x2122},
    {"hellip", 0x2026},
    {"mdash", 0x2014},
    {"ndash", 0x2013},
}};

class TreeBuilder {
public:
    explicit TreeBuilder(std::vector<Node>& nodes) : nodes_(nodes) {
        nodes_.push_back(Node{NodeKind::Document, {}, {}, {}, 0, {}});
        open_.push_back(0);
    }

    void text(std::string_view raw) {
        if (raw.empty()) return;
        std::size_t parent = open_.back();
        auto& siblings = nodes_[parent].children;
        if (!siblings.empty() && nodes_[siblings.back()].kind == NodeKind::Text) {
            nodes_[siblings.back()].text += decode_entities(raw);
            return;
        }
        append(Node{NodeKind::Text, {}, {}, decode_entities(raw), parent, {}});
    }

    std::size_t start(std::string tag, std::vector<Attribute> attrs, bool self_closing) {
        std::size_t index = append(Node{NodeKind::Element, tag, std::move(attrs), {}, open_.back(), {}});
        if (!self_closing && !contains(kVoidElements, tag)) open_.push_back(index);
        return index;
    }

    void end(std::string_view tag) {
        for (std::size_t i = open_.size(); i-- > 1;) {
            if (nodes_[open_[i]].tag == tag) {
                open_.resize(i);
                return;
            }
        }
    }

    void raw(std::size_t index, std::string content) { nodes_[index].text = std::move(content); }
    void close_top() {
        if (open_.size() > 1) open_.pop_back();
    }

private:
    std::size_t append(Node n) {
        std::size_t index = nodes_.size();
        std::size_t parent = n.parent;
        nodes_.push_back(std::move(n));
        nodes_[parent].children.push_back(index);
        return index;
    }

    std::vector<Node>& nodes_;
    std::vector<std::size_t> open_;
};

std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from) {
    if (needle.size() > haystack.size()) return std::string_view::npos;
    for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (lower(haystack[i + j]) != needle[j]) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return std::string_view::npos;
}

}  // namespace

const std::string* Node::attr(std::string_view name) const {
    for (const auto& a : attributes) {
        if (a.name == name) return &a.value;
    }
    return nullptr;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out += text[i++];
            continue;
        }
        std::size_t semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out += text[i++];
            continue;
        }
        std::string_view body = text.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (body.size() > 1 && body[0] == '#') {
            std::uint32_t cp = 0;
            bool hex = body[1] == 'x' || body[1] == 'X';
            std::string_view digits = body.substr(hex ? 2 : 1);
            bool ok = !digits.empty();
            for (char c : digits) {
                int v = -1;
                if (c >= '0' && c <= '9') v = c - '0';
                else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
                else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
                if (v < 0) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
                if (cp > 0x10FFFF) cp = 0x110000;
            }
            if (ok) {
                append_utf8(out, cp);
                decoded = true;
            }
        } else {
            for (const auto& e : kNamedEntities) {
                if (e.name == body) {
                    append_utf8(out, e.codepoint);
                    decoded = true;
                    break;
                }
            }
        }
        if (decoded) {
            i = semi + 1;
        } else {
            out += text[i++];
        }
    }
    return out;
}

std::vector<std::string> split_tokens(std::string_view value) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < value.size()) {
        while (i < value.size() && is_ws(value[i])) ++i;
        std::size_t start = i;
        while (i < value.size() && !is_ws(value[i])) ++i;
        if (i > start) tokens.push_back(to_lower(value.substr(start, i - start)));
    }
    return tokens;
}

Document::Document(std::string_view html) {
    TreeBuilder builder(nodes_);
    std::size_t pos = 0;
    const std::size_t n = html.size();
    std::size_t text_start = 0;

    auto flush_text = [&](std::size_t end) {
        if (end > text_start) builder.text(html.substr(text_start, end - text_start));
    };

    while (pos < n) {
        if (html[pos] != '<' || pos + 1 >= n) {
            ++pos;
            continue;
        }
        char next = html[pos + 1];
        if (html.compare(pos, 4, "<!--") == 0) {
            flush_text(pos);
            auto close = html.find("-->", pos + 4);
            pos = close == std::string_view::npos ? n : close + 3;
            text_start = pos;
        } else if (next == '!' || next == '?') {
            flush_text(pos);
            auto close = html.find('>', pos + 2);
            pos = close == std::string_view::npos ? n : close + 1;
            text_start = pos;
        } else if (next == '/' && pos + 2 < n && is_alpha(html[pos + 2])) {
            flush_text(pos);
            std::size_t name_start = pos + 2;
            std::size_t i = name_start;
            while (i < n && !is_ws(html[i]) && html[i] != '>' && html[i] != '/') ++i;
            builder.end(to_lower(html.substr(name_start, i - name_start)));
            auto close = html.find('>', i);
            pos = close == std::string_view::npos ? n : close + 1;
            text_start = pos;
        } else if (is_alpha(next)) {
            flush_text(pos);
            std::size_t i = pos + 1;
            while (i < n && !is_ws(html[i]) && html[i] != '>' && html[i] != '/') ++i;
            std::string tag = to_lower(html.substr(pos + 1, i - pos - 1));
            std::vector<Attribute> attrs;
            bool self_closing = false;
            while (i < n) {
                while (i < n && is_ws(html[i])) ++i;
                if (i >= n) break;
                if (html[i] == '>') {
                    ++i;
                    break;
                }
                if (html[i] == '/') {
                    self_closing = i + 1 < n && html[i + 1] == '>';
                    ++i;
                    continue;
                }
                std::size_t an = i;
                while (i < n && !is_ws(html[i]) && html[i] != '>' && html[i] != '/' &&
                       (html[i] != '=' || i == an)) {
                    ++i;
                }
                std::string name = to_lower(html.substr(an, i - an));
                std::string value;
                std::size_t j = i;
                while (j < n && is_ws(html[j])) ++j;
                if (j < n && html[j] == '=') {
                    ++j;
                    while (j < n && is_ws(html[j])) ++j;
                    if (j < n && (html[j] == '"' || html[j] == '\'')) {
                        char quote = html[j];
                        auto close = html.find(quote, j + 1);
                        if (close == std::string_view::npos) close = n;
                        value = decode_entities(html.substr(j + 1, close - j - 1));
                        i = close < n ? close + 1 : n;
                    } else {
                        std::size_t vs = j;
                        while (j < n && !is_ws(html[j]) && html[j] != '>') ++j;
                        value = decode_entities(html.substr(vs, j - vs));
                        i = j;
                    }
                }
                self_closing = false;
                if (!name.empty()) attrs.push_back({std::move(name), std::move(value)});
            }
            pos = i;
            // "<script src=x />" still opens a raw-text element in browsers.
            const bool raw_text = contains(kRawTextElements, tag);
            std::size_t index = builder.start(tag, std::move(attrs), raw_text ? false : self_closing);
            if (raw_text) {
                std::string closing = "</" + tag;
                std::size_t end = pos;
                while (true) {
                    end = find_ci(html, closing, end);
                    if (end == std::string_view::npos) break;
                    std::size_t after = end + closing.size();
                    if (after >= n || is_ws(html[after]) || html[after] == '>' || html[after] == '/') break;
                    end = after;
                }
                std::size_t content_end = end == std::string_view::npos ? n : end;
                std::string content(html.substr(pos, content_end - pos));
                if (tag == "textarea" || tag == "title") content = decode_entities(content);
                builder.raw(index, std::move(content));
                builder.close_top();
                if (end == std::string_view::npos) {
                    pos = n;
                } else {
                    auto close = html.find('>', end);
                    pos = close == std::string_view::npos ? n : close + 1;
                }
            }
            text_start = pos;
        } else {
            ++pos;
        }
    }
    flush_text(n);
}

std::vector<std::size_t> Document::elements(std::string_view tag) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].kind == NodeKind::Element && nodes_[i].tag == tag) out.push_back(i);
    }
    return out;
}

std::string Document::text_content(std::size_t index) const {
    const Node& n = nodes_[index];
    if (n.kind == NodeKind::Text) return n.text;
    std::string out = n.text;
    for (std::size_t child : n.children) out += text_content(child);
    return out;
}

}  // namespace phishcollect::html
