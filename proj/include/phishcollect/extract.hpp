#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "phishcollect/html.hpp"

namespace phishcollect::extract {

struct InlineStyle {
    std::string context;      // tag name carrying the style attribute
    std::string declaration;  // attribute value

    friend bool operator==(const InlineStyle&, const InlineStyle&) = default;
};

struct Scripts {
    std::vector<std::string> inline_blocks;
    std::vector<std::string> external_urls;
    std::size_t skipped = 0;
};

struct Styles {
    std::vector<InlineStyle> inline_decls;
    std::vector<std::string> internal_blocks;
    std::vector<std::string> external_urls;
    std::size_t skipped = 0;
};

struct Favicons {
    std::vector<std::string> urls;
    bool fallback = false;  // only the conventional /favicon.ico
};

struct Images {
    std::vector<std::string> urls;
    std::size_t skipped = 0;  // data: URIs and other unresolvable sources
};

/// Every resource a landing page references, with all URLs absolute and in
/// document order.
struct DiscoveredResources {
    std::vector<std::string> inline_scripts;
    std::vector<std::string> external_script_urls;
    std::vector<InlineStyle> inline_style_decls;
    std::vector<std::string> internal_style_blocks;
    std::vector<std::string> external_stylesheet_urls;
    std::vector<std::string> favicon_urls;
    std::vector<std::string> image_urls;
    bool favicon_fallback = false;
    std::size_t skipped_references = 0;
};

/// The base all references resolve against: the first <base href> that
/// resolves to an http(s) URL, else `fetched_url`.
std::string effective_base(const html::Document& doc, std::string_view fetched_url);

Scripts extract_scripts(const html::Document& doc, std::string_view base);
Styles extract_styles(const html::Document& doc, std::string_view base);
Favicons extract_favicon_urls(const html::Document& doc, std::string_view base);
Images extract_image_urls(const html::Document& doc, std::string_view base);

Scripts extract_scripts(std::string_view html, std::string_view base);
Styles extract_styles(std::string_view html, std::string_view base);
Favicons extract_favicon_urls(std::string_view html, std::string_view base);
Images extract_image_urls(std::string_view html, std::string_view base);

DiscoveredResources discover(const html::Document& doc, std::string_view fetched_url);
DiscoveredResources discover(std::string_view html, std::string_view fetched_url);

/// True when a link's rel attribute names an icon-like resource
/// (icon, apple-touch-icon, mask-icon, fluid-icon, manifest, ...).
bool is_icon_rel(std::string_view rel);

}  // namespace phishcollect::extract
