#include "phishcollect/extract.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "phishcollect/url.hpp"

namespace phishcollect::extract {
namespace {

constexpr std::array kIconRels = {
    "icon",     "apple-touch-icon",      "apple-touch-icon-precomposed", "mask-icon",
    "fluid-icon", "manifest",            "yandex-tableau-widget",
};

bool has_token(std::string_view value, std::string_view token) {
    auto tokens = html::split_tokens(value);
    return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

}  // namespace

bool is_icon_rel(std::string_view rel) {
    for (const auto& token : html::split_tokens(rel)) {
        if (std::find(kIconRels.begin(), kIconRels.end(), token) != kIconRels.end()) return true;
    }
    return false;
}

std::string effective_base(const html::Document& doc, std::string_view fetched_url) {
    for (std::size_t i : doc.elements("base")) {
        if (const std::string* href = doc.node(i).attr("href")) {
            if (auto resolved = url::try_resolve_url(fetched_url, *href)) return *resolved;
        }
    }
    return std::string(fetched_url);
}

Scripts extract_scripts(const html::Document& doc, std::string_view base_url) {
    const std::string base = effective_base(doc, base_url);
    Scripts out;
    for (std::size_t i : doc.elements("script")) {
        const html::Node& n = doc.node(i);
        if (const std::string* src = n.attr("src")) {
            if (auto resolved = url::try_resolve_url(base, *src)) {
                out.external_urls.push_back(std::move(*resolved));
            } else {
                ++out.skipped;
            }
        } else {
            out.inline_blocks.push_back(n.text);
        }
    }
    return out;
}

Styles extract_styles(const html::Document& doc, std::string_view base_url) {
    const std::string base = effective_base(doc, base_url);
    Styles out;
    for (const html::Node& n : doc.nodes()) {
        if (n.kind != html::NodeKind::Element) continue;
        if (const std::string* style = n.attr("style")) out.inline_decls.push_back({n.tag, *style});
        if (n.tag == "style") {
            out.internal_blocks.push_back(n.text);
        } else if (n.tag == "link") {
            const std::string* rel = n.attr("rel");
            const std::string* href = n.attr("href");
            if (rel && href && has_token(*rel, "stylesheet")) {
                if (auto resolved = url::try_resolve_url(base, *href)) {
                    out.external_urls.push_back(std::move(*resolved));
                } else {
                    ++out.skipped;
                }
            }
        }
    }
    return out;
}

Favicons extract_favicon_urls(const html::Document& doc, std::string_view base_url) {
    const std::string base = effective_base(doc, base_url);
    Favicons out;
    std::unordered_set<std::string> seen;
    for (std::size_t i : doc.elements("link")) {
        const html::Node& n = doc.node(i);
        const std::string* rel = n.attr("rel");
        const std::string* href = n.attr("href");
        if (!rel || !href || !is_icon_rel(*rel)) continue;
        if (auto resolved = url::try_resolve_url(base, *href)) {
            if (seen.insert(*resolved).second) out.urls.push_back(std::move(*resolved));
        }
    }
    if (out.urls.empty()) {
        if (auto fallback = url::try_resolve_url(base, "/favicon.ico")) {
            out.urls.push_back(std::move(*fallback));
            out.fallback = true;
        }
    }
    return out;
}

Images extract_image_urls(const html::Document& doc, std::string_view base_url) {
    const std::string base = effective_base(doc, base_url);
    Images out;
    std::unordered_set<std::string> seen;
    for (std::size_t i : doc.elements("img")) {
        const std::string* src = doc.node(i).attr("src");
        if (!src) continue;
        auto resolved = url::try_resolve_url(base, *src);
        if (!resolved) {
            ++out.skipped;
            continue;
        }
        if (seen.insert(*resolved).second) out.urls.push_back(std::move(*resolved));
    }
    return out;
}

Scripts extract_scripts(std::string_view html, std::string_view base) {
    return extract_scripts(html::Document(html), base);
}
Styles extract_styles(std::string_view html, std::string_view base) {
    return extract_styles(html::Document(html), base);
}
Favicons extract_favicon_urls(std::string_view html, std::string_view base) {
    return extract_favicon_urls(html::Document(html), base);
}
Images extract_image_urls(std::string_view html, std::string_view base) {
    return extract_image_urls(html::Document(html), base);
}

DiscoveredResources discover(const html::Document& doc, std::string_view fetched_url) {
    DiscoveredResources r;
    Scripts scripts = extract_scripts(doc, fetched_url);
    Styles styles = extract_styles(doc, fetched_url);
    Favicons icons = extract_favicon_urls(doc, fetched_url);
    Images images = extract_image_urls(doc, fetched_url);
    r.inline_scripts = std::move(scripts.inline_blocks);
    r.external_script_urls = std::move(scripts.external_urls);
    r.inline_style_decls = std::move(styles.inline_decls);
    r.internal_style_blocks = std::move(styles.internal_blocks);
    r.external_stylesheet_urls = std::move(styles.external_urls);
    r.favicon_urls = std::move(icons.urls);
    r.favicon_fallback = icons.fallback;
    r.image_urls = std::move(images.urls);
    r.skipped_references = scripts.skipped + styles.skipped + images.skipped;
    return r;
}

DiscoveredResources discover(std::string_view html, std::string_view fetched_url) {
    return discover(html::Document(html), fetched_url);
}

}  // namespace phishcollect::extract
