#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace phishcollect::url {

/// A URI reference split into its five RFC 3986 components. Optional
/// components distinguish "absent" from "present but empty" ("http://a/?"
/// has an empty query, "http://a/" has none).
struct Uri {
    std::optional<std::string> scheme;
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    bool is_absolute() const { return scheme.has_value(); }
    std::string to_string() const;

    friend bool operator==(const Uri&, const Uri&) = default;
};

struct Authority {
    std::string userinfo;
    std::string host;
    std::string port;  // digits only, empty when absent
};

/// Splits a reference into components. Never fails: anything without a valid
/// scheme prefix is a relative reference.
Uri parse(std::string_view reference);

/// Strict reference resolution (RFC 3986 section 5.2.2, non-strict mode off).
Uri resolve(const Uri& base, const Uri& reference);
std::string resolve(std::string_view base, std::string_view reference);

std::string remove_dot_segments(std::string_view path);

Authority split_authority(std::string_view authority);

/// Trims surrounding whitespace, drops embedded tab/CR/LF and percent-encodes
/// bytes that may not appear in a URI (spaces, quotes, non-ASCII). Existing
/// percent-escapes are kept.
std::string clean_reference(std::string_view raw);

/// True for an absolute http or https URL with a non-empty host.
bool is_http_url(std::string_view text);

/// Resolves an HTML attribute value against an absolute http(s) base.
/// Returns nullopt for references that do not name a fetchable resource
/// (javascript:, data:, mailto:, empty after trimming, non-http result).
std::optional<std::string> try_resolve_url(std::string_view base, std::string_view reference);

/// As try_resolve_url but throws Error{UnresolvableReference}.
std::string resolve_url(std::string_view base, std::string_view reference);

/// Dedupe key: scheme and host lowercased, default port dropped, fragment
/// dropped, empty path becomes "/". Path and query are kept verbatim.
std::string normalize_for_dedupe(std::string_view http_url);

/// Lowercased host of an absolute URL; empty when the URL has no authority.
std::string host_of(std::string_view absolute_url);

/// Explicit port of an absolute URL, if one is written.
std::optional<int> port_of(std::string_view absolute_url);

/// Dotted/hex/octal/integer IPv4 forms and bracketed IPv6 literals.
bool is_ip_literal(std::string_view host);

/// Registered domain ("eTLD+1") using a built-in list of common multi-label
/// public suffixes. IP literals are returned unchanged.
std::string registrable_domain(std::string_view host);

/// True when both URLs' hosts share a registrable domain.
bool same_site(std::string_view url_a, std::string_view url_b);

}  // namespace phishcollect::url
