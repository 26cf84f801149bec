#include "phishcollect/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "phishcollect/error.hpp"

namespace phishcollect::url {
namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    });
}

std::string merge(const Uri& base, const std::string& ref_path) {
    if (base.authority && base.path.empty()) return "/" + ref_path;
    auto slash = base.path.rfind('/');
    if (slash == std::string::npos) return ref_path;
    return base.path.substr(0, slash + 1) + ref_path;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool numeric_ipv4_part(std::string_view part) {
    if (part.empty()) return false;
    if (part.size() > 2 && part[0] == '0' && (part[1] == 'x' || part[1] == 'X')) {
        return std::all_of(part.begin() + 2, part.end(),
                           [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
    }
    if (part == "0x" || part == "0X") return true;
    return all_digits(part);
}

// Public suffixes with more than one label that are common enough in
// phishing feeds to matter for the same-site checks.
constexpr std::array kMultiLabelSuffixes = {
    "ac.in",      "ac.jp",          "ac.uk",         "co.id",          "co.in",
    "co.jp",      "co.kr",          "co.nz",         "co.th",          "co.uk",
    "co.za",      "com.ar",         "com.au",        "com.br",         "com.cn",
    "com.co",     "com.hk",         "com.mx",        "com.my",         "com.ng",
    "com.pk",     "com.sg",         "com.tr",        "com.tw",         "com.ua",
    "com.vn",     "edu.au",         "gov.au",        "gov.uk",         "ltd.uk",
    "ne.jp",      "net.au",         "net.br",        "net.cn",         "or.jp",
    "org.au",     "org.br",         "org.cn",        "org.uk",         "plc.uk",
    "000webhostapp.com", "appspot.com", "azurewebsites.net", "blogspot.com",
    "firebaseapp.com",   "github.io",   "glitch.me",         "herokuapp.com",
    "netlify.app",       "pages.dev",   "vercel.app",        "web.app",
    "weebly.com",        "wixsite.com",
};

bool is_multi_label_suffix(std::string_view s) {
    return std::find(kMultiLabelSuffixes.begin(), kMultiLabelSuffixes.end(), s) !=
           kMultiLabelSuffixes.end();
}

}  // namespace

std::string Uri::to_string() const {
    std::string out;
    if (scheme) out += *scheme + ":";
    if (authority) out += "//" + *authority;
    out += path;
    if (query) out += "?" + *query;
    if (fragment) out += "#" + *fragment;
    return out;
}

Uri parse(std::string_view ref) {
    Uri u;
    auto delim = ref.find_first_of(":/?#");
    if (delim != std::string_view::npos && ref[delim] == ':' && valid_scheme(ref.substr(0, delim))) {
        u.scheme = to_lower(ref.substr(0, delim));
        ref.remove_prefix(delim + 1);
    }
    if (ref.starts_with("//")) {
        ref.remove_prefix(2);
        auto end = ref.find_first_of("/?#");
        u.authority = std::string(ref.substr(0, end));
        ref.remove_prefix(end == std::string_view::npos ? ref.size() : end);
    }
    auto hash = ref.find('#');
    if (hash != std::string_view::npos) {
        u.fragment = std::string(ref.substr(hash + 1));
        ref = ref.substr(0, hash);
    }
    auto q = ref.find('?');
    if (q != std::string_view::npos) {
        u.query = std::string(ref.substr(q + 1));
        ref = ref.substr(0, q);
    }
    u.path = std::string(ref);
    return u;
}

std::string remove_dot_segments(std::string_view input) {
    std::string in(input);
    std::string out;
    while (!in.empty()) {
        if (in.starts_with("../")) {
            in.erase(0, 3);
        } else if (in.starts_with("./")) {
            in.erase(0, 2);
        } else if (in.starts_with("/./")) {
            in.erase(0, 2);
        } else if (in == "/.") {
            in = "/";
        } else if (in.starts_with("/../") || in == "/..") {
            in = in.size() == 3 ? std::string("/") : in.substr(3);
            auto slash = out.rfind('/');
            out.erase(slash == std::string::npos ? 0 : slash);
        } else if (in == "." || in == "..") {
            in.clear();
        } else {
            auto next = in.find('/', in.front() == '/' ? 1 : 0);
            if (next == std::string::npos) next = in.size();
            out += in.substr(0, next);
            in.erase(0, next);
        }
    }
    return out;
}

Uri resolve(const Uri& base, const Uri& ref) {
    Uri t;
    if (ref.scheme) {
        t.scheme = ref.scheme;
        t.authority = ref.authority;
        t.path = remove_dot_segments(ref.path);
        t.query = ref.query;
    } else {
        if (ref.authority) {
            t.authority = ref.authority;
            t.path = remove_dot_segments(ref.path);
            t.query = ref.query;
        } else {
            if (ref.path.empty()) {
                t.path = base.path;
                t.query = ref.query ? ref.query : base.query;
            } else {
                if (ref.path.front() == '/') {
                    t.path = remove_dot_segments(ref.path);
                } else {
                    t.path = remove_dot_segments(merge(base, ref.path));
                }
                t.query = ref.query;
            }
            t.authority = base.authority;
        }
        t.scheme = base.scheme;
    }
    t.fragment = ref.fragment;
    return t;
}

std::string resolve(std::string_view base, std::string_view reference) {
    return resolve(parse(base), parse(reference)).to_string();
}

Authority split_authority(std::string_view authority) {
    Authority a;
    auto at = authority.rfind('@');
    if (at != std::string_view::npos) {
        a.userinfo = std::string(authority.substr(0, at));
        authority.remove_prefix(at + 1);
    }
    std::string_view host = authority;
    std::string_view rest;
    if (authority.starts_with('[')) {
        auto close = authority.find(']');
        if (close != std::string_view::npos) {
            host = authority.substr(0, close + 1);
            rest = authority.substr(close + 1);
        }
    } else {
        auto colon = authority.rfind(':');
        if (colon != std::string_view::npos) {
            host = authority.substr(0, colon);
            rest = authority.substr(colon);
        }
    }
    a.host = std::string(host);
    if (rest.starts_with(':')) a.port = std::string(rest.substr(1));
    return a;
}

std::string clean_reference(std::string_view raw) {
    while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
    while (!raw.empty() && is_space(raw.back())) raw.remove_suffix(1);
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (char ch : raw) {
        auto c = static_cast<unsigned char>(ch);
        if (c == '\t' || c == '\n' || c == '\r') continue;
        bool encode = c <= 0x20 || c >= 0x7f || c == '"' || c == '<' || c == '>' || c == '\\' ||
                      c == '^' || c == '`' || c == '{' || c == '|' || c == '}';
        if (encode) {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xf];
        } else {
            out += ch;
        }
    }
    return out;
}

bool is_http_url(std::string_view text) {
    if (text.empty()) return false;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (c <= 0x20 || c >= 0x7f) return false;
    }
    Uri u = parse(text);
    if (!u.scheme || (*u.scheme != "http" && *u.scheme != "https")) return false;
    if (!u.authority) return false;
    Authority a = split_authority(*u.authority);
    if (a.host.empty()) return false;
    if (!a.port.empty() && !all_digits(a.port)) return false;
    return true;
}

std::optional<std::string> try_resolve_url(std::string_view base, std::string_view reference) {
    std::string cleaned = clean_reference(reference);
    if (cleaned.empty()) return std::nullopt;
    Uri ref = parse(cleaned);
    if (ref.scheme && *ref.scheme != "http" && *ref.scheme != "https") return std::nullopt;
    std::string out = resolve(parse(base), ref).to_string();
    if (!is_http_url(out)) return std::nullopt;
    return out;
}

std::string resolve_url(std::string_view base, std::string_view reference) {
    auto out = try_resolve_url(base, reference);
    if (!out) throw Error(Errc::UnresolvableReference, std::string(reference));
    return *out;
}

std::string normalize_for_dedupe(std::string_view http_url) {
    Uri u = parse(http_url);
    u.fragment.reset();
    if (u.authority) {
        Authority a = split_authority(*u.authority);
        std::string host = to_lower(a.host);
        bool default_port = a.port.empty() || (u.scheme == "http" && a.port == "80") ||
                            (u.scheme == "https" && a.port == "443");
        std::string rebuilt = a.userinfo.empty() ? "" : a.userinfo + "@";
        rebuilt += host;
        if (!default_port) rebuilt += ":" + a.port;
        u.authority = rebuilt;
        if (u.path.empty()) u.path = "/";
    }
    return u.to_string();
}

std::string host_of(std::string_view absolute_url) {
    Uri u = parse(absolute_url);
    if (!u.authority) return {};
    return to_lower(split_authority(*u.authority).host);
}

std::optional<int> port_of(std::string_view absolute_url) {
    Uri u = parse(absolute_url);
    if (!u.authority) return std::nullopt;
    auto port = split_authority(*u.authority).port;
    if (!all_digits(port) || port.size() > 5) return std::nullopt;
    return std::stoi(port);
}

bool is_ip_literal(std::string_view host) {
    if (host.starts_with('[')) return true;
    if (host.ends_with('.')) host.remove_suffix(1);
    if (host.empty()) return false;
    int parts = 0;
    while (true) {
        auto dot = host.find('.');
        if (!numeric_ipv4_part(host.substr(0, dot))) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        host.remove_prefix(dot + 1);
    }
    return parts <= 4;
}

std::string registrable_domain(std::string_view host_in) {
    std::string host = to_lower(host_in);
    if (host.ends_with('.')) host.pop_back();
    if (host.empty() || is_ip_literal(host)) return host;
    auto last = host.rfind('.');
    if (last == std::string::npos) return host;
    auto second = host.rfind('.', last - 1);
    if (second == std::string::npos || last == 0) return host;
    std::string_view two(host.c_str() + second + 1);
    if (!is_multi_label_suffix(two)) return std::string(two);
    auto third = second == 0 ? std::string::npos : host.rfind('.', second - 1);
    return third == std::string::npos ? host : host.substr(third + 1);
}

bool same_site(std::string_view url_a, std::string_view url_b) {
    auto a = registrable_domain(host_of(url_a));
    auto b = registrable_domain(host_of(url_b));
    return !a.empty() && a == b;
}

}  // namespace phishcollect::url
