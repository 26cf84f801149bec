#include "phishcollect/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "phishcollect/error.hpp"
#include "phishcollect/html.hpp"
#include "phishcollect/store.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect::features {
namespace {

using json = nlohmann::json;

// Threshold tables. Fractions are of "suspicious" items among all items of
// that kind on the page; a page with none of them is legitimate.
constexpr std::size_t kUrlLengthLegit = 54;     // length < 54 -> 1
constexpr std::size_t kUrlLengthSuspect = 75;   // 54..75 -> 0, longer -> -1
constexpr double kAnchorLow = 0.317, kAnchorHigh = 0.67;
constexpr double kRequestLow = 0.22, kRequestHigh = 0.61;
constexpr double kLinksLow = 0.17, kLinksHigh = 0.81;
constexpr int kDomainAgeDays = 183;          // six months
constexpr int kRegistrationDays = 365;       // one year
constexpr int kCertAgeDays = 365;
constexpr long kTrafficRankCutoff = 100'000;
constexpr double kPageRankCutoff = 0.2;

constexpr std::array kShorteners = {
    "bit.ly",  "bitly.com", "goo.gl",     "tinyurl.com", "ow.ly",    "t.co",       "is.gd",
    "buff.ly", "adf.ly",    "cutt.ly",    "rebrand.ly",  "shorturl.at", "tiny.cc", "rb.gy",
    "x.co",    "lnkd.in",   "db.tt",      "qr.ae",       "bit.do",   "t.ly",       "v.gd",
    "s.id",    "tr.im",     "cli.gs",     "po.st",       "u.to",     "j.mp",       "soo.gd",
    "shorte.st", "tinyurl.at", "clck.ru", "2.gy",        "shrtco.de", "surl.li",
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return std::string(s);
}

Ternary by_fraction(std::size_t suspicious, std::size_t total, double low, double high) {
    if (total == 0) return 1;
    double f = static_cast<double>(suspicious) / static_cast<double>(total);
    if (f < low) return 1;
    if (f <= high) return 0;
    return -1;
}

std::size_t count_labels(std::string_view host) {
    if (host.empty()) return 0;
    return static_cast<std::size_t>(std::count(host.begin(), host.end(), '.')) + 1;
}

bool cross_site(std::string_view resource_url, std::string_view page_url) {
    return !url::same_site(resource_url, page_url);
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

IntelligenceReport report_from_json(const json& j) {
    IntelligenceReport r;
    read_optional(j, "domain_age_days", r.domain_age_days);
    read_optional(j, "registration_remaining_days", r.registration_remaining_days);
    read_optional(j, "has_dns_record", r.has_dns_record);
    read_optional(j, "traffic_rank", r.traffic_rank);
    read_optional(j, "page_rank_score", r.page_rank_score);
    read_optional(j, "indexed_by_search", r.indexed_by_search);
    read_optional(j, "inbound_link_count", r.inbound_link_count);
    read_optional(j, "on_blacklist", r.on_blacklist);
    read_optional(j, "cert_issuer_trusted", r.cert_issuer_trusted);
    read_optional(j, "cert_age_days", r.cert_age_days);
    return r;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

struct JsonFileProvider::Data {
    std::unordered_map<std::string, IntelligenceReport> samples;
    std::unordered_map<std::string, IntelligenceReport> domains;
};

std::optional<Feature> feature_by_name(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (kFeatureNames[i] == name) return static_cast<Feature>(i);
    }
    return std::nullopt;
}

void PartialVector::set(Feature f, Ternary value) {
    if (value < -1 || value > 1) {
        throw Error(Errc::InvalidArgument, std::string(name_of(f)) + " value out of range");
    }
    auto& slot = values_[static_cast<std::size_t>(f)];
    if (slot) throw Error(Errc::InvalidArgument, std::string(name_of(f)) + " assigned twice");
    slot = value;
}

std::size_t PartialVector::assigned() const {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

JsonFileProvider::JsonFileProvider(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    *this = from_string(ss.str());
}

JsonFileProvider JsonFileProvider::from_string(std::string_view json_text) {
    auto data = std::make_shared<Data>();
    try {
        json j = json::parse(json_text);
        if (j.contains("samples")) {
            for (const auto& [id, v] : j["samples"].items()) data->samples[id] = report_from_json(v);
        }
        if (j.contains("domains")) {
            for (const auto& [domain, v] : j["domains"].items()) data->domains[lower(domain)] = report_from_json(v);
        }
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("intelligence file: ") + e.what());
    }
    JsonFileProvider p;
    p.data_ = std::move(data);
    return p;
}

IntelligenceReport JsonFileProvider::lookup(const UrlRecord& record) const {
    if (!data_) return {};
    if (auto it = data_->samples.find(record.sample_id); it != data_->samples.end()) return it->second;
    auto domain = url::registrable_domain(url::host_of(record.url));
    if (auto it = data_->domains.find(domain); it != data_->domains.end()) return it->second;
    return {};
}

PartialVector url_features(std::string_view u) {
    PartialVector v;
    const std::string host = url::host_of(u);
    const bool ip = url::is_ip_literal(host);
    const std::string site = url::registrable_domain(host);

    v.set(Feature::HavingIpAddress, ip ? -1 : 1);

    v.set(Feature::UrlLength, u.size() < kUrlLengthLegit ? 1 : (u.size() <= kUrlLengthSuspect ? 0 : -1));

    bool shortener = std::find(kShorteners.begin(), kShorteners.end(), site) != kShorteners.end() ||
                     std::find(kShorteners.begin(), kShorteners.end(), host) != kShorteners.end();
    v.set(Feature::ShortiningService, shortener ? -1 : 1);

    v.set(Feature::HavingAtSymbol, u.find('@') != std::string_view::npos ? -1 : 1);

    // "//" belongs at index 5 (http://) or 6 (https://); later means an
    // embedded redirect.
    auto last_double_slash = u.rfind("//");
    v.set(Feature::DoubleSlashRedirecting,
          last_double_slash != std::string_view::npos && last_double_slash > 6 ? -1 : 1);

    v.set(Feature::PrefixSuffix, !ip && site.find('-') != std::string::npos ? -1 : 1);

    if (ip) {
        v.set(Feature::HavingSubDomain, -1);
    } else {
        std::string_view h = host;
        if (h.starts_with("www.")) h.remove_prefix(4);
        std::size_t sub = count_labels(h) - std::min(count_labels(h), count_labels(site));
        v.set(Feature::HavingSubDomain, sub == 0 ? 1 : (sub == 1 ? 0 : -1));
    }

    auto port = url::port_of(u);
    auto scheme = url::parse(u).scheme.value_or("");
    bool default_port = !port || (scheme == "http" && *port == 80) || (scheme == "https" && *port == 443);
    v.set(Feature::Port, default_port ? 1 : -1);

    v.set(Feature::HttpsToken, host.find("https") != std::string::npos ? -1 : 1);
    return v;
}

PartialVector content_features(std::string_view page, std::string_view final_url,
                               const extract::DiscoveredResources& resources, const PageExtras& extras) {
    PartialVector v;
    html::Document doc(page);
    const std::string base = extract::effective_base(doc, final_url);

    // Favicon: any declared icon served from another site.
    bool foreign_icon = false;
    if (!resources.favicon_fallback) {
        for (const auto& icon : resources.favicon_urls) foreign_icon |= cross_site(icon, final_url);
    }
    v.set(Feature::Favicon, foreign_icon ? -1 : 1);

    // Request_URL: embedded media (img plus audio/video/source/embed).
    std::vector<std::string> objects = resources.image_urls;
    for (const char* tag : {"video", "audio", "source", "embed"}) {
        for (std::size_t i : doc.elements(tag)) {
            if (const std::string* src = doc.node(i).attr("src")) {
                if (auto r = url::try_resolve_url(base, *src)) objects.push_back(*r);
            }
        }
    }
    std::size_t foreign_objects = std::count_if(objects.begin(), objects.end(),
                                                [&](const std::string& o) { return cross_site(o, final_url); });
    v.set(Feature::RequestUrl, by_fraction(foreign_objects, objects.size(), kRequestLow, kRequestHigh));

    // URL_of_Anchor: anchors that go nowhere ("#", "#content",
    // "javascript:void(0)", no href) or leave the site.
    std::size_t anchors = 0, unsafe_anchors = 0;
    for (std::size_t i : doc.elements("a")) {
        ++anchors;
        const std::string* href = doc.node(i).attr("href");
        if (!href) {
            ++unsafe_anchors;
            continue;
        }
        std::string h = lower(trim(*href));
        if (h.empty() || h.starts_with('#') || h.starts_with("javascript:")) {
            ++unsafe_anchors;
            continue;
        }
        if (auto r = url::try_resolve_url(base, *href); r && cross_site(*r, final_url)) ++unsafe_anchors;
    }
    v.set(Feature::UrlOfAnchor, by_fraction(unsafe_anchors, anchors, kAnchorLow, kAnchorHigh));

    // Links_in_tags: scripts, stylesheets and declared icons.
    std::vector<std::string> links = resources.external_script_urls;
    links.insert(links.end(), resources.external_stylesheet_urls.begin(), resources.external_stylesheet_urls.end());
    if (!resources.favicon_fallback) {
        links.insert(links.end(), resources.favicon_urls.begin(), resources.favicon_urls.end());
    }
    std::size_t foreign_links = std::count_if(links.begin(), links.end(),
                                              [&](const std::string& l) { return cross_site(l, final_url); });
    v.set(Feature::LinksInTags, by_fraction(foreign_links, links.size(), kLinksLow, kLinksHigh));

    // SFH and Submitting_to_email, worst form wins.
    Ternary sfh = 1;
    bool mails = false;
    for (std::size_t i : doc.elements("form")) {
        const std::string* action = doc.node(i).attr("action");
        std::string a = action ? lower(trim(*action)) : std::string();
        if (a.starts_with("mailto:")) {
            mails = true;
            sfh = std::min(sfh, 0);
        } else if (a.empty() || a == "about:blank") {
            sfh = -1;
        } else if (auto r = url::try_resolve_url(base, *action); !r || cross_site(*r, final_url)) {
            sfh = std::min(sfh, 0);
        }
    }
    v.set(Feature::Sfh, sfh);
    v.set(Feature::SubmittingToEmail, mails ? -1 : 1);

    // Abnormal_URL: the page's claimed identity is not its host.
    bool abnormal = url::is_ip_literal(url::host_of(final_url));
    auto claims_other_site = [&](const std::string* target) {
        if (!target) return false;
        auto r = url::try_resolve_url(base, *target);
        return r && cross_site(*r, final_url);
    };
    for (std::size_t i : doc.elements("link")) {
        const html::Node& n = doc.node(i);
        const std::string* rel = n.attr("rel");
        if (rel && lower(trim(*rel)) == "canonical") abnormal |= claims_other_site(n.attr("href"));
    }
    for (std::size_t i : doc.elements("meta")) {
        const html::Node& n = doc.node(i);
        const std::string* prop = n.attr("property");
        if (prop && lower(trim(*prop)) == "og:url") abnormal |= claims_other_site(n.attr("content"));
    }
    v.set(Feature::AbnormalUrl, abnormal ? -1 : 1);

    v.set(Feature::Redirect, extras.redirect_count <= 1 ? 1 : (extras.redirect_count <= 3 ? 0 : -1));

    std::string text = lower(page);
    for (const auto& s : extras.script_texts) {
        text += '\n';
        text += lower(s);
    }

    bool status_bar_spoof = text.find("onmouseover") != std::string::npos &&
                            text.find("window.status") != std::string::npos;
    v.set(Feature::OnMouseover, status_bar_spoof ? -1 : 1);

    static const std::regex kButtonTwo(R"(event\s*\.\s*button\s*===?\s*2)");
    static const std::regex kContextMenuFalse(R"(oncontextmenu\s*=\s*["']?\s*return\s+false)");
    bool right_click_blocked = std::regex_search(text, kButtonTwo) || std::regex_search(text, kContextMenuFalse) ||
                               (text.find("contextmenu") != std::string::npos &&
                                text.find("preventdefault") != std::string::npos);
    v.set(Feature::RightClick, right_click_blocked ? -1 : 1);

    static const std::regex kPrompt(R"(\bprompt\s*\()");
    static const std::regex kWindowOpen(R"(window\s*\.\s*open\s*\()");
    Ternary popup = 1;
    if (std::regex_search(text, kPrompt)) popup = -1;
    else if (std::regex_search(text, kWindowOpen)) popup = 0;
    v.set(Feature::PopUpWidnow, popup);

    static const std::regex kIframeTag(R"(<iframe\b[^>]*>)");
    static const std::regex kInvisible(
        R"(frameborder\s*=\s*["']?0\b|visibility\s*:\s*hidden|display\s*:\s*none|\b(width|height)\s*=\s*["']?0\b)");
    bool hidden_frame = false;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kIframeTag); it != std::sregex_iterator(); ++it) {
        if (std::regex_search(it->str(), kInvisible)) hidden_frame = true;
    }
    v.set(Feature::Iframe, hidden_frame ? -1 : 1);
    return v;
}

PartialVector thirdparty_features(std::string_view u, const IntelligenceReport& r) {
    PartialVector v;
    const bool https = url::parse(u).scheme.value_or("") == "https";

    Ternary ssl = -1;
    if (https) {
        bool trusted_and_old = r.cert_issuer_trusted.value_or(false) && r.cert_age_days &&
                               *r.cert_age_days >= kCertAgeDays;
        ssl = trusted_and_old ? 1 : 0;
    }
    v.set(Feature::SslFinalState, ssl);

    v.set(Feature::DomainRegisterationLength,
          !r.registration_remaining_days ? 0 : (*r.registration_remaining_days <= kRegistrationDays ? -1 : 1));
    v.set(Feature::AgeOfDomain, !r.domain_age_days ? 0 : (*r.domain_age_days >= kDomainAgeDays ? 1 : -1));
    v.set(Feature::DnsRecord, !r.has_dns_record ? 0 : (*r.has_dns_record ? 1 : -1));

    Ternary traffic = 0;
    if (r.traffic_rank) traffic = *r.traffic_rank <= 0 ? -1 : (*r.traffic_rank < kTrafficRankCutoff ? 1 : 0);
    v.set(Feature::WebTraffic, traffic);

    v.set(Feature::PageRank, !r.page_rank_score ? 0 : (*r.page_rank_score < kPageRankCutoff ? -1 : 1));
    v.set(Feature::GoogleIndex, !r.indexed_by_search ? 0 : (*r.indexed_by_search ? 1 : -1));

    Ternary inbound = 0;
    if (r.inbound_link_count) inbound = *r.inbound_link_count <= 0 ? -1 : (*r.inbound_link_count <= 2 ? 0 : 1);
    v.set(Feature::LinksPointingToPage, inbound);

    v.set(Feature::StatisticalReport, !r.on_blacklist ? 0 : (*r.on_blacklist ? -1 : 1));
    return v;
}

FeatureVector compose(const PartialVector& url_part, const PartialVector& content_part,
                      const PartialVector& thirdparty_part, ClassLabel label) {
    FeatureVector out;
    out.label = label_value(label);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        int sources = 0;
        for (const PartialVector* part : {&url_part, &content_part, &thirdparty_part}) {
            if (const auto& value = part->values()[i]) {
                out.values[i] = *value;
                ++sources;
            }
        }
        if (sources != 1) {
            throw Error(Errc::InvalidArgument, std::string(kFeatureNames[i]) + " assigned " +
                                                   std::to_string(sources) + " times");
        }
    }
    return out;
}

FeatureVector extract_feature_vector(const std::filesystem::path& sample_dir, const IntelligenceReport& report) {
    store::SampleManifest m = store::read_manifest(sample_dir);
    auto html_ref = std::find_if(m.resources.begin(), m.resources.end(), [](const store::ResourceRef& r) {
        return r.kind == store::ResourceKind::Html && r.status.is_ok();
    });
    if (m.error || html_ref == m.resources.end()) {
        throw Error(Errc::MissingHtml, "sample " + m.record.sample_id + " has no archived landing page");
    }
    std::filesystem::path dir = std::filesystem::is_directory(sample_dir) ? sample_dir : sample_dir.parent_path();
    std::string page = read_file(dir / html_ref->local_path);

    PageExtras extras;
    extras.redirect_count = m.redirect_count;
    for (const auto& r : m.resources) {
        if (r.kind == store::ResourceKind::Javascript && r.status.is_ok() && r.origin_url != store::kInlineOrigin) {
            extras.script_texts.push_back(read_file(dir / r.local_path));
        }
    }
    const std::string& final_url = m.final_url.empty() ? m.record.url : m.final_url;
    auto resources = extract::discover(page, final_url);
    return compose(url_features(m.record.url), content_features(page, final_url, resources, extras),
                   thirdparty_features(m.record.url, report), m.record.label);
}

FeatureVector extract_feature_vector(const std::filesystem::path& sample_dir, const IntelligenceProvider& provider) {
    store::SampleManifest m = store::read_manifest(sample_dir);
    return extract_feature_vector(sample_dir, provider.lookup(m.record));
}

std::string csv_header() {
    std::string out;
    for (auto name : kFeatureNames) {
        out += name;
        out += ',';
    }
    out += kLabelColumn;
    out += '\n';
    return out;
}

std::string csv_row(const FeatureVector& vector) {
    std::string out;
    for (auto value : vector.values) {
        out += std::to_string(value);
        out += ',';
    }
    out += std::to_string(vector.label);
    out += '\n';
    return out;
}

}  // namespace phishcollect::features
