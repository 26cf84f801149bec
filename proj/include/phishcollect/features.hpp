#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phishcollect/extract.hpp"
#include "phishcollect/ingest.hpp"

namespace phishcollect::features {

/// Column order of the feature matrix; identical to the UCI Phishing
/// Websites export, misspellings included.
inline constexpr std::array<std::string_view, 30> kFeatureNames = {
    // address bar
    "having_IP_Address", "URL_Length", "Shortining_Service", "having_At_Symbol",
    "double_slash_redirecting", "Prefix_Suffix", "having_Sub_Domain", "SSLfinal_State",
    "Domain_registeration_length", "Favicon", "port", "HTTPS_token",
    // abnormal
    "Request_URL", "URL_of_Anchor", "Links_in_tags", "SFH", "Submitting_to_email", "Abnormal_URL",
    // HTML and Javascript
    "Redirect", "on_mouseover", "RightClick", "popUpWidnow", "Iframe",
    // domain
    "age_of_domain", "DNSRecord", "web_traffic", "Page_Rank", "Google_Index",
    "Links_pointing_to_page", "Statistical_report",
};

inline constexpr std::string_view kLabelColumn = "Result";

enum class Feature : std::size_t {
    HavingIpAddress, UrlLength, ShortiningService, HavingAtSymbol, DoubleSlashRedirecting,
    PrefixSuffix, HavingSubDomain, SslFinalState, DomainRegisterationLength, Favicon, Port,
    HttpsToken, RequestUrl, UrlOfAnchor, LinksInTags, Sfh, SubmittingToEmail, AbnormalUrl,
    Redirect, OnMouseover, RightClick, PopUpWidnow, Iframe, AgeOfDomain, DnsRecord, WebTraffic,
    PageRank, GoogleIndex, LinksPointingToPage, StatisticalReport,
};

inline constexpr std::size_t kFeatureCount = kFeatureNames.size();

constexpr std::string_view name_of(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }
std::optional<Feature> feature_by_name(std::string_view name);

/// -1 phishing-leaning, 0 suspicious or unknown, +1 legitimate-leaning.
using Ternary = int;

/// Output of one rule group. Unassigned slots stay empty so the composition
/// can check that every feature is produced exactly once.
class PartialVector {
public:
    void set(Feature f, Ternary value);
    std::optional<Ternary> get(Feature f) const { return values_[static_cast<std::size_t>(f)]; }
    std::size_t assigned() const;
    const std::array<std::optional<Ternary>, kFeatureCount>& values() const { return values_; }

private:
    std::array<std::optional<Ternary>, kFeatureCount> values_{};
};

struct FeatureVector {
    std::array<Ternary, kFeatureCount> values{};
    int label = 1;  // -1 phishing, +1 legitimate

    Ternary operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Third-party intelligence for one URL. Absent fields mean unknown and map
/// to 0.
struct IntelligenceReport {
    std::optional<int> domain_age_days;
    std::optional<int> registration_remaining_days;
    std::optional<bool> has_dns_record;
    std::optional<long> traffic_rank;  // <= 0 means "not ranked at all"
    std::optional<double> page_rank_score;
    std::optional<bool> indexed_by_search;
    std::optional<int> inbound_link_count;
    std::optional<bool> on_blacklist;
    std::optional<bool> cert_issuer_trusted;
    std::optional<int> cert_age_days;
};

class IntelligenceProvider {
public:
    virtual ~IntelligenceProvider() = default;
    virtual IntelligenceReport lookup(const UrlRecord& record) const = 0;
};

/// Knows nothing; every lookup is all-unknown.
class OfflineProvider final : public IntelligenceProvider {
public:
    IntelligenceReport lookup(const UrlRecord&) const override { return {}; }
};

/// Reads pre-collected lookups from a JSON file:
///   {"samples": {"<sample_id>": {...}}, "domains": {"<registrable domain>": {...}}}
/// Field names match IntelligenceReport. Sample entries win over domains.
class JsonFileProvider final : public IntelligenceProvider {
public:
    explicit JsonFileProvider(const std::filesystem::path& path);
    static JsonFileProvider from_string(std::string_view json_text);

    IntelligenceReport lookup(const UrlRecord& record) const override;

private:
    JsonFileProvider() = default;
    struct Data;
    std::shared_ptr<const Data> data_;
};

/// Address-bar rules except SSLfinal_State, Favicon and
/// Domain_registeration_length (9 features).
PartialVector url_features(std::string_view url);

/// Inputs to the page-content rules beyond the HTML itself.
struct PageExtras {
    int redirect_count = 0;
    /// Text of archived external scripts; searched with the HTML for the
    /// Javascript patterns.
    std::vector<std::string> script_texts;
};

/// Abnormal group, HTML/JS group and Favicon (12 features).
PartialVector content_features(std::string_view html, std::string_view final_url,
                               const extract::DiscoveredResources& resources, const PageExtras& extras = {});

/// Domain group, SSLfinal_State and Domain_registeration_length (9 features).
PartialVector thirdparty_features(std::string_view url, const IntelligenceReport& report);

/// Merges the three groups. Throws Error{InvalidArgument} unless each of the
/// 30 features is assigned by exactly one group.
FeatureVector compose(const PartialVector& url_part, const PartialVector& content_part,
                      const PartialVector& thirdparty_part, ClassLabel label);

/// Reads the sample's manifest, landing HTML and archived scripts.
/// Throws Error{MissingHtml} when no landing page was archived.
FeatureVector extract_feature_vector(const std::filesystem::path& sample_dir, const IntelligenceReport& report);
FeatureVector extract_feature_vector(const std::filesystem::path& sample_dir, const IntelligenceProvider& provider);

/// "having_IP_Address,...,Statistical_report,Result\n"
std::string csv_header();
std::string csv_row(const FeatureVector& vector);

}  // namespace phishcollect::features
