#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phishcollect {

enum class ClassLabel { Phishing, Legitimate };
enum class RecordSource { PhishtankDetail, CsvFeed };

std::string_view to_string(ClassLabel label);
std::string_view to_string(RecordSource source);
/// Accepts phishing/legitimate (and phish/legit, -1/1), case-insensitive.
std::optional<ClassLabel> parse_label(std::string_view text);
std::optional<RecordSource> parse_source(std::string_view text);

/// UCI convention: -1 phishing, +1 legitimate.
constexpr int label_value(ClassLabel label) { return label == ClassLabel::Phishing ? -1 : 1; }

struct UrlRecord {
    std::string sample_id;
    std::string url;
    ClassLabel label = ClassLabel::Phishing;
    RecordSource source = RecordSource::CsvFeed;

    friend bool operator==(const UrlRecord&, const UrlRecord&) = default;
};

/// [A-Za-z0-9_-]+
bool is_safe_sample_id(std::string_view id);

namespace ingest {

/// Pulls the submitted URL out of a saved PhishTank phish_detail page.
/// Throws Error{MissingUrlElement} when the URL container is absent or empty
/// and Error{InvalidUrl} when its text is not an absolute http(s) URL.
UrlRecord parse_phishtank_detail(std::string_view page_html, std::string_view phish_id);

struct CsvFeed {
    std::vector<UrlRecord> records;
    std::size_t skipped = 0;
};

/// Header row required with a `url` column; `id` and `label` are optional.
/// Throws Error{MissingUrlColumn} or Error{EmptyFeed}.
CsvFeed load_csv_feed(std::string_view csv_bytes, ClassLabel default_label);

/// First occurrence wins, keyed on url::normalize_for_dedupe.
std::vector<UrlRecord> dedupe(std::span<const UrlRecord> records);

}  // namespace ingest
}  // namespace phishcollect
