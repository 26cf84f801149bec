#include "phishcollect/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "phishcollect/csv.hpp"
#include "phishcollect/error.hpp"
#include "phishcollect/html.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect {
namespace {

std::string lower_trimmed(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
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

std::string without_spaces(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(ClassLabel label) {
    return label == ClassLabel::Phishing ? "phishing" : "legitimate";
}

std::string_view to_string(RecordSource source) {
    return source == RecordSource::PhishtankDetail ? "phishtank_detail" : "csv_feed";
}

std::optional<ClassLabel> parse_label(std::string_view text) {
    std::string v = lower_trimmed(text);
    if (v == "phishing" || v == "phish" || v == "-1") return ClassLabel::Phishing;
    if (v == "legitimate" || v == "legit" || v == "1" || v == "+1") return ClassLabel::Legitimate;
    return std::nullopt;
}

std::optional<RecordSource> parse_source(std::string_view text) {
    if (text == "phishtank_detail") return RecordSource::PhishtankDetail;
    if (text == "csv_feed") return RecordSource::CsvFeed;
    return std::nullopt;
}

bool is_safe_sample_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

namespace ingest {

UrlRecord parse_phishtank_detail(std::string_view page_html, std::string_view phish_id) {
    if (!is_safe_sample_id(phish_id)) {
        throw Error(Errc::InvalidArgument, "phish id '" + std::string(phish_id) + "'");
    }
    // The detail page shows the submitted URL inside
    // <span style="word-wrap:break-word;"><b>URL</b></span>.
    html::Document doc(page_html);
    std::optional<std::size_t> container;
    for (std::size_t i : doc.elements("span")) {
        const std::string* style = doc.node(i).attr("style");
        if (style && without_spaces(*style).find("word-wrap:break-word") != std::string::npos) {
            container = i;
            break;
        }
    }
    if (!container) throw Error(Errc::MissingUrlElement, "no URL container for " + std::string(phish_id));
    std::string text = trim(doc.text_content(*container));
    if (text.empty()) throw Error(Errc::MissingUrlElement, "empty URL container for " + std::string(phish_id));
    if (!url::is_http_url(text)) throw Error(Errc::InvalidUrl, text);
    return UrlRecord{std::string(phish_id), std::move(text), ClassLabel::Phishing,
                     RecordSource::PhishtankDetail};
}

CsvFeed load_csv_feed(std::string_view csv_bytes, ClassLabel default_label) {
    auto rows = csv::parse(csv_bytes);
    if (rows.empty()) throw Error(Errc::MissingUrlColumn, "feed has no header row");

    std::optional<std::size_t> url_col, id_col, label_col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        std::string name = lower_trimmed(rows[0][i]);
        if (name == "url" && !url_col) url_col = i;
        if (name == "id" && !id_col) id_col = i;
        if (name == "label" && !label_col) label_col = i;
    }
    if (!url_col) throw Error(Errc::MissingUrlColumn, "header lacks a 'url' column");

    const std::size_t data_rows = rows.size() - 1;
    const std::size_t width = std::max<std::size_t>(6, std::to_string(data_rows).size());
    auto field = [](const csv::Row& row, std::optional<std::size_t> col) -> std::string {
        return col && *col < row.size() ? trim(row[*col]) : std::string();
    };

    CsvFeed feed;
    std::unordered_set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string u = field(row, url_col);
        std::string id = field(row, id_col);
        if (id.empty()) {
            id = std::to_string(r);
            id.insert(0, width - std::min(width, id.size()), '0');
        }
        std::string label_text = field(row, label_col);
        std::optional<ClassLabel> label = label_text.empty() ? default_label : parse_label(label_text);
        if (!url::is_http_url(u) || !is_safe_sample_id(id) || !label || !ids.insert(id).second) {
            ++feed.skipped;
            continue;
        }
        feed.records.push_back(UrlRecord{std::move(id), std::move(u), *label, RecordSource::CsvFeed});
    }
    if (feed.records.empty()) throw Error(Errc::EmptyFeed, "no valid rows");
    return feed;
}

std::vector<UrlRecord> dedupe(std::span<const UrlRecord> records) {
    std::vector<UrlRecord> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (seen.insert(url::normalize_for_dedupe(r.url)).second) out.push_back(r);
    }
    return out;
}

}  // namespace ingest
}  // namespace phishcollect
