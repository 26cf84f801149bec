#include "phishcollect/analyze.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "phishcollect/csv.hpp"
#include "phishcollect/error.hpp"

namespace phishcollect::analyze {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
    auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return std::string(s);
}

int parse_ternary(std::string_view raw, std::size_t line) {
    std::string s = trim(raw);
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    int v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || end != s.data() + s.size() || v < -1 || v > 1) {
        throw Error(Errc::InvalidMatrix, "row " + std::to_string(line) + ": value '" + std::string(raw) +
                                             "' is not -1, 0 or 1");
    }
    return v;
}

// Header names plus text rows; the Result column becomes the labels.
FeatureMatrix build(std::vector<std::string> header, const std::vector<std::vector<std::string>>& body) {
    auto label_at = std::find(header.begin(), header.end(), features::kLabelColumn);
    if (label_at == header.end()) {
        throw Error(Errc::InvalidMatrix, "no '" + std::string(features::kLabelColumn) + "' column");
    }
    const std::size_t label_col = static_cast<std::size_t>(label_at - header.begin());

    FeatureMatrix m;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != label_col) m.feature_names.push_back(header[i]);
    }
    std::size_t line = 1;
    for (const auto& fields : body) {
        ++line;
        if (fields.size() != header.size()) {
            throw Error(Errc::InvalidMatrix, "row " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                                                 " fields, expected " + std::to_string(header.size()));
        }
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            int v = parse_ternary(fields[i], line);
            if (i == label_col) {
                if (v == 0) throw Error(Errc::InvalidMatrix, "row " + std::to_string(line) + ": label must be -1 or 1");
                m.labels.push_back(v);
            } else {
                row.push_back(v);
            }
        }
        m.rows.push_back(std::move(row));
    }
    m.validate();
    return m;
}

std::string format_coefficient(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    // "-0.000000" reads badly in reports
    if (std::string_view(buf) == "-0.000000") return "0.000000";
    return buf;
}

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ordered_json json_value(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

// Ranking key: |r| rounded to 12 decimals, so last-bit noise from scaling a
// column cannot reorder otherwise tied features.
long long rank_key(double r) { return std::llround(std::fabs(r) * 1e12); }

const std::vector<std::string>& canonical_order() {
    static const std::vector<std::string> names(features::kFeatureNames.begin(), features::kFeatureNames.end());
    return names;
}

}  // namespace

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        if (feature_names[i] == name) return i;
    }
    return std::nullopt;
}

void FeatureMatrix::validate() const {
    std::set<std::string_view> seen;
    for (const auto& n : feature_names) {
        if (!seen.insert(n).second) throw Error(Errc::InvalidMatrix, "duplicate column '" + n + "'");
    }
    if (rows.size() != labels.size()) throw Error(Errc::InvalidMatrix, "row and label counts differ");
    if (rows.size() < 2) throw Error(Errc::InvalidMatrix, "need at least 2 rows, have " + std::to_string(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != feature_names.size()) {
            throw Error(Errc::InvalidMatrix, "row " + std::to_string(r) + " has wrong length");
        }
        if (labels[r] != -1 && labels[r] != 1) throw Error(Errc::InvalidMatrix, "label outside {-1, 1}");
    }
}

FeatureMatrix from_vectors(std::span<const features::FeatureVector> vectors) {
    FeatureMatrix m;
    m.feature_names = canonical_order();
    for (const auto& v : vectors) {
        m.rows.emplace_back(v.values.begin(), v.values.end());
        m.labels.push_back(v.label);
    }
    return m;
}

FeatureMatrix read_matrix_csv(std::string_view text) {
    auto table = csv::parse(text);
    if (table.empty()) throw Error(Errc::InvalidMatrix, "empty matrix file");
    std::vector<std::string> header;
    for (const auto& h : table.front()) header.push_back(trim(h));
    table.erase(table.begin());
    return build(std::move(header), table);
}

FeatureMatrix read_matrix_arff(std::string_view text) {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> body;
    bool in_data = false;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t.front() == '%') continue;
        if (!in_data) {
            std::string lower_t = t;
            std::transform(lower_t.begin(), lower_t.end(), lower_t.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (lower_t.starts_with("@attribute")) {
                std::istringstream words(t.substr(10));
                std::string name;
                words >> name;
                if (name.size() >= 2 && (name.front() == '\'' || name.front() == '"')) name = name.substr(1, name.size() - 2);
                header.push_back(name);
            } else if (lower_t.starts_with("@data")) {
                in_data = true;
            }
            continue;
        }
        auto rows = csv::parse(t);
        if (!rows.empty()) body.push_back(std::move(rows.front()));
    }
    if (!in_data) throw Error(Errc::InvalidMatrix, "ARFF file has no @data section");
    return build(std::move(header), body);
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();

    std::string head = text.substr(0, 4096);
    std::transform(head.begin(), head.end(), head.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (head.find("@relation") != std::string::npos || head.find("@attribute") != std::string::npos) {
        return read_matrix_arff(text);
    }
    return read_matrix_csv(text);
}

const Coefficient* CorrelationReport::find(std::string_view feature) const {
    for (const auto& c : coefficients) {
        if (c.feature == feature) return &c;
    }
    return nullptr;
}

CorrelationReport correlation_with_label(const FeatureMatrix& matrix) {
    matrix.validate();
    const std::size_t n = matrix.row_count();
    if (std::all_of(matrix.labels.begin(), matrix.labels.end(), [&](int l) { return l == matrix.labels.front(); })) {
        throw Error(Errc::SingleClassMatrix, "all " + std::to_string(n) + " labels are " +
                                                 std::to_string(matrix.labels.front()));
    }

    double y_mean = 0;
    for (int l : matrix.labels) y_mean += l;
    y_mean /= static_cast<double>(n);
    double syy = 0;
    for (int l : matrix.labels) syy += (l - y_mean) * (l - y_mean);

    CorrelationReport report;
    for (std::size_t c = 0; c < matrix.column_count(); ++c) {
        Coefficient coef{matrix.feature_names[c], std::nullopt};
        const double first = matrix.rows.front()[c];
        bool constant = std::all_of(matrix.rows.begin(), matrix.rows.end(),
                                    [&](const std::vector<double>& row) { return row[c] == first; });
        if (!constant) {
            double x_mean = 0;
            for (const auto& row : matrix.rows) x_mean += row[c];
            x_mean /= static_cast<double>(n);
            double sxx = 0, sxy = 0;
            for (std::size_t r = 0; r < n; ++r) {
                double dx = matrix.rows[r][c] - x_mean;
                sxx += dx * dx;
                sxy += dx * (matrix.labels[r] - y_mean);
            }
            coef.value = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
        }
        report.coefficients.push_back(std::move(coef));
    }

    for (std::size_t i = 0; i < report.coefficients.size(); ++i) {
        if (report.coefficients[i].value) report.ranking.push_back(i);
    }
    std::sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = report.coefficients[a];
        const auto& cb = report.coefficients[b];
        long long ka = rank_key(*ca.value), kb = rank_key(*cb.value);
        if (ka != kb) return ka > kb;
        return ca.feature < cb.feature;
    });
    return report;
}

std::vector<RankedFeature> top_k_report(const CorrelationReport& report, std::size_t k) {
    if (k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
    std::vector<RankedFeature> out;
    for (std::size_t i = 0; i < report.ranking.size() && i < k; ++i) {
        const auto& c = report.coefficients[report.ranking[i]];
        out.push_back({i + 1, c.feature, *c.value});
    }
    return out;
}

std::vector<ComparisonRow> compare_matrices(const FeatureMatrix& a, const FeatureMatrix& b) {
    std::set<std::string> names_a(a.feature_names.begin(), a.feature_names.end());
    std::set<std::string> names_b(b.feature_names.begin(), b.feature_names.end());
    if (names_a != names_b || names_a.size() != a.feature_names.size() ||
        names_b.size() != b.feature_names.size()) {
        std::string detail;
        for (const auto& n : names_a) {
            if (!names_b.count(n)) detail += " -" + n;
        }
        for (const auto& n : names_b) {
            if (!names_a.count(n)) detail += " +" + n;
        }
        throw Error(Errc::SchemaMismatch, "feature names differ:" + (detail.empty() ? " duplicates" : detail));
    }
    CorrelationReport ra = correlation_with_label(a);
    CorrelationReport rb = correlation_with_label(b);

    // Canonical order when the schema is the UCI one, alphabetical otherwise,
    // so column permutations give identical tables.
    std::vector<std::string> order;
    const auto& canon = canonical_order();
    if (names_a == std::set<std::string>(canon.begin(), canon.end())) {
        order = canon;
    } else {
        order.assign(names_a.begin(), names_a.end());
    }

    std::vector<ComparisonRow> rows;
    for (const auto& name : order) {
        ComparisonRow row{name, ra.find(name)->value, rb.find(name)->value, std::nullopt};
        if (row.a && row.b) row.difference = *row.b - *row.a;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string report_csv(const CorrelationReport& report) {
    std::vector<std::size_t> rank_of(report.coefficients.size(), 0);
    for (std::size_t i = 0; i < report.ranking.size(); ++i) rank_of[report.ranking[i]] = i + 1;

    std::string out = "feature,coefficient,rank\n";
    auto emit = [&](std::size_t i) {
        const auto& c = report.coefficients[i];
        out += csv::escape(c.feature) + ',' + (c.value ? full_precision(*c.value) : "") + ',' +
               (rank_of[i] ? std::to_string(rank_of[i]) : "") + '\n';
    };
    for (std::size_t i : report.ranking) emit(i);
    for (std::size_t i = 0; i < report.coefficients.size(); ++i) {
        if (!report.coefficients[i].value) emit(i);
    }
    return out;
}

std::string top_k_csv(const std::vector<RankedFeature>& top) {
    std::string out = "rank,feature,coefficient\n";
    for (const auto& t : top) out += std::to_string(t.rank) + ',' + csv::escape(t.feature) + ',' + full_precision(t.coefficient) + '\n';
    return out;
}

std::string report_json(const CorrelationReport& report, const std::vector<RankedFeature>& top,
                        std::string_view dataset) {
    ordered_json j;
    j["dataset"] = dataset;
    j["top_k"] = ordered_json::array();
    for (const auto& t : top) j["top_k"].push_back({{"rank", t.rank}, {"feature", t.feature}, {"coefficient", t.coefficient}});
    j["series"] = ordered_json::array();
    for (const auto& c : report.coefficients) j["series"].push_back({{"feature", c.feature}, {"coefficient", json_value(c.value)}});
    j["undefined"] = ordered_json::array();
    for (const auto& c : report.coefficients) {
        if (!c.value) j["undefined"].push_back(c.feature);
    }
    return j.dump(2) + "\n";
}

std::string top_k_table(const std::vector<RankedFeature>& top) {
    std::size_t width = 7;
    for (const auto& t : top) width = std::max(width, t.feature.size());
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%4s  %-*s  %12s\n", "rank", static_cast<int>(width), "feature", "coefficient");
    out << buf;
    for (const auto& t : top) {
        std::snprintf(buf, sizeof buf, "%4zu  %-*s  %12s\n", t.rank, static_cast<int>(width), t.feature.c_str(),
                      format_coefficient(t.coefficient).c_str());
        out << buf;
    }
    return out.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "feature,a,b,difference\n";
    auto field = [](const std::optional<double>& v) { return v ? full_precision(*v) : std::string(); };
    for (const auto& r : rows) {
        out += csv::escape(r.feature) + ',' + field(r.a) + ',' + field(r.b) + ',' + field(r.difference) + '\n';
    }
    return out;
}

std::string comparison_json(const std::vector<ComparisonRow>& rows, std::string_view name_a,
                            std::string_view name_b) {
    ordered_json j;
    j["datasets"] = {name_a, name_b};
    j["series"] = ordered_json::array();
    for (const auto& r : rows) {
        j["series"].push_back({{"feature", r.feature},
                               {"coefficients", {json_value(r.a), json_value(r.b)}},
                               {"difference", json_value(r.difference)}});
    }
    return j.dump(2) + "\n";
}

std::string comparison_table(const std::vector<ComparisonRow>& rows, std::string_view name_a,
                             std::string_view name_b) {
    std::size_t width = 7;
    for (const auto& r : rows) width = std::max(width, r.feature.size());
    auto cell = [](const std::optional<double>& v) { return v ? format_coefficient(*v) : std::string("undefined"); };
    std::ostringstream out;
    char buf[512];
    std::string a(name_a.substr(0, 12)), b(name_b.substr(0, 12));
    std::snprintf(buf, sizeof buf, "%-*s  %12s  %12s  %12s\n", static_cast<int>(width), "feature", a.c_str(), b.c_str(),
                  "difference");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %12s  %12s  %12s\n", static_cast<int>(width), r.feature.c_str(),
                      cell(r.a).c_str(), cell(r.b).c_str(), cell(r.difference).c_str());
        out << buf;
    }
    return out.str();
}

}  // namespace phishcollect::analyze
