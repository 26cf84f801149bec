#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phishcollect/features.hpp"

namespace phishcollect::analyze {

/// N samples x F named columns plus a +/-1 label per row. Values are kept as
/// doubles so rescaled columns can be analysed too; the loaders only accept
/// {-1, 0, 1}.
struct FeatureMatrix {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return feature_names.size(); }
    std::optional<std::size_t> column_index(std::string_view name) const;

    /// Throws Error{InvalidMatrix}: ragged rows, duplicate names, N < 2, or a
    /// label outside {-1, +1}.
    void validate() const;
};

FeatureMatrix from_vectors(std::span<const features::FeatureVector> vectors);

/// Header of feature names with a final `Result` column (the features
/// module's output and the UCI tabular export both qualify).
FeatureMatrix read_matrix_csv(std::string_view text);
/// The UCI repository's ARFF file: @attribute lines then comma-separated @data.
FeatureMatrix read_matrix_arff(std::string_view text);
/// Picks ARFF when the file declares @relation/@attribute, CSV otherwise.
FeatureMatrix load_matrix(const std::filesystem::path& path);

struct Coefficient {
    std::string feature;
    std::optional<double> value;  // empty for a zero-variance column
};

struct CorrelationReport {
    std::vector<Coefficient> coefficients;  // matrix column order
    std::vector<std::size_t> ranking;       // indices into coefficients, defined only

    const Coefficient* find(std::string_view feature) const;
    std::size_t defined_count() const { return ranking.size(); }
};

/// Pearson correlation of every column with the label column.
/// Throws Error{SingleClassMatrix} when every label is the same.
CorrelationReport correlation_with_label(const FeatureMatrix& matrix);

struct RankedFeature {
    std::size_t rank = 0;  // 1-based
    std::string feature;
    double coefficient = 0;
};

/// First min(k, defined) features by descending |coefficient|; ties by name.
std::vector<RankedFeature> top_k_report(const CorrelationReport& report, std::size_t k);

struct ComparisonRow {
    std::string feature;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> difference;  // b - a, when both are defined
};

/// Name-keyed join of both reports. Throws Error{SchemaMismatch} unless both
/// matrices have the same set of feature names.
std::vector<ComparisonRow> compare_matrices(const FeatureMatrix& a, const FeatureMatrix& b);

// Renderings. Undefined coefficients are an empty CSV field, JSON null and
// "undefined" in tables.
std::string report_csv(const CorrelationReport& report);
std::string top_k_csv(const std::vector<RankedFeature>& top);
std::string report_json(const CorrelationReport& report, const std::vector<RankedFeature>& top,
                        std::string_view dataset);
std::string top_k_table(const std::vector<RankedFeature>& top);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_json(const std::vector<ComparisonRow>& rows, std::string_view name_a,
                            std::string_view name_b);
std::string comparison_table(const std::vector<ComparisonRow>& rows, std::string_view name_a,
                             std::string_view name_b);

}  // namespace phishcollect::analyze
