#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "phishcollect/features.hpp"
#include "phishcollect/fetch.hpp"
#include "phishcollect/ingest.hpp"
#include "phishcollect/snapshot.hpp"

namespace phishcollect::pipeline {

namespace fs = std::filesystem;

enum class OverwritePolicy { Skip, Overwrite, Fail };

std::string_view to_string(OverwritePolicy policy);
std::optional<OverwritePolicy> parse_overwrite(std::string_view text);

struct InputSource {
    enum class Kind { CsvFile, PhishtankDir, IdRange };
    Kind kind = Kind::CsvFile;
    fs::path path;  // CSV file or directory of saved <id>.html detail pages
    long first_id = 0;
    long last_id = -1;
    std::string url_template = "https://phishtank.org/phish_detail.php?phish_id={id}";
    ClassLabel default_label = ClassLabel::Phishing;
};

struct LoadedInput {
    std::vector<UrlRecord> records;
    std::size_t skipped = 0;     // unusable rows or detail pages
    std::size_t duplicates = 0;  // dropped by dedupe
};

/// Reads and dedupes the input. Id ranges download each detail page through
/// `fetcher`. Throws Error{EmptyFeed} when nothing usable remains.
LoadedInput load_input(const InputSource& source, const fetch::Fetcher& fetcher, std::ostream* progress = nullptr);

using ProviderFactory = std::function<std::unique_ptr<snapshot::ScreenshotProvider>()>;
using WallClock = std::function<std::chrono::system_clock::time_point()>;

struct RunConfig {
    InputSource input;
    fs::path root;
    fetch::FetchPolicy policy;
    snapshot::ViewportSpec viewport;
    int workers = 8;
    bool screenshots = false;
    bool live_capture = false;  // render the live URL instead of the saved file
    int screenshot_sessions = 2;
    ProviderFactory provider_factory;  // required when screenshots are on
    OverwritePolicy overwrite = OverwritePolicy::Skip;
    double max_failure_ratio = 1.0;
    WallClock clock;                                  // defaults to system_clock::now
    std::shared_ptr<fetch::HostScheduler> scheduler;  // defaults to a fresh one
    std::ostream* progress = nullptr;

    /// Throws Error{InvalidArgument}.
    void validate() const;
};

enum class SampleOutcome { Succeeded, Failed, SkippedExisting };

struct SampleResult {
    std::string sample_id;
    SampleOutcome outcome = SampleOutcome::Succeeded;
    std::string error;  // FetchError / Errc name for failures
    std::string detail;
};

struct RunSummary {
    std::size_t attempted = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    std::size_t skipped_existing = 0;
    std::size_t input_skipped = 0;
    std::size_t duplicates = 0;
    std::map<std::string, std::size_t> error_counts;
    std::size_t resources_failed = 0;
    std::size_t screenshots_skipped = 0;
    std::size_t requests = 0;
    std::vector<SampleResult> samples;  // input order

    std::string to_json() const;
};

/// Archives one record under config.root. Per-sample failures are recorded in
/// the manifest and the returned result, never thrown.
SampleResult collect_sample(const UrlRecord& record, const RunConfig& config, const fetch::Fetcher& fetcher,
                            snapshot::ScreenshotProvider* provider);

/// Loads the input and archives every record with a worker pool.
RunSummary run_collect(const RunConfig& config);
RunSummary run_collect(const RunConfig& config, const std::vector<UrlRecord>& records);

/// <root>.summary.json, next to the archive root.
fs::path summary_path(const fs::path& root);

/// 0 all good, 1 nothing succeeded, 3 failed share above the threshold.
/// (2, configuration errors, is decided before a run starts.)
int exit_code(const RunSummary& summary, double max_failure_ratio);

struct FeaturesRun {
    std::size_t rows = 0;
    std::vector<std::pair<std::string, std::string>> skipped;  // sample id, reason
};

/// One CSV row per usable sample, ordered by sample id. Skips are reported
/// on `skip_log`.
FeaturesRun run_features(const fs::path& root, const fs::path& output_csv,
                         const features::IntelligenceProvider& provider, std::ostream* skip_log = nullptr);

struct AnalyzeConfig {
    fs::path matrix;
    std::optional<fs::path> second;
    std::size_t top_k = 16;
    fs::path output_dir = ".";
};

/// Writes correlation.csv, correlation.json and top_k.csv, plus
/// comparison.csv and comparison.json when a second matrix is given.
/// Returns the human-readable tables.
std::string run_analyze(const AnalyzeConfig& config);

/// Writes the stats CSV and returns the table.
std::string run_stats(const fs::path& root, const fs::path& output_csv);

}  // namespace phishcollect::pipeline
