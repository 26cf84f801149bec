#include "phishcollect/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "phishcollect/analyze.hpp"
#include "phishcollect/error.hpp"
#include "phishcollect/extract.hpp"
#include "phishcollect/store.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect::pipeline {
namespace {

using store::ResourceKind;
using store::ResourceRef;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw Error(Errc::IoFailure, "cannot write " + path.string());
    }
}

std::string failure_reason(const fetch::FetchFailure& f) {
    std::string reason(fetch::to_string(f.kind));
    if (f.kind == fetch::FetchError::HttpError) reason += "(" + std::to_string(f.http_status) + ")";
    if (!f.detail.empty()) reason += ": " + f.detail;
    return reason;
}

class ProgressLog {
public:
    explicit ProgressLog(std::ostream* out) : out_(out) {}

    void line(const std::string& text) {
        if (!out_) return;
        std::lock_guard lock(mutex_);
        *out_ << text << '\n';
    }

private:
    std::ostream* out_;
    std::mutex mutex_;
};

/// Fixed set of provider sessions handed out one capture at a time.
class ProviderPool {
public:
    ProviderPool(const ProviderFactory& factory, int sessions) {
        for (int i = 0; i < sessions; ++i) free_.push_back(factory());
    }

    template <typename Fn>
    auto with(Fn&& fn) {
        std::unique_ptr<snapshot::ScreenshotProvider> p;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return !free_.empty(); });
            p = std::move(free_.back());
            free_.pop_back();
        }
        struct Return {
            ProviderPool& pool;
            std::unique_ptr<snapshot::ScreenshotProvider>& p;
            ~Return() {
                std::lock_guard lock(pool.mutex_);
                pool.free_.push_back(std::move(p));
                pool.cv_.notify_one();
            }
        } give_back{*this, p};
        return fn(*p);
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<std::unique_ptr<snapshot::ScreenshotProvider>> free_;
};

/// Screenshot hook used by collect_sample; null when screenshots are off.
using CaptureFn = std::function<snapshot::CaptureResult(const snapshot::CaptureTarget&)>;

bool sample_has_content(const fs::path& dir) {
    std::error_code ec;
    if (!fs::exists(dir, ec)) return false;
    for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (!it->is_directory()) return true;
    }
    return false;
}

SampleResult collect_one(const UrlRecord& record, const RunConfig& config, const fetch::Fetcher& fetcher,
                         const CaptureFn& capture) {
    SampleResult result{record.sample_id, SampleOutcome::Succeeded, {}, {}};
    const fs::path sample_path = config.root / record.sample_id;

    if (sample_has_content(sample_path)) {
        if (config.overwrite == OverwritePolicy::Skip) {
            result.outcome = SampleOutcome::SkippedExisting;
            return result;
        }
        if (config.overwrite == OverwritePolicy::Fail) {
            result.outcome = SampleOutcome::Failed;
            result.error = to_string(Errc::SampleExists);
            result.detail = sample_path.string();
            return result;
        }
    }

    try {
        store::SampleDir dir = config.overwrite == OverwritePolicy::Overwrite
                                   ? store::reset_sample_dir(config.root, record.sample_id)
                                   : store::init_sample_dir(config.root, record.sample_id);

        store::SampleManifest manifest;
        manifest.record = record;
        fetch::FetchResult page = fetcher.page(record.url);
        manifest.fetched_at = store::utc_timestamp(config.clock ? config.clock() : std::chrono::system_clock::now());
        manifest.final_url = page.final_url.empty() ? record.url : page.final_url;
        manifest.redirect_count = page.redirect_count;

        if (!page.ok()) {
            const auto& f = *page.failure;
            manifest.error = store::ManifestError{std::string(fetch::to_string(f.kind)), failure_reason(f)};
            manifest.resources.push_back(store::failed_ref(ResourceKind::Html, record.url, failure_reason(f)));
            store::write_manifest(dir, manifest);
            result.outcome = SampleOutcome::Failed;
            result.error = std::string(fetch::to_string(f.kind));
            result.detail = failure_reason(f);
            return result;
        }

        auto add = [&](ResourceRef ref, std::string_view origin, bool fallback = false) {
            ref.origin_url = std::string(origin);
            ref.fallback = fallback;
            manifest.resources.push_back(std::move(ref));
        };

        ResourceRef html_ref = store::write_resource(dir, ResourceKind::Html, record.sample_id, page.body);
        add(html_ref, manifest.final_url);

        const auto found = extract::discover(page.body, manifest.final_url);

        // Each distinct URL is requested once per sample, whatever kinds
        // reference it.
        std::unordered_map<std::string, fetch::FetchResult> cache;
        auto fetch_into = [&](ResourceKind kind, const std::string& u, bool fallback = false) {
            auto it = cache.find(u);
            if (it == cache.end()) it = cache.emplace(u, fetcher.resource(u)).first;
            const auto& r = it->second;
            if (!r.ok()) {
                add(store::failed_ref(kind, u, failure_reason(*r.failure)), u, fallback);
                return;
            }
            add(store::write_resource(dir, kind, store::name_from_url(u), r.body), u, fallback);
        };

        if (!found.inline_scripts.empty()) {
            std::string joined;
            for (const auto& block : found.inline_scripts) {
                joined += block;
                if (!joined.empty() && joined.back() != '\n') joined += '\n';
            }
            add(store::write_resource(dir, ResourceKind::Javascript, "inline", joined), store::kInlineOrigin);
        }
        for (const auto& u : found.external_script_urls) fetch_into(ResourceKind::Javascript, u);

        if (!found.inline_style_decls.empty() || !found.internal_style_blocks.empty()) {
            std::string css;
            for (const auto& decl : found.inline_style_decls) css += decl.context + " { " + decl.declaration + " }\n";
            for (const auto& block : found.internal_style_blocks) {
                css += block;
                if (!css.empty() && css.back() != '\n') css += '\n';
            }
            add(store::write_resource(dir, ResourceKind::Css, "inline", css), store::kInlineOrigin);
        }
        for (const auto& u : found.external_stylesheet_urls) fetch_into(ResourceKind::Css, u);

        for (const auto& u : found.favicon_urls) fetch_into(ResourceKind::Favicon, u, found.favicon_fallback);
        for (const auto& u : found.image_urls) fetch_into(ResourceKind::Image, u);

        if (capture) {
            snapshot::CaptureTarget target =
                config.live_capture || !html_ref.status.is_ok()
                    ? snapshot::CaptureTarget::live_url(manifest.final_url)
                    : snapshot::CaptureTarget::local_file(dir.path() / html_ref.local_path);
            snapshot::CaptureResult shot = capture(target);
            if (shot.ok()) {
                add(store::write_resource(dir, ResourceKind::Screenshot, record.sample_id, shot.png),
                    manifest.final_url);
            } else {
                std::string reason(snapshot::to_string(*shot.error));
                if (!shot.detail.empty()) reason += ": " + shot.detail;
                add(store::skipped_ref(ResourceKind::Screenshot, manifest.final_url, reason), manifest.final_url);
            }
        }

        store::write_manifest(dir, manifest);
    } catch (const Error& e) {
        result.outcome = SampleOutcome::Failed;
        result.error = std::string(to_string(e.code()));
        result.detail = e.what();
    } catch (const std::exception& e) {
        result.outcome = SampleOutcome::Failed;
        result.error = "InternalError";
        result.detail = e.what();
    }
    return result;
}

}  // namespace

std::string_view to_string(OverwritePolicy policy) {
    switch (policy) {
        case OverwritePolicy::Skip: return "skip";
        case OverwritePolicy::Overwrite: return "overwrite";
        case OverwritePolicy::Fail: return "fail";
    }
    return "skip";
}

std::optional<OverwritePolicy> parse_overwrite(std::string_view text) {
    if (text == "skip") return OverwritePolicy::Skip;
    if (text == "overwrite") return OverwritePolicy::Overwrite;
    if (text == "fail") return OverwritePolicy::Fail;
    return std::nullopt;
}

LoadedInput load_input(const InputSource& source, const fetch::Fetcher& fetcher, std::ostream* progress) {
    ProgressLog log(progress);
    std::vector<UrlRecord> raw;
    LoadedInput out;

    switch (source.kind) {
        case InputSource::Kind::CsvFile: {
            auto feed = ingest::load_csv_feed(read_file(source.path), source.default_label);
            raw = std::move(feed.records);
            out.skipped = feed.skipped;
            break;
        }
        case InputSource::Kind::PhishtankDir: {
            std::error_code ec;
            if (!fs::is_directory(source.path, ec)) {
                throw Error(Errc::IoFailure, source.path.string() + " is not a directory");
            }
            std::vector<fs::path> pages;
            for (const auto& entry : fs::directory_iterator(source.path)) {
                if (entry.is_regular_file() && (entry.path().extension() == ".html" || entry.path().extension() == ".htm")) {
                    pages.push_back(entry.path());
                }
            }
            std::sort(pages.begin(), pages.end());
            for (const auto& p : pages) {
                try {
                    raw.push_back(ingest::parse_phishtank_detail(read_file(p), p.stem().string()));
                } catch (const Error& e) {
                    ++out.skipped;
                    log.line("skip " + p.filename().string() + ": " + e.what());
                }
            }
            break;
        }
        case InputSource::Kind::IdRange: {
            if (source.url_template.find("{id}") == std::string::npos) {
                throw Error(Errc::InvalidArgument, "URL template lacks {id}");
            }
            for (long id = source.first_id; id <= source.last_id; ++id) {
                std::string u = source.url_template;
                u.replace(u.find("{id}"), 4, std::to_string(id));
                fetch::FetchResult r = fetcher.page(u);
                if (!r.ok()) {
                    ++out.skipped;
                    log.line("skip " + std::to_string(id) + ": " + failure_reason(*r.failure));
                    continue;
                }
                try {
                    raw.push_back(ingest::parse_phishtank_detail(r.body, std::to_string(id)));
                } catch (const Error& e) {
                    ++out.skipped;
                    log.line("skip " + std::to_string(id) + ": " + e.what());
                }
            }
            break;
        }
    }

    out.records = ingest::dedupe(raw);
    out.duplicates = raw.size() - out.records.size();
    if (out.records.empty()) throw Error(Errc::EmptyFeed, "no usable URLs in the input");
    return out;
}

void RunConfig::validate() const {
    if (workers < 1) throw Error(Errc::InvalidArgument, "workers must be at least 1");
    if (screenshot_sessions < 1) throw Error(Errc::InvalidArgument, "screenshot sessions must be at least 1");
    if (max_failure_ratio < 0 || max_failure_ratio > 1) {
        throw Error(Errc::InvalidArgument, "max failure ratio must lie in [0, 1]");
    }
    if (root.empty()) throw Error(Errc::InvalidArgument, "archive root is required");
    if (screenshots && !provider_factory) throw Error(Errc::InvalidArgument, "screenshots need a provider");
    policy.validate();
    viewport.validate();
}

std::string RunSummary::to_json() const {
    nlohmann::ordered_json j;
    j["attempted"] = attempted;
    j["succeeded"] = succeeded;
    j["failed"] = failed;
    j["skipped_existing"] = skipped_existing;
    j["input_skipped"] = input_skipped;
    j["duplicates"] = duplicates;
    j["error_counts"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : error_counts) j["error_counts"][k] = v;
    j["resources_failed"] = resources_failed;
    j["screenshots_skipped"] = screenshots_skipped;
    j["requests"] = requests;
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& s : samples) {
        if (s.outcome == SampleOutcome::Failed) {
            j["failures"].push_back({{"sample_id", s.sample_id}, {"error", s.error}, {"detail", s.detail}});
        }
    }
    return j.dump(2) + "\n";
}

SampleResult collect_sample(const UrlRecord& record, const RunConfig& config, const fetch::Fetcher& fetcher,
                            snapshot::ScreenshotProvider* provider) {
    CaptureFn capture;
    if (config.screenshots && provider) {
        capture = [&](const snapshot::CaptureTarget& t) { return snapshot::capture_viewport(t, config.viewport, *provider); };
    }
    return collect_one(record, config, fetcher, capture);
}

RunSummary run_collect(const RunConfig& config) {
    config.validate();
    auto scheduler = config.scheduler ? config.scheduler : std::make_shared<fetch::HostScheduler>(config.policy.per_host_delay);
    fetch::Fetcher fetcher(config.policy, scheduler);
    LoadedInput input = load_input(config.input, fetcher, config.progress);
    RunConfig with_scheduler = config;
    with_scheduler.scheduler = scheduler;
    RunSummary summary = run_collect(with_scheduler, input.records);
    summary.input_skipped = input.skipped;
    summary.duplicates = input.duplicates;
    summary.requests = scheduler->request_count();
    write_file(summary_path(config.root), summary.to_json());
    return summary;
}

RunSummary run_collect(const RunConfig& config, const std::vector<UrlRecord>& records) {
    config.validate();
    std::error_code ec;
    fs::create_directories(config.root, ec);
    if (!fs::is_directory(config.root, ec)) {
        throw Error(Errc::IoFailure, "cannot create archive root " + config.root.string());
    }

    auto scheduler = config.scheduler ? config.scheduler : std::make_shared<fetch::HostScheduler>(config.policy.per_host_delay);
    fetch::Fetcher fetcher(config.policy, scheduler);

    std::unique_ptr<ProviderPool> pool;
    CaptureFn capture;
    if (config.screenshots) {
        pool = std::make_unique<ProviderPool>(config.provider_factory, config.screenshot_sessions);
        capture = [&](const snapshot::CaptureTarget& t) {
            return pool->with([&](snapshot::ScreenshotProvider& p) { return snapshot::capture_viewport(t, config.viewport, p); });
        };
    }

    ProgressLog log(config.progress);
    std::vector<SampleResult> results(records.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            results[i] = collect_one(records[i], config, fetcher, capture);
            const auto& r = results[i];
            std::string status = r.outcome == SampleOutcome::Succeeded   ? "ok"
                                 : r.outcome == SampleOutcome::Failed    ? "FAILED " + r.error
                                                                          : "exists, skipped";
            log.line("[" + std::to_string(i + 1) + "/" + std::to_string(records.size()) + "] " + r.sample_id + " " +
                     status);
        }
    };
    {
        std::vector<std::jthread> threads;
        std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(config.workers), std::max<std::size_t>(records.size(), 1));
        for (std::size_t t = 0; t < n; ++t) threads.emplace_back(work);
    }

    RunSummary summary;
    summary.attempted = records.size();
    for (auto& r : results) {
        switch (r.outcome) {
            case SampleOutcome::Succeeded: ++summary.succeeded; break;
            case SampleOutcome::SkippedExisting: ++summary.skipped_existing; break;
            case SampleOutcome::Failed:
                ++summary.failed;
                ++summary.error_counts[r.error];
                break;
        }
        if (r.outcome != SampleOutcome::Succeeded) continue;
        try {
            auto m = store::read_manifest(config.root / r.sample_id);
            for (const auto& ref : m.resources) {
                if (ref.status.state == store::ResourceState::FetchFailed) ++summary.resources_failed;
                if (ref.kind == ResourceKind::Screenshot && !ref.status.is_ok()) ++summary.screenshots_skipped;
            }
        } catch (const Error&) {
        }
    }
    summary.samples = std::move(results);
    summary.requests = scheduler->request_count();
    return summary;
}

fs::path summary_path(const fs::path& root) {
    fs::path r = fs::absolute(root).lexically_normal();
    if (!r.has_filename()) r = r.parent_path();
    return r.parent_path() / (r.filename().string() + ".summary.json");
}

int exit_code(const RunSummary& summary, double max_failure_ratio) {
    if (summary.succeeded + summary.skipped_existing == 0) return 1;
    if (summary.attempted > 0 &&
        static_cast<double>(summary.failed) / static_cast<double>(summary.attempted) > max_failure_ratio) {
        return 3;
    }
    return 0;
}

FeaturesRun run_features(const fs::path& root, const fs::path& output_csv,
                         const features::IntelligenceProvider& provider, std::ostream* skip_log) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(Errc::IoFailure, root.string() + " is not a directory");
    std::vector<fs::path> samples;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) samples.push_back(entry.path());
    }
    std::sort(samples.begin(), samples.end());

    FeaturesRun run;
    std::string out = features::csv_header();
    for (const auto& dir : samples) {
        try {
            out += features::csv_row(features::extract_feature_vector(dir, provider));
            ++run.rows;
        } catch (const Error& e) {
            run.skipped.emplace_back(dir.filename().string(), e.what());
            if (skip_log) *skip_log << "skip " << dir.filename().string() << ": " << e.what() << '\n';
        }
    }
    write_file(output_csv, out);
    return run;
}

std::string run_analyze(const AnalyzeConfig& config) {
    analyze::FeatureMatrix a = analyze::load_matrix(config.matrix);
    analyze::CorrelationReport report = analyze::correlation_with_label(a);
    auto top = analyze::top_k_report(report, config.top_k);
    const std::string name_a = config.matrix.stem().string();

    write_file(config.output_dir / "correlation.csv", analyze::report_csv(report));
    write_file(config.output_dir / "top_k.csv", analyze::top_k_csv(top));
    write_file(config.output_dir / "correlation.json", analyze::report_json(report, top, name_a));

    std::string text = "top " + std::to_string(top.size()) + " of " + std::to_string(report.defined_count()) +
                       " defined features (" + name_a + ", " + std::to_string(a.row_count()) + " rows)\n" +
                       analyze::top_k_table(top);
    if (report.defined_count() < report.coefficients.size()) {
        text += "undefined (zero variance):";
        for (const auto& c : report.coefficients) {
            if (!c.value) text += " " + c.feature;
        }
        text += "\n";
    }

    if (config.second) {
        analyze::FeatureMatrix b = analyze::load_matrix(*config.second);
        auto rows = analyze::compare_matrices(a, b);
        std::string name_b = config.second->stem().string();
        if (name_b == name_a) name_b += "_2";
        write_file(config.output_dir / "comparison.csv", analyze::comparison_csv(rows));
        write_file(config.output_dir / "comparison.json", analyze::comparison_json(rows, name_a, name_b));
        text += "\n" + analyze::comparison_table(rows, name_a, name_b);
    }
    return text;
}

std::string run_stats(const fs::path& root, const fs::path& output_csv) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(Errc::IoFailure, root.string() + " is not a directory");
    store::ResourceStats stats = store::collect_stats(root);
    write_file(output_csv, store::stats_csv(stats));
    return store::stats_table(stats);
}

}  // namespace phishcollect::pipeline
