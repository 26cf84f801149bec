#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "phishcollect/error.hpp"
#include "phishcollect/features.hpp"
#include "phishcollect/pipeline.hpp"
#include "phishcollect/snapshot.hpp"

namespace {

using namespace phishcollect;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct CollectFlags {
    std::string input;
    std::string input_kind = "csv";
    long id_first = 0;
    long id_last = -1;
    std::string url_template = pipeline::InputSource{}.url_template;
    std::string label = "phishing";
    std::string root;
    int workers = 8;
    bool screenshots = false;
    std::string provider = "devtools";
    std::string devtools = "127.0.0.1:9222";
    int screenshot_sessions = 2;
    bool live_capture = false;
    bool insecure = false;
    std::string overwrite = "skip";
    double max_failure_ratio = 1.0;
    long connect_timeout_ms = 10'000;
    long total_timeout_ms = 60'000;
    int max_redirects = 10;
    std::size_t max_body_bytes = 25u << 20;
    int retries = 2;
    long per_host_delay_ms = 500;
    std::string user_agent = fetch::FetchPolicy{}.user_agent;
    int viewport_width = 1366;
    int viewport_height = 768;
    long settle_ms = 2000;
    bool quiet = false;
};

pipeline::RunConfig to_run_config(const CollectFlags& f) {
    pipeline::RunConfig c;
    if (f.input_kind == "csv") {
        c.input.kind = pipeline::InputSource::Kind::CsvFile;
    } else if (f.input_kind == "phishtank-dir") {
        c.input.kind = pipeline::InputSource::Kind::PhishtankDir;
    } else {
        c.input.kind = pipeline::InputSource::Kind::IdRange;
    }
    if (c.input.kind != pipeline::InputSource::Kind::IdRange && f.input.empty()) {
        throw Error(Errc::InvalidArgument, "--input is required for --input-kind " + f.input_kind);
    }
    if (c.input.kind == pipeline::InputSource::Kind::IdRange && f.id_last < f.id_first) {
        throw Error(Errc::InvalidArgument, "--id-last must be >= --id-first");
    }
    c.input.path = f.input;
    c.input.first_id = f.id_first;
    c.input.last_id = f.id_last;
    c.input.url_template = f.url_template;
    c.input.default_label = *parse_label(f.label);
    c.root = f.root;
    c.workers = f.workers;
    c.screenshots = f.screenshots;
    c.screenshot_sessions = f.screenshot_sessions;
    c.live_capture = f.live_capture;
    c.overwrite = *pipeline::parse_overwrite(f.overwrite);
    c.max_failure_ratio = f.max_failure_ratio;
    c.policy.connect_timeout = std::chrono::milliseconds(f.connect_timeout_ms);
    c.policy.total_timeout = std::chrono::milliseconds(f.total_timeout_ms);
    c.policy.max_redirects = f.max_redirects;
    c.policy.max_body_bytes = f.max_body_bytes;
    c.policy.retries = f.retries;
    c.policy.per_host_delay = std::chrono::milliseconds(f.per_host_delay_ms);
    c.policy.user_agent = f.user_agent;
    c.policy.insecure = f.insecure;
    c.viewport.width = f.viewport_width;
    c.viewport.height = f.viewport_height;
    c.viewport.settle_delay = std::chrono::milliseconds(f.settle_ms);

    if (f.provider == "stub") {
        c.provider_factory = [] { return std::make_unique<snapshot::StubProvider>(); };
    } else {
        auto colon = f.devtools.rfind(':');
        if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "--devtools wants host:port");
        std::string host = f.devtools.substr(0, colon);
        int port = 0;
        try {
            port = std::stoi(f.devtools.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(Errc::InvalidArgument, "--devtools wants host:port");
        }
        c.provider_factory = [host, port] { return std::make_unique<snapshot::DevToolsProvider>(host, port); };
    }
    if (!f.quiet) c.progress = &std::cerr;
    return c;
}

void add_config_option(CLI::App* app) {
    app->set_config("--config", "", "Flat key=value file; keys are the long flag names, flags win");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Archive phishing/legitimate landing pages and derive UCI-style feature vectors"};
    app.require_subcommand(1);

    CollectFlags cf;
    auto* collect = app.add_subcommand("collect", "Archive every input URL under --root");
    add_config_option(collect);
    collect->add_option("--input", cf.input, "CSV feed, or directory of saved PhishTank detail pages");
    collect->add_option("--input-kind", cf.input_kind)
        ->check(CLI::IsMember({"csv", "phishtank-dir", "id-range"}))
        ->capture_default_str();
    collect->add_option("--id-first", cf.id_first, "First PhishTank id (id-range input)");
    collect->add_option("--id-last", cf.id_last, "Last PhishTank id (id-range input)");
    collect->add_option("--url-template", cf.url_template, "Detail page URL with {id}")->capture_default_str();
    collect->add_option("--label", cf.label, "Label for rows without one")
        ->check(CLI::IsMember({"phishing", "legitimate"}))
        ->capture_default_str();
    collect->add_option("--root", cf.root, "Archive root directory")->required();
    collect->add_option("--workers", cf.workers)->check(CLI::PositiveNumber)->capture_default_str();
    collect->add_flag("--screenshots,!--no-screenshots", cf.screenshots, "Capture a viewport screenshot per sample");
    collect->add_option("--screenshot-provider", cf.provider)
        ->check(CLI::IsMember({"devtools", "stub"}))
        ->capture_default_str();
    collect->add_option("--devtools", cf.devtools, "Browser remote-debugging endpoint host:port")->capture_default_str();
    collect->add_option("--screenshot-sessions", cf.screenshot_sessions)->check(CLI::PositiveNumber)->capture_default_str();
    collect->add_flag("--live-capture", cf.live_capture, "Screenshot the live URL instead of the saved HTML");
    collect->add_flag("--insecure", cf.insecure, "Do not verify TLS certificates");
    collect->add_option("--overwrite", cf.overwrite, "What to do with existing samples")
        ->check(CLI::IsMember({"skip", "overwrite", "fail"}))
        ->capture_default_str();
    collect->add_option("--max-failure-ratio", cf.max_failure_ratio, "Exit 3 when more samples than this fail")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    collect->add_option("--connect-timeout-ms", cf.connect_timeout_ms)->capture_default_str();
    collect->add_option("--total-timeout-ms", cf.total_timeout_ms)->capture_default_str();
    collect->add_option("--max-redirects", cf.max_redirects)->capture_default_str();
    collect->add_option("--max-body-bytes", cf.max_body_bytes)->capture_default_str();
    collect->add_option("--retries", cf.retries)->capture_default_str();
    collect->add_option("--per-host-delay-ms", cf.per_host_delay_ms)->capture_default_str();
    collect->add_option("--user-agent", cf.user_agent)->capture_default_str();
    collect->add_option("--viewport-width", cf.viewport_width)->capture_default_str();
    collect->add_option("--viewport-height", cf.viewport_height)->capture_default_str();
    collect->add_option("--settle-ms", cf.settle_ms)->capture_default_str();
    collect->add_flag("--quiet", cf.quiet, "No per-sample progress on stderr");

    std::string f_root, f_output, f_intel;
    auto* feats = app.add_subcommand("features", "Write the 30-feature matrix of an archive");
    add_config_option(feats);
    feats->add_option("--root", f_root, "Archive root")->required()->check(CLI::ExistingDirectory);
    feats->add_option("--output", f_output, "Matrix CSV to write")->required();
    feats->add_option("--intel", f_intel, "JSON file of third-party lookups")->check(CLI::ExistingFile);

    pipeline::AnalyzeConfig ac;
    std::string a_input, a_compare, a_out = ".";
    auto* analyze = app.add_subcommand("analyze", "Rank features by correlation with the label");
    add_config_option(analyze);
    analyze->add_option("--input", a_input, "Feature matrix (CSV or ARFF)")->required()->check(CLI::ExistingFile);
    analyze->add_option("--compare", a_compare, "Second matrix for a side-by-side table")->check(CLI::ExistingFile);
    analyze->add_option("--top-k", ac.top_k)->check(CLI::PositiveNumber)->capture_default_str();
    analyze->add_option("--output-dir", a_out, "Where report files go")->capture_default_str();

    std::string s_root, s_output;
    auto* stats = app.add_subcommand("stats", "Per-class resource counts of an archive");
    add_config_option(stats);
    stats->add_option("--root", s_root, "Archive root")->required()->check(CLI::ExistingDirectory);
    stats->add_option("--output", s_output, "CSV to write (default <root>.stats.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*collect) {
            pipeline::RunConfig config;
            try {
                config = to_run_config(cf);
                config.validate();
            } catch (const Error& e) {
                std::cerr << "configuration error: " << e.what() << '\n';
                return kExitConfig;
            }
            pipeline::RunSummary summary = pipeline::run_collect(config);
            std::cout << summary.to_json();
            std::cerr << "summary written to " << pipeline::summary_path(config.root).string() << '\n';
            return pipeline::exit_code(summary, config.max_failure_ratio);
        }
        if (*feats) {
            std::unique_ptr<features::IntelligenceProvider> provider;
            if (f_intel.empty()) {
                provider = std::make_unique<features::OfflineProvider>();
            } else {
                provider = std::make_unique<features::JsonFileProvider>(f_intel);
            }
            auto run = pipeline::run_features(f_root, f_output, *provider, &std::cerr);
            std::cerr << run.rows << " rows, " << run.skipped.size() << " skipped\n";
            return kExitOk;
        }
        if (*analyze) {
            ac.matrix = a_input;
            if (!a_compare.empty()) ac.second = a_compare;
            ac.output_dir = a_out;
            std::cout << pipeline::run_analyze(ac);
            return kExitOk;
        }
        if (*stats) {
            fs::path out = s_output;
            if (out.empty()) {
                fs::path r = fs::absolute(s_root).lexically_normal();
                if (!r.has_filename()) r = r.parent_path();
                out = r.parent_path() / (r.filename().string() + ".stats.csv");
            }
            std::cout << pipeline::run_stats(s_root, out);
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == Errc::InvalidArgument ? kExitConfig : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}
