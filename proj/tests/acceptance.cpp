#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "archive_checks.hpp"
#include "feature_goldens.hpp"
#include "fixture_server.hpp"
#include "fixture_site.hpp"
#include "pearson_oracle.hpp"
#include "phishcollect/analyze.hpp"
#include "phishcollect/error.hpp"
#include "phishcollect/features.hpp"
#include "phishcollect/pipeline.hpp"
#include "phishcollect/url.hpp"
#include "rfc3986_cases.hpp"
#include "stats_corpus.hpp"
#include "temp_dir.hpp"

using namespace phishcollect;
using namespace phishcollect::testing;
using Steady = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

Verdict pass(std::string detail) { return {true, std::move(detail)}; }
Verdict fail(std::string detail) { return {false, std::move(detail)}; }

double seconds_since(Steady::time_point start) {
    return std::chrono::duration<double>(Steady::now() - start).count();
}

std::string fmt_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    return buf;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(PHISHCOLLECT_CLI) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

pipeline::RunConfig fixture_config(const fs::path& input, const fs::path& root) {
    pipeline::RunConfig c;
    c.input.path = input;
    c.root = root;
    c.policy.retries = 0;
    c.clock = [] { return std::chrono::system_clock::time_point(std::chrono::seconds(1685620800)); };
    return c;
}

Verdict criterion_1() {
    FixtureServer server;
    std::string url = install_reference_page(server);
    TempDir tmp;
    write_file(tmp / "in.csv", "id,url,label\nref," + url + ",phishing\n");

    std::vector<std::map<std::string, std::string>> trees;
    double slowest = 0;
    for (const char* name : {"run1", "run2"}) {
        auto c = fixture_config(tmp / "in.csv", tmp / name);
        c.screenshots = true;
        c.provider_factory = [] { return std::make_unique<snapshot::StubProvider>(); };
        auto start = Steady::now();
        auto summary = pipeline::run_collect(c);
        slowest = std::max(slowest, seconds_since(start));
        if (summary.succeeded != 1) return fail("sample did not succeed");
        fs::path sample = tmp / name / "ref";
        const std::pair<const char*, std::size_t> expected[] = {
            {"HTML", 1}, {"Javascript", 3}, {"CSS", 3}, {"Images", 3}, {"Favicon", 1}, {"Screenshots", 1}};
        for (const auto& [dir, n] : expected) {
            std::size_t got = count_files(sample / dir);
            if (got != n) return fail(std::string(dir) + " has " + std::to_string(got) + " files, want " + std::to_string(n));
        }
        if (fs::exists(sample / "Javascript" / "inline.js") == false) return fail("no Javascript/inline.js");
        if (fs::exists(sample / "CSS" / "inline.css") == false) return fail("no CSS/inline.css");
        if (auto problem = bijection_problem(sample); !problem.empty()) return fail("bijection: " + problem);
        trees.push_back(tree_contents(tmp / name));
    }
    if (trees[0] != trees[1]) return fail("two runs differ");
    if (slowest >= 10.0) return fail("slowest run took " + fmt_seconds(slowest));
    return pass("1/3/3/3/1/1 files, bijection holds, runs byte-identical, slowest " + fmt_seconds(slowest));
}

Verdict criterion_2() {
    FixtureServer server;
    server.page("/ok.html", "<html><body>fine</body></html>");
    server.status("/forbidden.html", 403);
    TempDir tmp;
    write_file(tmp / "in.csv", "id,url\nok," + server.url("/ok.html") + "\nforbidden," +
                                   server.url("/forbidden.html") + "\nmissing," + server.url("/missing.html") + "\n");
    auto c = fixture_config(tmp / "in.csv", tmp / "archive");
    auto start = Steady::now();
    pipeline::RunSummary summary;
    try {
        summary = pipeline::run_collect(c);
    } catch (const std::exception& e) {
        return fail(std::string("run threw: ") + e.what());
    }
    double took = seconds_since(start);
    auto kind_of = [&](const char* id) -> std::string {
        auto m = store::read_manifest(tmp / "archive" / id);
        return m.error ? m.error->kind : "none";
    };
    if (kind_of("forbidden") != "ContentForbidden") return fail("403 recorded as " + kind_of("forbidden"));
    if (kind_of("missing") != "FileNotFound") return fail("404 recorded as " + kind_of("missing"));
    if (kind_of("ok") != "none") return fail("ok page recorded an error");
    if (summary.succeeded != 1 || summary.failed != 2) return fail("summary counts wrong");
    int lenient = pipeline::exit_code(summary, 1.0);
    int strict = pipeline::exit_code(summary, 0.5);
    if (lenient != 0 || strict != 3) {
        return fail("exit codes " + std::to_string(lenient) + "/" + std::to_string(strict) + ", want 0/3");
    }
    if (took >= 5.0) return fail("took " + fmt_seconds(took));
    return pass("ContentForbidden and FileNotFound recorded, exit 0 at ratio 1.0 and 3 at 0.5, " + fmt_seconds(took));
}

Verdict criterion_3() {
    std::size_t total = 0;
    auto check = [&](const auto& cases, auto resolver) -> std::string {
        for (const auto& c : cases) {
            ++total;
            std::string got = resolver(c.base, c.reference);
            if (got != c.expected) {
                return std::string(c.reference) + " -> " + got + ", want " + std::string(c.expected);
            }
        }
        return {};
    };
    auto rfc = [](std::string_view b, std::string_view r) { return url::resolve(b, r); };
    auto page = [](std::string_view b, std::string_view r) { return url::resolve_url(b, r); };
    for (auto problem : {check(kRfcNormal, rfc), check(kRfcAbnormal, rfc), check(kPageCases, page)}) {
        if (!problem.empty()) return fail(problem);
    }
    if (total < 20) return fail("only " + std::to_string(total) + " cases");
    return pass(std::to_string(total) + " resolution cases exact");
}

Verdict criterion_4() {
    TempDir root;
    auto pages = golden_pages();
    if (pages.size() < 10) return fail("only " + std::to_string(pages.size()) + " golden pages");
    for (const auto& page : pages) {
        if (page.url.size() != page.url_length) return fail(page.name + ": URL length is not the hand count");
        auto dir = write_golden_sample(root.path(), page);
        auto v = features::extract_feature_vector(dir, page.intel);
        for (std::size_t i = 0; i < features::kFeatureCount; ++i) {
            if (v.values[i] != page.expected[i]) {
                return fail(page.name + ": " + std::string(features::kFeatureNames[i]) + " = " +
                            std::to_string(v.values[i]) + ", want " + std::to_string(page.expected[i]));
            }
        }
        if (v.label != label_value(page.label)) return fail(page.name + ": label");
    }
    return pass(std::to_string(pages.size()) + " golden pages match their 30-tuples");
}

std::vector<std::string> ranked_names(const analyze::CorrelationReport& r) {
    std::vector<std::string> out;
    for (auto i : r.ranking) out.push_back(r.coefficients[i].feature);
    return out;
}

Verdict criterion_5() {
    std::mt19937 rng(20230601);
    double worst = 0;
    for (int round = 0; round < 100; ++round) {
        std::size_t rows = 2 + rng() % 999;
        auto m = random_ternary_matrix(rng, rows, 30);
        auto report = analyze::correlation_with_label(m);
        for (std::size_t c = 0; c < 30; ++c) {
            auto expected = brute_force_pearson(column(m, c), m.labels);
            const auto& got = report.coefficients[c].value;
            if (expected.has_value() != got.has_value()) {
                return fail("matrix " + std::to_string(round) + " column " + std::to_string(c) + ": definedness differs");
            }
            if (expected) worst = std::max(worst, std::abs(*expected - *got));
        }
        if (worst > 1e-10) return fail("matrix " + std::to_string(round) + ": difference " + std::to_string(worst));

        auto permuted = m;
        std::vector<std::size_t> order(rows);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < rows; ++i) {
            permuted.rows[i] = m.rows[order[i]];
            permuted.labels[i] = m.labels[order[i]];
        }
        auto scaled = m;
        std::uniform_real_distribution<double> factor(0.01, 100.0);
        for (std::size_t c = 0; c < 30; ++c) {
            double k = factor(rng);
            for (auto& row : scaled.rows) row[c] *= k;
        }
        auto base = ranked_names(report);
        if (ranked_names(analyze::correlation_with_label(permuted)) != base) {
            return fail("matrix " + std::to_string(round) + ": ranking changed under row permutation");
        }
        if (ranked_names(analyze::correlation_with_label(scaled)) != base) {
            return fail("matrix " + std::to_string(round) + ": ranking changed under column scaling");
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", worst);
    return pass(std::string("100 matrices, max difference ") + buf + ", rankings invariant");
}

Verdict criterion_6() {
    const char* env = std::getenv("PHISHCOLLECT_UCI_DATASET");
    if (!env || !*env) return fail("PHISHCOLLECT_UCI_DATASET not set; the UCI Phishing Websites file is not available");
    fs::path data(env);
    if (!fs::is_regular_file(data)) return fail(data.string() + " does not exist");
    analyze::FeatureMatrix m;
    try {
        m = analyze::load_matrix(data);
    } catch (const std::exception& e) {
        return fail(std::string("cannot load: ") + e.what());
    }
    if (m.row_count() != 11'055 || m.feature_names.size() != 30) {
        return fail("shape " + std::to_string(m.row_count()) + " x " + std::to_string(m.feature_names.size()));
    }
    auto report = analyze::correlation_with_label(m);
    if (report.defined_count() != 30) return fail(std::to_string(report.defined_count()) + " defined coefficients");
    TempDir tmp;
    for (const char* out : {"a", "b"}) {
        int rc = run_cli("analyze --input '" + data.string() + "' --top-k 16 --output-dir " + (tmp / out).string());
        if (rc != 0) return fail("analyze exited " + std::to_string(rc));
    }
    std::string a = slurp(tmp / "a" / "top_k.csv");
    if (a != slurp(tmp / "b" / "top_k.csv")) return fail("top-16 differs between runs");
    if (std::count(a.begin(), a.end(), '\n') != 17) return fail("top_k.csv does not hold 16 rows");
    return pass("11055 x 30 loaded, 30 defined coefficients, top-16 identical across runs");
}

Verdict criterion_7() {
    FixtureServer server;
    constexpr int kHosts = 10;
    constexpr int kPages = 100;
    for (int p = 0; p < kPages; ++p) {
        std::string base = "/p" + std::to_string(p);
        server.page(base + "/index.html", "<html><head><link rel=\"stylesheet\" href=\"s.css\"></head><body><img src=\"i.png\">"
                                          "page " + std::to_string(p) + "</body></html>");
        server.page(base + "/s.css", "body { color: black; }\n", "text/css");
        server.page(base + "/i.png", "\x89PNG-" + std::to_string(p), "image/png");
    }
    std::string csv = "id,url\n";
    for (int p = 0; p < kPages; ++p) {
        std::string host = "127.0.0." + std::to_string(2 + p % kHosts);
        csv += "page" + std::to_string(p) + "," + server.url("/p" + std::to_string(p) + "/index.html", host) + "\n";
    }
    TempDir tmp;
    write_file(tmp / "in.csv", csv);
    auto c = fixture_config(tmp / "in.csv", tmp / "archive");
    c.workers = 8;
    c.scheduler = std::make_shared<fetch::HostScheduler>(c.policy.per_host_delay);
    auto start = Steady::now();
    auto summary = pipeline::run_collect(c);
    double took = seconds_since(start);
    if (summary.succeeded != kPages) return fail(std::to_string(summary.succeeded) + " of 100 pages succeeded");

    std::map<std::string, std::vector<Steady::time_point>> by_host;
    for (const auto& e : c.scheduler->log()) by_host[e.host].push_back(e.at);
    if (by_host.size() != kHosts) return fail(std::to_string(by_host.size()) + " hosts in the request log");
    auto min_gap = std::chrono::milliseconds::max();
    for (auto& [host, times] : by_host) {
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i < times.size(); ++i) {
            min_gap = std::min(min_gap, std::chrono::duration_cast<std::chrono::milliseconds>(times[i] - times[i - 1]));
        }
    }
    if (min_gap < std::chrono::milliseconds(500)) {
        return fail("same-host gap of " + std::to_string(min_gap.count()) + " ms");
    }
    if (took >= 120.0) return fail("took " + fmt_seconds(took));
    return pass("100 pages, " + std::to_string(summary.requests) + " requests in " + fmt_seconds(took) +
                ", smallest same-host gap " + std::to_string(min_gap.count()) + " ms");
}

Verdict criterion_8() {
    TempDir tmp;
    fs::create_directories(tmp / "archive");
    build_stats_corpus(tmp / "archive");
    for (const char* out : {"s1.csv", "s2.csv"}) {
        int rc = run_cli("stats --root " + (tmp / "archive").string() + " --output " + (tmp / out).string());
        if (rc != 0) return fail("stats exited " + std::to_string(rc));
        if (slurp(tmp / out) != kStatsCorpusCsv) return fail(std::string(out) + " differs from the hand-counted table");
    }
    return pass("hand-counted table reproduced on two runs");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Verdict()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                            criterion_5, criterion_6, criterion_7, criterion_8};
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            selected.push_back(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty()) {
        selected.resize(criteria.size());
        std::iota(selected.begin(), selected.end(), 1);
    }
    bool all = true;
    for (int n : selected) {
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::cerr << "no criterion " << n << '\n';
            return 2;
        }
        Verdict v;
        try {
            v = criteria[n - 1]();
        } catch (const std::exception& e) {
            v = fail(std::string("exception: ") + e.what());
        }
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << v.detail << std::endl;
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
