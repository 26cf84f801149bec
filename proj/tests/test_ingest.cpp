#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "phishcollect/error.hpp"
#include "phishcollect/ingest.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect {
namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename Fn>
Errc error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::InvalidArgument;
}

const std::string kData = TEST_DATA_DIR;

TEST(PhishtankDetail, ExtractsSubmittedUrl) {
    auto rec = ingest::parse_phishtank_detail(slurp(kData + "/phishtank/8220112.html"), "8220112");
    EXPECT_EQ(rec.sample_id, "8220112");
    EXPECT_EQ(rec.url, "http://paypal-net.com/");
    EXPECT_EQ(rec.label, ClassLabel::Phishing);
    EXPECT_EQ(rec.source, RecordSource::PhishtankDetail);
}

TEST(PhishtankDetail, EmptyUrlCell) {
    auto page = slurp(kData + "/phishtank/8220113.html");
    EXPECT_EQ(error_of([&] { ingest::parse_phishtank_detail(page, "8220113"); }), Errc::MissingUrlElement);
}

TEST(PhishtankDetail, LayoutWithoutContainer) {
    auto page = slurp(kData + "/phishtank/8220114.html");
    EXPECT_EQ(error_of([&] { ingest::parse_phishtank_detail(page, "8220114"); }), Errc::MissingUrlElement);
}

TEST(PhishtankDetail, TrimsWhitespace) {
    auto rec = ingest::parse_phishtank_detail(R"(<span style="word-wrap:break-word;"><b>  http://x.com/  </b></span>)", "1");
    EXPECT_EQ(rec.url, "http://x.com/");
}

TEST(PhishtankDetail, NonUrlText) {
    EXPECT_EQ(error_of([] { ingest::parse_phishtank_detail(R"(<span style="word-wrap:break-word"><b>not a url</b></span>)", "1"); }),
              Errc::InvalidUrl);
}

TEST(PhishtankDetail, IgnoresOtherSpans) {
    auto rec = ingest::parse_phishtank_detail(
        R"(<span class="active">ONLINE</span><span style="color:red">x</span><span style="WORD-WRAP : break-word"><b>https://y.org/a</b></span>)",
        "77");
    EXPECT_EQ(rec.url, "https://y.org/a");
}

TEST(PhishtankDetail, PureFunction) {
    auto page = slurp(kData + "/phishtank/8220112.html");
    EXPECT_EQ(ingest::parse_phishtank_detail(page, "8220112"), ingest::parse_phishtank_detail(page, "8220112"));
}

TEST(CsvFeed, FullHeader) {
    auto feed = ingest::load_csv_feed("id,url,label\n1,https://example.com,legitimate\n", ClassLabel::Phishing);
    ASSERT_EQ(feed.records.size(), 1u);
    EXPECT_EQ(feed.records[0], (UrlRecord{"1", "https://example.com", ClassLabel::Legitimate, RecordSource::CsvFeed}));
    EXPECT_EQ(feed.skipped, 0u);
}

TEST(CsvFeed, MalformedRowsSkippedAndCounted) {
    auto feed = ingest::load_csv_feed("url\nhttp://a.com/\nnotaurl\nhttp://b.com/\n", ClassLabel::Phishing);
    ASSERT_EQ(feed.records.size(), 2u);
    EXPECT_EQ(feed.skipped, 1u);
    EXPECT_EQ(feed.records[0].label, ClassLabel::Phishing);
}

TEST(CsvFeed, SynthesizedIdsAreZeroPaddedRowOrdinals) {
    auto feed = ingest::load_csv_feed("url\nhttp://a.com/\nhttp://b.com/\n", ClassLabel::Legitimate);
    ASSERT_EQ(feed.records.size(), 2u);
    EXPECT_EQ(feed.records[0].sample_id, "000001");
    EXPECT_EQ(feed.records[1].sample_id, "000002");
}

TEST(CsvFeed, EmptyFileAndMissingColumn) {
    EXPECT_EQ(error_of([] { ingest::load_csv_feed("", ClassLabel::Phishing); }), Errc::MissingUrlColumn);
    EXPECT_EQ(error_of([] { ingest::load_csv_feed("id,link\n1,http://a.com\n", ClassLabel::Phishing); }), Errc::MissingUrlColumn);
    EXPECT_EQ(error_of([] { ingest::load_csv_feed("url\nnope\n", ClassLabel::Phishing); }), Errc::EmptyFeed);
    EXPECT_EQ(error_of([] { ingest::load_csv_feed("url\n", ClassLabel::Phishing); }), Errc::EmptyFeed);
}

TEST(CsvFeed, ColumnOrderCaseAndQuoting) {
    auto feed = ingest::load_csv_feed("Label,URL,Id\r\nphishing,\"http://a.com/?x=1,2\",abc_1\r\n", ClassLabel::Legitimate);
    ASSERT_EQ(feed.records.size(), 1u);
    EXPECT_EQ(feed.records[0].url, "http://a.com/?x=1,2");
    EXPECT_EQ(feed.records[0].sample_id, "abc_1");
    EXPECT_EQ(feed.records[0].label, ClassLabel::Phishing);
}

TEST(CsvFeed, UnsafeIdsBadLabelsAndDuplicateIdsAreSkipped) {
    auto feed = ingest::load_csv_feed(
        "id,url,label\n../x,http://a.com/,phishing\nok,http://b.com/,maybe\nd,http://c.com/,1\nd,http://d.com/,-1\n",
        ClassLabel::Phishing);
    ASSERT_EQ(feed.records.size(), 1u);
    EXPECT_EQ(feed.records[0].sample_id, "d");
    EXPECT_EQ(feed.records[0].label, ClassLabel::Legitimate);
    EXPECT_EQ(feed.skipped, 3u);
}

TEST(Labels, ParseAndValue) {
    EXPECT_EQ(parse_label("Phishing"), ClassLabel::Phishing);
    EXPECT_EQ(parse_label("-1"), ClassLabel::Phishing);
    EXPECT_EQ(parse_label("legit"), ClassLabel::Legitimate);
    EXPECT_FALSE(parse_label("unknown").has_value());
    EXPECT_EQ(label_value(ClassLabel::Phishing), -1);
    EXPECT_EQ(label_value(ClassLabel::Legitimate), 1);
}

TEST(SampleIds, SafeCharacters) {
    EXPECT_TRUE(is_safe_sample_id("8220112"));
    EXPECT_TRUE(is_safe_sample_id("a-B_9"));
    EXPECT_FALSE(is_safe_sample_id(""));
    EXPECT_FALSE(is_safe_sample_id("a/b"));
    EXPECT_FALSE(is_safe_sample_id(".."));
    EXPECT_FALSE(is_safe_sample_id("a b"));
}

UrlRecord rec(std::string id, std::string u) { return {std::move(id), std::move(u), ClassLabel::Phishing, RecordSource::CsvFeed}; }

TEST(Dedupe, Examples) {
    EXPECT_EQ(ingest::dedupe(std::vector{rec("1", "http://A.com/"), rec("2", "http://a.com/")}).size(), 1u);
    EXPECT_EQ(ingest::dedupe(std::vector{rec("1", "http://a.com/x"), rec("2", "http://a.com/x#frag")}).size(), 1u);
    EXPECT_EQ(ingest::dedupe(std::vector{rec("1", "http://a.com/x"), rec("2", "http://a.com/y")}).size(), 2u);
    auto kept = ingest::dedupe(std::vector{rec("first", "http://a.com:80"), rec("second", "http://a.com/")});
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].sample_id, "first");
}

// Property: output keys are pairwise distinct and the output is a
// subsequence of the input.
TEST(Dedupe, RandomInputsGiveDistinctSubsequence) {
    std::mt19937 rng(11);
    const std::array<std::string_view, 6> hosts = {"a.com", "A.com", "b.org", "a.com:80", "a.com:8080", "B.ORG"};
    const std::array<std::string_view, 5> paths = {"", "/", "/x", "/X", "/x#f"};
    for (int round = 0; round < 200; ++round) {
        std::vector<UrlRecord> in;
        int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            in.push_back(rec(std::to_string(i), "http://" + std::string(hosts[rng() % hosts.size()]) +
                                                    std::string(paths[rng() % paths.size()])));
        }
        auto out = ingest::dedupe(in);
        std::set<std::string> keys;
        for (const auto& r : out) EXPECT_TRUE(keys.insert(url::normalize_for_dedupe(r.url)).second);
        std::size_t j = 0;
        for (const auto& r : in) {
            if (j < out.size() && r == out[j]) ++j;
        }
        EXPECT_EQ(j, out.size());
        std::set<std::string> all;
        for (const auto& r : in) all.insert(url::normalize_for_dedupe(r.url));
        EXPECT_EQ(all.size(), out.size());
    }
}

}  // namespace
}  // namespace phishcollect
