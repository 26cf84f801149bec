#include <gtest/gtest.h>

#include <random>

#include "feature_goldens.hpp"
#include "phishcollect/error.hpp"
#include "phishcollect/extract.hpp"
#include "phishcollect/features.hpp"
#include "temp_dir.hpp"

namespace phishcollect {
namespace {

using features::Feature;
using features::IntelligenceReport;
using features::PartialVector;

constexpr std::array kUrlGroup = {Feature::HavingIpAddress, Feature::UrlLength,        Feature::ShortiningService,
                                  Feature::HavingAtSymbol,  Feature::DoubleSlashRedirecting, Feature::PrefixSuffix,
                                  Feature::HavingSubDomain, Feature::Port,             Feature::HttpsToken};
constexpr std::array kDomainGroup = {Feature::AgeOfDomain, Feature::DnsRecord,  Feature::WebTraffic,
                                     Feature::PageRank,    Feature::GoogleIndex, Feature::LinksPointingToPage,
                                     Feature::StatisticalReport};

int url_feature(std::string_view u, Feature f) { return *features::url_features(u).get(f); }

PartialVector content_of(std::string_view html, std::string_view page_url) {
    return features::content_features(html, page_url, extract::discover(html, page_url));
}
int content_feature(std::string_view html, Feature f, std::string_view page_url = "http://site.com/") {
    return *content_of(html, page_url).get(f);
}

TEST(FeatureGoldens, HandDerivedVectors) {
    testing::TempDir root;
    auto pages = testing::golden_pages();
    ASSERT_GE(pages.size(), 10u);
    for (const auto& page : pages) {
        SCOPED_TRACE(page.name);
        EXPECT_EQ(page.url.size(), page.url_length);
        auto dir = testing::write_golden_sample(root.path(), page);
        auto v = features::extract_feature_vector(dir, page.intel);
        for (std::size_t i = 0; i < features::kFeatureCount; ++i) {
            EXPECT_EQ(v.values[i], page.expected[i]) << features::kFeatureNames[i];
        }
        EXPECT_EQ(v.label, label_value(page.label));
        EXPECT_EQ(features::extract_feature_vector(dir, page.intel), v);
    }
}

TEST(UrlFeatures, LengthBoundaries) {
    auto padded = [](std::size_t n) { return "http://example.com/" + std::string(n - 19, 'p'); };
    EXPECT_EQ(url_feature(padded(53), Feature::UrlLength), 1);
    EXPECT_EQ(url_feature(padded(54), Feature::UrlLength), 0);
    EXPECT_EQ(url_feature(padded(75), Feature::UrlLength), 0);
    EXPECT_EQ(url_feature(padded(76), Feature::UrlLength), -1);
    EXPECT_EQ(url_feature(padded(80), Feature::UrlLength), -1);
}

TEST(UrlFeatures, WorkedExamples) {
    EXPECT_EQ(url_feature("http://125.98.3.123/login", Feature::HavingIpAddress), -1);
    auto v = features::url_features("https://example.com/");
    EXPECT_EQ(v.assigned(), 9u);
    for (auto f : kUrlGroup) EXPECT_TRUE(v.get(f).has_value()) << features::name_of(f);
    EXPECT_EQ(*v.get(Feature::UrlLength), 1);
    EXPECT_EQ(*v.get(Feature::HavingIpAddress), 1);
    EXPECT_EQ(*v.get(Feature::HavingAtSymbol), 1);
    EXPECT_EQ(*v.get(Feature::PrefixSuffix), 1);
}

TEST(UrlFeatures, IndividualRules) {
    EXPECT_EQ(url_feature("http://0x7f.0x0.0x0.0x1/", Feature::HavingIpAddress), -1);
    EXPECT_EQ(url_feature("http://[2001:db8::1]/", Feature::HavingIpAddress), -1);
    EXPECT_EQ(url_feature("http://tinyurl.com/abc", Feature::ShortiningService), -1);
    EXPECT_EQ(url_feature("http://www.bit.ly/abc", Feature::ShortiningService), -1);
    EXPECT_EQ(url_feature("http://user@evil.com/", Feature::HavingAtSymbol), -1);
    EXPECT_EQ(url_feature("https://a.com//x", Feature::DoubleSlashRedirecting), -1);
    EXPECT_EQ(url_feature("https://a.com/x", Feature::DoubleSlashRedirecting), 1);
    EXPECT_EQ(url_feature("http://a.com/?u=http://b.com", Feature::DoubleSlashRedirecting), -1);
    EXPECT_EQ(url_feature("http://my-bank.com/", Feature::PrefixSuffix), -1);
    EXPECT_EQ(url_feature("http://my-cdn.bank.com/", Feature::PrefixSuffix), 1);
    EXPECT_EQ(url_feature("http://a.com/", Feature::HavingSubDomain), 1);
    EXPECT_EQ(url_feature("http://www.a.com/", Feature::HavingSubDomain), 1);
    EXPECT_EQ(url_feature("http://x.a.com/", Feature::HavingSubDomain), 0);
    EXPECT_EQ(url_feature("http://y.x.a.com/", Feature::HavingSubDomain), -1);
    EXPECT_EQ(url_feature("http://a.com:80/", Feature::Port), 1);
    EXPECT_EQ(url_feature("http://a.com:443/", Feature::Port), -1);
    EXPECT_EQ(url_feature("http://https-a.com/", Feature::HttpsToken), -1);
    EXPECT_EQ(url_feature("https://a.com/https", Feature::HttpsToken), 1);
}

// Property: length, '@', "//" position and port rules agree with a direct
// reading of the rule table on random URLs.
TEST(UrlFeatures, AgreeWithIndependentRuleReading) {
    std::mt19937 rng(5);
    const std::array<std::string_view, 6> hosts = {"a.com", "shop.example.org", "x-y.net", "10.0.0.1", "m.n.o.co.uk", "bit.ly"};
    const std::array<std::string_view, 7> bits = {"p", "/", "//", "@", "q=1", "https", "-"};
    for (int round = 0; round < 1000; ++round) {
        std::string u = rng() % 2 ? "http://" : "https://";
        u += hosts[rng() % hosts.size()];
        int port_choice = static_cast<int>(rng() % 4);
        if (port_choice == 1) u += ":80";
        if (port_choice == 2) u += ":443";
        if (port_choice == 3) u += ":8081";
        u += "/";
        int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) u += bits[rng() % bits.size()];
        auto v = features::url_features(u);

        int expected_length = u.size() < 54 ? 1 : u.size() <= 75 ? 0 : -1;
        EXPECT_EQ(*v.get(Feature::UrlLength), expected_length) << u;
        EXPECT_EQ(*v.get(Feature::HavingAtSymbol), u.find('@') == std::string::npos ? 1 : -1) << u;

        int last = -1;
        for (std::size_t i = 0; i + 1 < u.size(); ++i) {
            if (u[i] == '/' && u[i + 1] == '/') last = static_cast<int>(i) + 1;  // 1-based
        }
        EXPECT_EQ(*v.get(Feature::DoubleSlashRedirecting), last > 7 ? -1 : 1) << u;

        bool https = u.starts_with("https");
        bool nonstandard = port_choice == 3 || (port_choice == 1 && https) || (port_choice == 2 && !https);
        EXPECT_EQ(*v.get(Feature::Port), nonstandard ? -1 : 1) << u;
    }
}

TEST(ContentFeatures, AnchorExamples) {
    EXPECT_EQ(content_feature(R"(<a href="#">a</a><a href="#">b</a>)", Feature::UrlOfAnchor), -1);
    EXPECT_EQ(content_feature(R"x(<a href="#content">a</a><a href="JavaScript::void()">b</a>)x", Feature::UrlOfAnchor), -1);
    EXPECT_EQ(content_feature("<p>no links</p>", Feature::UrlOfAnchor), 1);
    EXPECT_EQ(content_feature(R"(<a href="/a">a</a><a href="/b">b</a><a>c</a>)", Feature::UrlOfAnchor), 0);
    EXPECT_EQ(content_feature(R"(<a href="https://cdn.site.com/x">a</a>)", Feature::UrlOfAnchor), 1);
}

TEST(ContentFeatures, FaviconDomain) {
    EXPECT_EQ(content_feature(R"(<link rel="icon" href="http://other.org/f.ico">)", Feature::Favicon), -1);
    EXPECT_EQ(content_feature(R"(<link rel="icon" href="http://img.site.com/f.ico">)", Feature::Favicon), 1);
    EXPECT_EQ(content_feature("<p>x</p>", Feature::Favicon), 1);
}

TEST(ContentFeatures, FormHandlers) {
    EXPECT_EQ(content_feature(R"(<form action="/login"></form>)", Feature::Sfh), 1);
    EXPECT_EQ(content_feature(R"(<form></form>)", Feature::Sfh), -1);
    EXPECT_EQ(content_feature(R"(<form action="https://collector.net/p"></form>)", Feature::Sfh), 0);
    auto mail = content_of(R"(<form action="MAILTO:x@y.z"></form>)", "http://site.com/");
    EXPECT_EQ(*mail.get(Feature::SubmittingToEmail), -1);
    EXPECT_EQ(*mail.get(Feature::Sfh), 0);
}

TEST(ContentFeatures, ScriptPatterns) {
    EXPECT_EQ(content_feature("<a onmouseover=\"window.status='x'\">a</a>", Feature::OnMouseover), -1);
    EXPECT_EQ(content_feature("<a onmouseover=\"hl(this)\">a</a>", Feature::OnMouseover), 1);
    EXPECT_EQ(content_feature("<script>if (event.button == 2) alert('no')</script>", Feature::RightClick), -1);
    EXPECT_EQ(content_feature("<script>var x = prompt ('pin')</script>", Feature::PopUpWidnow), -1);
    EXPECT_EQ(content_feature("<script>window.open('/help')</script>", Feature::PopUpWidnow), 0);
    EXPECT_EQ(content_feature(R"(<IFRAME src="x" style="display:none"></IFRAME>)", Feature::Iframe), -1);
    EXPECT_EQ(content_feature(R"(<iframe src="x" width="400"></iframe>)", Feature::Iframe), 1);
}

TEST(ContentFeatures, RedirectHops) {
    auto redirect = [](int hops) {
        features::PageExtras extras;
        extras.redirect_count = hops;
        return *features::content_features("", "http://a.com/", {}, extras).get(Feature::Redirect);
    };
    EXPECT_EQ(redirect(0), 1);
    EXPECT_EQ(redirect(1), 1);
    EXPECT_EQ(redirect(2), 0);
    EXPECT_EQ(redirect(3), 0);
    EXPECT_EQ(redirect(4), -1);
}

TEST(ThirdParty, WorkedExamples) {
    IntelligenceReport r;
    r.domain_age_days = 400;
    EXPECT_EQ(*features::thirdparty_features("http://a.com/", r).get(Feature::AgeOfDomain), 1);
    r = {};
    r.has_dns_record = false;
    EXPECT_EQ(*features::thirdparty_features("http://a.com/", r).get(Feature::DnsRecord), -1);
    auto empty = features::thirdparty_features("http://a.com/", {});
    for (auto f : kDomainGroup) EXPECT_EQ(*empty.get(f), 0) << features::name_of(f);
    EXPECT_EQ(*empty.get(Feature::SslFinalState), -1);
    EXPECT_EQ(*features::thirdparty_features("https://a.com/", {}).get(Feature::SslFinalState), 0);
    EXPECT_EQ(empty.assigned(), 9u);
}

// Property: any field left unknown contributes exactly 0.
TEST(ThirdParty, UnknownIsNeutral) {
    std::mt19937 rng(9);
    for (int round = 0; round < 300; ++round) {
        IntelligenceReport r;
        if (rng() % 2) r.domain_age_days = static_cast<int>(rng() % 1000);
        if (rng() % 2) r.has_dns_record = rng() % 2;
        if (rng() % 2) r.traffic_rank = static_cast<long>(rng() % 300000) - 10;
        if (rng() % 2) r.page_rank_score = (rng() % 100) / 100.0;
        if (rng() % 2) r.indexed_by_search = rng() % 2;
        if (rng() % 2) r.inbound_link_count = static_cast<int>(rng() % 6);
        if (rng() % 2) r.on_blacklist = rng() % 2;
        auto v = features::thirdparty_features("http://a.com/", r);
        std::array<bool, 7> known = {r.domain_age_days.has_value(), r.has_dns_record.has_value(),
                                     r.traffic_rank.has_value(),    r.page_rank_score.has_value(),
                                     r.indexed_by_search.has_value(), r.inbound_link_count.has_value(),
                                     r.on_blacklist.has_value()};
        for (std::size_t i = 0; i < kDomainGroup.size(); ++i) {
            int value = *v.get(kDomainGroup[i]);
            EXPECT_TRUE(value >= -1 && value <= 1);
            if (!known[i]) EXPECT_EQ(value, 0) << features::name_of(kDomainGroup[i]);
        }
    }
}

TEST(Compose, EveryFeatureExactlyOnce) {
    auto u = features::url_features("http://a.com/");
    auto c = features::content_features("", "http://a.com/", {});
    auto t = features::thirdparty_features("http://a.com/", {});
    EXPECT_EQ(u.assigned() + c.assigned() + t.assigned(), features::kFeatureCount);
    auto v = features::compose(u, c, t, ClassLabel::Phishing);
    EXPECT_EQ(v.label, -1);
    EXPECT_THROW(features::compose(u, c, {}, ClassLabel::Phishing), Error);
    EXPECT_THROW(features::compose(u, u, t, ClassLabel::Phishing), Error);
}

TEST(Compose, PartialVectorGuards) {
    PartialVector p;
    p.set(Feature::Port, 1);
    EXPECT_THROW(p.set(Feature::Port, 1), Error);
    EXPECT_THROW(p.set(Feature::Iframe, 2), Error);
}

// Property: randomly assembled pages always give a total, in-range,
// repeatable vector.
TEST(Compose, TotalAndDeterministicOnRandomPages) {
    std::mt19937 rng(17);
    const std::array<std::string_view, 14> parts = {
        R"(<a href="#">x</a>)", R"(<a href="/p">p</a>)", R"(<a href="http://far.net/">f</a>)",
        R"(<img src="/i.png">)", R"(<img src="http://img.far.net/i.png">)", R"(<link rel="icon" href="http://far.net/f.ico">)",
        R"(<script src="http://far.net/a.js"></script>)", R"(<form action="mailto:a@b.c"></form>)", R"(<form></form>)",
        R"(<iframe width=0></iframe>)", "<script>prompt(1)</script>", "<div onmouseover=\"window.status=1\">",
        "<p>text</p>", "<<broken </a></form>"};
    const std::array<std::string_view, 4> urls = {"http://a.com/", "https://1.2.3.4/x", "http://a-b.c.d.com:81/@", "https://bit.ly/z"};
    testing::TempDir root;
    for (int round = 0; round < 150; ++round) {
        testing::GoldenPage page;
        page.name = "r" + std::to_string(round);
        page.url = std::string(urls[rng() % urls.size()]);
        page.redirect_count = static_cast<int>(rng() % 6);
        page.label = rng() % 2 ? ClassLabel::Phishing : ClassLabel::Legitimate;
        int n = static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) page.html += parts[rng() % parts.size()];
        if (page.html.empty()) page.html = " ";
        auto dir = testing::write_golden_sample(root.path(), page);
        auto v = features::extract_feature_vector(dir, features::OfflineProvider{});
        for (int value : v.values) EXPECT_TRUE(value >= -1 && value <= 1);
        EXPECT_EQ(v.label, label_value(page.label));
        EXPECT_EQ(features::extract_feature_vector(dir, features::OfflineProvider{}), v);
    }
}

TEST(ExtractVector, FailedFetchIsMissingHtml) {
    testing::TempDir root;
    auto dir = store::init_sample_dir(root.path(), "dead");
    store::SampleManifest m;
    m.record = {"dead", "http://a.com/", ClassLabel::Phishing, RecordSource::CsvFeed};
    m.error = store::ManifestError{"FileNotFound", "HTTP 404"};
    m.resources.push_back(store::failed_ref(store::ResourceKind::Html, m.record.url, "FileNotFound"));
    store::write_manifest(dir, m);
    try {
        features::extract_feature_vector(dir.path(), IntelligenceReport{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MissingHtml);
    }
}

TEST(JsonProvider, SampleBeatsDomain) {
    auto p = features::JsonFileProvider::from_string(R"({
        "samples": {"7": {"domain_age_days": 10}},
        "domains": {"Example.com": {"domain_age_days": 900, "has_dns_record": true}}
    })");
    UrlRecord rec{"7", "http://www.example.com/x", ClassLabel::Phishing, RecordSource::CsvFeed};
    EXPECT_EQ(p.lookup(rec).domain_age_days, 10);
    EXPECT_FALSE(p.lookup(rec).has_dns_record.has_value());
    rec.sample_id = "8";
    EXPECT_EQ(p.lookup(rec).domain_age_days, 900);
    EXPECT_EQ(p.lookup(rec).has_dns_record, true);
    rec.url = "http://other.org/";
    EXPECT_FALSE(p.lookup(rec).domain_age_days.has_value());
    EXPECT_THROW(features::JsonFileProvider::from_string("{oops"), Error);
    EXPECT_THROW(features::JsonFileProvider::from_string(R"({"samples": {"1": {"domain_age_days": "old"}}})"), Error);
}

TEST(FeatureCsv, HeaderAndRow) {
    auto header = features::csv_header();
    EXPECT_TRUE(header.starts_with("having_IP_Address,URL_Length,Shortining_Service,"));
    EXPECT_TRUE(header.ends_with(",Links_pointing_to_page,Statistical_report,Result\n"));
    features::FeatureVector v;
    v.values.fill(0);
    v.values[0] = -1;
    v.label = -1;
    std::string expected = "-1";
    for (int i = 1; i < 30; ++i) expected += ",0";
    EXPECT_EQ(features::csv_row(v), expected + ",-1\n");
    EXPECT_EQ(features::feature_by_name("popUpWidnow"), Feature::PopUpWidnow);
    EXPECT_FALSE(features::feature_by_name("popUpWindow").has_value());
}

}  // namespace
}  // namespace phishcollect
