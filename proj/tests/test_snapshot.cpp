#include <gtest/gtest.h>

#include <fstream>

#include "fake_devtools.hpp"
#include "phishcollect/error.hpp"
#include "phishcollect/png.hpp"
#include "phishcollect/snapshot.hpp"
#include "temp_dir.hpp"

namespace phishcollect {
namespace {

using namespace std::chrono_literals;
using snapshot::CaptureError;
using snapshot::CaptureTarget;
using snapshot::ViewportSpec;

ViewportSpec viewport(int w, int h) {
    ViewportSpec spec;
    spec.width = w;
    spec.height = h;
    spec.settle_delay = 0ms;
    return spec;
}

CaptureTarget page_file(const testing::TempDir& dir, const std::string& name, const std::string& html) {
    auto path = dir / name;
    std::ofstream(path) << html;
    return CaptureTarget::local_file(path);
}

TEST(Png, EncodeDecodeRoundTrip) {
    png::Image img = png::solid(7, 3, {10, 20, 30});
    img.rgb[3 * (2 * 7 + 6) + 0] = 200;
    auto bytes = png::encode(img);
    EXPECT_EQ(bytes.substr(1, 3), "PNG");
    auto back = png::decode(bytes);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->width, 7u);
    EXPECT_EQ(back->height, 3u);
    EXPECT_EQ(back->rgb, img.rgb);
    EXPECT_EQ(back->pixel(6, 2), (png::Rgb{200, 20, 30}));
    EXPECT_EQ(png::dimensions(bytes), (png::Dimensions{7, 3}));
}

TEST(Png, RejectsGarbage) {
    EXPECT_FALSE(png::decode("not a png").has_value());
    EXPECT_FALSE(png::dimensions("\x89PNG\r\n\x1a\n").has_value());
    EXPECT_FALSE(png::dimensions("").has_value());
}

TEST(CssColor, Forms) {
    EXPECT_EQ(snapshot::parse_css_color("red"), (png::Rgb{255, 0, 0}));
    EXPECT_EQ(snapshot::parse_css_color(" #0F0 "), (png::Rgb{0, 255, 0}));
    EXPECT_EQ(snapshot::parse_css_color("#123456"), (png::Rgb{0x12, 0x34, 0x56}));
    EXPECT_EQ(snapshot::parse_css_color("rgb(1, 2, 3)"), (png::Rgb{1, 2, 3}));
    EXPECT_FALSE(snapshot::parse_css_color("#12").has_value());
    EXPECT_FALSE(snapshot::parse_css_color("url(x.png)").has_value());
}

TEST(BodyBackground, InlineStyleAndStyleBlock) {
    EXPECT_EQ(snapshot::body_background(R"(<body style="background-color: red">)"), (png::Rgb{255, 0, 0}));
    EXPECT_EQ(snapshot::body_background("<style>p{color:blue} body { margin:0; background: #00f }</style><body>"),
              (png::Rgb{0, 0, 255}));
    EXPECT_FALSE(snapshot::body_background("<body><p>plain</p></body>").has_value());
}

TEST(Viewport, Validation) {
    EXPECT_NO_THROW(ViewportSpec{}.validate());
    EXPECT_EQ(ViewportSpec{}.width, 1366);
    EXPECT_EQ(ViewportSpec{}.height, 768);
    EXPECT_THROW(viewport(0, 10).validate(), Error);
    EXPECT_THROW(viewport(10, -1).validate(), Error);
}

TEST(CaptureTargets, NavigationUrl) {
    EXPECT_EQ(CaptureTarget::local_file("/tmp/a b.html").navigation_url(), "file:///tmp/a%20b.html");
    EXPECT_EQ(CaptureTarget::live_url("http://x.com/").navigation_url(), "http://x.com/");
}

TEST(StubCapture, RedBackgroundFillsViewport) {
    testing::TempDir dir;
    auto target = page_file(dir, "red.html", R"(<html><body style="background:red"></body></html>)");
    snapshot::StubProvider stub;
    auto r = snapshot::capture_viewport(target, viewport(100, 100), stub);
    ASSERT_TRUE(r.ok()) << r.detail;
    auto img = png::decode(r.png);
    ASSERT_TRUE(img.has_value());
    ASSERT_EQ(img->width, 100u);
    ASSERT_EQ(img->height, 100u);
    for (std::uint32_t y = 0; y < 100; y += 9) {
        for (std::uint32_t x = 0; x < 100; x += 9) EXPECT_EQ(img->pixel(x, y), (png::Rgb{255, 0, 0}));
    }
}

TEST(StubCapture, DefaultsToWhiteAndRespectsViewport) {
    testing::TempDir dir;
    auto target = page_file(dir, "p.html", "<p>hi</p>");
    snapshot::StubProvider stub;
    auto r = snapshot::capture_viewport(target, viewport(1366, 768), stub);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(png::dimensions(r.png), (png::Dimensions{1366, 768}));
    EXPECT_EQ(png::decode(r.png)->pixel(1365, 767), (png::Rgb{255, 255, 255}));
}

TEST(StubCapture, BlockedTarget) {
    snapshot::StubProvider stub;
    stub.block("http://evil.example/");
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://evil.example/"), viewport(10, 10), stub);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(*r.error, CaptureError::SafeBrowsingBlocked);
    EXPECT_TRUE(r.png.empty());
}

TEST(StubCapture, UnavailableProvider) {
    snapshot::StubProvider stub;
    stub.set_available(false);
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://x.com/"), viewport(10, 10), stub);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(*r.error, CaptureError::ProviderUnavailable);
}

TEST(StubCapture, WrongSizeOrNonPngIsInvalidOutput) {
    snapshot::StubProvider stub;
    stub.set_fixed_output(png::encode(png::solid(5, 5, {})));
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://x.com/"), viewport(10, 10), stub);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(*r.error, CaptureError::InvalidOutput);

    EXPECT_TRUE(snapshot::capture_viewport(CaptureTarget::live_url("http://x.com/"), viewport(5, 5), stub).ok());

    stub.set_fixed_output("GIF89a");
    EXPECT_EQ(*snapshot::capture_viewport(CaptureTarget::live_url("http://x.com/"), viewport(5, 5), stub).error,
              CaptureError::InvalidOutput);
}

TEST(StubCapture, Deterministic) {
    testing::TempDir dir;
    auto target = page_file(dir, "p.html", "<body style='background:#102030'>");
    snapshot::StubProvider stub;
    EXPECT_EQ(snapshot::capture_viewport(target, viewport(40, 30), stub).png,
              snapshot::capture_viewport(target, viewport(40, 30), stub).png);
}

TEST(CaptureErrors, Names) {
    EXPECT_EQ(snapshot::to_string(CaptureError::ProviderUnavailable), "ProviderUnavailable");
    EXPECT_EQ(snapshot::to_string(CaptureError::SafeBrowsingBlocked), "SafeBrowsingBlocked");
    EXPECT_EQ(snapshot::to_string(CaptureError::RenderTimeout), "RenderTimeout");
    EXPECT_EQ(snapshot::to_string(CaptureError::InvalidOutput), "InvalidOutput");
}

TEST(DevTools, CapturesThroughProtocol) {
    testing::FakeDevTools browser;
    browser.screenshot_png = png::encode(png::solid(64, 48, {0, 128, 0}));
    snapshot::DevToolsProvider provider("127.0.0.1", browser.port(), 3000ms);
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://site.test/"), viewport(64, 48), provider);
    ASSERT_TRUE(r.ok()) << r.detail;
    EXPECT_EQ(r.png, browser.screenshot_png);

    auto metrics = browser.params_of("Emulation.setDeviceMetricsOverride");
    ASSERT_EQ(metrics.size(), 1u);
    EXPECT_EQ(metrics[0]["width"], 64);
    EXPECT_EQ(metrics[0]["height"], 48);
    auto nav = browser.params_of("Page.navigate");
    ASSERT_EQ(nav.size(), 1u);
    EXPECT_EQ(nav[0]["url"], "http://site.test/");
    EXPECT_EQ(browser.methods().back(), "Page.captureScreenshot");
    EXPECT_EQ(browser.closed_targets(), 1);
}

TEST(DevTools, BlockedNavigation) {
    testing::FakeDevTools browser;
    browser.navigate_error_text = "net::ERR_BLOCKED_BY_CLIENT";
    snapshot::DevToolsProvider provider("127.0.0.1", browser.port(), 3000ms);
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://bad.test/"), viewport(10, 10), provider);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(*r.error, CaptureError::SafeBrowsingBlocked);
    EXPECT_EQ(browser.closed_targets(), 1);
}

TEST(DevTools, NoLoadEventIsRenderTimeout) {
    testing::FakeDevTools browser;
    browser.send_load_event = false;
    snapshot::DevToolsProvider provider("127.0.0.1", browser.port(), 300ms);
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://slow.test/"), viewport(10, 10), provider);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(*r.error, CaptureError::RenderTimeout);
}

TEST(DevTools, NothingListening) {
    int port;
    {
        testing::FakeDevTools gone;
        port = gone.port();
    }
    snapshot::DevToolsProvider provider("127.0.0.1", port, 500ms);
    auto r = snapshot::capture_viewport(CaptureTarget::live_url("http://x.test/"), viewport(10, 10), provider);
    ASSERT_FALSE(r.ok());
    EXPECT_EQ(*r.error, CaptureError::ProviderUnavailable);
}

}  // namespace
}  // namespace phishcollect
