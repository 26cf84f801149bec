#include "phishcollect/snapshot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "phishcollect/error.hpp"
#include "phishcollect/html.hpp"

namespace phishcollect::snapshot {
namespace {

struct NamedColor {
    std::string_view name;
    png::Rgb rgb;
};

constexpr std::array<NamedColor, 16> kNamedColors = {{
    {"black", {0, 0, 0}},        {"white", {255, 255, 255}},   {"red", {255, 0, 0}},
    {"lime", {0, 255, 0}},       {"green", {0, 128, 0}},       {"blue", {0, 0, 255}},
    {"yellow", {255, 255, 0}},   {"cyan", {0, 255, 255}},      {"aqua", {0, 255, 255}},
    {"magenta", {255, 0, 255}},  {"fuchsia", {255, 0, 255}},   {"gray", {128, 128, 128}},
    {"grey", {128, 128, 128}},   {"silver", {192, 192, 192}},  {"maroon", {128, 0, 0}},
    {"navy", {0, 0, 128}},
}};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<png::Rgb> background_in(std::string_view declarations) {
    static const std::regex kBackground(R"(background(?:-color)?\s*:\s*([^;}!]+))", std::regex::icase);
    std::string text(declarations);
    std::smatch m;
    if (std::regex_search(text, m, kBackground)) {
        // "background: red url(x.png)" -> try each token
        std::istringstream tokens(m[1].str());
        std::string token;
        std::string whole = m[1].str();
        if (auto c = parse_css_color(whole)) return c;
        while (tokens >> token) {
            if (auto c = parse_css_color(token)) return c;
        }
    }
    return std::nullopt;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void ViewportSpec::validate() const {
    if (width <= 0 || height <= 0) throw Error(Errc::InvalidArgument, "viewport dimensions must be positive");
    if (settle_delay.count() < 0) throw Error(Errc::InvalidArgument, "settle delay must be >= 0");
}

std::string_view to_string(CaptureError error) {
    switch (error) {
        case CaptureError::ProviderUnavailable: return "ProviderUnavailable";
        case CaptureError::SafeBrowsingBlocked: return "SafeBrowsingBlocked";
        case CaptureError::RenderTimeout: return "RenderTimeout";
        case CaptureError::InvalidOutput: return "InvalidOutput";
    }
    return "InvalidOutput";
}

CaptureTarget CaptureTarget::local_file(const std::filesystem::path& path) {
    return {Kind::LocalFile, std::filesystem::absolute(path).lexically_normal().string()};
}

CaptureTarget CaptureTarget::live_url(std::string url) { return {Kind::LiveUrl, std::move(url)}; }

std::string CaptureTarget::navigation_url() const {
    if (kind == Kind::LiveUrl) return location;
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out = "file://";
    for (unsigned char c : location) {
        if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        }
    }
    return out;
}

std::optional<png::Rgb> parse_css_color(std::string_view value) {
    std::string v = lower(value);
    v.erase(std::remove_if(v.begin(), v.end(), [](unsigned char c) { return std::isspace(c); }), v.end());
    for (const auto& named : kNamedColors) {
        if (named.name == v) return named.rgb;
    }
    auto hex = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10; };
    auto is_hex = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c); });
    };
    if (v.size() == 4 && v[0] == '#' && is_hex(v.substr(1))) {
        return png::Rgb{static_cast<std::uint8_t>(hex(v[1]) * 17), static_cast<std::uint8_t>(hex(v[2]) * 17),
                        static_cast<std::uint8_t>(hex(v[3]) * 17)};
    }
    if (v.size() == 7 && v[0] == '#' && is_hex(v.substr(1))) {
        return png::Rgb{static_cast<std::uint8_t>(hex(v[1]) * 16 + hex(v[2])),
                        static_cast<std::uint8_t>(hex(v[3]) * 16 + hex(v[4])),
                        static_cast<std::uint8_t>(hex(v[5]) * 16 + hex(v[6]))};
    }
    static const std::regex kRgb(R"(rgba?\((\d{1,3}),(\d{1,3}),(\d{1,3})(,[0-9.]+)?\))");
    std::smatch m;
    if (std::regex_match(v, m, kRgb)) {
        auto channel = [](const std::string& s) { return static_cast<std::uint8_t>(std::min(255, std::stoi(s))); };
        return png::Rgb{channel(m[1].str()), channel(m[2].str()), channel(m[3].str())};
    }
    return std::nullopt;
}

std::optional<png::Rgb> body_background(std::string_view page) {
    html::Document doc(page);
    for (std::size_t i : doc.elements("body")) {
        if (const std::string* style = doc.node(i).attr("style")) {
            if (auto c = background_in(*style)) return c;
        }
        if (const std::string* bgcolor = doc.node(i).attr("bgcolor")) {
            if (auto c = parse_css_color(*bgcolor)) return c;
        }
    }
    static const std::regex kBodyRule(R"((?:^|[\s,}])(?:html\s*,\s*)?body\s*\{([^}]*)\})", std::regex::icase);
    std::optional<png::Rgb> found;
    for (std::size_t i : doc.elements("style")) {
        const std::string& css = doc.node(i).text;
        for (auto it = std::sregex_iterator(css.begin(), css.end(), kBodyRule); it != std::sregex_iterator(); ++it) {
            if (auto c = background_in((*it)[1].str())) found = c;  // later rules win
        }
    }
    return found;
}

CaptureResult StubProvider::capture(const CaptureTarget& target, const ViewportSpec& spec) {
    if (!available_) return CaptureResult::failure(CaptureError::ProviderUnavailable, "stub disabled");
    if (blocked_.count(target.location)) {
        return CaptureResult::failure(CaptureError::SafeBrowsingBlocked, "target flagged dangerous");
    }
    if (fixed_) return CaptureResult{*fixed_, std::nullopt, {}};
    png::Rgb color{255, 255, 255};
    if (target.kind == CaptureTarget::Kind::LocalFile) {
        if (auto bg = body_background(read_file(target.location))) color = *bg;
    }
    auto image = png::solid(static_cast<std::uint32_t>(spec.width), static_cast<std::uint32_t>(spec.height), color);
    return CaptureResult{png::encode(image), std::nullopt, {}};
}

CaptureResult capture_viewport(const CaptureTarget& target, const ViewportSpec& spec, ScreenshotProvider& provider) {
    spec.validate();
    CaptureResult result = provider.capture(target, spec);
    if (!result.ok()) {
        result.png.clear();
        return result;
    }
    auto dims = png::dimensions(result.png);
    png::Dimensions expected{static_cast<std::uint32_t>(spec.width), static_cast<std::uint32_t>(spec.height)};
    if (!dims || *dims != expected) {
        std::string got = dims ? std::to_string(dims->width) + "x" + std::to_string(dims->height) : "non-PNG";
        return CaptureResult::failure(CaptureError::InvalidOutput,
                                      "expected " + std::to_string(spec.width) + "x" + std::to_string(spec.height) +
                                          ", got " + got);
    }
    return result;
}

}  // namespace phishcollect::snapshot
