#include "phishcollect/store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "phishcollect/error.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect::store {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array kImageExtensions = {".png", ".jpg", ".jpeg", ".gif", ".webp",
                                         ".svg", ".bmp", ".ico",  ".avif", ".tif",
                                         ".tiff"};

std::size_t label_index(ClassLabel label) { return label == ClassLabel::Phishing ? 0 : 1; }

std::size_t kind_index(ResourceKind kind) { return static_cast<std::size_t>(kind); }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string sanitize(std::string_view name) {
    std::string out;
    for (char c : name) {
        bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
        out += safe ? c : '_';
    }
    auto first = out.find_first_not_of('.');
    out = first == std::string::npos ? std::string() : out.substr(first);
    if (out.size() > 100) out.resize(100);
    return out;
}

bool holds_files(const fs::path& dir) {
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (!it->is_directory()) return true;
        if (it.depth() == 0) {
            auto name = it->path().filename().string();
            bool known = std::any_of(kAllKinds.begin(), kAllKinds.end(),
                                     [&](ResourceKind k) { return subdirectory(k) == name; });
            if (!known) return true;
        }
    }
    return false;
}

json to_json(const ResourceRef& r) {
    json j;
    j["kind"] = to_string(r.kind);
    j["origin_url"] = r.origin_url;
    j["local_path"] = r.local_path;
    j["byte_count"] = r.byte_count;
    switch (r.status.state) {
        case ResourceState::Ok: j["status"] = "ok"; break;
        case ResourceState::FetchFailed: j["status"] = "fetch_failed"; break;
        case ResourceState::Skipped: j["status"] = "skipped"; break;
    }
    j["reason"] = r.status.reason;
    j["fallback"] = r.fallback;
    return j;
}

ResourceRef ref_from_json(const json& j) {
    ResourceRef r;
    auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(Errc::CorruptManifest, "unknown resource kind");
    r.kind = *kind;
    r.origin_url = j.at("origin_url").get<std::string>();
    r.local_path = j.at("local_path").get<std::string>();
    r.byte_count = j.at("byte_count").get<std::uint64_t>();
    auto status = j.at("status").get<std::string>();
    std::string reason = j.value("reason", "");
    if (status == "ok") r.status = ResourceStatus::ok();
    else if (status == "fetch_failed") r.status = ResourceStatus::fetch_failed(reason);
    else if (status == "skipped") r.status = ResourceStatus::skipped(reason);
    else throw Error(Errc::CorruptManifest, "unknown resource status '" + status + "'");
    r.fallback = j.value("fallback", false);
    return r;
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

}  // namespace

std::string_view to_string(ResourceKind kind) {
    switch (kind) {
        case ResourceKind::Html: return "html";
        case ResourceKind::Css: return "css";
        case ResourceKind::Javascript: return "javascript";
        case ResourceKind::Favicon: return "favicon";
        case ResourceKind::Image: return "image";
        case ResourceKind::Screenshot: return "screenshot";
    }
    return "html";
}

std::optional<ResourceKind> parse_kind(std::string_view name) {
    for (auto k : kAllKinds) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view subdirectory(ResourceKind kind) {
    switch (kind) {
        case ResourceKind::Html: return "HTML";
        case ResourceKind::Css: return "CSS";
        case ResourceKind::Javascript: return "Javascript";
        case ResourceKind::Favicon: return "Favicon";
        case ResourceKind::Image: return "Images";
        case ResourceKind::Screenshot: return "Screenshots";
    }
    return "HTML";
}

ResourceRef failed_ref(ResourceKind kind, std::string origin_url, std::string reason) {
    return ResourceRef{kind, std::move(origin_url), {}, 0, ResourceStatus::fetch_failed(std::move(reason)), false};
}

ResourceRef skipped_ref(ResourceKind kind, std::string origin_url, std::string reason) {
    return ResourceRef{kind, std::move(origin_url), {}, 0, ResourceStatus::skipped(std::move(reason)), false};
}

SampleDir init_sample_dir(const fs::path& root, std::string_view sample_id) {
    if (!is_safe_sample_id(sample_id)) {
        throw Error(Errc::InvalidArgument, "unsafe sample id '" + std::string(sample_id) + "'");
    }
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(Errc::IoFailure, "archive root " + root.string() + " is not a directory");
    fs::path dir = root / std::string(sample_id);
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec)) throw Error(Errc::IoFailure, dir.string() + " is not a directory");
        if (holds_files(dir)) throw Error(Errc::SampleExists, dir.string());
    }
    for (auto kind : kAllKinds) {
        fs::create_directories(dir / std::string(subdirectory(kind)), ec);
        if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    }
    return SampleDir(dir, std::string(sample_id));
}

SampleDir reset_sample_dir(const fs::path& root, std::string_view sample_id) {
    if (!is_safe_sample_id(sample_id)) {
        throw Error(Errc::InvalidArgument, "unsafe sample id '" + std::string(sample_id) + "'");
    }
    std::error_code ec;
    fs::remove_all(root / std::string(sample_id), ec);
    if (ec) throw Error(Errc::IoFailure, "cannot clear sample " + std::string(sample_id) + ": " + ec.message());
    return init_sample_dir(root, sample_id);
}

std::string name_from_url(std::string_view u) {
    url::Uri parsed = url::parse(u);
    std::string_view path = parsed.path;
    while (!path.empty() && path.back() == '/') path.remove_suffix(1);
    auto slash = path.rfind('/');
    std::string_view segment = slash == std::string_view::npos ? path : path.substr(slash + 1);
    std::string decoded;
    for (std::size_t i = 0; i < segment.size(); ++i) {
        if (segment[i] == '%' && i + 2 < segment.size() &&
            std::isxdigit(static_cast<unsigned char>(segment[i + 1])) &&
            std::isxdigit(static_cast<unsigned char>(segment[i + 2]))) {
            decoded += static_cast<char>(std::stoi(std::string(segment.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            decoded += segment[i];
        }
    }
    return decoded;
}

std::string file_name_for(ResourceKind kind, std::string_view suggested_name, std::string_view bytes) {
    std::string name = sanitize(suggested_name);
    std::string stem = name;
    std::string ext;
    auto dot = name.rfind('.');
    if (dot != std::string::npos && dot > 0) {
        stem = name.substr(0, dot);
        ext = lower(name.substr(dot));
    }
    if (stem.empty()) stem = fnv1a_hex(bytes).substr(0, 12);
    switch (kind) {
        case ResourceKind::Html: return stem + ".html";
        case ResourceKind::Css: return stem + ".css";
        case ResourceKind::Javascript: return stem + ".js";
        case ResourceKind::Favicon: return stem + ".ico";
        case ResourceKind::Screenshot: return stem + ".png";
        case ResourceKind::Image: {
            bool known = std::find(kImageExtensions.begin(), kImageExtensions.end(), ext) != kImageExtensions.end();
            return stem + (known ? ext : std::string(".img"));
        }
    }
    return stem;
}

ResourceRef write_resource(const SampleDir& dir, ResourceKind kind, std::string_view suggested_name,
                           std::string_view bytes) {
    if (bytes.empty()) return skipped_ref(kind, {}, "empty body");
    std::string name = file_name_for(kind, suggested_name, bytes);
    fs::path sub = dir.subdirectory(kind);
    std::error_code ec;
    fs::create_directories(sub, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + sub.string() + ": " + ec.message());

    auto dot = name.rfind('.');
    std::string stem = name.substr(0, dot);
    std::string ext = name.substr(dot);
    std::string candidate = name;
    for (int n = 1; fs::exists(sub / candidate, ec); ++n) candidate = stem + "-" + std::to_string(n) + ext;

    write_file(sub / candidate, bytes);
    ResourceRef ref;
    ref.kind = kind;
    ref.local_path = std::string(subdirectory(kind)) + "/" + candidate;
    ref.byte_count = bytes.size();
    ref.status = ResourceStatus::ok();
    return ref;
}

std::string serialize_manifest(const SampleManifest& m) {
    json j;
    j["record"] = {{"sample_id", m.record.sample_id},
                   {"url", m.record.url},
                   {"label", to_string(m.record.label)},
                   {"source", to_string(m.record.source)}};
    j["final_url"] = m.final_url;
    j["fetched_at"] = m.fetched_at;
    j["resources"] = json::array();
    for (const auto& r : m.resources) j["resources"].push_back(to_json(r));
    if (m.error) {
        j["error"] = {{"kind", m.error->kind}, {"detail", m.error->detail}};
    } else {
        j["error"] = nullptr;
    }
    j["redirect_count"] = m.redirect_count;
    return j.dump(2) + "\n";
}

SampleManifest parse_manifest(std::string_view text) {
    try {
        json j = json::parse(text);
        SampleManifest m;
        const json& rec = j.at("record");
        m.record.sample_id = rec.at("sample_id").get<std::string>();
        m.record.url = rec.at("url").get<std::string>();
        auto label = parse_label(rec.at("label").get<std::string>());
        auto source = parse_source(rec.at("source").get<std::string>());
        if (!label || !source) throw Error(Errc::CorruptManifest, "bad record label/source");
        m.record.label = *label;
        m.record.source = *source;
        m.final_url = j.at("final_url").get<std::string>();
        m.fetched_at = j.at("fetched_at").get<std::string>();
        for (const auto& r : j.at("resources")) m.resources.push_back(ref_from_json(r));
        const json& err = j.at("error");
        if (!err.is_null()) m.error = ManifestError{err.at("kind").get<std::string>(), err.value("detail", "")};
        m.redirect_count = j.value("redirect_count", 0);
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptManifest, e.what());
    }
}

fs::path write_manifest(const SampleDir& dir, const SampleManifest& manifest) {
    fs::path path = dir.path() / std::string(kManifestFile);
    write_file(path, serialize_manifest(manifest));
    return path;
}

SampleManifest read_manifest(const fs::path& sample_dir) {
    fs::path path = fs::is_directory(sample_dir) ? sample_dir / std::string(kManifestFile) : sample_dir;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

std::string utc_timestamp(std::chrono::system_clock::time_point at) {
    std::time_t t = std::chrono::system_clock::to_time_t(at);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const KindCounts& ResourceStats::at(ClassLabel label, ResourceKind kind) const {
    return counts[label_index(label)][kind_index(kind)];
}

KindCounts& ResourceStats::at(ClassLabel label, ResourceKind kind) {
    return counts[label_index(label)][kind_index(kind)];
}

KindCounts ResourceStats::corpus(ResourceKind kind) const {
    KindCounts c;
    for (const auto& per_label : counts) {
        c.samples_with += per_label[kind_index(kind)].samples_with;
        c.total_files += per_label[kind_index(kind)].total_files;
    }
    return c;
}

ResourceStats collect_stats(const fs::path& root) {
    ResourceStats stats;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return stats;
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        SampleManifest m;
        try {
            m = read_manifest(dir);
        } catch (const Error&) {
            ++stats.unreadable;
            continue;
        }
        ++stats.samples[label_index(m.record.label)];
        for (auto kind : kAllKinds) {
            std::uint64_t files = std::count_if(m.resources.begin(), m.resources.end(), [&](const ResourceRef& r) {
                return r.kind == kind && r.status.is_ok();
            });
            auto& c = stats.at(m.record.label, kind);
            c.total_files += files;
            if (files > 0) ++c.samples_with;
        }
    }
    return stats;
}

std::string stats_csv(const ResourceStats& stats) {
    std::string out = "class,kind,samples_with,total_files\n";
    for (auto label : {ClassLabel::Phishing, ClassLabel::Legitimate}) {
        for (auto kind : kAllKinds) {
            const auto& c = stats.at(label, kind);
            out += std::string(to_string(label)) + "," + std::string(to_string(kind)) + "," +
                   std::to_string(c.samples_with) + "," + std::to_string(c.total_files) + "\n";
        }
    }
    return out;
}

std::string stats_table(const ResourceStats& stats) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "kind" << std::right << std::setw(16) << "phishing/with"
        << std::setw(16) << "phishing/files" << std::setw(16) << "legit/with" << std::setw(16)
        << "legit/files" << "\n";
    for (auto kind : kAllKinds) {
        const auto& p = stats.at(ClassLabel::Phishing, kind);
        const auto& l = stats.at(ClassLabel::Legitimate, kind);
        out << std::left << std::setw(12) << to_string(kind) << std::right << std::setw(16) << p.samples_with
            << std::setw(16) << p.total_files << std::setw(16) << l.samples_with << std::setw(16)
            << l.total_files << "\n";
    }
    out << "samples: phishing " << stats.samples[0] << ", legitimate " << stats.samples[1]
        << ", unreadable " << stats.unreadable << "\n";
    return out.str();
}

}  // namespace phishcollect::store
