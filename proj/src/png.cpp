#include "phishcollect/png.hpp"

#include <png.h>

#include <cstring>

#include "phishcollect/error.hpp"

namespace phishcollect::png {

Rgb Image::pixel(std::uint32_t x, std::uint32_t y) const {
    std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

Image solid(std::uint32_t width, std::uint32_t height, Rgb color) {
    Image img{width, height, {}};
    img.rgb.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = color.r;
        img.rgb[i + 1] = color.g;
        img.rgb[i + 2] = color.b;
    }
    return img;
}

std::string encode(const Image& image) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = image.width;
    desc.height = image.height;
    desc.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
        throw Error(Errc::InvalidArgument, std::string("png sizing failed: ") + desc.message);
    }
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.rgb.data(), 0, nullptr)) {
        throw Error(Errc::InvalidArgument, std::string("png encode failed: ") + desc.message);
    }
    out.resize(size);
    return out;
}

std::optional<Image> decode(std::string_view bytes) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) return std::nullopt;
    desc.format = PNG_FORMAT_RGB;
    Image img{desc.width, desc.height, {}};
    img.rgb.resize(PNG_IMAGE_SIZE(desc));
    if (!png_image_finish_read(&desc, nullptr, img.rgb.data(), 0, nullptr)) {
        png_image_free(&desc);
        return std::nullopt;
    }
    return img;
}

std::optional<Dimensions> dimensions(std::string_view bytes) {
    static constexpr std::string_view kSignature = "\x89PNG\r\n\x1a\n";
    if (bytes.size() < 24 || bytes.substr(0, 8) != kSignature || bytes.substr(12, 4) != "IHDR") {
        return std::nullopt;
    }
    auto be32 = [&](std::size_t at) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at])) << 24 |
               static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 1])) << 16 |
               static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 2])) << 8 |
               static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 3]));
    };
    return Dimensions{be32(16), be32(20)};
}

}  // namespace phishcollect::png
