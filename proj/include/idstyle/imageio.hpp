// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Image file I/O: 8-bit PNG (gray / RGB, via libpng's simplified API) and
// binary PGM (P5) / PPM (P6). Pixels are normalized to [0,1] on load and
// quantized with round-half-up on save.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "idstyle/error.hpp"
#include "idstyle/image.hpp"

namespace idstyle {

inline std::uint8_t quantize_8bit(double v) {
    return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorKind::Io, "imageio", "no such file '" + path.string() + "'");
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "imageio", "cannot open '" + path.string() + "'");
    return std::vector<unsigned char>((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

inline Image image_from_bytes(int w, int h, int c, const unsigned char* data) {
    const std::size_t n = static_cast<std::size_t>(w) * h * c;
    std::vector<double> px(n);
    for (std::size_t i = 0; i < n; ++i) px[i] = data[i] / 255.0;
    return Image(w, h, c, std::move(px));
}

inline std::vector<unsigned char> image_to_bytes(const Image& img) {
    std::vector<unsigned char> out(img.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = quantize_8bit(img.pixels()[i]);
    return out;
}

class PnmCursor {
public:
    PnmCursor(const std::vector<unsigned char>& bytes, const std::string& name) : b_(bytes), name_(name) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorKind::Format, "imageio", name_ + ": " + msg + " at offset " + std::to_string(pos_));
    }

    void skip_space_and_comments() {
        while (pos_ < b_.size()) {
            if (std::isspace(b_[pos_])) {
                ++pos_;
            } else if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    int read_uint() {
        skip_space_and_comments();
        if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) fail("expected unsigned integer");
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1'000'000) fail("header value too large");
            ++pos_;
        }
        return static_cast<int>(v);
    }

    std::size_t pos_ = 0;

private:
    const std::vector<unsigned char>& b_;
    const std::string& name_;
};

inline Image decode_pnm(const std::vector<unsigned char>& bytes, const std::string& name) {
    PnmCursor cur(bytes, name);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) cur.fail("bad PNM magic");
    const int channels = bytes[1] == '5' ? 1 : 3;
    cur.pos_ = 2;
    const int w = cur.read_uint();
    const int h = cur.read_uint();
    const int maxval = cur.read_uint();
    if (w <= 0 || h <= 0) cur.fail("zero image dimension");
    if (maxval != 255) cur.fail("only maxval 255 is supported");
    if (cur.pos_ >= bytes.size() || !std::isspace(bytes[cur.pos_])) cur.fail("expected whitespace after maxval");
    ++cur.pos_;
    const std::size_t need = static_cast<std::size_t>(w) * h * channels;
    if (bytes.size() - cur.pos_ < need) {
        cur.pos_ = bytes.size();
        cur.fail("raster truncated (need " + std::to_string(need) + " bytes)");
    }
    return image_from_bytes(w, h, channels, bytes.data() + cur.pos_);
}

inline std::uint32_t be32(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline Image decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
    auto fail = [&](const std::string& msg, std::size_t off) -> Error {
        return Error(ErrorKind::Format, "imageio", name + ": " + msg + " at offset " + std::to_string(off));
    };
    // signature (8) + IHDR length/type (8) + IHDR payload (13) + crc (4)
    if (bytes.size() < 33) throw fail("PNG header truncated", bytes.size());
    if (be32(bytes.data() + 8) != 13 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
        throw fail("missing IHDR chunk", 8);
    }
    if (be32(bytes.data() + 16) == 0 || be32(bytes.data() + 20) == 0) throw fail("zero image dimension", 16);

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw fail("PNG decode failed (" + msg + ")", 0);
    }
    const int channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw fail("PNG decode failed (" + msg + ")", 0);
    }
    return image_from_bytes(static_cast<int>(image.width), static_cast<int>(image.height), channels, buf.data());
}

inline std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace detail

inline Image load_image(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return detail::decode_png(bytes, path.string());
    if (bytes.size() >= 2 && bytes[0] == 'P') return detail::decode_pnm(bytes, path.string());
    throw Error(ErrorKind::Format, "imageio", path.string() + ": unrecognized image signature at offset 0");
}

/// Writes PNG for ".png", PGM/PPM for ".pgm"/".ppm"/".pnm" (the netpbm
/// variant follows the channel count).
inline void save_image(const Image& img, const std::filesystem::path& path) {
    if (img.empty()) throw Error(ErrorKind::Parameter, "imageio", "cannot save an empty image");
    const std::string ext = detail::lower_extension(path);
    const auto bytes = detail::image_to_bytes(img);
    if (ext == ".png") {
        png_image image;
        std::memset(&image, 0, sizeof image);
        image.version = PNG_IMAGE_VERSION;
        image.width = static_cast<png_uint_32>(img.width());
        image.height = static_cast<png_uint_32>(img.height());
        image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
        if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
            const std::string msg = image.message;
            png_image_free(&image);
            throw Error(ErrorKind::Io, "imageio", "cannot write '" + path.string() + "' (" + msg + ")");
        }
        return;
    }
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorKind::Io, "imageio", "cannot open '" + path.string() + "' for writing");
        f << (img.channels() == 1 ? "P5" : "P6") << "\n" << img.width() << " " << img.height() << "\n255\n";
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw Error(ErrorKind::Io, "imageio", "write failed for '" + path.string() + "'");
        return;
    }
    throw Error(ErrorKind::Parameter, "imageio", "unsupported output extension '" + ext + "'");
}

}  // namespace idstyle
