// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "idstyle/error.hpp"
#include "idstyle/geometry.hpp"

namespace idstyle {

/// Interleaved row-major image with 1 or 3 channels and values in [0,1].
class Image {
public:
    Image() = default;

    Image(int width, int height, int channels, double fill = 0.0) : width_(width), height_(height), channels_(channels) {
        validate_dims();
        if (!(fill >= 0.0 && fill <= 1.0)) throw Error(ErrorKind::Parameter, "image", "fill value outside [0,1]");
        pixels_.assign(pixel_count(), fill);
    }

    Image(int width, int height, int channels, std::vector<double> pixels)
        : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
        validate_dims();
        if (pixels_.size() != pixel_count()) {
            throw Error(ErrorKind::Shape, "image",
                        "pixel buffer has " + std::to_string(pixels_.size()) + " values, expected " +
                            std::to_string(pixel_count()));
        }
        for (double v : pixels_) {
            if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Parameter, "image", "pixel value outside [0,1]");
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return pixels_.empty(); }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) *
               static_cast<std::size_t>(channels_);
    }

    std::span<const double> pixels() const { return pixels_; }

    double at(int x, int y, int c) const { return pixels_[index(x, y, c)]; }
    /// Values written through `set` are clamped to [0,1].
    void set(int x, int y, int c, double v) { pixels_[index(x, y, c)] = std::clamp(v, 0.0, 1.0); }

    friend bool operator==(const Image&, const Image&) = default;

private:
    void validate_dims() const {
        if (width_ <= 0 || height_ <= 0) throw Error(ErrorKind::Shape, "image", "image dims must be positive");
        if (channels_ != 1 && channels_ != 3) throw Error(ErrorKind::Shape, "image", "channels must be 1 or 3");
    }
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> pixels_;
};

enum class ResampleKernel { Nearest, Bicubic };

/// Catmull-Rom cubic convolution kernel (a = -0.5).
inline double cubic_weight(double x, double a = -0.5) {
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

namespace detail {

struct Taps {
    std::array<int, 4> index{};
    std::array<double, 4> weight{};
    int count = 0;
};

// Source taps for every destination coordinate under the pixel-center
// convention src = (dst + 0.5) * scale - 0.5, clamped at the edges.
inline std::vector<Taps> make_taps(int src_len, int dst_len, ResampleKernel kernel) {
    std::vector<Taps> taps(static_cast<std::size_t>(dst_len));
    const double scale = static_cast<double>(src_len) / static_cast<double>(dst_len);
    for (int d = 0; d < dst_len; ++d) {
        Taps& tp = taps[static_cast<std::size_t>(d)];
        if (kernel == ResampleKernel::Nearest) {
            const int s = static_cast<int>(std::floor((d + 0.5) * scale));
            tp.index[0] = std::clamp(s, 0, src_len - 1);
            tp.weight[0] = 1.0;
            tp.count = 1;
            continue;
        }
        const double src = (d + 0.5) * scale - 0.5;
        const double base = std::floor(src);
        const double frac = src - base;
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
            const int s = static_cast<int>(base) - 1 + k;
            tp.index[static_cast<std::size_t>(k)] = std::clamp(s, 0, src_len - 1);
            const double w = cubic_weight(frac - (k - 1));
            tp.weight[static_cast<std::size_t>(k)] = w;
            sum += w;
        }
        for (double& w : tp.weight) w /= sum;
        tp.count = 4;
    }
    return taps;
}

}  // namespace detail

/// Separable resampling with edge-clamped sampling; output clamped to [0,1].
inline Image resize(const Image& img, int new_w, int new_h, ResampleKernel kernel) {
    if (new_w <= 0 || new_h <= 0) throw Error(ErrorKind::Parameter, "imageio", "resize target must be positive");
    if (new_w == img.width() && new_h == img.height()) return img;

    const int c = img.channels();
    const auto xt = detail::make_taps(img.width(), new_w, kernel);
    const auto yt = detail::make_taps(img.height(), new_h, kernel);

    // horizontal pass: height x new_w, unclamped
    std::vector<double> tmp(static_cast<std::size_t>(img.height()) * new_w * c);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < new_w; ++x) {
            const auto& tp = xt[static_cast<std::size_t>(x)];
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int k = 0; k < tp.count; ++k) acc += tp.weight[k] * img.at(tp.index[k], y, ch);
                tmp[(static_cast<std::size_t>(y) * new_w + x) * c + ch] = acc;
            }
        }
    }
    Image out(new_w, new_h, c);
    for (int y = 0; y < new_h; ++y) {
        const auto& tp = yt[static_cast<std::size_t>(y)];
        for (int x = 0; x < new_w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int k = 0; k < tp.count; ++k) {
                    acc += tp.weight[k] * tmp[(static_cast<std::size_t>(tp.index[k]) * new_w + x) * c + ch];
                }
                out.set(x, y, ch, acc);
            }
        }
    }
    return out;
}

inline Image crop(const Image& img, const Rect& r) {
    if (!r.inside(img.width(), img.height())) {
        throw Error(ErrorKind::Shape, "imageio",
                    "crop rectangle " + to_string(r) + " outside " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " image");
    }
    Image out(r.w, r.h, img.channels());
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x)
            for (int c = 0; c < img.channels(); ++c) out.set(x, y, c, img.at(r.x + x, r.y + y, c));
    return out;
}

inline Image crop(const Image& img, const FaceBox& box) { return crop(img, box.rect()); }

/// Copies `src` into `dst` with its top-left corner at (x, y).
inline void paste(Image& dst, const Image& src, int x, int y) {
    if (src.channels() != dst.channels()) throw Error(ErrorKind::Shape, "imageio", "channel mismatch in paste");
    if (!Rect{x, y, src.width(), src.height()}.inside(dst.width(), dst.height())) {
        throw Error(ErrorKind::Shape, "imageio", "paste region outside destination");
    }
    for (int yy = 0; yy < src.height(); ++yy)
        for (int xx = 0; xx < src.width(); ++xx)
            for (int c = 0; c < src.channels(); ++c) dst.set(x + xx, y + yy, c, src.at(xx, yy, c));
}

inline Image fill_rect(Image img, const Rect& r, double value) {
    for (int y = r.y; y < r.bottom(); ++y)
        for (int x = r.x; x < r.right(); ++x)
            for (int c = 0; c < img.channels(); ++c) img.set(x, y, c, value);
    return img;
}

/// Converts between 1 and 3 channels (gray is replicated; RGB is averaged).
inline Image with_channels(const Image& img, int channels) {
    if (img.channels() == channels) return img;
    Image out(img.width(), img.height(), channels);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (channels == 3) {
                for (int c = 0; c < 3; ++c) out.set(x, y, c, img.at(x, y, 0));
            } else {
                out.set(x, y, 0, (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0);
            }
        }
    }
    return out;
}

inline double mean_squared_error(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
        throw Error(ErrorKind::Shape, "imageio", "MSE needs equal image dims");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        const double d = a.pixels()[i] - b.pixels()[i];
        s += d * d;
    }
    return s / static_cast<double>(a.pixel_count());
}

/// Peak signal-to-noise ratio in dB for unit peak; +inf for identical images.
inline double psnr(const Image& a, const Image& b) {
    const double mse = mean_squared_error(a, b);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace idstyle
