// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Toy stand-in for the autoencoder: pixels map affinely to [-1,1]
// (z = 2p - 1). Pool mode additionally block-averages factor x factor
// pixel blocks; decoding upsamples by nearest neighbour and clamps.

#include <algorithm>
#include <string>
#include <string_view>

#include "idstyle/error.hpp"
#include "idstyle/image.hpp"
#include "idstyle/latent.hpp"

namespace idstyle {

enum class CodecMode { Identity, Pool };

inline CodecMode parse_codec_mode(std::string_view s) {
    if (s == "identity") return CodecMode::Identity;
    if (s == "pool") return CodecMode::Pool;
    throw Error(ErrorKind::Parameter, "latentcodec", "unknown codec mode '" + std::string(s) + "'");
}
inline const char* to_string(CodecMode m) { return m == CodecMode::Identity ? "identity" : "pool"; }

struct CodecConfig {
    CodecMode mode = CodecMode::Pool;
    int factor = 8;

    int effective_factor() const { return mode == CodecMode::Pool ? factor : 1; }
    void validate() const {
        if (factor < 1) throw Error(ErrorKind::Parameter, "latentcodec", "factor must be >= 1");
    }
};

inline Latent encode(const Image& img, const CodecConfig& cfg) {
    cfg.validate();
    const int f = cfg.effective_factor();
    if (img.width() % f != 0 || img.height() % f != 0) {
        throw Error(ErrorKind::Shape, "latentcodec",
                    "pool factor " + std::to_string(f) + " does not divide " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()));
    }
    const LatentDims dims{img.channels(), img.height() / f, img.width() / f};
    Latent z(dims);
    const double inv = 1.0 / static_cast<double>(f * f);
    for (int c = 0; c < dims.channels; ++c) {
        for (int ly = 0; ly < dims.height; ++ly) {
            for (int lx = 0; lx < dims.width; ++lx) {
                // shifted sum: a constant block averages to exactly its value
                const double first = 2.0 * img.at(lx * f, ly * f, c) - 1.0;
                double acc = 0.0;
                for (int dy = 0; dy < f; ++dy)
                    for (int dx = 0; dx < f; ++dx) acc += (2.0 * img.at(lx * f + dx, ly * f + dy, c) - 1.0) - first;
                z.at(c, ly, lx) = first + acc * inv;
            }
        }
    }
    return z;
}

inline Image decode(const Latent& z, const CodecConfig& cfg) {
    cfg.validate();
    if (!z.all_finite()) throw Error(ErrorKind::Numerical, "latentcodec", "cannot decode a non-finite latent");
    if (z.dims().channels != 1 && z.dims().channels != 3) {
        throw Error(ErrorKind::Shape, "latentcodec", "latent must have 1 or 3 channels to decode");
    }
    const int f = cfg.effective_factor();
    Image img(z.dims().width * f, z.dims().height * f, z.dims().channels);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) img.set(x, y, c, (z.at(c, y / f, x / f) + 1.0) * 0.5);
    return img;
}

}  // namespace idstyle
