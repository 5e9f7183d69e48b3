// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "idstyle/error.hpp"

namespace idstyle {

struct LatentDims {
    int channels = 1;
    int height = 1;
    int width = 1;

    std::size_t size() const {
        return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
               static_cast<std::size_t>(width);
    }
    bool valid() const { return channels > 0 && height > 0 && width > 0; }
    friend bool operator==(const LatentDims&, const LatentDims&) = default;
};

inline std::string to_string(const LatentDims& d) {
    return std::to_string(d.channels) + "x" + std::to_string(d.height) + "x" + std::to_string(d.width);
}

/// Real-valued (channels, height, width) tensor in codec space, row-major.
class Latent {
public:
    Latent() = default;

    explicit Latent(LatentDims dims, double fill = 0.0) : dims_(dims) {
        if (!dims.valid()) {
            throw Error(ErrorKind::Shape, "latent", "dims must be positive, got " + to_string(dims));
        }
        data_.assign(dims.size(), fill);
    }

    Latent(LatentDims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
        if (!dims.valid()) {
            throw Error(ErrorKind::Shape, "latent", "dims must be positive, got " + to_string(dims));
        }
        if (data_.size() != dims.size()) {
            throw Error(ErrorKind::Shape, "latent",
                        "data length " + std::to_string(data_.size()) + " does not match dims " +
                            to_string(dims));
        }
        if (!all_finite()) {
            throw Error(ErrorKind::Numerical, "latent", "non-finite value in latent data");
        }
    }

    static Latent scalar(double v) { return Latent(LatentDims{1, 1, 1}, std::vector<double>{v}); }

    const LatentDims& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const Latent&, const Latent&) = default;

private:
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * dims_.height + y) * dims_.width + x;
    }

    LatentDims dims_{};
    std::vector<double> data_;
};

inline void require_same_dims(const Latent& a, const Latent& b, const char* module) {
    if (a.dims() != b.dims()) {
        throw Error(ErrorKind::Shape, module,
                    "dims mismatch: " + to_string(a.dims()) + " vs " + to_string(b.dims()));
    }
}

inline double squared_l2(const Latent& a, const Latent& b) {
    require_same_dims(a, b, "latent");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double l2_norm(const Latent& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

}  // namespace idstyle
