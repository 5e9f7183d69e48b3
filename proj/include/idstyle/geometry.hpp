// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

namespace idstyle {

/// Axis-aligned pixel rectangle, top-left origin.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
    int right() const { return x + w; }
    int bottom() const { return y + h; }
    bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
    bool inside(int width, int height) const {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

inline bool intersects(const Rect& a, const Rect& b) {
    return a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom();
}

inline std::string to_string(const Rect& r) {
    return "(" + std::to_string(r.x) + "," + std::to_string(r.y) + " " + std::to_string(r.w) + "x" +
           std::to_string(r.h) + ")";
}

struct FaceBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    int id = 0;

    Rect rect() const { return Rect{x, y, w, h}; }
    std::int64_t area() const { return rect().area(); }
    friend bool operator==(const FaceBox&, const FaceBox&) = default;
};

}  // namespace idstyle
