// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Mosaic compositing for identity preservation.
//
// A content mosaic is the untouched source image with a strip of square
// tiles appended below it, one enhanced face per tile. The whole canvas is
// stylized as one image; afterwards the stylized tiles are cut out again
// and pasted back over the face boxes of the stylized background.
//
//   +-----------------------+
//   |  original image       |  background_rect = (0, 0, W, H)
//   |                       |
//   +-----+-----+-----+-----+
//   | f0  | f1  | f2  |gray |  tiles, row-major, cols = floor(W / tile)
//   +-----+-----+-----+-----+

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "idstyle/error.hpp"
#include "idstyle/geometry.hpp"
#include "idstyle/image.hpp"

namespace idstyle {

inline void validate_boxes(const std::vector<FaceBox>& boxes, int img_w, int img_h) {
    std::set<int> ids;
    for (const auto& b : boxes) {
        if (!b.rect().inside(img_w, img_h)) {
            throw Error(ErrorKind::Parameter, "mosaic",
                        "face box " + std::to_string(b.id) + " " + to_string(b.rect()) + " outside " +
                            std::to_string(img_w) + "x" + std::to_string(img_h) + " image");
        }
        if (!ids.insert(b.id).second) {
            throw Error(ErrorKind::Parameter, "mosaic", "duplicate face id " + std::to_string(b.id));
        }
    }
}

// ---------------------------------------------------------------------------
// detection

class FaceDetector {
public:
    virtual ~FaceDetector() = default;
    virtual std::vector<FaceBox> detect(const Image& img) const = 0;
};

/// Returns boxes read from a sidecar manifest.
class ManifestDetector : public FaceDetector {
public:
    explicit ManifestDetector(std::vector<FaceBox> boxes) : boxes_(std::move(boxes)) {}
    std::vector<FaceBox> detect(const Image&) const override { return boxes_; }

private:
    std::vector<FaceBox> boxes_;
};

/// Finds 4-connected regions whose pixels exactly equal a key colour
/// (default pure magenta) and reports their bounding boxes.
class ColorKeyDetector : public FaceDetector {
public:
    ColorKeyDetector(double r = 1.0, double g = 0.0, double b = 1.0) : key_{r, g, b} {}

    std::vector<FaceBox> detect(const Image& img) const override {
        std::vector<FaceBox> out;
        if (img.channels() != 3) return out;
        const int w = img.width();
        const int h = img.height();
        std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
        auto is_key = [&](int x, int y) {
            return img.at(x, y, 0) == key_[0] && img.at(x, y, 1) == key_[1] && img.at(x, y, 2) == key_[2];
        };
        std::vector<std::pair<int, int>> stack;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (seen[static_cast<std::size_t>(y) * w + x] || !is_key(x, y)) continue;
                int x0 = x, x1 = x, y0 = y, y1 = y;
                stack.assign(1, {x, y});
                seen[static_cast<std::size_t>(y) * w + x] = 1;
                while (!stack.empty()) {
                    auto [cx, cy] = stack.back();
                    stack.pop_back();
                    x0 = std::min(x0, cx);
                    x1 = std::max(x1, cx);
                    y0 = std::min(y0, cy);
                    y1 = std::max(y1, cy);
                    const int nbr[4][2] = {{cx + 1, cy}, {cx - 1, cy}, {cx, cy + 1}, {cx, cy - 1}};
                    for (const auto& n : nbr) {
                        if (n[0] < 0 || n[1] < 0 || n[0] >= w || n[1] >= h) continue;
                        auto& s = seen[static_cast<std::size_t>(n[1]) * w + n[0]];
                        if (!s && is_key(n[0], n[1])) {
                            s = 1;
                            stack.emplace_back(n[0], n[1]);
                        }
                    }
                }
                out.push_back(FaceBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1, static_cast<int>(out.size())});
            }
        }
        return out;
    }

private:
    double key_[3];
};

/// Runs `detector`, validates its boxes, sorts them by descending area
/// (ties by top-left y then x) and renumbers ids 0..n-1 in that order.
inline std::vector<FaceBox> detect_faces(const Image& img, const FaceDetector& detector) {
    std::vector<FaceBox> boxes;
    try {
        boxes = detector.detect(img);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Detector, "mosaic", std::string("detector failed: ") + e.what());
    }
    for (const auto& b : boxes) {
        if (!b.rect().inside(img.width(), img.height())) {
            throw Error(ErrorKind::Detector, "mosaic", "detector returned out-of-bounds box " + to_string(b.rect()));
        }
    }
    std::stable_sort(boxes.begin(), boxes.end(), [](const FaceBox& a, const FaceBox& b) {
        if (a.area() != b.area()) return a.area() > b.area();
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    for (std::size_t i = 0; i < boxes.size(); ++i) boxes[i].id = static_cast<int>(i);
    return boxes;
}

// ---------------------------------------------------------------------------
// enhancement

class Upscaler {
public:
    virtual ~Upscaler() = default;
    virtual Image upscale(const Image& img, int width, int height) const = 0;
};

class BicubicUpscaler : public Upscaler {
public:
    Image upscale(const Image& img, int width, int height) const override {
        return resize(img, width, height, ResampleKernel::Bicubic);
    }
};

/// Aspect-preserving placement of a w x h crop inside a target x target tile,
/// centred; the remainder is letterbox.
inline Rect letterbox_rect(int w, int h, int target) {
    const double scale = static_cast<double>(target) / static_cast<double>(std::max(w, h));
    const int iw = std::clamp(static_cast<int>(std::lround(w * scale)), 1, target);
    const int ih = std::clamp(static_cast<int>(std::lround(h * scale)), 1, target);
    return Rect{(target - iw) / 2, (target - ih) / 2, iw, ih};
}

inline constexpr double kMidGray = 0.5;

/// Enhances a face crop into a target x target tile (letterboxed with
/// mid-gray when the crop is not square).
inline Image enhance_face(const Image& crop, const Upscaler& upscaler, int target) {
    if (target < std::max(crop.width(), crop.height())) {
        throw Error(ErrorKind::Parameter, "mosaic",
                    "enhance target " + std::to_string(target) + " smaller than crop " +
                        std::to_string(crop.width()) + "x" + std::to_string(crop.height()));
    }
    const Rect inner = letterbox_rect(crop.width(), crop.height(), target);
    Image face = upscaler.upscale(crop, inner.w, inner.h);
    if (face.width() != inner.w || face.height() != inner.h || face.channels() != crop.channels()) {
        throw Error(ErrorKind::Shape, "mosaic", "upscaler returned wrong dims");
    }
    if (inner.w == target && inner.h == target) return face;
    Image tile(target, target, crop.channels(), kMidGray);
    paste(tile, face, inner.x, inner.y);
    return tile;
}

// ---------------------------------------------------------------------------
// content mosaic

struct MosaicTile {
    int face_id = 0;
    Rect tile;     // square tile on the canvas
    Rect inner;    // face area inside the tile (canvas coordinates)
    FaceBox source;
    friend bool operator==(const MosaicTile&, const MosaicTile&) = default;
};

struct MosaicLayout {
    int canvas_w = 0;
    int canvas_h = 0;
    Rect background;
    int tile_size = 0;
    std::vector<MosaicTile> tiles;
    friend bool operator==(const MosaicLayout&, const MosaicLayout&) = default;
};

/// Checks containment and pairwise disjointness of all layout rectangles.
inline void validate_layout(const MosaicLayout& layout) {
    auto fail = [](const std::string& m) { return Error(ErrorKind::Parameter, "mosaic", "invalid layout: " + m); };
    if (layout.canvas_w <= 0 || layout.canvas_h <= 0) throw fail("non-positive canvas");
    if (!layout.background.inside(layout.canvas_w, layout.canvas_h)) throw fail("background outside canvas");
    std::set<int> ids;
    for (std::size_t i = 0; i < layout.tiles.size(); ++i) {
        const auto& t = layout.tiles[i];
        if (!ids.insert(t.face_id).second) throw fail("duplicate face id " + std::to_string(t.face_id));
        if (!t.tile.inside(layout.canvas_w, layout.canvas_h)) throw fail("tile outside canvas");
        if (t.tile.w != layout.tile_size || t.tile.h != layout.tile_size) throw fail("tile is not tile_size square");
        if (!(t.inner.x >= t.tile.x && t.inner.y >= t.tile.y && t.inner.right() <= t.tile.right() &&
              t.inner.bottom() <= t.tile.bottom() && t.inner.w > 0 && t.inner.h > 0)) {
            throw fail("inner rect outside its tile");
        }
        if (intersects(t.tile, layout.background)) throw fail("tile overlaps background");
        for (std::size_t j = 0; j < i; ++j) {
            if (intersects(t.tile, layout.tiles[j].tile)) throw fail("overlapping tiles");
        }
    }
}

struct ContentMosaic {
    Image canvas;
    MosaicLayout layout;
};

/// Fits one face crop into its tile: enhanced (upscaled) when it fits,
/// bicubic-downscaled into the letterbox otherwise.
inline Image face_tile(const Image& crop, const Upscaler& upscaler, int tile_size) {
    if (std::max(crop.width(), crop.height()) <= tile_size) return enhance_face(crop, upscaler, tile_size);
    const Rect inner = letterbox_rect(crop.width(), crop.height(), tile_size);
    Image tile(tile_size, tile_size, crop.channels(), kMidGray);
    paste(tile, resize(crop, inner.w, inner.h, ResampleKernel::Bicubic), inner.x, inner.y);
    return tile;
}

inline ContentMosaic build_content_mosaic(const Image& img, const std::vector<FaceBox>& boxes,
                                          const Upscaler& upscaler, int tile_size) {
    if (tile_size < 1) throw Error(ErrorKind::Parameter, "mosaic", "tile_size must be positive");
    // with no faces the canvas is the image itself, so any tile size works
    if (!boxes.empty() && tile_size > img.width()) {
        throw Error(ErrorKind::Parameter, "mosaic",
                    "tile_size " + std::to_string(tile_size) + " exceeds image width " + std::to_string(img.width()));
    }
    validate_boxes(boxes, img.width(), img.height());

    const int n = static_cast<int>(boxes.size());
    const int cols = std::max(1, img.width() / tile_size);
    const int rows = (n + cols - 1) / cols;

    MosaicLayout layout;
    layout.canvas_w = img.width();
    layout.canvas_h = img.height() + rows * tile_size;
    layout.background = Rect{0, 0, img.width(), img.height()};
    layout.tile_size = tile_size;

    Image canvas(layout.canvas_w, layout.canvas_h, img.channels(), kMidGray);
    paste(canvas, img, 0, 0);
    for (int i = 0; i < n; ++i) {
        const FaceBox& box = boxes[static_cast<std::size_t>(i)];
        const Rect tile{(i % cols) * tile_size, img.height() + (i / cols) * tile_size, tile_size, tile_size};
        const Rect lb = letterbox_rect(box.w, box.h, tile_size);
        paste(canvas, face_tile(crop(img, box), upscaler, tile_size), tile.x, tile.y);
        layout.tiles.push_back(MosaicTile{box.id, tile, Rect{tile.x + lb.x, tile.y + lb.y, lb.w, lb.h}, box});
    }
    return ContentMosaic{std::move(canvas), std::move(layout)};
}

struct FaceImage {
    int id = 0;
    Image image;
};

/// Cuts every face back out of a (stylized) mosaic canvas. Letterbox bars
/// are removed, so each result covers exactly the face area of its tile.
inline std::vector<FaceImage> extract_stylized_faces(const Image& stylized_mosaic, const MosaicLayout& layout) {
    if (stylized_mosaic.width() != layout.canvas_w || stylized_mosaic.height() != layout.canvas_h) {
        throw Error(ErrorKind::Shape, "mosaic",
                    "mosaic is " + std::to_string(stylized_mosaic.width()) + "x" +
                        std::to_string(stylized_mosaic.height()) + ", layout expects " +
                        std::to_string(layout.canvas_w) + "x" + std::to_string(layout.canvas_h));
    }
    std::vector<FaceImage> faces;
    faces.reserve(layout.tiles.size());
    for (const auto& t : layout.tiles) faces.push_back(FaceImage{t.face_id, crop(stylized_mosaic, t.inner)});
    return faces;
}

/// The background part of a (stylized) mosaic canvas.
inline Image extract_background(const Image& stylized_mosaic, const MosaicLayout& layout) {
    return crop(stylized_mosaic, layout.background);
}

/// Blend weight of the pasted face at (x, y) inside `box`: the edge pixel
/// is at distance 1 and the weight ramps linearly to 1 over `feather` px.
inline double feather_weight(const FaceBox& box, int x, int y, int feather) {
    if (feather <= 0) return 1.0;
    const int d = 1 + std::min({x - box.x, box.x + box.w - 1 - x, y - box.y, box.y + box.h - 1 - y});
    return std::min(1.0, static_cast<double>(d) / static_cast<double>(feather));
}

/// Pastes each face (bicubic-resized to its box) over the background.
/// Larger boxes are pasted first so smaller overlapping faces stay visible.
inline Image reinsert_faces(const Image& stylized_background, const std::vector<FaceImage>& faces,
                            const std::vector<FaceBox>& boxes, int feather) {
    if (feather < 0) throw Error(ErrorKind::Parameter, "mosaic", "feather must be >= 0");
    validate_boxes(boxes, stylized_background.width(), stylized_background.height());

    std::vector<std::pair<const FaceBox*, const Image*>> work;
    for (const auto& f : faces) {
        auto it = std::find_if(boxes.begin(), boxes.end(), [&](const FaceBox& b) { return b.id == f.id; });
        if (it == boxes.end()) {
            throw Error(ErrorKind::Parameter, "mosaic", "unknown face id " + std::to_string(f.id));
        }
        work.emplace_back(&*it, &f.image);
    }
    std::stable_sort(work.begin(), work.end(), [](const auto& a, const auto& b) {
        if (a.first->area() != b.first->area()) return a.first->area() > b.first->area();
        return a.first->id < b.first->id;
    });

    Image out = stylized_background;
    for (const auto& [box, face] : work) {
        const Image fitted =
            resize(with_channels(*face, out.channels()), box->w, box->h, ResampleKernel::Bicubic);
        for (int y = 0; y < box->h; ++y) {
            for (int x = 0; x < box->w; ++x) {
                const int px = box->x + x;
                const int py = box->y + y;
                const double w = feather_weight(*box, px, py, feather);
                for (int c = 0; c < out.channels(); ++c) {
                    const double v = w == 1.0 ? fitted.at(x, y, c) : w * fitted.at(x, y, c) + (1.0 - w) * out.at(px, py, c);
                    out.set(px, py, c, v);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// style mosaic

struct StyleMosaicSpec {
    int rows = 1;
    int cols = 1;
    int cell_size = 256;
};

/// Grid of style references, resized (bicubic) into cells row-major; empty
/// cells are mid-gray.
inline Image build_style_mosaic(const std::vector<Image>& styles, const StyleMosaicSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1 || spec.cell_size < 1) {
        throw Error(ErrorKind::Parameter, "mosaic", "style mosaic rows, cols and cell_size must be positive");
    }
    if (static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols) < styles.size()) {
        throw Error(ErrorKind::Parameter, "mosaic",
                    std::to_string(styles.size()) + " style images do not fit a " + std::to_string(spec.rows) + "x" +
                        std::to_string(spec.cols) + " grid");
    }
    const bool color = std::any_of(styles.begin(), styles.end(), [](const Image& s) { return s.channels() == 3; });
    const int channels = color ? 3 : 1;
    Image out(spec.cols * spec.cell_size, spec.rows * spec.cell_size, channels, kMidGray);
    for (std::size_t i = 0; i < styles.size(); ++i) {
        const int r = static_cast<int>(i) / spec.cols;
        const int c = static_cast<int>(i) % spec.cols;
        const Image cell =
            resize(with_channels(styles[i], channels), spec.cell_size, spec.cell_size, ResampleKernel::Bicubic);
        paste(out, cell, c * spec.cell_size, r * spec.cell_size);
    }
    return out;
}

}  // namespace idstyle
