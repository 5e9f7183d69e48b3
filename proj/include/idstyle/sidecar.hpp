// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON sidecar documents: face-box manifests and mosaic layouts.
//
//   faces.json   {"image_width": 128, "image_height": 96,
//                 "boxes": [{"id": 0, "x": 10, "y": 12, "w": 20, "h": 24}, ...]}
//
//   layout.json  {"canvas_w": 128, "canvas_h": 160, "tile_size": 64,
//                 "background": {"x":0,"y":0,"w":128,"h":96},
//                 "tiles": [{"face_id": 0, "tile": {...}, "inner": {...},
//                            "source": {"id":0,"x":..,"y":..,"w":..,"h":..}}]}

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idstyle/error.hpp"
#include "idstyle/geometry.hpp"
#include "idstyle/mosaic.hpp"

namespace idstyle {

using json = nlohmann::json;

namespace detail {

inline json read_json_file(const std::filesystem::path& path, const char* module) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Io, module, "cannot open '" + path.string() + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Format, module,
                    path.string() + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text, const char* module) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, module, "cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw Error(ErrorKind::Io, module, "write failed for '" + path.string() + "'");
}

/// Rejects keys outside `allowed`; `where` prefixes the message.
inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                                ErrorKind kind = ErrorKind::Format, const char* module = "sidecar") {
    if (!obj.is_object()) throw Error(kind, module, where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
        if (!ok.count(k)) throw Error(kind, module, where + ": unknown key '" + k + "'");
    }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where, ErrorKind kind = ErrorKind::Format,
           const char* module = "sidecar") {
    if (!obj.contains(key)) throw Error(kind, module, where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(kind, module, where + ": key '" + key + "' has the wrong type");
    }
}

inline json rect_to_json(const Rect& r) { return json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

inline Rect rect_from_json(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"x", "y", "w", "h"}, where);
    return Rect{required<int>(j, "x", where), required<int>(j, "y", where), required<int>(j, "w", where),
                required<int>(j, "h", where)};
}

inline json box_to_json(const FaceBox& b) {
    return json{{"id", b.id}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

inline FaceBox box_from_json(const json& j, const std::string& where) {
    reject_unknown_keys(j, {"id", "x", "y", "w", "h"}, where);
    FaceBox b{required<int>(j, "x", where), required<int>(j, "y", where), required<int>(j, "w", where),
              required<int>(j, "h", where), required<int>(j, "id", where)};
    if (b.x < 0 || b.y < 0 || b.w <= 0 || b.h <= 0) {
        throw Error(ErrorKind::Format, "sidecar", where + ": box needs x,y >= 0 and w,h > 0");
    }
    return b;
}

}  // namespace detail

struct FaceManifest {
    std::optional<int> image_width;
    std::optional<int> image_height;
    std::vector<FaceBox> boxes;
};

inline json face_manifest_to_json(const FaceManifest& m) {
    json j;
    if (m.image_width) j["image_width"] = *m.image_width;
    if (m.image_height) j["image_height"] = *m.image_height;
    j["boxes"] = json::array();
    for (const auto& b : m.boxes) j["boxes"].push_back(detail::box_to_json(b));
    return j;
}

inline FaceManifest face_manifest_from_json(const json& j, const std::string& where = "face manifest") {
    detail::reject_unknown_keys(j, {"image_width", "image_height", "boxes"}, where);
    FaceManifest m;
    if (j.contains("image_width")) m.image_width = detail::required<int>(j, "image_width", where);
    if (j.contains("image_height")) m.image_height = detail::required<int>(j, "image_height", where);
    if (!j.contains("boxes") || !j.at("boxes").is_array()) {
        throw Error(ErrorKind::Format, "sidecar", where + ": 'boxes' must be an array");
    }
    std::set<int> ids;
    for (std::size_t i = 0; i < j.at("boxes").size(); ++i) {
        FaceBox b = detail::box_from_json(j.at("boxes")[i], where + " box " + std::to_string(i));
        if (!ids.insert(b.id).second) {
            throw Error(ErrorKind::Format, "sidecar", where + ": duplicate face id " + std::to_string(b.id));
        }
        m.boxes.push_back(b);
    }
    return m;
}

inline FaceManifest load_face_manifest(const std::filesystem::path& path) {
    return face_manifest_from_json(detail::read_json_file(path, "sidecar"), path.string());
}

inline void save_face_manifest(const FaceManifest& m, const std::filesystem::path& path) {
    detail::write_text_file(path, face_manifest_to_json(m).dump(2) + "\n", "sidecar");
}

inline json layout_to_json(const MosaicLayout& l) {
    json tiles = json::array();
    for (const auto& t : l.tiles) {
        tiles.push_back(json{{"face_id", t.face_id},
                             {"tile", detail::rect_to_json(t.tile)},
                             {"inner", detail::rect_to_json(t.inner)},
                             {"source", detail::box_to_json(t.source)}});
    }
    return json{{"canvas_w", l.canvas_w},
                {"canvas_h", l.canvas_h},
                {"tile_size", l.tile_size},
                {"background", detail::rect_to_json(l.background)},
                {"tiles", tiles}};
}

inline MosaicLayout layout_from_json(const json& j, const std::string& where = "layout") {
    detail::reject_unknown_keys(j, {"canvas_w", "canvas_h", "tile_size", "background", "tiles"}, where);
    MosaicLayout l;
    l.canvas_w = detail::required<int>(j, "canvas_w", where);
    l.canvas_h = detail::required<int>(j, "canvas_h", where);
    l.tile_size = detail::required<int>(j, "tile_size", where);
    if (!j.contains("background")) throw Error(ErrorKind::Format, "sidecar", where + ": missing 'background'");
    l.background = detail::rect_from_json(j.at("background"), where + " background");
    if (!j.contains("tiles") || !j.at("tiles").is_array()) {
        throw Error(ErrorKind::Format, "sidecar", where + ": 'tiles' must be an array");
    }
    for (std::size_t i = 0; i < j.at("tiles").size(); ++i) {
        const json& t = j.at("tiles")[i];
        const std::string w = where + " tile " + std::to_string(i);
        detail::reject_unknown_keys(t, {"face_id", "tile", "inner", "source"}, w);
        if (!t.contains("tile") || !t.contains("inner") || !t.contains("source")) {
            throw Error(ErrorKind::Format, "sidecar", w + ": needs tile, inner and source");
        }
        l.tiles.push_back(MosaicTile{detail::required<int>(t, "face_id", w), detail::rect_from_json(t.at("tile"), w),
                                     detail::rect_from_json(t.at("inner"), w),
                                     detail::box_from_json(t.at("source"), w)});
    }
    validate_layout(l);
    return l;
}

inline MosaicLayout load_layout(const std::filesystem::path& path) {
    return layout_from_json(detail::read_json_file(path, "sidecar"), path.string());
}

inline void save_layout(const MosaicLayout& l, const std::filesystem::path& path) {
    detail::write_text_file(path, layout_to_json(l).dump(2) + "\n", "sidecar");
}

}  // namespace idstyle
