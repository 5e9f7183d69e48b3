// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Evaluation manifests are JSON Lines: one object per non-blank line,
// '#' lines are comments. Relative paths resolve against the manifest's
// directory.
//
//   {"id": "img0", "content": "img0.png", "style": "anime",
//    "boxes": [{"id":0,"x":10,"y":12,"w":20,"h":24}],
//    "variants": {"ours": "ours/img0.png", "baseline": "base/img0.png"}}
//
// Instead of "boxes", an entry may give "boxes_path" (a face manifest) or
// "detector": "color_key".

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "idstyle/error.hpp"
#include "idstyle/evalkit.hpp"
#include "idstyle/imageio.hpp"
#include "idstyle/mosaic.hpp"
#include "idstyle/sidecar.hpp"

namespace idstyle {

struct EvalEntry {
    int line = 0;
    std::string id;
    std::string style = "default";
    std::filesystem::path content;
    std::vector<FaceBox> boxes;
    std::filesystem::path boxes_path;
    std::string detector;
    std::map<std::string, std::filesystem::path> variants;
};

inline std::vector<EvalEntry> load_eval_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Io, "evalkit", "cannot open manifest '" + path.string() + "'");
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    std::vector<EvalEntry> entries;
    std::string text;
    int line_no = 0;
    while (std::getline(f, text)) {
        ++line_no;
        const auto first = text.find_first_not_of(" \t\r");
        if (first == std::string::npos || text[first] == '#') continue;
        const std::string where = path.string() + " line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Format, "evalkit", where + ": malformed JSON: " + e.what());
        }
        detail::reject_unknown_keys(j, {"id", "content", "style", "boxes", "boxes_path", "detector", "variants"},
                                    where, ErrorKind::Format, "evalkit");
        EvalEntry e;
        e.line = line_no;
        e.id = detail::required<std::string>(j, "id", where, ErrorKind::Format, "evalkit");
        e.content = resolve(detail::required<std::string>(j, "content", where, ErrorKind::Format, "evalkit"));
        if (j.contains("style")) e.style = detail::required<std::string>(j, "style", where, ErrorKind::Format, "evalkit");
        const int sources = int(j.contains("boxes")) + int(j.contains("boxes_path")) + int(j.contains("detector"));
        if (sources != 1) {
            throw Error(ErrorKind::Format, "evalkit", where + ": exactly one of boxes, boxes_path, detector required");
        }
        if (j.contains("boxes")) {
            e.boxes = face_manifest_from_json(json{{"boxes", j.at("boxes")}}, where).boxes;
        } else if (j.contains("boxes_path")) {
            e.boxes_path = resolve(detail::required<std::string>(j, "boxes_path", where, ErrorKind::Format, "evalkit"));
        } else {
            e.detector = detail::required<std::string>(j, "detector", where, ErrorKind::Format, "evalkit");
            if (e.detector != "color_key") {
                throw Error(ErrorKind::Format, "evalkit", where + ": unknown detector '" + e.detector + "'");
            }
        }
        if (!j.contains("variants") || !j.at("variants").is_object()) {
            throw Error(ErrorKind::Format, "evalkit", where + ": 'variants' must be an object");
        }
        for (const auto& [name, p] : j.at("variants").items()) {
            if (!p.is_string()) throw Error(ErrorKind::Format, "evalkit", where + ": variant path must be a string");
            e.variants[name] = resolve(p.get<std::string>());
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

struct EvalRun {
    std::map<std::string, std::vector<EvalRecord>> records;  // per variant
    EvalReport report;
};

/// Scores every variant of every manifest entry and reports `candidate`
/// against `baseline`.
inline EvalRun run_eval(const std::filesystem::path& manifest, const std::string& candidate,
                        const std::string& baseline, const Embedder& embedder) {
    const auto entries = load_eval_manifest(manifest);
    EvalRun run;
    for (const auto& e : entries) {
        const std::string where = manifest.string() + " line " + std::to_string(e.line);
        auto load = [&](const std::filesystem::path& p) {
            try {
                return load_image(p);
            } catch (const Error& err) {
                throw Error(err.kind(), "evalkit", where + ": " + err.what());
            }
        };
        const Image content = load(e.content);
        std::vector<FaceBox> boxes = e.boxes;
        if (!e.boxes_path.empty()) {
            try {
                boxes = load_face_manifest(e.boxes_path).boxes;
            } catch (const Error& err) {
                throw Error(err.kind(), "evalkit", where + ": " + err.what());
            }
        } else if (!e.detector.empty()) {
            boxes = detect_faces(content, ColorKeyDetector{});
        }
        validate_boxes(boxes, content.width(), content.height());
        for (const auto& [name, path] : e.variants) {
            const Image stylized = load(path);
            auto recs = evaluate_faces(e.id, e.style, content, stylized, boxes, embedder);
            auto& dst = run.records[name];
            dst.insert(dst.end(), recs.begin(), recs.end());
        }
    }
    run.report = build_report(run.records[candidate], run.records[baseline]);
    return run;
}

}  // namespace idstyle
