// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "idstyle/error.hpp"
#include "idstyle/geometry.hpp"
#include "idstyle/image.hpp"

namespace idstyle {

// ---------------------------------------------------------------------------
// face-size categories

struct FaceAreaCategory {
    double ratio = 0.0;
    int category = 0;
};

inline constexpr double kSmallFaceRatio = 0.10;
inline constexpr double kLargeFaceRatio = 0.20;

/// Category 1 below 10% of the image area, 3 above 20%, 2 otherwise
/// (both boundaries belong to category 2).
inline int category_for_ratio(double ratio) {
    if (ratio < kSmallFaceRatio) return 1;
    if (ratio <= kLargeFaceRatio) return 2;
    return 3;
}

inline FaceAreaCategory face_area_category(const FaceBox& box, int img_w, int img_h) {
    if (img_w <= 0 || img_h <= 0) throw Error(ErrorKind::Parameter, "evalkit", "image area must be positive");
    if (!box.rect().inside(img_w, img_h)) {
        throw Error(ErrorKind::Parameter, "evalkit", "box " + to_string(box.rect()) + " outside image");
    }
    const double ratio = static_cast<double>(box.area()) / (static_cast<double>(img_w) * static_cast<double>(img_h));
    return FaceAreaCategory{ratio, category_for_ratio(ratio)};
}

// ---------------------------------------------------------------------------
// embeddings

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(const Image& face) const = 0;
};

/// Grayscale, bicubic 16x16 thumbnail, zero mean, unit L2 norm.
class ToyEmbedder : public Embedder {
public:
    static constexpr int kSide = 16;

    EmbeddingVector embed(const Image& face) const override {
        const Image thumb = resize(with_channels(face, 1), kSide, kSide, ResampleKernel::Bicubic);
        EmbeddingVector v;
        v.values.assign(thumb.pixels().begin(), thumb.pixels().end());
        double mean = 0.0;
        for (double x : v.values) mean += x;
        mean /= static_cast<double>(v.values.size());
        double norm2 = 0.0;
        for (double& x : v.values) {
            x -= mean;
            norm2 += x * x;
        }
        // 1e-24 is far below any 8-bit-representable variance
        if (!(norm2 > 1e-24)) throw Error(ErrorKind::DegenerateInput, "evalkit", "face has zero variance");
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v.values) x *= inv;
        return v;
    }
};

inline EmbeddingVector embed(const Image& face, const Embedder& embedder) { return embedder.embed(face); }

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim() || a.dim() == 0) {
        throw Error(ErrorKind::Shape, "evalkit",
                    "embedding dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::Parameter, "evalkit", "cosine of a zero vector");
    // sqrt(na * nb) keeps self-similarity exactly 1
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// records and reports

struct EvalRecord {
    std::string image_id;
    std::string style;
    int face_id = 0;
    double face_ratio = 0.0;  // ratio that decided the category (largest face of the image)
    int category = 0;
    double cosine = 0.0;
};

/// Crops the same boxes from the content and the stylized image and scores
/// each face. Every face of an image shares the category of its largest face.
inline std::vector<EvalRecord> evaluate_faces(const std::string& image_id, const std::string& style,
                                              const Image& content, const Image& stylized,
                                              const std::vector<FaceBox>& boxes, const Embedder& embedder) {
    if (content.width() != stylized.width() || content.height() != stylized.height()) {
        throw Error(ErrorKind::Shape, "evalkit", image_id + ": stylized image dims differ from content");
    }
    std::vector<EvalRecord> out;
    if (boxes.empty()) return out;
    const auto largest = *std::max_element(boxes.begin(), boxes.end(),
                                           [](const FaceBox& a, const FaceBox& b) { return a.area() < b.area(); });
    const FaceAreaCategory cat = face_area_category(largest, content.width(), content.height());
    for (const auto& b : boxes) {
        face_area_category(b, content.width(), content.height());
        const double cos = cosine_similarity(embedder.embed(crop(content, b)), embedder.embed(crop(stylized, b)));
        out.push_back(EvalRecord{image_id, style, b.id, cat.ratio, cat.category, cos});
    }
    return out;
}

struct ReportCell {
    int category = 0;
    std::string style;
    std::optional<double> candidate_mean;
    std::optional<double> baseline_mean;
    std::size_t candidate_count = 0;
    std::size_t baseline_count = 0;
    std::optional<double> improvement_percent;

    /// Empty when the cell is complete; otherwise why it is incomplete.
    std::string flag() const {
        if (!candidate_mean) return "missing candidate";
        if (!baseline_mean) return "missing baseline";
        if (!improvement_percent) return "baseline mean <= 0";
        return {};
    }
};

inline constexpr const char* kImprovementFootnote =
    "Improvement % = (ours - baseline) / baseline * 100, computed from unrounded cell means. "
    "Recomputing from rounded means can differ noticeably: means printed as 0.32 and 0.169 give 89.35%, "
    "while a table whose entries were derived from unrounded values may show 89.94% for the same printed pair.";

struct EvalReport {
    std::vector<ReportCell> cells;
    std::string footnote = kImprovementFootnote;

    const ReportCell* find(int category, const std::string& style) const {
        for (const auto& c : cells)
            if (c.category == category && c.style == style) return &c;
        return nullptr;
    }
};

inline std::optional<double> improvement_percent(double candidate, double baseline) {
    if (!(baseline > 0.0)) return std::nullopt;
    return (candidate - baseline) / baseline * 100.0;
}

inline EvalReport build_report(const std::vector<EvalRecord>& candidate, const std::vector<EvalRecord>& baseline) {
    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
    };
    using Key = std::pair<int, std::string>;
    std::map<Key, Acc> cand, base;
    for (const auto& r : candidate) {
        auto& a = cand[{r.category, r.style}];
        a.sum += r.cosine;
        ++a.n;
    }
    for (const auto& r : baseline) {
        auto& a = base[{r.category, r.style}];
        a.sum += r.cosine;
        ++a.n;
    }
    std::map<Key, ReportCell> cells;
    for (const auto& [k, a] : cand) {
        auto& c = cells[k];
        c.category = k.first;
        c.style = k.second;
        c.candidate_mean = a.sum / static_cast<double>(a.n);
        c.candidate_count = a.n;
    }
    for (const auto& [k, a] : base) {
        auto& c = cells[k];
        c.category = k.first;
        c.style = k.second;
        c.baseline_mean = a.sum / static_cast<double>(a.n);
        c.baseline_count = a.n;
    }
    EvalReport report;
    for (auto& [k, c] : cells) {
        if (c.candidate_mean && c.baseline_mean) c.improvement_percent = improvement_percent(*c.candidate_mean, *c.baseline_mean);
        report.cells.push_back(c);
    }
    return report;
}

namespace detail {

inline std::string fmt_mean(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

inline std::string fmt_improvement(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f%%", *v);
    return buf;
}

}  // namespace detail

inline void write_report_csv(std::ostream& os, const EvalReport& report) {
    os << "category,style,ours,baseline,improvement_percent,n_ours,n_baseline,flag\n";
    for (const auto& c : report.cells) {
        std::string imp = "";
        if (c.improvement_percent) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", *c.improvement_percent);
            imp = buf;
        }
        os << c.category << ',' << c.style << ',' << (c.candidate_mean ? detail::fmt_mean(c.candidate_mean) : "")
           << ',' << (c.baseline_mean ? detail::fmt_mean(c.baseline_mean) : "") << ',' << imp << ','
           << c.candidate_count << ',' << c.baseline_count << ',' << c.flag() << '\n';
    }
}

/// Aligned plain-text table: Category, Style, Ours, Baseline, Improvement%.
inline void write_report_table(std::ostream& os, const EvalReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-12s %10s %10s %14s\n", "Category", "Style", "Ours", "Baseline",
                  "Improvement%");
    os << buf;
    os << std::string(62, '-') << '\n';
    for (const auto& c : report.cells) {
        const std::string cat = "Category " + std::to_string(c.category);
        std::snprintf(buf, sizeof buf, "%-12s %-12s %10s %10s %14s", cat.c_str(), c.style.c_str(),
                      detail::fmt_mean(c.candidate_mean).c_str(), detail::fmt_mean(c.baseline_mean).c_str(),
                      detail::fmt_improvement(c.improvement_percent).c_str());
        os << buf;
        if (const auto f = c.flag(); !f.empty()) os << "  [" << f << "]";
        os << '\n';
    }
    os << "\nNote: " << report.footnote << '\n';
}

}  // namespace idstyle
