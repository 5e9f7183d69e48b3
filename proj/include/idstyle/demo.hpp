// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic fixtures and the one-command demo run.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "idstyle/config.hpp"
#include "idstyle/eval_manifest.hpp"
#include "idstyle/evalkit.hpp"
#include "idstyle/imageio.hpp"
#include "idstyle/mosaic.hpp"
#include "idstyle/pipeline.hpp"
#include "idstyle/sidecar.hpp"

namespace idstyle {

/// splitmix64; portable so fixtures are identical on every platform.
class FixtureRng {
public:
    explicit FixtureRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

private:
    std::uint64_t state_;
};

struct Fixture {
    Image image;
    std::vector<FaceBox> boxes;
};

namespace detail {

inline double blob(double x, double y, double cx, double cy, double r) {
    const double dx = (x - cx) / r, dy = (y - cy) / r;
    return std::exp(-(dx * dx + dy * dy));
}

// Face-like patch: smooth shading, two eyes, a mouth and a per-face texture.
inline void draw_face(Image& img, const FaceBox& b, FixtureRng& rng) {
    const double tone[3] = {rng.uniform(0.75, 0.95), rng.uniform(0.55, 0.75), rng.uniform(0.4, 0.6)};
    const double ex = rng.uniform(0.25, 0.35), ey = rng.uniform(0.3, 0.42), er = rng.uniform(0.08, 0.13);
    const double my = rng.uniform(0.65, 0.78), mw = rng.uniform(0.18, 0.3);
    double fu[2], fv[2], ph[2];
    for (int k = 0; k < 2; ++k) {
        fu[k] = rng.uniform(0.5, 1.8);
        fv[k] = rng.uniform(0.5, 1.8);
        ph[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    for (int y = 0; y < b.h; ++y) {
        for (int x = 0; x < b.w; ++x) {
            const double u = (x + 0.5) / b.w, v = (y + 0.5) / b.h;
            double lum = 0.75 - 0.25 * ((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5)) * 4.0;
            for (int k = 0; k < 2; ++k) lum += 0.08 * std::sin(2.0 * std::numbers::pi * (fu[k] * u + fv[k] * v) + ph[k]);
            lum -= 0.55 * (blob(u, v, ex, ey, er) + blob(u, v, 1.0 - ex, ey, er));
            lum -= 0.4 * blob(u, v, 0.5, my, 0.07) * (std::abs(u - 0.5) < mw ? 1.0 : 0.3);
            for (int c = 0; c < img.channels(); ++c) img.set(b.x + x, b.y + y, c, lum * tone[c] + 0.05);
        }
    }
}

}  // namespace detail

/// Smooth coloured background with face patches of the given square sizes
/// at random non-overlapping positions.
inline Fixture make_face_fixture(std::uint64_t seed, int width, int height, const std::vector<int>& face_sides) {
    FixtureRng rng(seed);
    Image img(width, height, 3);
    double base[3], amp[3], fx[3], fy[3], ph[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = rng.uniform(0.3, 0.6);
        amp[c] = rng.uniform(0.1, 0.2);
        fx[c] = rng.uniform(0.5, 2.0);
        fy[c] = rng.uniform(0.5, 2.0);
        ph[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double u = static_cast<double>(x) / width, v = static_cast<double>(y) / height;
                img.set(x, y, c, base[c] + amp[c] * std::sin(2.0 * std::numbers::pi * (fx[c] * u + fy[c] * v) + ph[c]));
            }

    Fixture fx_out;
    for (std::size_t i = 0; i < face_sides.size(); ++i) {
        const int side = face_sides[i];
        if (side > width || side > height) throw Error(ErrorKind::Parameter, "demo", "face larger than fixture");
        FaceBox box{};
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            box = FaceBox{rng.uniform_int(0, width - side), rng.uniform_int(0, height - side), side, side,
                          static_cast<int>(i)};
            placed = true;
            for (const auto& other : fx_out.boxes) {
                const Rect grown{other.x - 2, other.y - 2, other.w + 4, other.h + 4};
                if (intersects(grown, box.rect())) placed = false;
            }
        }
        if (!placed) throw Error(ErrorKind::Parameter, "demo", "could not place non-overlapping faces");
        detail::draw_face(img, box, rng);
        fx_out.boxes.push_back(box);
    }
    fx_out.image = std::move(img);
    return fx_out;
}

/// Synthetic style reference: bold diagonal colour bands.
inline Image make_style_image(std::uint64_t seed, int side) {
    FixtureRng rng(seed);
    Image img(side, side, 3);
    double c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = rng.uniform(0.0, 1.0);
        c1[c] = rng.uniform(0.0, 1.0);
    }
    const double freq = rng.uniform(2.0, 5.0), angle = rng.uniform(0.0, std::numbers::pi);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const double t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * freq *
                                                  (std::cos(angle) * x + std::sin(angle) * y) / side);
            for (int c = 0; c < 3; ++c) img.set(x, y, c, c0[c] * t + c1[c] * (1.0 - t));
        }
    return img;
}

struct DemoSummary {
    std::vector<double> lambdas;
    std::vector<double> mean_content_loss_plain;
    std::vector<double> mean_content_loss_mosaic;
    EvalReport report;
};

inline PipelineConfig demo_config() {
    PipelineConfig cfg;
    cfg.codec = CodecConfig{CodecMode::Pool, 4};
    cfg.mosaic.tile_size = 64;
    cfg.predictor.kind = PredictorKind::StylePull;
    cfg.predictor.gamma = 0.7;
    cfg.guidance.scaling = LambdaScaling::StabilityFraction;
    cfg.seed = 20240501;
    return cfg;
}

/// Generates fixtures, stylizes them with and without the content mosaic
/// over a guidance grid, and writes images, traces, a lambda sweep and an
/// identity report under `out_dir`.
inline DemoSummary run_demo(const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    auto mkdir = [](const fs::path& p) {
        std::error_code ec;
        fs::create_directories(p, ec);
        if (ec || !fs::is_directory(p)) throw Error(ErrorKind::Io, "demo", "cannot create directory '" + p.string() + "'");
    };
    mkdir(out_dir);
    {
        // create_directories succeeds on an existing read-only dir; probe it
        const fs::path probe = out_dir / ".write_probe";
        std::ofstream f(probe);
        if (!f) throw Error(ErrorKind::Io, "demo", "directory '" + out_dir.string() + "' is not writable");
        f.close();
        fs::remove(probe);
    }

    PipelineConfig cfg = demo_config();
    save_config(cfg, out_dir / "config.json");

    // fixtures: four small-face scenes, one medium, one large
    const std::vector<std::vector<int>> faces = {{12, 16}, {14}, {12, 12}, {16}, {44}, {64}};
    mkdir(out_dir / "fixtures");
    std::vector<Fixture> fixtures;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        fixtures.push_back(make_face_fixture(cfg.seed + i, 128, 128, faces[i]));
        const std::string stem = "img_" + std::to_string(i);
        save_image(fixtures.back().image, out_dir / "fixtures" / (stem + ".png"));
        save_face_manifest(FaceManifest{128, 128, fixtures.back().boxes}, out_dir / "fixtures" / (stem + ".faces.json"));
    }

    mkdir(out_dir / "style");
    std::vector<Image> styles;
    for (int i = 0; i < 4; ++i) {
        styles.push_back(make_style_image(cfg.seed + 100 + static_cast<std::uint64_t>(i), 64));
        save_image(styles.back(), out_dir / "style" / ("style_" + std::to_string(i) + ".png"));
    }
    const Image style_ref = build_style_mosaic(styles, StyleMosaicSpec{2, 2, 64});
    save_image(style_ref, out_dir / "style" / "style_mosaic.png");

    const std::vector<double> lambdas = {0.0, 0.1, 0.2, 0.4};
    const double report_lambda = 0.2;
    DemoSummary summary;
    summary.lambdas = lambdas;
    std::ostringstream manifest;
    const BicubicUpscaler up;

    for (double lambda : lambdas) {
        char ldir[32];
        std::snprintf(ldir, sizeof ldir, "lambda_%.2f", lambda);
        PipelineConfig run_cfg = cfg;
        run_cfg.guidance.lambda_c = lambda;
        double loss_sum[2] = {0.0, 0.0};
        for (int use_mosaic = 0; use_mosaic < 2; ++use_mosaic) {
            const fs::path dir = out_dir / "runs" / ldir / (use_mosaic ? "mosaic" : "plain");
            mkdir(dir);
            for (std::size_t i = 0; i < fixtures.size(); ++i) {
                const std::string stem = "img_" + std::to_string(i);
                SampleTrace trace;
                auto stylize = [&](const Image& x) {
                    DiffusionResult r = diffusion_stylize(x, run_cfg, style_ref);
                    trace = std::move(r.trace);
                    return r.image;
                };
                const Image out = run_pipeline(fixtures[i].image, fixtures[i].boxes, use_mosaic != 0, stylize, up,
                                               run_cfg.mosaic.tile_size, run_cfg.mosaic.feather);
                save_image(out, dir / (stem + ".png"));
                std::ostringstream csv;
                write_trace_csv(csv, trace);
                detail::write_text_file(dir / (stem + ".trace.csv"), csv.str(), "demo");
                loss_sum[use_mosaic] += content_loss(encode(out, run_cfg.codec), encode(fixtures[i].image, run_cfg.codec),
                                                     Reduction::Mean);
            }
        }
        summary.mean_content_loss_plain.push_back(loss_sum[0] / fixtures.size());
        summary.mean_content_loss_mosaic.push_back(loss_sum[1] / fixtures.size());
        if (lambda == report_lambda) {
            for (std::size_t i = 0; i < fixtures.size(); ++i) {
                const std::string stem = "img_" + std::to_string(i);
                json line{{"id", stem},
                          {"content", "fixtures/" + stem + ".png"},
                          {"style", "mosaic_style"},
                          {"boxes_path", "fixtures/" + stem + ".faces.json"},
                          {"variants",
                           {{"mosaic", std::string("runs/") + ldir + "/mosaic/" + stem + ".png"},
                            {"plain", std::string("runs/") + ldir + "/plain/" + stem + ".png"}}}};
                manifest << line.dump() << '\n';
            }
        }
    }
    detail::write_text_file(out_dir / "eval_manifest.jsonl", manifest.str(), "demo");

    std::ostringstream sweep;
    sweep << "lambda_fraction,mean_content_loss_plain,mean_content_loss_mosaic\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.2f,%.10g,%.10g\n", lambdas[i], summary.mean_content_loss_plain[i],
                      summary.mean_content_loss_mosaic[i]);
        sweep << buf;
    }
    detail::write_text_file(out_dir / "lambda_sweep.csv", sweep.str(), "demo");

    const ToyEmbedder embedder;
    summary.report = run_eval(out_dir / "eval_manifest.jsonl", "mosaic", "plain", embedder).report;
    std::ostringstream csv, table;
    write_report_csv(csv, summary.report);
    write_report_table(table, summary.report);
    detail::write_text_file(out_dir / "report.csv", csv.str(), "demo");
    detail::write_text_file(out_dir / "report.txt", table.str(), "demo");
    return summary;
}

}  // namespace idstyle
