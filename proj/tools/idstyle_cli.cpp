// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idstyle/idstyle.hpp"

namespace fs = std::filesystem;
using namespace idstyle;

namespace {

bool verbose() {
    const char* v = std::getenv("IDSTYLE_VERBOSE");
    return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log(const std::string& msg) {
    if (verbose()) std::cerr << "[idstyle] " << msg << '\n';
}

PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? PipelineConfig{} : load_config(path);
}

void write_text(const fs::path& path, const std::string& text) { detail::write_text_file(path, text, "cli"); }

fs::path sibling(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

std::optional<Image> load_style(const PipelineConfig& cfg, const std::string& override_path) {
    const std::string p = !override_path.empty() ? override_path : cfg.predictor.style_path;
    if (p.empty()) return std::nullopt;
    return load_image(p);
}

std::vector<FaceBox> boxes_from(const std::string& manifest, const std::string& detector, const Image& img) {
    if (!manifest.empty()) return detect_faces(img, ManifestDetector(load_face_manifest(manifest).boxes));
    if (detector == "color_key") return detect_faces(img, ColorKeyDetector{});
    if (!detector.empty()) throw Error(ErrorKind::Parameter, "cli", "unknown detector '" + detector + "'");
    return {};
}

// ---------------------------------------------------------------------------

struct ScheduleArgs {
    std::string config, out;
};

int cmd_schedule_dump(const ScheduleArgs& a) {
    const PipelineConfig cfg = config_or_default(a.config);
    std::ostringstream os;
    write_schedule_csv(os, cfg.schedule.build());
    if (a.out.empty()) {
        std::cout << os.str();
    } else {
        write_text(a.out, os.str());
    }
    return 0;
}

struct InvertArgs {
    std::string content, config, out, style;
};

int cmd_invert(const InvertArgs& a) {
    const PipelineConfig cfg = config_or_default(a.config);
    const Image img = load_image(a.content);
    const Latent x_c = encode(img, cfg.codec);
    const auto predictor = make_predictor(cfg, x_c, img, load_style(cfg, a.style));
    const Latent z = invert(x_c, *predictor, cfg.schedule.build(), cfg.inversion);
    write_tensor_file(a.out, z);
    save_config(cfg, sibling(a.out, ".config.json"));
    log("inverted " + a.content + " to latent " + to_string(z.dims()));
    return 0;
}

struct StylizeArgs {
    std::string content, config, out, boxes, detector, trace, style;
    bool mosaic = false;
    std::optional<double> lambda_c;
};

int cmd_stylize(const StylizeArgs& a) {
    PipelineConfig cfg = config_or_default(a.config);
    if (a.lambda_c) {
        cfg.guidance.lambda_c = *a.lambda_c;
        cfg.validate();
    }
    const Image img = load_image(a.content);
    const auto style = load_style(cfg, a.style);
    std::vector<FaceBox> boxes;
    if (a.mosaic) {
        if (a.boxes.empty() && a.detector.empty()) {
            throw Error(ErrorKind::Parameter, "cli", "--mosaic needs --boxes or --detector");
        }
        boxes = boxes_from(a.boxes, a.detector, img);
    }
    SampleTrace trace;
    auto stylize = [&](const Image& x) {
        DiffusionResult r = diffusion_stylize(x, cfg, style);
        trace = std::move(r.trace);
        return r.image;
    };
    const BicubicUpscaler up;
    const Image out = run_pipeline(img, boxes, a.mosaic, stylize, up, cfg.mosaic.tile_size, cfg.mosaic.feather);
    save_image(out, a.out);
    if (!a.trace.empty()) {
        std::ostringstream os;
        write_trace_csv(os, trace);
        write_text(a.trace, os.str());
    }
    save_config(cfg, sibling(a.out, ".config.json"));
    log("stylized " + a.content + " (" + std::to_string(boxes.size()) + " faces, mosaic " + (a.mosaic ? "on" : "off") +
        ")");
    return 0;
}

struct DetectArgs {
    std::string image, out, detector = "color_key", boxes;
};

int cmd_detect(const DetectArgs& a) {
    const Image img = load_image(a.image);
    const auto boxes = boxes_from(a.boxes, a.boxes.empty() ? a.detector : "", img);
    save_face_manifest(FaceManifest{img.width(), img.height(), boxes}, a.out);
    log("detected " + std::to_string(boxes.size()) + " faces");
    return 0;
}

struct MosaicArgs {
    std::string image, boxes, out, layout, config, mosaic, out_dir, background;
    std::vector<std::string> images, faces;
    std::string faces_dir;
    int tile_size = 0, rows = 1, cols = 1, cell = 256;
    std::optional<int> feather;
};

int cmd_build_content(const MosaicArgs& a) {
    PipelineConfig cfg = config_or_default(a.config);
    if (a.tile_size > 0) cfg.mosaic.tile_size = a.tile_size;
    const Image img = load_image(a.image);
    const auto boxes = load_face_manifest(a.boxes).boxes;
    const BicubicUpscaler up;
    const ContentMosaic m = build_content_mosaic(img, boxes, up, cfg.mosaic.tile_size);
    save_image(m.canvas, a.out);
    save_layout(m.layout, a.layout);
    return 0;
}

int cmd_build_style(const MosaicArgs& a) {
    std::vector<Image> styles;
    for (const auto& p : a.images) styles.push_back(load_image(p));
    save_image(build_style_mosaic(styles, StyleMosaicSpec{a.rows, a.cols, a.cell}), a.out);
    return 0;
}

int cmd_extract(const MosaicArgs& a) {
    const Image m = load_image(a.mosaic);
    const MosaicLayout layout = load_layout(a.layout);
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cli", "cannot create '" + a.out_dir + "'");
    for (const auto& f : extract_stylized_faces(m, layout)) {
        save_image(f.image, fs::path(a.out_dir) / ("face_" + std::to_string(f.id) + ".png"));
    }
    save_image(extract_background(m, layout), fs::path(a.out_dir) / "background.png");
    return 0;
}

int parse_face_id(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int id = std::stoi(s, &used);
        if (used == s.size()) return id;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::Parameter, "cli", "bad face id in " + what);
}

int cmd_reinsert(const MosaicArgs& a) {
    PipelineConfig cfg = config_or_default(a.config);
    const int feather = a.feather.value_or(cfg.mosaic.feather);
    const Image bg = load_image(a.background);
    const auto boxes = load_face_manifest(a.boxes).boxes;
    std::map<int, fs::path> paths;
    if (!a.faces_dir.empty()) {
        const std::regex name(R"(face_(-?\d+)\.png)");
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(a.faces_dir, ec)) {
            std::smatch m;
            const std::string fn = entry.path().filename().string();
            if (std::regex_match(fn, m, name)) paths[parse_face_id(m[1], fn)] = entry.path();
        }
        if (ec) throw Error(ErrorKind::Io, "cli", "cannot list '" + a.faces_dir + "'");
    }
    for (const auto& spec : a.faces) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Parameter, "cli", "--face expects id=path, got '" + spec + "'");
        paths[parse_face_id(spec.substr(0, eq), spec)] = spec.substr(eq + 1);
    }
    std::vector<FaceImage> faces;
    for (const auto& [id, p] : paths) {
        // report unknown ids before touching the files
        if (std::none_of(boxes.begin(), boxes.end(), [&](const FaceBox& b) { return b.id == id; })) {
            throw Error(ErrorKind::Parameter, "mosaic", "unknown face id " + std::to_string(id));
        }
        faces.push_back(FaceImage{id, load_image(p)});
    }
    save_image(reinsert_faces(bg, faces, boxes, feather), a.out);
    return 0;
}

struct EvalArgs {
    std::string manifest, config, out, candidate = "ours", baseline = "baseline";
};

int cmd_eval(const EvalArgs& a) {
    const PipelineConfig cfg = config_or_default(a.config);
    const ToyEmbedder embedder;
    const EvalRun run = run_eval(a.manifest, a.candidate, a.baseline, embedder);
    std::ostringstream csv, table;
    write_report_csv(csv, run.report);
    write_report_table(table, run.report);
    write_text(sibling(a.out, ".csv"), csv.str());
    write_text(sibling(a.out, ".txt"), table.str());
    save_config(cfg, sibling(a.out, ".config.json"));
    if (verbose()) std::cerr << table.str();
    return 0;
}

int cmd_demo(const std::string& out) {
    const DemoSummary s = run_demo(out);
    log("demo written to " + out + " (" + std::to_string(s.report.cells.size()) + " report cells)");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identity-preserving stylization toolkit"};
    app.require_subcommand(1);

    int rc = 0;

    // schedule
    ScheduleArgs sched;
    auto* schedule = app.add_subcommand("schedule", "Noise schedule utilities");
    schedule->require_subcommand(1);
    auto* dump = schedule->add_subcommand("dump", "Write the alpha-bar table as CSV (t, beta, alpha_bar)");
    dump->add_option("--config", sched.config, "Pipeline config (JSON)");
    dump->add_option("--out", sched.out, "Output CSV (stdout when omitted)");
    dump->callback([&] { rc = cmd_schedule_dump(sched); });

    // invert
    InvertArgs inv;
    auto* invert_cmd = app.add_subcommand("invert", "Invert a content image to its starting latent");
    invert_cmd->add_option("--content", inv.content, "Content image")->required();
    invert_cmd->add_option("--config", inv.config, "Pipeline config (JSON)");
    invert_cmd->add_option("--style", inv.style, "Style image (style_pull predictor)");
    invert_cmd->add_option("--out", inv.out, "Output tensor file")->required();
    invert_cmd->callback([&] { rc = cmd_invert(inv); });

    // stylize
    StylizeArgs sty;
    auto* stylize = app.add_subcommand("stylize", "Invert, guided-sample and decode a content image");
    stylize->add_option("--content", sty.content, "Content image")->required();
    stylize->add_option("--config", sty.config, "Pipeline config (JSON)");
    stylize->add_option("--out", sty.out, "Output image")->required();
    stylize->add_flag("--mosaic", sty.mosaic, "Stylize through the content mosaic");
    stylize->add_option("--boxes", sty.boxes, "Face manifest (JSON)");
    stylize->add_option("--detector", sty.detector, "Built-in detector (color_key)");
    stylize->add_option("--style", sty.style, "Style image (overrides predictor.style_path)");
    stylize->add_option("--trace", sty.trace, "Trace CSV (step, t, alpha_bar, loss)");
    auto* lam = stylize->add_option_function<double>(
        "--lambda-c", [&](const double& v) { sty.lambda_c = v; }, "Override guidance.lambda_c");
    (void)lam;
    stylize->callback([&] { rc = cmd_stylize(sty); });

    // detect
    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Detect faces and write a face manifest");
    detect->add_option("--image", det.image, "Input image")->required();
    detect->add_option("--out", det.out, "Output face manifest")->required();
    detect->add_option("--detector", det.detector, "Built-in detector (color_key)");
    detect->add_option("--boxes", det.boxes, "Sidecar manifest to normalize instead of detecting");
    detect->callback([&] { rc = cmd_detect(det); });

    // mosaic
    MosaicArgs mos;
    auto* mosaic = app.add_subcommand("mosaic", "Content / style mosaic operations");
    mosaic->require_subcommand(1);
    auto* bc = mosaic->add_subcommand("build-content", "Original image plus enhanced face tiles");
    bc->add_option("--image", mos.image, "Content image")->required();
    bc->add_option("--boxes", mos.boxes, "Face manifest")->required();
    bc->add_option("--out", mos.out, "Output mosaic image")->required();
    bc->add_option("--layout", mos.layout, "Output layout sidecar")->required();
    bc->add_option("--tile-size", mos.tile_size, "Tile size in pixels (default from config)");
    bc->add_option("--config", mos.config, "Pipeline config (JSON)");
    bc->callback([&] { rc = cmd_build_content(mos); });

    auto* bs = mosaic->add_subcommand("build-style", "Grid of style references");
    bs->add_option("--images", mos.images, "Style images")->required();
    bs->add_option("--rows", mos.rows, "Grid rows");
    bs->add_option("--cols", mos.cols, "Grid columns");
    bs->add_option("--cell", mos.cell, "Cell size in pixels");
    bs->add_option("--out", mos.out, "Output image")->required();
    bs->callback([&] { rc = cmd_build_style(mos); });

    auto* ex = mosaic->add_subcommand("extract", "Cut faces (face_<id>.png) and background out of a mosaic");
    ex->add_option("--mosaic", mos.mosaic, "Stylized mosaic image")->required();
    ex->add_option("--layout", mos.layout, "Layout sidecar")->required();
    ex->add_option("--out-dir", mos.out_dir, "Output directory")->required();
    ex->callback([&] { rc = cmd_extract(mos); });

    auto* re = mosaic->add_subcommand("reinsert", "Paste faces back into a background");
    re->add_option("--background", mos.background, "Stylized background")->required();
    re->add_option("--boxes", mos.boxes, "Face manifest")->required();
    re->add_option("--faces-dir", mos.faces_dir, "Directory of face_<id>.png files");
    re->add_option("--face", mos.faces, "Face as id=path (repeatable)");
    re->add_option("--feather", mos.feather, "Feather width in pixels");
    re->add_option("--config", mos.config, "Pipeline config (JSON)");
    re->add_option("--out", mos.out, "Output image")->required();
    re->callback([&] { rc = cmd_reinsert(mos); });

    // eval
    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Identity-preservation report from a JSONL manifest");
    eval->add_option("--manifest", ev.manifest, "Evaluation manifest (JSON Lines)")->required();
    eval->add_option("--config", ev.config, "Pipeline config (JSON)");
    eval->add_option("--out", ev.out, "Report prefix (writes .csv, .txt)")->required();
    eval->add_option("--candidate", ev.candidate, "Candidate variant name");
    eval->add_option("--baseline", ev.baseline, "Baseline variant name");
    eval->callback([&] { rc = cmd_eval(ev); });

    // demo
    std::string demo_out;
    auto* demo = app.add_subcommand("demo", "Generate fixtures and run the full experiment grid");
    demo->add_option("--out", demo_out, "Output directory")->required();
    demo->callback([&] { rc = cmd_demo(demo_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
