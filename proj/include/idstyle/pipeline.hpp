// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "idstyle/config.hpp"
#include "idstyle/denoise.hpp"
#include "idstyle/image.hpp"
#include "idstyle/latentcodec.hpp"
#include "idstyle/mosaic.hpp"
#include "idstyle/sampler.hpp"

namespace idstyle {

using StylizeFn = std::function<Image(const Image&)>;

/// Image-to-image stylization stage of the pipeline.
class Stylizer {
public:
    virtual ~Stylizer() = default;
    virtual Image stylize(const Image& img) const = 0;
};

class IdentityStylizer : public Stylizer {
public:
    Image stylize(const Image& img) const override { return img; }
};

/// Fixed-resolution degradation plus a global tone shift: the image is
/// resampled down by `factor` and back up, then every channel is mapped
/// through v -> gain * v + offset[c]. Detail below the working resolution
/// is lost, which hurts small faces far more than large ones.
class DegradingStylizer : public Stylizer {
public:
    explicit DegradingStylizer(int factor = 4, double gain = 0.7, std::array<double, 3> offset = {0.2, 0.15, 0.05})
        : factor_(factor), gain_(gain), offset_(offset) {
        if (factor < 1) throw Error(ErrorKind::Parameter, "pipeline", "degrade factor must be >= 1");
    }

    Image stylize(const Image& img) const override {
        const int w = std::max(1, img.width() / factor_);
        const int h = std::max(1, img.height() / factor_);
        Image out = resize(resize(img, w, h, ResampleKernel::Bicubic), img.width(), img.height(),
                           ResampleKernel::Bicubic);
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                for (int c = 0; c < out.channels(); ++c)
                    out.set(x, y, c, gain_ * out.at(x, y, c) + offset_[static_cast<std::size_t>(c)]);
        return out;
    }

private:
    int factor_;
    double gain_;
    std::array<double, 3> offset_;
};

/// Builds the configured noise predictor for a content latent. `style` is
/// required for the style-pull predictor and is resampled to the working
/// image size before encoding.
inline std::unique_ptr<NoisePredictor> make_predictor(const PipelineConfig& cfg, const Latent& x_c,
                                                      const Image& working, const std::optional<Image>& style) {
    switch (cfg.predictor.kind) {
        case PredictorKind::PointMass:
            return std::make_unique<PointMassPredictor>(x_c);
        case PredictorKind::Gaussian:
            return std::make_unique<GaussianPriorPredictor>(x_c, cfg.predictor.sigma2);
        case PredictorKind::StylePull: {
            if (!style) throw Error(ErrorKind::Config, "pipeline", "style_pull predictor needs a style image");
            const Image s = resize(with_channels(*style, working.channels()), working.width(), working.height(),
                                   ResampleKernel::Bicubic);
            return std::make_unique<StylePullPredictor>(x_c, encode(s, cfg.codec), cfg.predictor.gamma);
        }
        case PredictorKind::External:
            return std::make_unique<ExternalPredictor>(cfg.predictor.command);
    }
    throw Error(ErrorKind::Config, "pipeline", "unhandled predictor kind");
}

struct DiffusionResult {
    Image image;
    Latent inverted;
    SampleTrace trace;
};

/// encode -> invert -> guided sample -> decode.
inline DiffusionResult diffusion_stylize(const Image& img, const PipelineConfig& cfg,
                                         const std::optional<Image>& style) {
    const NoiseSchedule schedule = cfg.schedule.build();
    const TimestepPlan plan = plan_timesteps(schedule, cfg.inference_steps);
    const Latent x_c = encode(img, cfg.codec);
    const auto predictor = make_predictor(cfg, x_c, img, style);
    Latent z_T = invert(x_c, *predictor, schedule, cfg.inversion);
    SampleTrace trace = sample(z_T, *predictor, schedule, plan, x_c, cfg.guidance);
    Image out = decode(trace.final_latent(), cfg.codec);
    return DiffusionResult{std::move(out), std::move(z_T), std::move(trace)};
}

class DiffusionStylizer : public Stylizer {
public:
    DiffusionStylizer(PipelineConfig cfg, std::optional<Image> style) : cfg_(std::move(cfg)), style_(std::move(style)) {}

    Image stylize(const Image& img) const override { return diffusion_stylize(img, cfg_, style_).image; }

private:
    PipelineConfig cfg_;
    std::optional<Image> style_;
};

/// Full identity-preserving pipeline. Without the mosaic the stylizer sees
/// the plain image; with it, faces are enhanced into a tile strip, the
/// whole canvas is stylized, and the stylized tiles are pasted back.
inline Image run_pipeline(const Image& img, const std::vector<FaceBox>& boxes, bool use_mosaic,
                          const StylizeFn& stylize, const Upscaler& upscaler, int tile_size, int feather) {
    if (!use_mosaic) return stylize(img);
    const ContentMosaic m = build_content_mosaic(img, boxes, upscaler, tile_size);
    const Image stylized = stylize(m.canvas);
    if (stylized.width() != m.layout.canvas_w || stylized.height() != m.layout.canvas_h) {
        throw Error(ErrorKind::Shape, "pipeline", "stylizer changed the canvas size");
    }
    return reinsert_faces(extract_background(stylized, m.layout), extract_stylized_faces(stylized, m.layout), boxes,
                          feather);
}

inline Image run_pipeline(const Image& img, const std::vector<FaceBox>& boxes, bool use_mosaic,
                          const Stylizer& stylizer, int tile_size, int feather) {
    const BicubicUpscaler up;
    return run_pipeline(img, boxes, use_mosaic, [&](const Image& x) { return stylizer.stylize(x); }, up, tile_size,
                        feather);
}

}  // namespace idstyle
