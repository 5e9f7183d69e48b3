// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace idstyle;
using idstyle::test::error_kind_of;

TEST(Config, DefaultsAreValidAndRoundTrip) {
    const PipelineConfig d;
    EXPECT_NO_THROW(d.validate());
    EXPECT_EQ(d.inference_steps, 10);
    EXPECT_EQ(d.inversion.steps, 6);
    EXPECT_EQ(d.inversion.fixed_point_iters, 2);
    EXPECT_EQ(d.schedule.kind, BetaKind::ScaledLinear);
    EXPECT_EQ(d.guidance.reduction, Reduction::Sum);
    const json j = config_to_json(d);
    EXPECT_EQ(config_to_json(config_from_json(j)), j);
    EXPECT_EQ(config_to_json(config_from_json(json::object())), j);
}

TEST(Config, PartialDocumentsOverrideOnlyTheirKeys) {
    const auto c = config_from_json(json::parse(R"({"guidance": {"lambda_c": 0.25, "reduction": "mean"},
                                                     "codec": {"mode": "identity"}, "seed": 7})"));
    EXPECT_EQ(c.guidance.lambda_c, 0.25);
    EXPECT_EQ(c.guidance.reduction, Reduction::Mean);
    EXPECT_TRUE(c.guidance.enabled);
    EXPECT_EQ(c.codec.mode, CodecMode::Identity);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.mosaic.tile_size, 256);
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
    for (const char* doc : {R"({"sampler": {"steps": 10}})", R"({"prompt": "a cat"})",
                            R"({"guidance": {"lambda_c": -1}})", R"({"guidance": {"lambda_c": "big"}})",
                            R"({"schedule": {"kind": "cosine"}})", R"({"sampler": {"inference_steps": 0}})",
                            R"({"predictor": {"kind": "external"}})", R"({"predictor": {"gamma": 2}})",
                            R"({"embedder": {"kind": "webface"}})", R"({"mosaic": {"feather": -1}})"}) {
        EXPECT_EQ(error_kind_of([&] { config_from_json(json::parse(doc)); }), ErrorKind::Config) << doc;
    }
}

TEST(Config, FileIo) {
    idstyle::test::TempDir dir("cfg");
    PipelineConfig c;
    c.guidance.lambda_c = 0.125;
    c.predictor.kind = PredictorKind::Gaussian;
    save_config(c, dir / "c.json");
    EXPECT_EQ(config_to_json(load_config(dir / "c.json")), config_to_json(c));
    EXPECT_EQ(error_kind_of([&] { load_config(dir / "missing.json"); }), ErrorKind::Io);
    detail::write_text_file(dir / "bad.json", "{ nope", "test");
    EXPECT_EQ(error_kind_of([&] { load_config(dir / "bad.json"); }), ErrorKind::Format);
}

TEST(Pipeline, OracleReconstructionThroughCodec) {
    PipelineConfig c;
    c.codec = CodecConfig{CodecMode::Identity, 1};
    const Image img = idstyle::test::quantized(make_face_fixture(5, 32, 24, {10}).image);
    const auto r = diffusion_stylize(img, c, std::nullopt);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        ASSERT_EQ(quantize_8bit(r.image.pixels()[i]), quantize_8bit(img.pixels()[i]));
    EXPECT_EQ(r.trace.losses.size(), 10u);
}

TEST(Pipeline, StylePullNeedsStyle) {
    PipelineConfig c;
    c.predictor.kind = PredictorKind::StylePull;
    c.codec.factor = 4;
    EXPECT_EQ(error_kind_of([&] { diffusion_stylize(Image(16, 16, 3, 0.2), c, std::nullopt); }), ErrorKind::Config);
    EXPECT_NO_THROW(diffusion_stylize(Image(16, 16, 3, 0.2), c, Image(5, 7, 1, 0.9)));
}
