// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Pipeline configuration document. Every section and key is optional and
// falls back to the defaults below; unknown keys are rejected.
//
//   {
//     "schedule":  {"num_train_steps": 1000, "beta_start": 0.00085,
//                   "beta_end": 0.012, "kind": "scaled_linear"},
//     "sampler":   {"inference_steps": 10},
//     "inversion": {"steps": 6, "fixed_point_iters": 2},
//     "guidance":  {"lambda_c": 0.0, "reduction": "sum", "enabled": true,
//                   "iterations": 1, "scaling": "constant"},
//     "codec":     {"mode": "pool", "factor": 8},
//     "mosaic":    {"tile_size": 256, "feather": 0},
//     "predictor": {"kind": "point_mass", "gamma": 0.7, "style_path": "",
//                   "sigma2": 1.0, "command": ""},
//     "embedder":  {"kind": "toy"},
//     "seed": 0
//   }

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "idstyle/error.hpp"
#include "idstyle/guidance.hpp"
#include "idstyle/latentcodec.hpp"
#include "idstyle/sampler.hpp"
#include "idstyle/schedule.hpp"
#include "idstyle/sidecar.hpp"

namespace idstyle {

struct ScheduleConfig {
    int num_train_steps = 1000;
    double beta_start = 0.00085;
    double beta_end = 0.012;
    BetaKind kind = BetaKind::ScaledLinear;

    NoiseSchedule build() const { return build_schedule(num_train_steps, beta_start, beta_end, kind); }
};

enum class PredictorKind { PointMass, StylePull, Gaussian, External };

inline PredictorKind parse_predictor_kind(const std::string& s) {
    if (s == "point_mass") return PredictorKind::PointMass;
    if (s == "style_pull") return PredictorKind::StylePull;
    if (s == "gaussian") return PredictorKind::Gaussian;
    if (s == "external") return PredictorKind::External;
    throw Error(ErrorKind::Config, "config", "unknown predictor kind '" + s + "'");
}

inline const char* to_string(PredictorKind k) {
    switch (k) {
        case PredictorKind::PointMass: return "point_mass";
        case PredictorKind::StylePull: return "style_pull";
        case PredictorKind::Gaussian: return "gaussian";
        case PredictorKind::External: return "external";
    }
    return "?";
}

struct PredictorConfig {
    PredictorKind kind = PredictorKind::PointMass;
    double gamma = 0.7;
    std::string style_path;
    double sigma2 = 1.0;
    std::string command;
};

struct MosaicConfig {
    int tile_size = 256;
    int feather = 0;
};

struct PipelineConfig {
    ScheduleConfig schedule;
    int inference_steps = 10;
    InversionConfig inversion;
    GuidanceConfig guidance;
    CodecConfig codec;
    MosaicConfig mosaic;
    PredictorConfig predictor;
    std::string embedder = "toy";
    std::uint64_t seed = 0;

    /// Throws if any value is outside what its owning module accepts.
    void validate() const {
        const NoiseSchedule s = schedule.build();
        plan_timesteps(s, inference_steps);
        inversion.validate();
        plan_timesteps(s, inversion.steps);
        guidance.validate();
        codec.validate();
        if (mosaic.tile_size < 1) throw Error(ErrorKind::Config, "config", "mosaic.tile_size must be positive");
        if (mosaic.feather < 0) throw Error(ErrorKind::Config, "config", "mosaic.feather must be >= 0");
        if (!(predictor.gamma >= 0.0 && predictor.gamma <= 1.0)) {
            throw Error(ErrorKind::Config, "config", "predictor.gamma must lie in [0,1]");
        }
        if (!(predictor.sigma2 > 0.0)) throw Error(ErrorKind::Config, "config", "predictor.sigma2 must be positive");
        if (predictor.kind == PredictorKind::External && predictor.command.empty()) {
            throw Error(ErrorKind::Config, "config", "external predictor needs predictor.command");
        }
        if (embedder != "toy") throw Error(ErrorKind::Config, "config", "unknown embedder '" + embedder + "'");
    }
};

namespace detail {

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
    if (obj.contains(key)) out = required<T>(obj, key, where, ErrorKind::Config, "config");
}

inline const json& section(const json& root, const char* name, std::initializer_list<const char*> keys) {
    static const json empty = json::object();
    if (!root.contains(name)) return empty;
    reject_unknown_keys(root.at(name), keys, name, ErrorKind::Config, "config");
    return root.at(name);
}

}  // namespace detail

inline PipelineConfig config_from_json(const json& root) {
    using detail::read_opt;
    detail::reject_unknown_keys(root,
                                {"schedule", "sampler", "inversion", "guidance", "codec", "mosaic", "predictor",
                                 "embedder", "seed"},
                                "config", ErrorKind::Config, "config");
    PipelineConfig c;
    std::string tmp;
    try {
        const json& s = detail::section(root, "schedule", {"num_train_steps", "beta_start", "beta_end", "kind"});
        read_opt(s, "num_train_steps", c.schedule.num_train_steps, "schedule");
        read_opt(s, "beta_start", c.schedule.beta_start, "schedule");
        read_opt(s, "beta_end", c.schedule.beta_end, "schedule");
        if (s.contains("kind")) c.schedule.kind = parse_beta_kind(detail::required<std::string>(s, "kind", "schedule", ErrorKind::Config, "config"));

        const json& sm = detail::section(root, "sampler", {"inference_steps"});
        read_opt(sm, "inference_steps", c.inference_steps, "sampler");

        const json& inv = detail::section(root, "inversion", {"steps", "fixed_point_iters"});
        read_opt(inv, "steps", c.inversion.steps, "inversion");
        read_opt(inv, "fixed_point_iters", c.inversion.fixed_point_iters, "inversion");

        const json& g = detail::section(root, "guidance", {"lambda_c", "reduction", "enabled", "iterations", "scaling"});
        read_opt(g, "lambda_c", c.guidance.lambda_c, "guidance");
        read_opt(g, "enabled", c.guidance.enabled, "guidance");
        read_opt(g, "iterations", c.guidance.iterations, "guidance");
        if (g.contains("reduction")) c.guidance.reduction = parse_reduction(detail::required<std::string>(g, "reduction", "guidance", ErrorKind::Config, "config"));
        if (g.contains("scaling")) c.guidance.scaling = parse_lambda_scaling(detail::required<std::string>(g, "scaling", "guidance", ErrorKind::Config, "config"));

        const json& cd = detail::section(root, "codec", {"mode", "factor"});
        if (cd.contains("mode")) c.codec.mode = parse_codec_mode(detail::required<std::string>(cd, "mode", "codec", ErrorKind::Config, "config"));
        read_opt(cd, "factor", c.codec.factor, "codec");

        const json& m = detail::section(root, "mosaic", {"tile_size", "feather"});
        read_opt(m, "tile_size", c.mosaic.tile_size, "mosaic");
        read_opt(m, "feather", c.mosaic.feather, "mosaic");

        const json& p = detail::section(root, "predictor", {"kind", "gamma", "style_path", "sigma2", "command"});
        if (p.contains("kind")) c.predictor.kind = parse_predictor_kind(detail::required<std::string>(p, "kind", "predictor", ErrorKind::Config, "config"));
        read_opt(p, "gamma", c.predictor.gamma, "predictor");
        read_opt(p, "style_path", c.predictor.style_path, "predictor");
        read_opt(p, "sigma2", c.predictor.sigma2, "predictor");
        read_opt(p, "command", c.predictor.command, "predictor");

        const json& e = detail::section(root, "embedder", {"kind"});
        read_opt(e, "kind", c.embedder, "embedder");

        read_opt(root, "seed", c.seed, "config");
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, "config", e.what());
    }
    try {
        c.validate();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, "config", e.what());
    }
    return c;
}

inline json config_to_json(const PipelineConfig& c) {
    return json{
        {"schedule",
         {{"num_train_steps", c.schedule.num_train_steps},
          {"beta_start", c.schedule.beta_start},
          {"beta_end", c.schedule.beta_end},
          {"kind", to_string(c.schedule.kind)}}},
        {"sampler", {{"inference_steps", c.inference_steps}}},
        {"inversion", {{"steps", c.inversion.steps}, {"fixed_point_iters", c.inversion.fixed_point_iters}}},
        {"guidance",
         {{"lambda_c", c.guidance.lambda_c},
          {"reduction", to_string(c.guidance.reduction)},
          {"enabled", c.guidance.enabled},
          {"iterations", c.guidance.iterations},
          {"scaling", to_string(c.guidance.scaling)}}},
        {"codec", {{"mode", to_string(c.codec.mode)}, {"factor", c.codec.factor}}},
        {"mosaic", {{"tile_size", c.mosaic.tile_size}, {"feather", c.mosaic.feather}}},
        {"predictor",
         {{"kind", to_string(c.predictor.kind)},
          {"gamma", c.predictor.gamma},
          {"style_path", c.predictor.style_path},
          {"sigma2", c.predictor.sigma2},
          {"command", c.predictor.command}}},
        {"embedder", {{"kind", c.embedder}}},
        {"seed", c.seed},
    };
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    return config_from_json(detail::read_json_file(path, "config"));
}

inline void save_config(const PipelineConfig& c, const std::filesystem::path& path) {
    detail::write_text_file(path, config_to_json(c).dump(2) + "\n", "config");
}

}  // namespace idstyle
