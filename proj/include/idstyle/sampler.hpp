// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "idstyle/denoise.hpp"
#include "idstyle/error.hpp"
#include "idstyle/guidance.hpp"
#include "idstyle/latent.hpp"
#include "idstyle/schedule.hpp"

namespace idstyle {

struct SampleTrace {
    std::vector<Latent> latents;   // z_T ... z_0
    std::vector<double> losses;    // content loss per step, empty when guidance is off
    std::vector<int> timesteps;
    std::vector<double> alpha_bars;

    const Latent& final_latent() const { return latents.back(); }
};

struct InversionConfig {
    int steps = 6;
    int fixed_point_iters = 2;

    void validate() const {
        if (steps < 1) throw Error(ErrorKind::Parameter, "sampler", "inversion steps must be >= 1");
        if (fixed_point_iters < 0) throw Error(ErrorKind::Parameter, "sampler", "fixed_point_iters must be >= 0");
    }
};

namespace detail {

inline void check_step_finite(const Latent& z, const char* phase, std::size_t step, int t) {
    if (!z.all_finite()) {
        throw Error(ErrorKind::Numerical, "sampler",
                    std::string(phase) + " diverged at step " + std::to_string(step) + " (t=" + std::to_string(t) +
                        ")");
    }
}

}  // namespace detail

/// Guided deterministic DDIM sampling over `plan`. Each step predicts the
/// noise, optionally refines it toward the content latent `x_c`, and moves
/// to the next planned noise level (alpha_bar = 1 after the last step).
inline SampleTrace sample(const Latent& z_start, const NoisePredictor& predictor, const NoiseSchedule& schedule,
                          const TimestepPlan& plan, const Latent& x_c, const GuidanceConfig& guidance) {
    validate_plan(schedule, plan);
    guidance.validate();
    if (guidance.enabled) require_same_dims(z_start, x_c, "sampler");

    SampleTrace trace;
    trace.latents.reserve(plan.size() + 1);
    trace.latents.push_back(z_start);
    Latent z = z_start;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const int t = plan.timesteps[i];
        const double ab_t = schedule.alpha_bar(t);
        const double ab_prev = i + 1 < plan.size() ? schedule.alpha_bar(plan.timesteps[i + 1]) : 1.0;
        trace.timesteps.push_back(t);
        trace.alpha_bars.push_back(ab_t);

        Latent eps = predictor.predict(z, t, schedule);
        require_same_dims(eps, z, "sampler");
        if (guidance.enabled) {
            const double lambda = effective_lambda(guidance, ab_t, z.size());
            for (int k = 0; k < guidance.iterations; ++k) {
                const Latent x0 = estimate_x0(z, eps, ab_t);
                if (k == 0) trace.losses.push_back(content_loss(x0, x_c, guidance.reduction));
                eps = refine_noise(eps, content_loss_grad(x0, x_c, ab_t, guidance.reduction), lambda);
            }
        }
        z = ddim_step(z, eps, ab_t, ab_prev);
        detail::check_step_finite(z, "sampling", i, t);
        trace.latents.push_back(z);
    }
    return trace;
}

/// Deterministic DDIM inversion: walks the `cfg.steps` plan from the clean
/// latent upward. Each step's noise is re-evaluated `fixed_point_iters` times
/// at the provisional next latent.
inline Latent invert(const Latent& x_c, const NoisePredictor& predictor, const NoiseSchedule& schedule,
                     const InversionConfig& cfg) {
    cfg.validate();
    if (!x_c.all_finite()) throw Error(ErrorKind::Numerical, "sampler", "content latent is not finite");
    TimestepPlan plan = plan_timesteps(schedule, cfg.steps);
    std::reverse(plan.timesteps.begin(), plan.timesteps.end());

    Latent z = x_c;
    double ab_from = 1.0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const int t = plan.timesteps[i];
        const double ab_to = schedule.alpha_bar(t);
        Latent eps = predictor.predict(z, t, schedule);
        Latent next = ddim_step(z, eps, ab_from, ab_to);
        for (int k = 0; k < cfg.fixed_point_iters; ++k) {
            detail::check_step_finite(next, "inversion", i, t);
            eps = predictor.predict(next, t, schedule);
            next = ddim_step(z, eps, ab_from, ab_to);
        }
        detail::check_step_finite(next, "inversion", i, t);
        z = std::move(next);
        ab_from = ab_to;
    }
    return z;
}

/// Trace CSV: step, t, alpha_bar, loss (blank when guidance was off).
inline void write_trace_csv(std::ostream& os, const SampleTrace& trace) {
    os << "step,t,alpha_bar,loss\n";
    char buf[128];
    for (std::size_t i = 0; i < trace.timesteps.size(); ++i) {
        if (i < trace.losses.size()) {
            std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g\n", i, trace.timesteps[i], trace.alpha_bars[i],
                          trace.losses[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,\n", i, trace.timesteps[i], trace.alpha_bars[i]);
        }
        os << buf;
    }
}

}  // namespace idstyle
