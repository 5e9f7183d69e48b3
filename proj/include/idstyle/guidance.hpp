// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Content-consistency guidance. Given z_t and a predicted noise eps, the
// clean estimate is
//
//   x0_hat = (z_t - sqrt(1 - abar) * eps) / sqrt(abar)
//
// and the loss L = ||x0_hat - x_c||^2 has the closed-form gradient
//
//   dL/deps = 2 (x0_hat - x_c) * (-sqrt(1 - abar) / sqrt(abar)).
//
// The refined noise eps - lambda * dL/deps then drives a deterministic DDIM
// step in which x0_hat is recomputed from the refined noise.

#include <cmath>
#include <string>
#include <string_view>

#include "idstyle/error.hpp"
#include "idstyle/latent.hpp"

namespace idstyle {

enum class Reduction { Sum, Mean };

inline Reduction parse_reduction(std::string_view s) {
    if (s == "sum") return Reduction::Sum;
    if (s == "mean") return Reduction::Mean;
    throw Error(ErrorKind::Parameter, "guidance", "unknown reduction '" + std::string(s) + "'");
}
inline const char* to_string(Reduction r) { return r == Reduction::Sum ? "sum" : "mean"; }

/// How `lambda_c` is turned into the per-step refinement strength.
/// `Constant` applies lambda_c unchanged at every step. `StabilityFraction`
/// treats lambda_c as a fraction of the step's own stability bound, so each
/// step contracts the content residual by the same factor 1 - 2 * lambda_c.
enum class LambdaScaling { Constant, StabilityFraction };

inline LambdaScaling parse_lambda_scaling(std::string_view s) {
    if (s == "constant") return LambdaScaling::Constant;
    if (s == "stability_fraction") return LambdaScaling::StabilityFraction;
    throw Error(ErrorKind::Parameter, "guidance", "unknown lambda scaling '" + std::string(s) + "'");
}
inline const char* to_string(LambdaScaling s) {
    return s == LambdaScaling::Constant ? "constant" : "stability_fraction";
}

struct GuidanceConfig {
    double lambda_c = 0.0;
    Reduction reduction = Reduction::Sum;
    bool enabled = true;
    int iterations = 1;  // refinements per denoising step
    LambdaScaling scaling = LambdaScaling::Constant;

    void validate() const {
        if (!(lambda_c >= 0.0) || !std::isfinite(lambda_c)) {
            throw Error(ErrorKind::Parameter, "guidance", "lambda_c must be finite and >= 0");
        }
        if (iterations < 1) throw Error(ErrorKind::Parameter, "guidance", "iterations must be >= 1");
    }

    bool active() const { return enabled; }
};

namespace detail {

inline void check_alpha_bar(double alpha_bar_t, const char* what) {
    if (!(alpha_bar_t > 0.0 && alpha_bar_t <= 1.0)) {
        throw Error(ErrorKind::Parameter, "guidance",
                    std::string(what) + " must lie in (0,1], got " + std::to_string(alpha_bar_t));
    }
}

inline void check_open_alpha_bar(double alpha_bar_t) {
    if (!(alpha_bar_t > 0.0 && alpha_bar_t < 1.0)) {
        throw Error(ErrorKind::Parameter, "guidance",
                    "alpha_bar_t must lie in (0,1) for refinement, got " + std::to_string(alpha_bar_t));
    }
}

}  // namespace detail

inline Latent estimate_x0(const Latent& z_t, const Latent& eps_hat, double alpha_bar_t) {
    require_same_dims(z_t, eps_hat, "guidance");
    detail::check_alpha_bar(alpha_bar_t, "alpha_bar_t");
    const double a = std::sqrt(alpha_bar_t);
    const double s = std::sqrt(1.0 - alpha_bar_t);
    Latent out(z_t.dims());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (z_t[i] - s * eps_hat[i]) / a;
    return out;
}

inline double content_loss(const Latent& x0_hat, const Latent& x_c, Reduction reduction) {
    require_same_dims(x0_hat, x_c, "guidance");
    const double sum = squared_l2(x0_hat, x_c);
    return reduction == Reduction::Sum ? sum : sum / static_cast<double>(x0_hat.size());
}

/// Gradient of content_loss(estimate_x0(z_t, eps), x_c) with respect to eps.
inline Latent content_loss_grad(const Latent& x0_hat, const Latent& x_c, double alpha_bar_t,
                                Reduction reduction) {
    require_same_dims(x0_hat, x_c, "guidance");
    detail::check_open_alpha_bar(alpha_bar_t);
    double chain = -std::sqrt(1.0 - alpha_bar_t) / std::sqrt(alpha_bar_t);
    if (reduction == Reduction::Mean) chain /= static_cast<double>(x0_hat.size());
    Latent g(x0_hat.dims());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (x0_hat[i] - x_c[i]) * chain;
    return g;
}

inline Latent refine_noise(const Latent& eps_hat, const Latent& grad, double lambda_c) {
    require_same_dims(eps_hat, grad, "guidance");
    if (!(lambda_c >= 0.0)) throw Error(ErrorKind::Parameter, "guidance", "lambda_c must be >= 0");
    Latent out(eps_hat.dims());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eps_hat[i] - lambda_c * grad[i];
    return out;
}

/// Deterministic DDIM update from alpha_bar_t to alpha_bar_prev; x0 is
/// re-estimated from the (possibly refined) noise.
inline Latent ddim_step(const Latent& z_t, const Latent& eps_refined, double alpha_bar_t,
                        double alpha_bar_prev) {
    detail::check_alpha_bar(alpha_bar_prev, "alpha_bar_prev");
    Latent x0 = estimate_x0(z_t, eps_refined, alpha_bar_t);
    const double a_prev = std::sqrt(alpha_bar_prev);
    const double s_prev = std::sqrt(1.0 - alpha_bar_prev);
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = a_prev * x0[i] + s_prev * eps_refined[i];
    return x0;
}

/// Largest lambda for which one refinement keeps the residual from growing:
/// the contraction factor reaches -1 exactly at this value.
inline double stability_bound(double alpha_bar_t, Reduction reduction, std::size_t element_count) {
    detail::check_open_alpha_bar(alpha_bar_t);
    const double b = alpha_bar_t / (1.0 - alpha_bar_t);
    return reduction == Reduction::Sum ? b : b * static_cast<double>(element_count);
}

/// Factor f with  x0_hat(refined) - x_c = f * (x0_hat(eps) - x_c).
inline double residual_contraction_factor(double alpha_bar_t, double lambda_c, Reduction reduction,
                                          std::size_t element_count) {
    detail::check_open_alpha_bar(alpha_bar_t);
    if (!(lambda_c >= 0.0)) throw Error(ErrorKind::Parameter, "guidance", "lambda_c must be >= 0");
    if (element_count == 0) throw Error(ErrorKind::Parameter, "guidance", "element_count must be positive");
    double k = 2.0 * lambda_c * (1.0 - alpha_bar_t) / alpha_bar_t;
    if (reduction == Reduction::Mean) k /= static_cast<double>(element_count);
    return 1.0 - k;
}

/// Refinement strength actually applied at a step with the given alpha_bar.
inline double effective_lambda(const GuidanceConfig& cfg, double alpha_bar_t, std::size_t element_count) {
    if (cfg.scaling == LambdaScaling::Constant) return cfg.lambda_c;
    return cfg.lambda_c * stability_bound(alpha_bar_t, cfg.reduction, element_count);
}

}  // namespace idstyle
