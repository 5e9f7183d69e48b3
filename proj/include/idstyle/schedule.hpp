// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "idstyle/error.hpp"

namespace idstyle {

enum class BetaKind { Linear, ScaledLinear };

inline BetaKind parse_beta_kind(std::string_view s) {
    if (s == "linear") return BetaKind::Linear;
    if (s == "scaled_linear") return BetaKind::ScaledLinear;
    throw Error(ErrorKind::Parameter, "schedule", "unknown schedule kind '" + std::string(s) + "'");
}

inline const char* to_string(BetaKind k) { return k == BetaKind::Linear ? "linear" : "scaled_linear"; }

/// Diffusion noise schedule. `alpha_bar(t)` is the cumulative product
/// prod_{s<=t} (1 - beta_s), the quantity the guidance math calls alpha-bar.
class NoiseSchedule {
public:
    static NoiseSchedule from_betas(std::vector<double> betas) {
        if (betas.empty()) {
            throw Error(ErrorKind::Parameter, "schedule", "schedule needs at least one step");
        }
        NoiseSchedule s;
        s.alpha_bars_.reserve(betas.size());
        double prod = 1.0;
        for (double b : betas) {
            if (!(b > 0.0 && b < 1.0)) {
                throw Error(ErrorKind::Parameter, "schedule", "betas must lie in (0,1)");
            }
            prod *= 1.0 - b;
            s.alpha_bars_.push_back(prod);
        }
        s.betas_ = std::move(betas);
        return s;
    }

    int num_train_steps() const { return static_cast<int>(betas_.size()); }
    const std::vector<double>& betas() const { return betas_; }
    const std::vector<double>& alpha_bars() const { return alpha_bars_; }

    double alpha_bar(int t) const {
        if (t < 0 || t >= num_train_steps()) {
            throw Error(ErrorKind::Index, "schedule",
                        "timestep " + std::to_string(t) + " outside [0, " +
                            std::to_string(num_train_steps()) + ")");
        }
        return alpha_bars_[static_cast<std::size_t>(t)];
    }

private:
    NoiseSchedule() = default;

    std::vector<double> betas_;
    std::vector<double> alpha_bars_;
};

inline NoiseSchedule build_schedule(int num_train_steps, double beta_start, double beta_end, BetaKind kind) {
    if (num_train_steps < 1) {
        throw Error(ErrorKind::Parameter, "schedule", "num_train_steps must be >= 1");
    }
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw Error(ErrorKind::Parameter, "schedule", "require 0 < beta_start <= beta_end < 1");
    }
    const auto n = static_cast<std::size_t>(num_train_steps);
    std::vector<double> betas(n);
    const double lo = kind == BetaKind::Linear ? beta_start : std::sqrt(beta_start);
    const double hi = kind == BetaKind::Linear ? beta_end : std::sqrt(beta_end);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = lo + (hi - lo) * frac;
        betas[i] = kind == BetaKind::Linear ? v : v * v;
    }
    return NoiseSchedule::from_betas(std::move(betas));
}

inline double alpha_bar(const NoiseSchedule& schedule, int t) { return schedule.alpha_bar(t); }

/// Strictly decreasing inference timesteps.
struct TimestepPlan {
    std::vector<int> timesteps;

    std::size_t size() const { return timesteps.size(); }
};

/// Evenly spaced descending plan: t_i = (N - 1) - i * floor(N / steps).
inline TimestepPlan plan_timesteps(const NoiseSchedule& schedule, int num_inference_steps) {
    const int n = schedule.num_train_steps();
    if (num_inference_steps < 1 || num_inference_steps > n) {
        throw Error(ErrorKind::Parameter, "schedule",
                    "num_inference_steps must lie in [1, " + std::to_string(n) + "], got " +
                        std::to_string(num_inference_steps));
    }
    const int stride = n / num_inference_steps;
    TimestepPlan plan;
    plan.timesteps.reserve(static_cast<std::size_t>(num_inference_steps));
    for (int i = 0; i < num_inference_steps; ++i) plan.timesteps.push_back(n - 1 - i * stride);
    return plan;
}

inline void validate_plan(const NoiseSchedule& schedule, const TimestepPlan& plan) {
    if (plan.timesteps.empty()) throw Error(ErrorKind::Parameter, "schedule", "empty timestep plan");
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const int t = plan.timesteps[i];
        if (t < 0 || t >= schedule.num_train_steps()) {
            throw Error(ErrorKind::Index, "schedule", "planned timestep " + std::to_string(t) + " out of range");
        }
        if (i > 0 && t >= plan.timesteps[i - 1]) {
            throw Error(ErrorKind::Parameter, "schedule", "timestep plan must be strictly decreasing");
        }
    }
}

/// CSV dump with columns t, beta, alpha_bar at round-trip precision.
inline void write_schedule_csv(std::ostream& os, const NoiseSchedule& schedule) {
    os << "t,beta,alpha_bar\n";
    char buf[96];
    for (int t = 0; t < schedule.num_train_steps(); ++t) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", t, schedule.betas()[static_cast<std::size_t>(t)],
                      schedule.alpha_bars()[static_cast<std::size_t>(t)]);
        os << buf;
    }
}

}  // namespace idstyle
