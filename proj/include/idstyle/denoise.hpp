// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "idstyle/error.hpp"
#include "idstyle/latent.hpp"
#include "idstyle/schedule.hpp"
#include "idstyle/tensor_file.hpp"

namespace idstyle {

/// Predicts the noise component of z_t at timestep t. Implementations must
/// be deterministic and return a latent with the dims of z_t.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual Latent predict(const Latent& z_t, int t, const NoiseSchedule& schedule) const = 0;
};

namespace detail {

inline double noisy_alpha_bar(const NoiseSchedule& schedule, int t, const char* who) {
    const double ab = schedule.alpha_bar(t);
    if (!(ab < 1.0)) {
        throw Error(ErrorKind::Parameter, "denoise", std::string(who) + ": alpha_bar must be < 1 to predict noise");
    }
    return ab;
}

}  // namespace detail

/// Exact denoiser for a data distribution concentrated on a single point.
class PointMassPredictor : public NoisePredictor {
public:
    explicit PointMassPredictor(Latent target) : target_(std::move(target)) {}

    Latent predict(const Latent& z_t, int t, const NoiseSchedule& schedule) const override {
        require_same_dims(z_t, target_, "denoise");
        const double ab = detail::noisy_alpha_bar(schedule, t, "point-mass");
        const double a = std::sqrt(ab);
        const double s = std::sqrt(1.0 - ab);
        Latent eps(z_t.dims());
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (z_t[i] - a * target_[i]) / s;
        return eps;
    }

    const Latent& target() const { return target_; }

private:
    Latent target_;
};

/// MSE-optimal denoiser for an isotropic Gaussian prior x0 ~ N(mu, sigma2 I).
class GaussianPriorPredictor : public NoisePredictor {
public:
    GaussianPriorPredictor(Latent mu, double sigma2) : mu_(std::move(mu)), sigma2_(sigma2) {
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
            throw Error(ErrorKind::Parameter, "denoise", "sigma2 must be positive and finite");
        }
    }

    /// Slope k of E[x0|z] = mu + k (z - sqrt(abar) mu).
    double posterior_gain(double alpha_bar_t) const {
        return std::sqrt(alpha_bar_t) * sigma2_ / (alpha_bar_t * sigma2_ + 1.0 - alpha_bar_t);
    }

    Latent posterior_mean(const Latent& z_t, double alpha_bar_t) const {
        require_same_dims(z_t, mu_, "denoise");
        const double a = std::sqrt(alpha_bar_t);
        const double k = posterior_gain(alpha_bar_t);
        Latent m(z_t.dims());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = mu_[i] + k * (z_t[i] - a * mu_[i]);
        return m;
    }

    Latent predict(const Latent& z_t, int t, const NoiseSchedule& schedule) const override {
        const double ab = detail::noisy_alpha_bar(schedule, t, "gaussian");
        const double a = std::sqrt(ab);
        const double s = std::sqrt(1.0 - ab);
        Latent eps = posterior_mean(z_t, ab);
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (z_t[i] - a * eps[i]) / s;
        return eps;
    }

private:
    Latent mu_;
    double sigma2_;
};

/// Point-mass denoiser aimed at a blend of content and style targets; gamma
/// = 0 reproduces the content, gamma = 1 the style.
class StylePullPredictor : public NoisePredictor {
public:
    StylePullPredictor(const Latent& content_target, const Latent& style_target, double gamma)
        : inner_(blend(content_target, style_target, gamma)) {}

    Latent predict(const Latent& z_t, int t, const NoiseSchedule& schedule) const override {
        return inner_.predict(z_t, t, schedule);
    }

    const Latent& target() const { return inner_.target(); }

private:
    static Latent blend(const Latent& content, const Latent& style, double gamma) {
        require_same_dims(content, style, "denoise");
        if (!(gamma >= 0.0 && gamma <= 1.0)) {
            throw Error(ErrorKind::Parameter, "denoise", "gamma must lie in [0,1]");
        }
        Latent out(content.dims());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - gamma) * content[i] + gamma * style[i];
        return out;
    }

    PointMassPredictor inner_;
};

/// Delegates each prediction to an external program:
///
///   <command> <in.bin> <out.bin> <t> <alpha_bar_t>
///
/// `in.bin` holds z_t and `out.bin` must receive the predicted noise, both in
/// the flat tensor format (see tensor_file.hpp). A nonzero exit status is an
/// error.
class ExternalPredictor : public NoisePredictor {
public:
    explicit ExternalPredictor(std::string command, std::filesystem::path work_dir = {})
        : command_(std::move(command)), work_dir_(std::move(work_dir)) {
        if (command_.empty()) throw Error(ErrorKind::Parameter, "denoise", "external predictor command is empty");
        if (work_dir_.empty()) work_dir_ = std::filesystem::temp_directory_path();
    }

    Latent predict(const Latent& z_t, int t, const NoiseSchedule& schedule) const override {
        const double ab = schedule.alpha_bar(t);
        static std::atomic<unsigned long> counter{0};
        const std::string stem = "idstyle_pred_" + std::to_string(static_cast<unsigned long>(::getpid())) + "_" +
                                 std::to_string(counter.fetch_add(1));
        const auto in_path = work_dir_ / (stem + "_in.bin");
        const auto out_path = work_dir_ / (stem + "_out.bin");
        write_tensor_file(in_path, z_t);
        char ab_buf[40];
        std::snprintf(ab_buf, sizeof ab_buf, "%.17g", ab);
        const std::string cmd = command_ + " " + quote(in_path.string()) + " " + quote(out_path.string()) + " " +
                                std::to_string(t) + " " + ab_buf;
        const int rc = std::system(cmd.c_str());
        std::error_code ec;
        std::filesystem::remove(in_path, ec);
        if (rc != 0) {
            std::filesystem::remove(out_path, ec);
            throw Error(ErrorKind::Io, "denoise",
                        "external predictor exited with status " + std::to_string(rc) + " at t=" + std::to_string(t));
        }
        Latent eps = read_tensor_file(out_path);
        std::filesystem::remove(out_path, ec);
        if (eps.dims() != z_t.dims()) {
            throw Error(ErrorKind::Shape, "denoise", "external predictor returned dims " + to_string(eps.dims()));
        }
        return eps;
    }

private:
    static std::string quote(const std::string& s) {
        std::string out = "'";
        for (char c : s) {
            if (c == '\'') out += "'\\''";
            else out += c;
        }
        return out + "'";
    }

    std::string command_;
    std::filesystem::path work_dir_;
};

}  // namespace idstyle
