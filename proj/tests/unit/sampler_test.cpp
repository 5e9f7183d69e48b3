// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "test_support.hpp"

using namespace idstyle;
using idstyle::test::error_kind_of;
using idstyle::test::random_latent;

namespace {

const NoiseSchedule& default_schedule() {
    static const NoiseSchedule s = build_schedule(1000, 0.00085, 0.012, BetaKind::ScaledLinear);
    return s;
}

double rel_l2(const Latent& a, const Latent& b) { return std::sqrt(squared_l2(a, b)) / l2_norm(b); }

class CountingPredictor : public NoisePredictor {
public:
    explicit CountingPredictor(const NoisePredictor& inner) : inner_(inner) {}
    Latent predict(const Latent& z, int t, const NoiseSchedule& s) const override {
        ++calls;
        return inner_.predict(z, t, s);
    }
    mutable int calls = 0;

private:
    const NoisePredictor& inner_;
};

class NanAtPredictor : public NoisePredictor {
public:
    explicit NanAtPredictor(int bad_t) : bad_t_(bad_t) {}
    Latent predict(const Latent& z, int t, const NoiseSchedule&) const override {
        return Latent(z.dims(), t == bad_t_ ? std::numeric_limits<double>::infinity() : 0.0);
    }

private:
    int bad_t_;
};

// Plain unguided deterministic DDIM, written independently of the library.
std::vector<double> reference_ddim(std::vector<double> z, const LatentDims& d, const NoisePredictor& p,
                                   const NoiseSchedule& s, const std::vector<int>& ts) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double a_t = s.alpha_bars()[static_cast<std::size_t>(ts[i])];
        const double a_p = i + 1 < ts.size() ? s.alpha_bars()[static_cast<std::size_t>(ts[i + 1])] : 1.0;
        const Latent eps = p.predict(Latent(d, z), ts[i], s);
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double x0 = (z[k] - std::sqrt(1.0 - a_t) * eps[k]) / std::sqrt(a_t);
            z[k] = std::sqrt(a_p) * x0 + std::sqrt(1.0 - a_p) * eps[k];
        }
    }
    return z;
}

}  // namespace

TEST(Sampler, UnguidedPointMassLandsOnTarget) {
    std::mt19937_64 rng(1);
    const Latent target = random_latent(rng, {2, 4, 4});
    const PointMassPredictor p(target);
    GuidanceConfig off;
    off.enabled = false;
    for (int steps : {1, 2, 10, 50}) {
        const Latent z = random_latent(rng, {2, 4, 4}, 5.0);
        const auto tr = sample(z, p, default_schedule(), plan_timesteps(default_schedule(), steps), target, off);
        ASSERT_EQ(tr.latents.size(), static_cast<std::size_t>(steps) + 1);
        EXPECT_TRUE(tr.losses.empty());
        for (std::size_t i = 0; i < target.size(); ++i) ASSERT_NEAR(tr.final_latent()[i], target[i], 1e-8);
    }
}

TEST(Sampler, GuidedTraceShape) {
    std::mt19937_64 rng(2);
    const Latent xc = random_latent(rng, {1, 3, 3});
    const PointMassPredictor p(random_latent(rng, {1, 3, 3}));
    GuidanceConfig g;
    g.lambda_c = 0.001;
    const auto tr = sample(random_latent(rng, {1, 3, 3}), p, default_schedule(), plan_timesteps(default_schedule(), 7),
                           xc, g);
    EXPECT_EQ(tr.latents.size(), 8u);
    EXPECT_EQ(tr.losses.size(), 7u);
    EXPECT_EQ(tr.timesteps.size(), 7u);
    for (double l : tr.losses) EXPECT_GE(l, 0.0);
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream is(os.str());
    std::string line;
    int rows = -1;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 7);
}

TEST(Sampler, LambdaZeroMatchesReferenceBitwise) {
    std::mt19937_64 rng(3);
    const LatentDims d{3, 6, 5};
    const Latent xc = random_latent(rng, d);
    const GaussianPriorPredictor p(random_latent(rng, d), 0.8);
    const Latent z = random_latent(rng, d);
    const auto plan = plan_timesteps(default_schedule(), 10);
    GuidanceConfig zero;
    const auto ours = sample(z, p, default_schedule(), plan, xc, zero);
    const auto ref = reference_ddim(std::vector<double>(z.data().begin(), z.data().end()), d, p, default_schedule(),
                                    plan.timesteps);
    EXPECT_EQ(std::memcmp(ours.final_latent().data().data(), ref.data(), ref.size() * sizeof(double)), 0);
    GuidanceConfig off;
    off.enabled = false;
    off.lambda_c = 5.0;
    const auto disabled = sample(z, p, default_schedule(), plan, xc, off);
    EXPECT_TRUE(disabled.final_latent() == ours.final_latent());
}

TEST(Sampler, StylePullGuidancePullsTowardContent) {
    std::mt19937_64 rng(4);
    const LatentDims d{2, 4, 4};
    const Latent content = random_latent(rng, d), style = random_latent(rng, d);
    const StylePullPredictor p(content, style, 1.0);
    const auto plan = plan_timesteps(default_schedule(), 10);
    const Latent z = random_latent(rng, d);
    GuidanceConfig g0;
    const auto base = sample(z, p, default_schedule(), plan, content, g0);
    for (std::size_t i = 0; i < style.size(); ++i) ASSERT_NEAR(base.final_latent()[i], style[i], 1e-8);

    // largest constant lambda still inside the bound at every planned step
    const double noisiest = default_schedule().alpha_bar(plan.timesteps.front());
    GuidanceConfig g;
    g.lambda_c = 0.95 * stability_bound(noisiest, Reduction::Sum, 1);
    const double d_base = squared_l2(base.final_latent(), content);
    EXPECT_LT(squared_l2(sample(z, p, default_schedule(), plan, content, g).final_latent(), content), d_base);
    g.scaling = LambdaScaling::StabilityFraction;
    g.lambda_c = 0.4;
    EXPECT_LT(squared_l2(sample(z, p, default_schedule(), plan, content, g).final_latent(), content), 0.05 * d_base);
}

// Losses keep falling under in-bound guidance; far past the bound at the
// noisiest step the overshoot shows up as a rising recorded loss.
TEST(Sampler, OverRefinementBreaksLossMonotonicity) {
    std::mt19937_64 rng(5);
    const LatentDims d{4, 8, 8};
    const Latent xc = random_latent(rng, d, 0.5), mu = random_latent(rng, d, 0.5);
    const GaussianPriorPredictor p(mu, 0.1);
    const auto plan = plan_timesteps(default_schedule(), 10);
    const Latent z = invert(xc, p, default_schedule(), InversionConfig{});
    const double bound = stability_bound(default_schedule().alpha_bar(plan.timesteps.front()), Reduction::Sum, 1);
    auto decreasing = [&](double lambda) {
        GuidanceConfig g;
        g.lambda_c = lambda;
        const auto tr = sample(z, p, default_schedule(), plan, xc, g);
        for (std::size_t i = 1; i < tr.losses.size(); ++i)
            if (!(tr.losses[i] < tr.losses[i - 1])) return false;
        return true;
    };
    EXPECT_TRUE(decreasing(0.0));
    EXPECT_TRUE(decreasing(0.5 * bound));
    EXPECT_TRUE(decreasing(0.95 * bound));
    EXPECT_FALSE(decreasing(10.0 * bound));
}

TEST(Sampler, PredictorCallCounts) {
    std::mt19937_64 rng(6);
    const Latent xc = random_latent(rng, {1, 2, 2});
    const PointMassPredictor inner(xc);
    CountingPredictor counting(inner);
    GuidanceConfig g;
    g.lambda_c = 0.001;
    g.iterations = 3;
    sample(xc, counting, default_schedule(), plan_timesteps(default_schedule(), 10), xc, g);
    EXPECT_EQ(counting.calls, 10);
    counting.calls = 0;
    invert(xc, counting, default_schedule(), InversionConfig{6, 2});
    EXPECT_EQ(counting.calls, 18);
    counting.calls = 0;
    invert(xc, counting, default_schedule(), InversionConfig{4, 0});
    EXPECT_EQ(counting.calls, 4);
}

TEST(Sampler, DivergenceNamesStep) {
    const NanAtPredictor p(699);
    GuidanceConfig off;
    off.enabled = false;
    try {
        sample(Latent({1, 1, 1}, 0.0), p, default_schedule(), plan_timesteps(default_schedule(), 10),
               Latent({1, 1, 1}), off);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numerical);
        EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
    }
}

TEST(Sampler, ShapeAndPlanErrors) {
    const PointMassPredictor p(Latent({1, 2, 2}));
    GuidanceConfig g;
    EXPECT_EQ(error_kind_of([&] {
                  sample(Latent({1, 2, 2}), p, default_schedule(), plan_timesteps(default_schedule(), 3),
                         Latent({1, 2, 3}), g);
              }),
              ErrorKind::Shape);
    EXPECT_EQ(error_kind_of([&] {
                  sample(Latent({1, 2, 2}), p, default_schedule(), TimestepPlan{{5, 7}}, Latent({1, 2, 2}), g);
              }),
              ErrorKind::Parameter);
    EXPECT_EQ(error_kind_of([&] { invert(Latent({1, 2, 2}), p, default_schedule(), InversionConfig{0, 2}); }),
              ErrorKind::Parameter);
}

TEST(Inversion, SingleStepClosedForm) {
    std::mt19937_64 rng(7);
    const Latent xc = random_latent(rng, {1, 3, 3});
    const Latent target = random_latent(rng, {1, 3, 3});
    const PointMassPredictor p(target);
    const Latent zT = invert(xc, p, default_schedule(), InversionConfig{1, 0});
    const double ab = default_schedule().alpha_bar(999);
    const Latent eps = p.predict(xc, 999, default_schedule());
    for (std::size_t i = 0; i < xc.size(); ++i) {
        EXPECT_NEAR(zT[i], std::sqrt(ab) * xc[i] + std::sqrt(1 - ab) * eps[i], 1e-12);
    }
}

TEST(Inversion, RoundTripReconstructsContent) {
    std::mt19937_64 rng(8);
    const LatentDims d{4, 8, 8};
    const Latent xc = random_latent(rng, d);
    const PointMassPredictor p(xc);
    GuidanceConfig off;
    off.enabled = false;
    for (int fpi : {0, 2}) {
        const Latent zT = invert(xc, p, default_schedule(), InversionConfig{6, fpi});
        const auto tr = sample(zT, p, default_schedule(), plan_timesteps(default_schedule(), 10), xc, off);
        EXPECT_LT(rel_l2(tr.final_latent(), xc), 1e-3) << "fpi " << fpi;
    }
}

TEST(Inversion, FixedPointIterationsImproveReconstruction) {
    std::mt19937_64 rng(9);
    const LatentDims d{4, 8, 8};
    const Latent xc = random_latent(rng, d, 0.5);
    const GaussianPriorPredictor p(random_latent(rng, d, 0.5), 1.0);
    GuidanceConfig off;
    off.enabled = false;
    double prev = 1e300;
    for (int fpi : {0, 1, 2, 3}) {
        const Latent zT = invert(xc, p, default_schedule(), InversionConfig{6, fpi});
        const auto tr = sample(zT, p, default_schedule(), plan_timesteps(default_schedule(), 6), xc, off);
        const double err = rel_l2(tr.final_latent(), xc);
        EXPECT_LT(err, prev) << "fpi " << fpi;
        prev = err;
    }
}
