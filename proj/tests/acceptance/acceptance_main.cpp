// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
//
// usage: idstyle_acceptance <path-to-idstyle-cli>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "idstyle/idstyle.hpp"

namespace fs = std::filesystem;
using namespace idstyle;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Latent random_latent(std::mt19937_64& rng, LatentDims d, double sd = 1.0) {
    std::normal_distribution<double> n(0.0, sd);
    std::vector<double> v(d.size());
    for (auto& x : v) x = n(rng);
    return Latent(d, std::move(v));
}

const NoiseSchedule& default_schedule() {
    static const NoiseSchedule s = ScheduleConfig{}.build();
    return s;
}

// 1 -------------------------------------------------------------------------
Outcome gradient_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> ch(1, 4), side(1, 16);
    std::uniform_real_distribution<double> uab(0.01, 0.99);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const LatentDims d = trial == 0 ? LatentDims{4, 16, 16} : LatentDims{ch(rng), side(rng), side(rng)};
        const double ab = uab(rng);
        const Reduction red = trial % 2 ? Reduction::Mean : Reduction::Sum;
        const Latent z = random_latent(rng, d), eps = random_latent(rng, d), xc = random_latent(rng, d);
        const Latent g = content_loss_grad(estimate_x0(z, eps, ab), xc, ab, red);
        std::vector<double> e(eps.data().begin(), eps.data().end());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double orig = e[i];
            e[i] = orig + h;
            const double lp = content_loss(estimate_x0(z, Latent(d, e), ab), xc, red);
            e[i] = orig - h;
            const double lm = content_loss(estimate_x0(z, Latent(d, e), ab), xc, red);
            e[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            num += (fd - g[i]) * (fd - g[i]);
            den += g[i] * g[i];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-6 && secs < 5.0,
            "max relative error " + fmt("%.2e", worst) + " over 100 latents, " + fmt("%.2f", secs) + " s"};
}

// 2 -------------------------------------------------------------------------
Outcome exact_contraction() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uab(0.01, 0.99), frac(0.0, 1.0);
    std::uniform_int_distribution<int> side(1, 8);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const LatentDims d{1 + trial % 4, side(rng), side(rng)};
        const double ab = uab(rng);
        const Reduction red = trial % 2 ? Reduction::Mean : Reduction::Sum;
        const double lambda = frac(rng) * stability_bound(ab, red, d.size());
        const Latent z = random_latent(rng, d), eps = random_latent(rng, d), xc = random_latent(rng, d);
        const Latent x0 = estimate_x0(z, eps, ab);
        const Latent x0r = estimate_x0(z, refine_noise(eps, content_loss_grad(x0, xc, ab, red), lambda), ab);
        const double f = residual_contraction_factor(ab, lambda, red, d.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x0.size(); ++i) {
            const double expect = f * (x0[i] - xc[i]);
            num += (x0r[i] - xc[i] - expect) * (x0r[i] - xc[i] - expect);
            den += expect * expect;
        }
        if (den > 0) worst = std::max(worst, std::sqrt(num / den));
    }
    const double f = residual_contraction_factor(0.25, 0.1, Reduction::Sum, 1);
    // 0.1 has no exact binary form; accept the few-ulp representation gap
    const double ulps = std::abs(f - 0.4) / (std::nextafter(0.4, 1.0) - 0.4);
    return {worst < 1e-8 && ulps <= 4.0, "max relative deviation " + fmt("%.2e", worst) +
                                             " over 1000 triples; factor(0.25, 0.1, sum) = " + fmt("%.17g", f) +
                                             " (" + fmt("%.0f", ulps) + " ulp from 0.4)"};
}

// 3 -------------------------------------------------------------------------
std::vector<double> reference_unguided(std::vector<double> z, const LatentDims& d, const NoisePredictor& p,
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

Outcome baseline_equivalence() {
    std::mt19937_64 rng(3);
    const LatentDims d{4, 16, 16};
    const auto plan = plan_timesteps(default_schedule(), 10);
    int identical = 0, runs = 0;
    for (int trial = 0; trial < 5; ++trial) {
        const Latent xc = random_latent(rng, d), other = random_latent(rng, d), z = random_latent(rng, d);
        const GaussianPriorPredictor gauss(other, 0.3 + trial);
        const StylePullPredictor pull(xc, other, 0.7);
        for (const NoisePredictor* p : {static_cast<const NoisePredictor*>(&gauss), static_cast<const NoisePredictor*>(&pull)}) {
            const auto ours = sample(z, *p, default_schedule(), plan, xc, GuidanceConfig{});
            const auto ref = reference_unguided({z.data().begin(), z.data().end()}, d, *p, default_schedule(),
                                                plan.timesteps);
            ++runs;
            identical += std::memcmp(ours.final_latent().data().data(), ref.data(), ref.size() * sizeof(double)) == 0;
        }
    }
    return {identical == runs, std::to_string(identical) + "/" + std::to_string(runs) +
                                   " lambda_c=0 runs bitwise identical to the reference loop"};
}

// 4 -------------------------------------------------------------------------
Outcome oracle_reconstruction() {
    std::mt19937_64 rng(4);
    GuidanceConfig off;
    off.enabled = false;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Latent xc = random_latent(rng, {4, 16, 16});
        const PointMassPredictor p(xc);
        const Latent zT = invert(xc, p, default_schedule(), InversionConfig{6, 2});
        const auto tr = sample(zT, p, default_schedule(), plan_timesteps(default_schedule(), 10), xc, off);
        worst = std::max(worst, std::sqrt(squared_l2(tr.final_latent(), xc)) / l2_norm(xc));
    }
    return {worst < 1e-3, "max relative L2 error " + fmt("%.2e", worst) + " (6 inversion, 10 sampling steps)"};
}

// 5 -------------------------------------------------------------------------
Outcome lambda_sweep() {
    const auto t0 = Clock::now();
    const std::vector<double> grid{0.0, 0.05, 0.1, 0.2, 0.4};
    std::mt19937_64 rng(5);
    bool monotone = true;
    double worst_ratio = 0.0;
    std::string first_row;
    for (int trial = 0; trial < 10; ++trial) {
        const LatentDims d{4, 16, 16};
        const Latent xc = random_latent(rng, d, 0.5), style = random_latent(rng, d, 0.5);
        const StylePullPredictor p(xc, style, 0.7);
        const Latent zT = invert(xc, p, default_schedule(), InversionConfig{});
        std::vector<double> losses;
        for (double frac : grid) {
            GuidanceConfig g;
            g.lambda_c = frac;
            g.scaling = LambdaScaling::StabilityFraction;
            const auto tr = sample(zT, p, default_schedule(), plan_timesteps(default_schedule(), 10), xc, g);
            losses.push_back(content_loss(tr.final_latent(), xc, Reduction::Sum));
        }
        for (std::size_t i = 1; i < losses.size(); ++i) monotone = monotone && losses[i] <= losses[i - 1];
        worst_ratio = std::max(worst_ratio, losses.back() / losses.front());
        if (trial == 0) {
            for (double l : losses) first_row += fmt(" %.4g", l);
        }
    }
    const double secs = seconds_since(t0);
    return {monotone && worst_ratio <= 0.8 && secs < 10.0,
            std::string(monotone ? "nonincreasing" : "NOT monotone") + "; final loss at 0.4 x bound is at most " +
                fmt("%.1f", 100.0 * worst_ratio) + "% of lambda_c=0 (first run:" + first_row + "), " +
                fmt("%.2f", secs) + " s"};
}

// 6 -------------------------------------------------------------------------
Outcome mosaic_round_trip() {
    double worst_psnr = 1e9;
    bool outside_exact = true;
    int faces = 0;
    const std::vector<std::vector<int>> layouts{{12, 16}, {14}, {30, 20, 9}, {40}, {64}, {24, 24, 24, 24}};
    for (std::size_t i = 0; i < layouts.size(); ++i) {
        const Fixture fx = make_face_fixture(600 + i, 160, 128, layouts[i]);
        const Image out = run_pipeline(fx.image, fx.boxes, true, IdentityStylizer{}, 64, 0);
        for (int y = 0; y < fx.image.height(); ++y)
            for (int x = 0; x < fx.image.width(); ++x) {
                bool in_box = false;
                for (const auto& b : fx.boxes) in_box = in_box || b.rect().contains(x, y);
                if (in_box) continue;
                for (int c = 0; c < 3; ++c) outside_exact = outside_exact && out.at(x, y, c) == fx.image.at(x, y, c);
            }
        for (const auto& b : fx.boxes) {
            worst_psnr = std::min(worst_psnr, psnr(crop(out, b), crop(fx.image, b)));
            ++faces;
        }
    }
    return {outside_exact && worst_psnr > 30.0, std::to_string(faces) + " faces, min PSNR inside boxes " +
                                                    fmt("%.1f", worst_psnr) + " dB, outside " +
                                                    (outside_exact ? "bitwise equal" : "DIFFERS")};
}

// 7 -------------------------------------------------------------------------
Outcome mosaic_benefit() {
    const ToyEmbedder emb;
    const DegradingStylizer stylizer;
    std::vector<EvalRecord> on, off;
    for (int i = 0; i < 20; ++i) {
        const std::vector<int> sides = i % 2 ? std::vector<int>{14 + i, 10} : std::vector<int>{12 + i};
        const Fixture fx = make_face_fixture(700 + i, 128, 128, sides);
        const std::string id = "fx" + std::to_string(i);
        const Image with = run_pipeline(fx.image, fx.boxes, true, stylizer, 64, 0);
        const Image without = run_pipeline(fx.image, fx.boxes, false, stylizer, 64, 0);
        for (const auto& r : evaluate_faces(id, "toy", fx.image, with, fx.boxes, emb)) on.push_back(r);
        for (const auto& r : evaluate_faces(id, "toy", fx.image, without, fx.boxes, emb)) off.push_back(r);
    }
    bool all_small = true;
    double m_on = 0, m_off = 0;
    for (const auto& r : on) {
        all_small = all_small && r.face_ratio < 0.10;
        m_on += r.cosine;
    }
    for (const auto& r : off) m_off += r.cosine;
    m_on /= static_cast<double>(on.size());
    m_off /= static_cast<double>(off.size());
    const EvalReport rep = build_report(on, off);
    const ReportCell* cell = rep.find(1, "toy");
    const bool positive = cell && cell->improvement_percent && *cell->improvement_percent > 0.0;
    return {all_small && rep.cells.size() == 1 && m_on >= m_off && positive,
            "mean cosine mosaic on " + fmt("%.4f", m_on) + " vs off " + fmt("%.4f", m_off) +
                ", Category 1 improvement " +
                (cell && cell->improvement_percent ? fmt("%+.2f%%", *cell->improvement_percent) : "undefined") +
                " over " + std::to_string(on.size()) + " faces"};
}

// 8 -------------------------------------------------------------------------
Outcome report_arithmetic() {
    auto one = [](double c, double b) {
        return build_report({EvalRecord{"a", "anime", 0, 0.05, 1, c}}, {EvalRecord{"a", "anime", 0, 0.05, 1, b}});
    };
    const EvalReport r1 = one(0.32, 0.169), r2 = one(0.564, 0.698);
    std::ostringstream t1, t2;
    write_report_table(t1, r1);
    write_report_table(t2, r2);
    const double i1 = *r1.cells[0].improvement_percent, i2 = *r2.cells[0].improvement_percent;
    const bool ok1 = t1.str().find("+89.35%") != std::string::npos && t1.str().find("89.94%") != std::string::npos;
    const bool ok2 = t2.str().find("-19.20%") != std::string::npos && std::abs(i2 - (-19.21)) <= 0.02;
    return {ok1 && ok2, "0.32/0.169 -> " + fmt("%+.2f%%", i1) + " (footnote cites 89.94%), 0.564/0.698 -> " +
                            fmt("%+.2f%%", i2) + " (published -19.21%)"};
}

// 9 -------------------------------------------------------------------------
Outcome category_partition() {
    std::mt19937_64 rng(9);
    int bad = 0, n = 0;
    auto check = [&](const FaceBox& b, int w, int h) {
        const auto fc = face_area_category(b, w, h);
        const double r = static_cast<double>(b.w) * b.h / (static_cast<double>(w) * h);
        const int hits = int(r < 0.10) + int(r >= 0.10 && r <= 0.20) + int(r > 0.20);
        const int expected = r < 0.10 ? 1 : (r <= 0.20 ? 2 : 3);
        bad += hits != 1 || fc.category != expected || fc.ratio != r;
        ++n;
    };
    std::uniform_int_distribution<int> dim(1, 400);
    for (int i = 0; i < 10000; ++i) {
        const int w = dim(rng), h = dim(rng);
        const int bw = std::uniform_int_distribution<int>(1, w)(rng), bh = std::uniform_int_distribution<int>(1, h)(rng);
        check(FaceBox{0, 0, bw, bh, 0}, w, h);
    }
    // exact boundaries
    check(FaceBox{0, 0, 10, 100, 0}, 100, 100);
    check(FaceBox{0, 0, 20, 100, 0}, 100, 100);
    check(FaceBox{0, 0, 40, 50, 0}, 100, 100);
    const bool ties = face_area_category({0, 0, 10, 100, 0}, 100, 100).category == 2 &&
                      face_area_category({0, 0, 40, 50, 0}, 100, 100).category == 2;
    return {bad == 0 && ties, std::to_string(n) + " boxes, " + std::to_string(bad) +
                                  " inconsistent; ratios 0.10 and 0.20 fall in Category 2"};
}

// 10 ------------------------------------------------------------------------
int run_cmd(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        const std::string rel = fs::relative(e.path(), root).string();
        if (e.is_directory()) {
            out[rel + "/"] = "";
            continue;
        }
        std::ifstream f(e.path(), std::ios::binary);
        out[rel] = std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    }
    return out;
}

Outcome determinism(const std::string& cli) {
    const fs::path base = fs::temp_directory_path() / ("idstyle_accept_" + std::to_string(::getpid()));
    fs::remove_all(base);
    fs::create_directories(base);
    const auto t0 = Clock::now();
    const int rc1 = run_cmd("'" + cli + "' demo --out '" + (base / "a").string() + "'");
    const int rc2 = run_cmd("'" + cli + "' demo --out '" + (base / "b").string() + "'");
    const double secs = seconds_since(t0);
    const auto a = tree_contents(base / "a");
    const auto b = tree_contents(base / "b");
    std::size_t bytes = 0;
    for (const auto& [k, v] : a) bytes += v.size();
    fs::remove_all(base);
    const bool same = !a.empty() && a == b;
    return {rc1 == 0 && rc2 == 0 && same && secs < 60.0,
            std::to_string(a.size()) + " entries (" + std::to_string(bytes) + " bytes) " +
                (same ? "bitwise identical" : "DIFFER") + " across two runs, " + fmt("%.2f", secs) + " s total"};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <idstyle-cli>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gradient oracle", gradient_oracle},
        {"exact contraction law", exact_contraction},
        {"baseline equivalence", baseline_equivalence},
        {"oracle reconstruction", oracle_reconstruction},
        {"lambda_c monotonicity sweep", lambda_sweep},
        {"mosaic round trip", mosaic_round_trip},
        {"mosaic benefit direction", mosaic_benefit},
        {"report arithmetic", report_arithmetic},
        {"category partition", category_partition},
        {"determinism", [&] { return determinism(cli); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
