// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs single-threaded under ctest.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "checks.hpp"
#include "sc2d/dict_learner.hpp"
#include "sc2d/metrics.hpp"
#include "sc2d/oracle.hpp"
#include "sc2d/pipeline.hpp"
#include "sc2d/sparse_solver.hpp"
#include "test_util.hpp"

using namespace sc2d;
using sc2d::testing::random_extent;
using sc2d::testing::random_tensor;

namespace {

struct Verdict {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// 1. Noisy PSNR for the tabulated sigma levels.
Verdict noisy_psnr()
{
    const double sigmas[] = {5, 10, 20, 30, 50};
    const double targets[] = {34.16, 28.13, 22.11, 18.59, 14.15};
    const Tensor3 clean = synthetic_msi(512, 512, 1, 7);
    double worst = 0.0;
    std::string got;
    for (int i = 0; i < 5; ++i) {
        const double p = metrics::psnr(clean, add_gaussian_noise(clean, sigmas[i], 100 + i));
        worst = std::max(worst, std::abs(p - targets[i]));
        got += fmt(" %.2f", p);
    }
    return {worst <= 0.3, "psnr" + got + fmt(" dB, max |dev| %.3f <= 0.3", worst)};
}

Verdict from_check(const cli::CheckResult& r)
{
    return {r.passed, fmt("%.0f instances, worst %.3e <= %.0e", r.trials, r.worst, r.tolerance)};
}

// 2. Block-circulant unfolding.
Verdict circulant()
{
    cli::CheckOptions o;
    o.trials = 500;
    o.seed = 2024;
    return from_check(cli::check_circulant(o));
}

// 3. Analytic gradient against central differences.
Verdict gradient()
{
    cli::CheckOptions o;
    o.trials = 100;
    o.seed = 2025;
    return from_check(cli::check_gradient(o));
}

// 4. Depth one is conventional sparse coding.
Verdict depth_one()
{
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const Index m = random_extent(rng, 2, 12), r = random_extent(rng, 2, 16), n = random_extent(rng, 1, 40);
        const Tensor3 d = random_tensor(m, r, 1, rng);
        const Tensor3 x = random_tensor(m, n, 1, rng);
        SolverConfig cfg;
        cfg.beta = 0.05;
        cfg.max_iters = 300;
        cfg.mode = SolverMode::Ista;
        cfg.rel_tol = 0.0;
        const auto res = ista_t(x, d, cfg);
        const double dense = oracle::dense_ista(unfold(x), unfold(d), cfg.beta, lipschitz(d), cfg.max_iters);
        worst = std::max(worst, std::abs(objective(x, d, res.coeffs, cfg.beta) - dense) / std::abs(dense));
    }
    return {worst <= 1e-8, fmt("20 seeds, worst relative objective gap %.3e <= 1e-8", worst)};
}

// 5. Alternating minimization never increases the objective.
Verdict monotone_training()
{
    double worst_rise = -INFINITY, worst_norm = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(500 + seed);
        const Tensor3 x = tprod(random_dictionary(8, 8, 4, 1000 + seed), sc2d::testing::random_sparse(8, 200, 4, 0.3, rng));
        TrainConfig cfg;
        cfg.atoms = 8;
        cfg.beta = 0.1;
        cfg.outer_iters = 15;
        cfg.inner.max_iters = 50;
        cfg.seed = seed;
        const auto res = train(x, cfg);
        for (std::size_t t = 1; t < res.trace.size(); ++t)
            worst_rise = std::max(worst_rise, res.trace[t].objective - res.trace[t - 1].objective);
        for (double nj : atom_norms(res.dict)) worst_norm = std::max(worst_norm, nj * nj);
    }
    const bool ok = worst_rise <= 1e-9 && worst_norm <= 1.0 + 1e-8;
    return {ok, fmt("10 runs, largest per-iteration rise %.3e <= 1e-9, max atom norm^2 1%+.3e <= 1+1e-8", worst_rise,
                    worst_norm - 1.0)};
}

// KKT residual of a Newton solution measured on the recovered dictionary:
// feasibility, stationarity of free multipliers and complementary slackness.
double kkt_residual(const SliceCache& cache, const DualState& st)
{
    const Tensor3 d = idft3(recover_dhat(cache, st.lambda));
    const auto norms = atom_norms(d);
    const double lmin = NewtonOptions{}.lambda_min;
    double worst = 0.0;
    for (Index j = 0; j < cache.r; ++j) {
        const double gap = norms[static_cast<std::size_t>(j)] * norms[static_cast<std::size_t>(j)] - 1.0;
        worst = std::max(worst, std::max(gap, 0.0));
        if (st.lambda(j) > lmin) worst = std::max(worst, std::abs(gap));
        worst = std::max(worst, std::abs(st.lambda(j) * gap));
    }
    return std::max({worst, st.grad_norm / static_cast<double>(cache.k), st.slackness / static_cast<double>(cache.k)});
}

// 6. Dual gradient, weak duality, and KKT at convergence.
Verdict dual()
{
    cli::CheckOptions o;
    o.trials = 200;
    o.seed = 2026;
    const auto fd = cli::check_dual_gradient(o);
    const auto weak = cli::check_weak_duality(o);

    double kkt = 0.0;
    int unconverged = 0, solved = 0;
    std::mt19937_64 rng(2027);
    for (int t = 0; t < 100; ++t) {
        const Index m = random_extent(rng, 1, 6), r = random_extent(rng, 1, 6);
        const Index n = random_extent(rng, r, 12), k = random_extent(rng, 1, 8);
        const auto cache = build_cache(random_tensor(m, n, k, rng, 3.0), random_tensor(r, n, k, rng));
        const auto st = newton_solve(cache, Vector::Ones(r));
        ++solved;
        if (!st.converged) ++unconverged;
        kkt = std::max(kkt, kkt_residual(cache, st));
    }
    // Dictionary steps arising inside a training run.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 g(900 + seed);
        const Tensor3 x = random_tensor(8, 200, 4, g, 2.0);
        TrainConfig cfg;
        cfg.atoms = 8;
        cfg.outer_iters = 3;
        cfg.inner.max_iters = 30;
        cfg.seed = seed;
        const auto res = train(x, cfg);
        const auto cache = build_cache(x, res.coeffs);
        const auto st = newton_solve(cache, Vector::Ones(cache.r));
        ++solved;
        if (!st.converged) ++unconverged;
        kkt = std::max(kkt, kkt_residual(cache, st));
    }
    const bool ok = fd.passed && weak.passed && unconverged == 0 && kkt <= 1e-6;
    return {ok, fmt("grad fd %.3e <= 1e-5, weak duality violation %.3e, ", fd.worst, weak.worst) +
                    fmt("KKT %.3e <= 1e-6 over %.0f solves (%.0f unconverged)", kkt, solved, unconverged)};
}

// 7. A delta coefficient at slice l0 circularly shifts the atom by l0.
Verdict shift_invariance()
{
    std::mt19937_64 rng(2028);
    double worst = 0.0;
    int cases = 0;
    for (Index k = 1; k <= 8; ++k) {
        for (int rep = 0; rep < 5; ++rep) {
            const Tensor3 atom = random_tensor(random_extent(rng, 1, 8), 1, k, rng);
            for (Index l0 = 0; l0 < k; ++l0) {
                Tensor3 delta(1, 1, k);
                delta(0, 0, l0) = 1.0;
                worst = std::max(worst, (tprod(atom, delta) - shift3(atom, l0)).frobenius_norm());
                ++cases;
            }
        }
    }
    return {worst <= 1e-10, fmt("%.0f (k, l0) cases, k <= 8, max Frobenius error %.3e <= 1e-10", cases, worst)};
}

// 8. Desk-scale denoising on a synthetic multi-band image.
Verdict denoising()
{
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor3 clean = synthetic_msi(64, 64, 5, 3);
    const Tensor3 noisy = add_gaussian_noise(clean, 20.0, 4);
    const PatchGrid grid = PatchGrid::make(64, 64, 5, 5, 1);
    TrainConfig cfg;
    cfg.atoms = 30;
    cfg.beta = scaled_beta(200.0, grid.count());
    cfg.outer_iters = 10;
    cfg.inner.max_iters = 50;
    cfg.seed = 5;
    const auto res = denoise(noisy, cfg, grid, clean);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double gain = res.quality->psnr - res.noisy_quality->psnr;
    const bool ok = gain >= 3.0 && res.quality->ssim > res.noisy_quality->ssim && secs < 300.0;
    return {ok, fmt("beta %.2f, psnr %.2f -> %.2f dB, ", cfg.beta, res.noisy_quality->psnr, res.quality->psnr) +
                    fmt("ssim %.3f -> %.3f, %.1f s", res.noisy_quality->ssim, res.quality->ssim, secs)};
}

// 9. Encode time grows linearly in the sample count.
Verdict scaling()
{
    const Index ns[] = {1000, 2000, 4000, 8000};
    double t[4];
    for (int i = 0; i < 4; ++i) t[i] = cli::time_encode(25, 30, 5, ns[i], 20, 5, 9);
    bool ok = true;
    std::string ratios;
    for (int i = 1; i < 4; ++i) {
        const double q = t[i] / t[i - 1];
        ok = ok && q >= 1.6 && q <= 2.6;
        ratios += fmt(" %.2f", q);
    }
    return {ok, "doubling ratios" + ratios + " in [1.6, 2.6] (n = 1000..8000)"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"noisy-psnr", noisy_psnr},        {"circulant-unfold", circulant},
        {"gradient-fd", gradient},         {"depth-one", depth_one},
        {"monotone-training", monotone_training}, {"dual", dual},
        {"shift-invariance", shift_invariance},   {"denoising", denoising},
        {"encode-scaling", scaling},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        if (!v.passed) ++failures;
        std::printf("%s %zu %s: %s\n", v.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
