#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "sc2d/dict_learner.hpp"
#include "sc2d/oracle.hpp"
#include "sc2d/sparse_solver.hpp"

namespace sc2d::cli {

namespace {

Tensor3 random_tensor(Index m, Index n, Index k, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Tensor3 t(m, n, k);
    for (double& v : t.data()) v = normal(rng);
    return t;
}

Index extent(std::mt19937_64& rng, Index lo, Index hi)
{
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

CheckResult finish(std::string name, int trials, double worst, double tol)
{
    return {std::move(name), trials, worst, tol, worst <= tol};
}

Tensor3 fast_tprod(const Tensor3& a, const Tensor3& b, bool inject)
{
    Tensor3 c = tprod(a, b);
    if (inject && c.size() > 0) c.data()[0] += 1e-3 * (1.0 + std::abs(c.data()[0]));
    return c;
}

template <class F>
double median_seconds(int repeats, F&& body)
{
    std::vector<double> times;
    for (int rep = 0; rep < std::max(1, repeats); ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::nth_element(times.begin(), times.begin() + static_cast<long>(times.size() / 2), times.end());
    return times[times.size() / 2];
}

}  // namespace

CheckResult check_circulant(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed);
    double worst = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
        const Index m = extent(rng, 1, 6), r = extent(rng, 1, 6), n = extent(rng, 1, 6), k = extent(rng, 1, 8);
        const Tensor3 a = random_tensor(m, r, k, rng);
        const Tensor3 b = random_tensor(r, n, k, rng);
        const Matrix lhs = unfold(fast_tprod(a, b, opts.inject_failure));
        worst = std::max(worst, relative_error(lhs, circulant_unfold(a) * unfold(b)));
    }
    return finish("circulant-unfold", opts.trials, worst, 1e-10);
}

CheckResult check_naive_tprod(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 1);
    double worst = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
        const Index m = extent(rng, 1, 6), r = extent(rng, 1, 6), n = extent(rng, 1, 6), k = extent(rng, 1, 8);
        const Tensor3 a = random_tensor(m, r, k, rng);
        const Tensor3 b = random_tensor(r, n, k, rng);
        worst = std::max(worst, relative_error(fast_tprod(a, b, opts.inject_failure), oracle::tprod_naive(a, b)));
    }
    return finish("naive-tprod", opts.trials, worst, 1e-10);
}

CheckResult check_parseval(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 2);
    double worst = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
        const Tensor3 x = random_tensor(extent(rng, 1, 6), extent(rng, 1, 6), extent(rng, 1, 9), rng);
        const double freq = dft3(x).squared_norm() / static_cast<double>(x.depth());
        worst = std::max(worst, std::abs(freq - x.squared_norm()) / x.squared_norm());
    }
    return finish("parseval", opts.trials, worst, 1e-10);
}

CheckResult check_gradient(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 3);
    double worst = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
        const Index m = extent(rng, 1, 4), r = extent(rng, 1, 4), n = extent(rng, 1, 4), k = extent(rng, 1, 5);
        const Tensor3 x = random_tensor(m, n, k, rng);
        const Tensor3 d = random_tensor(m, r, k, rng);
        const Tensor3 b = random_tensor(r, n, k, rng);
        auto f = [&](const Tensor3& bb) { return objective(x, d, bb, 0.0); };
        worst = std::max(worst, relative_error(grad_f(d, b, x), oracle::numerical_gradient(f, b, 1e-5)));
    }
    return finish("grad-fd", opts.trials, worst, 1e-5);
}

CheckResult check_dual_gradient(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 4);
    std::uniform_real_distribution<double> lam(0.1, 3.0);
    double worst = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
        const Index m = extent(rng, 1, 4), r = extent(rng, 1, 4), n = extent(rng, 1, 6), k = extent(rng, 1, 5);
        const auto cache = build_cache(random_tensor(m, n, k, rng), random_tensor(r, n, k, rng));
        Vector lambda(r);
        for (Index j = 0; j < r; ++j) lambda(j) = lam(rng);
        const Vector g = dual_grad_hess(cache, lambda).gradient;
        constexpr double h = 1e-5;
        Vector fd(r);
        for (Index j = 0; j < r; ++j) {
            Vector up = lambda, dn = lambda;
            up(j) += h;
            dn(j) -= h;
            fd(j) = (dual_value(cache, up) - dual_value(cache, dn)) / (2 * h);
        }
        worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
    }
    return finish("dual-grad-fd", opts.trials, worst, 1e-5);
}

CheckResult check_weak_duality(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 5);
    std::uniform_real_distribution<double> lam(0.0, 4.0);
    double worst = 0.0;
    for (int t = 0; t < opts.trials; ++t) {
        const Index m = extent(rng, 1, 5), r = extent(rng, 1, 5), n = extent(rng, 1, 6), k = extent(rng, 1, 6);
        const Tensor3 x = random_tensor(m, n, k, rng);
        const Tensor3 b = random_tensor(r, n, k, rng);
        Tensor3 d = random_tensor(m, r, k, rng);
        const auto norms = atom_norms(d);
        for (Index j = 0; j < r; ++j)
            for (Index l = 0; l < k; ++l) d.slice(l).col(j) /= norms[static_cast<std::size_t>(j)];
        Vector lambda(r);
        for (Index j = 0; j < r; ++j) lambda(j) = lam(rng);
        const double primal = static_cast<double>(k) * (x - tprod(d, b)).squared_norm();
        const double dual = dual_value(build_cache(x, b), lambda);
        // Violation relative to the primal value; zero when the bound holds.
        worst = std::max(worst, std::max(0.0, dual - primal) / std::max(1.0, primal));
    }
    return finish("weak-duality", opts.trials, worst, 1e-12);
}

CheckResult check_shift_invariance(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 6);
    double worst = 0.0;
    int count = 0;
    for (int t = 0; t < opts.trials; ++t) {
        const Index k = extent(rng, 1, 8);
        const Tensor3 atom = random_tensor(extent(rng, 1, 6), 1, k, rng);
        for (Index l0 = 0; l0 < k; ++l0) {
            Tensor3 delta(1, 1, k);
            delta(0, 0, l0) = 1.0;
            const Tensor3 got = fast_tprod(atom, delta, opts.inject_failure);
            worst = std::max(worst, (got - shift3(atom, l0)).frobenius_norm());
            ++count;
        }
    }
    return finish("shift-invariance", count, worst, 1e-10);
}

CheckResult check_depth_one(const CheckOptions& opts)
{
    std::mt19937_64 rng(opts.seed + 7);
    double worst = 0.0;
    const int trials = std::max(1, opts.trials / 5);
    for (int t = 0; t < trials; ++t) {
        const Index m = extent(rng, 2, 6), r = extent(rng, 2, 8), n = extent(rng, 1, 10);
        const Tensor3 d = random_tensor(m, r, 1, rng);
        const Tensor3 x = random_tensor(m, n, 1, rng);
        SolverConfig cfg;
        cfg.beta = 0.1;
        cfg.max_iters = 200;
        cfg.mode = SolverMode::Ista;
        cfg.rel_tol = 0.0;
        const auto res = ista_t(x, d, cfg);
        const double dense = oracle::dense_ista(unfold(x), circulant_unfold(d), cfg.beta, lipschitz(d), cfg.max_iters);
        worst = std::max(worst, std::abs(objective(x, d, res.coeffs, cfg.beta) - dense) / std::abs(dense));
    }
    return finish("depth-one-ista", trials, worst, 1e-8);
}

std::vector<CheckResult> run_checks(const CheckOptions& opts)
{
    return {check_circulant(opts),     check_naive_tprod(opts),   check_parseval(opts),
            check_gradient(opts),      check_dual_gradient(opts), check_weak_duality(opts),
            check_shift_invariance(opts), check_depth_one(opts)};
}

double time_encode(Index m, Index r, Index k, Index n, int iters, int repeats, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const Tensor3 d = random_tensor(m, r, k, rng);
    const Tensor3 x = random_tensor(m, n, k, rng);
    SolverConfig cfg;
    cfg.beta = 0.1;
    cfg.max_iters = iters;
    cfg.rel_tol = 0.0;
    return median_seconds(repeats, [&] { (void)ista_t(x, d, cfg); });
}

double time_dense_encode(Index m, Index r, Index n, int iters, int repeats, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const Matrix d = unfold(random_tensor(m, r, 1, rng));
    const Matrix x = unfold(random_tensor(m, n, 1, rng));
    const double lip = (d.transpose() * d).norm();
    return median_seconds(repeats, [&] { (void)oracle::dense_ista(x, d, 0.1, lip, iters); });
}

}  // namespace sc2d::cli
