#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "sc2d/oracle.hpp"
#include "sc2d/sparse_solver.hpp"
#include "test_util.hpp"

namespace sc2d {
namespace {

using testing::random_extent;
using testing::random_tensor;

struct Instance {
    Tensor3 x, d, b;
};

Instance random_instance(std::mt19937_64& rng, Index max_dim, Index max_k)
{
    const Index m = random_extent(rng, 1, max_dim), r = random_extent(rng, 1, max_dim);
    const Index n = random_extent(rng, 1, max_dim), k = random_extent(rng, 1, max_k);
    return {random_tensor(m, n, k, rng), random_tensor(m, r, k, rng), random_tensor(r, n, k, rng)};
}

// --- grad_f -----------------------------------------------------------------

TEST(GradF, ZeroCoefficients)
{
    std::mt19937_64 rng(1);
    const Tensor3 d = random_tensor(4, 3, 5, rng);
    const Tensor3 x = random_tensor(4, 2, 5, rng);
    const Tensor3 expect = -1.0 * tprod(transpose_t(d), x);
    EXPECT_LE(relative_error(grad_f(d, Tensor3(3, 2, 5), x), expect), 1e-12);
}

TEST(GradF, VanishesAtExactFit)
{
    std::mt19937_64 rng(2);
    const Tensor3 d = random_tensor(4, 3, 5, rng);
    const Tensor3 b = random_tensor(3, 2, 5, rng);
    const Tensor3 x = tprod(d, b);
    const double scale = tprod(transpose_t(d), x).frobenius_norm();
    EXPECT_LE(grad_f(d, b, x).frobenius_norm() / scale, 1e-10);
}

TEST(GradF, MatchesCentralDifferences)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto in = random_instance(rng, 4, 5);
        auto f = [&](const Tensor3& b) { return objective(in.x, in.d, b, 0.0); };
        const Tensor3 fd = oracle::numerical_gradient(f, in.b, 1e-5);
        ASSERT_LE(relative_error(grad_f(in.d, in.b, in.x), fd), 1e-5) << "trial " << trial;
    }
}

TEST(GradF, RejectsShapeMismatch)
{
    EXPECT_THROW(grad_f(Tensor3(3, 2, 4), Tensor3(3, 2, 4), Tensor3(3, 2, 4)), ShapeError);
}

// --- lipschitz --------------------------------------------------------------

TEST(Lipschitz, UnitColumn)
{
    Tensor3 d(3, 1, 1);
    d(1, 0, 0) = 1.0;
    EXPECT_DOUBLE_EQ(lipschitz(d), 1.0);
}

TEST(Lipschitz, QuadraticHomogeneity)
{
    std::mt19937_64 rng(4);
    const Tensor3 d = random_tensor(4, 3, 6, rng);
    EXPECT_NEAR(lipschitz(3.0 * d) / lipschitz(d), 9.0, 1e-12);
}

TEST(Lipschitz, BoundsDenseSpectrum)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Tensor3 d = random_tensor(random_extent(rng, 1, 5), random_extent(rng, 1, 5),
                                        random_extent(rng, 1, 6), rng);
        const Matrix c = circulant_unfold(d);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(c.transpose() * c);
        EXPECT_GE(lipschitz(d), eig.eigenvalues().maxCoeff() * (1.0 - 1e-12));
    }
}

TEST(Lipschitz, ZeroDictionaryIsAnError)
{
    EXPECT_THROW(lipschitz(Tensor3(3, 2, 4)), SolverError);
}

TEST(Lipschitz, GradientVariationIsBounded)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = random_instance(rng, 5, 6);
        const Tensor3 c = random_tensor(in.b.rows(), in.b.cols(), in.b.depth(), rng);
        const double lhs = (grad_f(in.d, in.b, in.x) - grad_f(in.d, c, in.x)).frobenius_norm();
        const double rhs = lipschitz(in.d) * (in.b - c).frobenius_norm();
        ASSERT_LE(lhs, rhs * (1.0 + 1e-12));
    }
}

// --- soft_threshold ---------------------------------------------------------

TEST(SoftThreshold, Examples)
{
    const Tensor3 t(1, 1, 3, {1.2, -0.3, -2.0});
    const Tensor3 s = soft_threshold(t, 0.5);
    EXPECT_NEAR(s.data()[0], 0.7, 1e-15);
    EXPECT_EQ(s.data()[1], 0.0);
    EXPECT_NEAR(s.data()[2], -1.5, 1e-15);
}

TEST(SoftThreshold, ZeroTauIsIdentity)
{
    std::mt19937_64 rng(7);
    const Tensor3 t = random_tensor(3, 3, 3, rng);
    EXPECT_EQ(soft_threshold(t, 0.0), t);
}

TEST(SoftThreshold, NegativeTauRejected)
{
    EXPECT_THROW(soft_threshold(Tensor3(1, 1, 1), -0.1), ConfigError);
}

TEST(SoftThreshold, MatchesScalarProxGridSearch)
{
    std::mt19937_64 rng(8);
    const double tau = 0.1;
    const Tensor3 t = random_tensor(2, 3, 4, rng);
    const Tensor3 s = soft_threshold(t, tau);
    constexpr double kStep = 1e-4;
    for (Index e = 0; e < t.size(); ++e) {
        const double v = t.data()[e];
        double best_z = 0.0, best = 0.5 * v * v;
        for (double z = -5.0; z <= 5.0; z += kStep) {
            const double cost = 0.5 * (z - v) * (z - v) + tau * std::abs(z);
            if (cost < best) {
                best = cost;
                best_z = z;
            }
        }
        EXPECT_NEAR(s.data()[e], best_z, 2 * kStep);
    }
}

// --- objective --------------------------------------------------------------

TEST(Objective, ZeroCoefficients)
{
    std::mt19937_64 rng(9);
    const Tensor3 x = random_tensor(3, 4, 5, rng);
    const Tensor3 d = random_tensor(3, 2, 5, rng);
    EXPECT_NEAR(objective(x, d, Tensor3(2, 4, 5), 1.0), 0.5 * x.squared_norm(), 1e-12);
}

TEST(Objective, ExactFitWithoutPenalty)
{
    std::mt19937_64 rng(10);
    const Tensor3 d = random_tensor(3, 2, 5, rng);
    const Tensor3 b = random_tensor(2, 4, 5, rng);
    const Tensor3 x = tprod(d, b);
    EXPECT_LE(objective(x, d, b, 0.0), 1e-24 * x.squared_norm());
}

TEST(Objective, DataTermValueMatchesTimeDomain)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 5, 8);
        const DataTerm term(in.d, in.x);
        EXPECT_NEAR(term.value(in.b) / objective(in.x, in.d, in.b, 0.0), 1.0, 1e-10);
    }
}

// --- ista_t -----------------------------------------------------------------

SolverConfig ista_cfg(double beta, int iters, SolverMode mode = SolverMode::Ista)
{
    SolverConfig cfg;
    cfg.beta = beta;
    cfg.max_iters = iters;
    cfg.mode = mode;
    cfg.rel_tol = 0.0;
    return cfg;
}

TEST(IstaT, ZeroDataGivesZeroAfterOneIteration)
{
    std::mt19937_64 rng(12);
    const Tensor3 d = random_tensor(4, 3, 5, rng);
    const auto res = ista_t(Tensor3(4, 6, 5), d, ista_cfg(0.1, 50));
    EXPECT_EQ(res.coeffs.frobenius_norm(), 0.0);
    EXPECT_EQ(res.report.iterations_run, 1);
    EXPECT_EQ(res.report.final_sparsity, 1.0);
}

TEST(IstaT, LargeBetaKeepsZeroFixed)
{
    std::mt19937_64 rng(13);
    const Tensor3 d = random_tensor(4, 3, 5, rng);
    const Tensor3 x = random_tensor(4, 6, 5, rng);
    const Tensor3 g0 = grad_f(d, Tensor3(3, 6, 5), x);
    double max_abs = 0.0;
    for (double v : g0.data()) max_abs = std::max(max_abs, std::abs(v));
    const auto res = ista_t(x, d, ista_cfg(max_abs * 1.0001, 20, SolverMode::Fista));
    EXPECT_EQ(res.coeffs.frobenius_norm(), 0.0);
}

TEST(IstaT, DepthOneMatchesDenseIsta)
{
    std::mt19937_64 rng(14);
    for (int seed = 0; seed < 5; ++seed) {
        const Tensor3 d = random_tensor(6, 8, 1, rng);
        const Tensor3 x = random_tensor(6, 10, 1, rng);
        const auto res = ista_t(x, d, ista_cfg(0.1, 300));
        const double dense = oracle::dense_ista(unfold(x), circulant_unfold(d), 0.1, lipschitz(d), 300);
        EXPECT_NEAR(objective(x, d, res.coeffs, 0.1) / dense, 1.0, 1e-8);
    }
}

TEST(IstaT, IstaTraceIsMonotone)
{
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 6, 6);
        const auto res = ista_t(in.x, in.d, ista_cfg(0.05, 60));
        const auto& tr = res.report.objective_trace;
        ASSERT_EQ(static_cast<int>(tr.size()), res.report.iterations_run + 1);
        for (std::size_t p = 1; p < tr.size(); ++p)
            ASSERT_LE(tr[p], tr[p - 1] + 1e-12 * std::max(1.0, std::abs(tr[p - 1])));
    }
}

TEST(IstaT, FistaEndsBelowStart)
{
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = random_instance(rng, 6, 6);
        const auto res = ista_t(in.x, in.d, ista_cfg(0.05, 40, SolverMode::Fista));
        EXPECT_LE(objective(in.x, in.d, res.coeffs, 0.05), res.report.objective_trace.front() * (1 + 1e-12));
    }
}

TEST(IstaT, FistaConvergesFasterThanIsta)
{
    std::mt19937_64 rng(17);
    const Tensor3 d = random_tensor(8, 12, 4, rng);
    const Tensor3 x = random_tensor(8, 30, 4, rng);
    const double ista = ista_t(x, d, ista_cfg(0.1, 100)).report.objective_trace.back();
    const double fista = ista_t(x, d, ista_cfg(0.1, 100, SolverMode::Fista)).report.objective_trace.back();
    EXPECT_LT(fista, ista);
}

TEST(IstaT, StationaryPointIsFixed)
{
    std::mt19937_64 rng(18);
    // Undercomplete dictionary: strongly convex data term, fast convergence.
    const Tensor3 d = random_tensor(8, 3, 4, rng);
    const Tensor3 x = random_tensor(8, 5, 4, rng);
    const double beta = 0.2;
    const Tensor3 star = ista_t(x, d, ista_cfg(beta, 20000)).coeffs;

    const double lip = lipschitz(d);
    const Tensor3 step = star - (1.0 / lip) * grad_f(d, star, x);
    ASSERT_LE((soft_threshold(step, beta / lip) - star).frobenius_norm(), 1e-10);

    const Tensor3 again = ista_t(x, d, ista_cfg(beta, 50), star).coeffs;
    EXPECT_LE((again - star).frobenius_norm(), 1e-9);
}

TEST(IstaT, RelativeToleranceStopsEarly)
{
    std::mt19937_64 rng(19);
    const Tensor3 d = random_tensor(6, 4, 4, rng);
    const Tensor3 x = random_tensor(6, 8, 4, rng);
    auto cfg = ista_cfg(0.1, 5000);
    cfg.rel_tol = 1e-6;
    const auto res = ista_t(x, d, cfg);
    EXPECT_LT(res.report.iterations_run, 5000);
    const auto& tr = res.report.objective_trace;
    EXPECT_LE(std::abs(tr[tr.size() - 2] - tr.back()), 1e-6 * std::abs(tr[tr.size() - 2]));
}

TEST(IstaT, EtaScalesReportedStep)
{
    std::mt19937_64 rng(20);
    const Tensor3 d = random_tensor(6, 4, 4, rng);
    const Tensor3 x = random_tensor(6, 8, 4, rng);
    auto cfg = ista_cfg(0.1, 3);
    cfg.eta = 2.0;
    EXPECT_NEAR(ista_t(x, d, cfg).report.lipschitz_used, 2.0 * lipschitz(d), 1e-12 * lipschitz(d));
}

TEST(IstaT, ConfigValidation)
{
    const Tensor3 d = Tensor3::identity(2, 2);
    const Tensor3 x(2, 1, 2);
    EXPECT_THROW(ista_t(x, d, ista_cfg(0.0, 10)), ConfigError);
    EXPECT_THROW(ista_t(x, d, ista_cfg(0.1, 0)), ConfigError);
    auto cfg = ista_cfg(0.1, 10);
    cfg.eta = 0.5;
    EXPECT_THROW(ista_t(x, d, cfg), ConfigError);
}

TEST(IstaT, ZeroDictionaryIsAnError)
{
    EXPECT_THROW(ista_t(Tensor3(3, 2, 2), Tensor3(3, 2, 2), ista_cfg(0.1, 5)), SolverError);
}

TEST(IstaT, DeterministicAcrossThreadCounts)
{
    std::mt19937_64 rng(21);
    const Tensor3 d = random_tensor(25, 30, 5, rng);
    const Tensor3 x = random_tensor(25, 600, 5, rng, 10.0);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = ista_t(x, d, ista_cfg(1.0, 10, SolverMode::Fista));
    omp_set_num_threads(3);
    const auto b = ista_t(x, d, ista_cfg(1.0, 10, SolverMode::Fista));
    omp_set_num_threads(saved);
    EXPECT_EQ(a.coeffs, b.coeffs);
    EXPECT_EQ(a.report.objective_trace, b.report.objective_trace);
}

TEST(SolverMode, ParseRoundTrip)
{
    EXPECT_EQ(parse_solver_mode(to_string(SolverMode::Ista)), SolverMode::Ista);
    EXPECT_EQ(parse_solver_mode(to_string(SolverMode::Fista)), SolverMode::Fista);
    EXPECT_THROW(parse_solver_mode("omp"), ConfigError);
}

}  // namespace
}  // namespace sc2d
