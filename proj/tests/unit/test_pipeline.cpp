#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sc2d/metrics.hpp"
#include "sc2d/pipeline.hpp"
#include "test_util.hpp"

namespace sc2d {
namespace {

using testing::random_tensor;

Tensor3 ramp_image(Index h, Index w, Index bands)
{
    Tensor3 img(h, w, bands);
    for (Index z = 0; z < bands; ++z)
        for (Index x = 0; x < w; ++x)
            for (Index y = 0; y < h; ++y) img(y, x, z) = static_cast<double>(y + 10 * x + 100 * z);
    return img;
}

// --- patches ----------------------------------------------------------------

TEST(PatchGrid, CountsPositions)
{
    const auto g = PatchGrid::make(64, 64, 5, 5, 1);
    EXPECT_EQ(g.depth, 5);
    EXPECT_EQ(g.count(), 60 * 60);
    EXPECT_EQ(g.patch_rows(), 25);
    const auto tiled = PatchGrid::make(23, 17, 5, 5, 5);
    EXPECT_EQ(tiled.count(), (23 / 5) * (17 / 5));
}

TEST(PatchGrid, RejectsOversizedPatch)
{
    EXPECT_THROW(PatchGrid::make(4, 10, 5, 5, 1), ShapeError);
    EXPECT_THROW(PatchGrid::make(10, 10, 3, 5, 1, 4), ShapeError);
    EXPECT_THROW(PatchGrid::make(10, 10, 3, 5, 0), ShapeError);
}

TEST(ExtractPatches, SinglePatchIsFlattenedImage)
{
    const Tensor3 img = ramp_image(5, 5, 5);
    const auto g = PatchGrid::make(5, 5, 5, 5, 1);
    const Tensor3 p = extract_patches(img, g);
    ASSERT_EQ(p.cols(), 1);
    ASSERT_EQ(p.rows(), 25);
    ASSERT_EQ(p.depth(), 5);
    for (Index z = 0; z < 5; ++z)
        for (Index x = 0; x < 5; ++x)
            for (Index y = 0; y < 5; ++y) EXPECT_EQ(p(y + 5 * x, 0, z), img(y, x, z));
}

TEST(ExtractPatches, RowMajorPositionOrder)
{
    const Tensor3 img = ramp_image(7, 8, 2);
    const auto g = PatchGrid::make(7, 8, 2, 3, 2, 1);
    const Tensor3 p = extract_patches(img, g);
    ASSERT_EQ(g.positions_y(), 3);
    ASSERT_EQ(g.positions_x(), 3);
    ASSERT_EQ(g.positions_z(), 2);
    // Position (pz=1, py=2, px=1): origin (4, 2, 1).
    const Index idx = (1 * 3 + 2) * 3 + 1;
    EXPECT_EQ(p(0, idx, 0), img(4, 2, 1));
    EXPECT_EQ(p(1 + 3 * 2, idx, 0), img(5, 4, 1));
}

TEST(Patches, RoundTripIsExact)
{
    std::mt19937_64 rng(1);
    for (Index stride : {1, 2, 3}) {
        const Tensor3 img = random_tensor(13, 11, 5, rng, 50.0);
        const auto g = PatchGrid::make(13, 11, 5, 5, stride);
        const auto rec = reconstruct_from_patches(extract_patches(img, g), g);
        for (Index z = 0; z < 5; ++z)
            for (Index x = 0; x < 11; ++x)
                for (Index y = 0; y < 13; ++y) {
                    const Index off = (z * 11 + x) * 13 + y;
                    if (!rec.uncovered[static_cast<std::size_t>(off)])
                        ASSERT_NEAR(rec.image(y, x, z), img(y, x, z), 1e-12 * 50.0);
                }
        if (stride == 1) EXPECT_EQ(rec.uncovered_count, 0);
    }
}

TEST(Patches, OverlapAveragesContributions)
{
    // Two 2x2 patches on a 2x3 image overlapping in column 1.
    const auto g = PatchGrid::make(2, 3, 1, 2, 1);
    ASSERT_EQ(g.count(), 2);
    Tensor3 patches(4, 2, 1);
    for (Index i = 0; i < 4; ++i) {
        patches(i, 0, 0) = 2.0;
        patches(i, 1, 0) = 6.0;
    }
    const auto rec = reconstruct_from_patches(patches, g);
    for (Index y = 0; y < 2; ++y) {
        EXPECT_EQ(rec.image(y, 0, 0), 2.0);
        EXPECT_EQ(rec.image(y, 1, 0), 4.0);
        EXPECT_EQ(rec.image(y, 2, 0), 6.0);
    }
}

TEST(Patches, UncoveredBorderIsFlaggedAndFilled)
{
    const Tensor3 img = ramp_image(7, 7, 1);
    const auto g = PatchGrid::make(7, 7, 1, 3, 3);
    const auto rec = reconstruct_from_patches(extract_patches(img, g), g);
    // Covered extent is 6x6; row 6 and column 6 are not.
    EXPECT_EQ(rec.uncovered_count, 13);
    EXPECT_EQ(rec.uncovered[static_cast<std::size_t>(6 * 7 + 6)], 1);
    EXPECT_EQ(rec.image(6, 6, 0), img(5, 5, 0));
    EXPECT_EQ(rec.image(6, 2, 0), img(5, 2, 0));
}

TEST(Patches, RejectsCountMismatch)
{
    const auto g = PatchGrid::make(6, 6, 1, 5, 1);
    EXPECT_THROW(reconstruct_from_patches(Tensor3(25, 3, 1), g), ShapeError);
}

TEST(Patches, MeanRemovalRoundTrip)
{
    std::mt19937_64 rng(2);
    const Tensor3 orig = random_tensor(25, 7, 5, rng, 10.0);
    Tensor3 p = orig;
    const auto means = remove_patch_means(p);
    ASSERT_EQ(means.size(), 7u);
    for (Index j = 0; j < 7; ++j) {
        double s = 0.0;
        for (Index l = 0; l < 5; ++l) s += p.slice(l).col(j).sum();
        EXPECT_NEAR(s, 0.0, 1e-10);
    }
    restore_patch_means(p, means);
    EXPECT_LE(relative_error(p, orig), 1e-14);
}

// --- noise ------------------------------------------------------------------

TEST(Noise, ZeroSigmaIsIdentity)
{
    std::mt19937_64 rng(3);
    const Tensor3 img = random_tensor(8, 8, 2, rng);
    EXPECT_EQ(add_gaussian_noise(img, 0.0, 4), img);
}

TEST(Noise, DeterministicPerSeed)
{
    const Tensor3 img(8, 8, 2);
    EXPECT_EQ(add_gaussian_noise(img, 5.0, 9), add_gaussian_noise(img, 5.0, 9));
    EXPECT_NE(add_gaussian_noise(img, 5.0, 9), add_gaussian_noise(img, 5.0, 10));
}

TEST(Noise, EmpiricalStdAndPsnr)
{
    const Tensor3 clean = synthetic_msi(512, 512, 1, 5);
    for (double sigma : {5.0, 10.0, 20.0, 30.0, 50.0}) {
        const Tensor3 noisy = add_gaussian_noise(clean, sigma, 6);
        const double sd = std::sqrt((noisy - clean).squared_norm() / static_cast<double>(clean.size()));
        EXPECT_NEAR(sd / sigma, 1.0, 0.02);
        EXPECT_NEAR(metrics::psnr(clean, noisy), 20.0 * std::log10(255.0 / sigma), 0.3);
    }
}

TEST(Noise, NegativeSigmaRejected)
{
    EXPECT_THROW(add_gaussian_noise(Tensor3(2, 2, 1), -1.0, 0), ConfigError);
}

// --- train ------------------------------------------------------------------

TEST(Train, ZeroDataGivesZeroObjective)
{
    TrainConfig cfg;
    cfg.atoms = 4;
    cfg.outer_iters = 3;
    const auto res = train(Tensor3(6, 10, 3), cfg);
    EXPECT_EQ(res.coeffs.frobenius_norm(), 0.0);
    ASSERT_EQ(res.trace.size(), 4u);
    EXPECT_EQ(res.trace[1].objective, 0.0);
}

TEST(Train, RandomDictionaryHasUnitAtoms)
{
    const Tensor3 d = random_dictionary(8, 5, 4, 11);
    for (double nj : atom_norms(d)) EXPECT_NEAR(nj, 1.0, 1e-14);
    EXPECT_EQ(d, random_dictionary(8, 5, 4, 11));
}

TEST(Train, SyntheticRecovery)
{
    std::mt19937_64 rng(12);
    const Tensor3 d_star = random_dictionary(8, 8, 4, 13);
    const Tensor3 b_star = testing::random_sparse(8, 200, 4, 0.2, rng);
    const Tensor3 x = tprod(d_star, b_star);

    TrainConfig cfg;
    cfg.atoms = 8;
    cfg.beta = 0.01;
    cfg.outer_iters = 30;
    cfg.inner.max_iters = 200;
    cfg.seed = 14;
    const auto res = train(x, cfg);
    EXPECT_LE((x - tprod(res.dict, res.coeffs)).frobenius_norm() / x.frobenius_norm(), 0.05);
}

TEST(Train, TraceIsMonotoneAndDictionaryFeasible)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const Tensor3 x = tprod(random_dictionary(8, 8, 4, seed), testing::random_sparse(8, 200, 4, 0.3, rng));
        TrainConfig cfg;
        cfg.atoms = 8;
        cfg.beta = 0.1;
        cfg.outer_iters = 10;
        cfg.inner.max_iters = 50;
        cfg.seed = seed;
        const auto res = train(x, cfg);
        for (std::size_t t = 1; t < res.trace.size(); ++t)
            ASSERT_LE(res.trace[t].objective, res.trace[t - 1].objective + 1e-9) << "seed " << seed << " iter " << t;
        for (double nj : atom_norms(res.dict)) EXPECT_LE(nj * nj, 1.0 + 1e-8);
    }
}

TEST(Train, ConfigValidation)
{
    TrainConfig cfg;
    cfg.atoms = 0;
    EXPECT_THROW(train(Tensor3(2, 2, 2), cfg), ConfigError);
    cfg.atoms = 2;
    cfg.outer_iters = 0;
    EXPECT_THROW(train(Tensor3(2, 2, 2), cfg), ConfigError);
    cfg.outer_iters = 1;
    cfg.beta = -1.0;
    EXPECT_THROW(train(Tensor3(2, 2, 2), cfg), ConfigError);
}

// --- denoise ----------------------------------------------------------------

TEST(Denoise, NoiselessSelfCodingIsNearLossless)
{
    const Tensor3 clean = synthetic_msi(16, 16, 5, 21);
    TrainConfig cfg;
    cfg.atoms = 30;
    cfg.beta = 1e-3;
    cfg.outer_iters = 5;
    cfg.inner.max_iters = 200;
    const auto grid = PatchGrid::make(16, 16, 5, 5, 1);
    const auto res = denoise(clean, cfg, grid, clean);
    ASSERT_TRUE(res.quality.has_value());
    EXPECT_GE(res.quality->psnr, 50.0);
    EXPECT_EQ(res.uncovered_pixels, 0);
}

TEST(Denoise, ReferenceOperatingPoints)
{
    EXPECT_EQ(reference_beta(5.0), 10.0);
    EXPECT_EQ(reference_beta(10.0), 28.0);
    EXPECT_EQ(reference_beta(20.0), 200.0);
    EXPECT_EQ(reference_beta(30.0), 220.0);
    EXPECT_EQ(reference_beta(50.0), 290.0);
    EXPECT_FALSE(reference_beta(15.0).has_value());
}

TEST(Denoise, ScaledBeta)
{
    EXPECT_DOUBLE_EQ(scaled_beta(200.0, kReferencePatchCount), 200.0);
    EXPECT_NEAR(scaled_beta(200.0, kReferencePatchCount / 4), 100.0, 1e-12);
    EXPECT_THROW(scaled_beta(200.0, 0), ConfigError);
}

TEST(SyntheticMsi, RangeAndDeterminism)
{
    const Tensor3 a = synthetic_msi(32, 24, 5, 7);
    EXPECT_EQ(a, synthetic_msi(32, 24, 5, 7));
    for (double v : a.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 255.0);
    }
}

}  // namespace
}  // namespace sc2d
