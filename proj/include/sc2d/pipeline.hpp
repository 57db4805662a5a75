#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sc2d/dict_learner.hpp"
#include "sc2d/metrics.hpp"
#include "sc2d/sparse_solver.hpp"
#include "sc2d/tensor.hpp"

namespace sc2d {

// ---------------------------------------------------------------------------
// Alternating minimization

struct TrainConfig {
    Index atoms = 30;
    double beta = 0.1;
    int outer_iters = 30;
    /// Coefficient-step settings; its beta is overridden by TrainConfig::beta.
    SolverConfig inner{};
    NewtonOptions newton{};
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainTraceRow {
    int iter = 0;
    double objective = 0.0;
    double data_term = 0.0;
    double l1_term = 0.0;
    double sparsity = 0.0;
};

struct TrainResult {
    Tensor3 dict;
    Tensor3 coeffs;
    /// Row 0 is the starting point (random D, B = 0); row t follows outer
    /// iteration t.
    std::vector<TrainTraceRow> trace;
    Vector lambda;
    Index dead_atoms = 0;
    int kept_incumbent = 0;
};

/// i.i.d. standard normal atoms scaled to unit Frobenius norm.
Tensor3 random_dictionary(Index m, Index r, Index k, std::uint64_t seed);

/// Alternates a warm-started coefficient solve with a dictionary update.
/// Each half-step is a monotone block update, so trace objectives never
/// increase.
TrainResult train(const Tensor3& x, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Patches

/// Regular grid of patch positions over a height x width x bands image.
/// A patch covers side x side pixels and `depth` consecutive bands. Each
/// patch becomes one lateral slice of a (side*side) x 1 x depth tensor:
/// pixel (dy, dx) maps to row dy + side*dx, band offset dz to slice dz.
struct PatchGrid {
    Index height = 0;
    Index width = 0;
    Index bands = 0;
    Index side = 5;
    Index stride = 1;
    Index depth = 0;  ///< 0 means all bands
    Index band_stride = 1;

    /// Validates and resolves defaults. Throws ShapeError if the patch does
    /// not fit.
    static PatchGrid make(Index height, Index width, Index bands, Index side, Index stride,
                          Index depth = 0, Index band_stride = 1);

    Index positions_y() const noexcept { return (height - side) / stride + 1; }
    Index positions_x() const noexcept { return (width - side) / stride + 1; }
    Index positions_z() const noexcept { return (bands - depth) / band_stride + 1; }
    Index count() const noexcept { return positions_y() * positions_x() * positions_z(); }
    Index patch_rows() const noexcept { return side * side; }
};

/// Patches in row-major position order (band position outermost, x fastest).
Tensor3 extract_patches(const Tensor3& image, const PatchGrid& grid);

struct Reconstruction {
    Tensor3 image;
    /// 1 where no patch covered the pixel; such pixels copy the nearest
    /// covered value.
    std::vector<unsigned char> uncovered;
    Index uncovered_count = 0;
};

/// Per-pixel average of all overlapping patch contributions.
Reconstruction reconstruct_from_patches(const Tensor3& patches, const PatchGrid& grid);

/// Subtracts the mean of every lateral slice in place and returns the means.
std::vector<double> remove_patch_means(Tensor3& patches);
void restore_patch_means(Tensor3& patches, const std::vector<double>& means);

// ---------------------------------------------------------------------------
// Noise and denoising

/// Adds i.i.d. N(0, sigma^2) noise. No clipping.
Tensor3 add_gaussian_noise(const Tensor3& image, double sigma, std::uint64_t seed);

/// Reference (sigma, beta) operating points for 5x5x5 patches.
std::optional<double> reference_beta(double sigma);

/// Patch count the reference operating points were tuned at: every 5x5
/// window of a 512x512 image at stride 1.
inline constexpr Index kReferencePatchCount = 508 * 508;

/// Rescales a reference beta to a run with `patch_count` patches by
/// sqrt(patch_count / kReferencePatchCount).
double scaled_beta(double beta, Index patch_count);

struct DenoiseResult {
    Tensor3 estimate;
    Tensor3 dict;
    std::vector<TrainTraceRow> trace;
    Index uncovered_pixels = 0;
    /// Present when a clean reference was supplied.
    std::optional<metrics::MetricReport> quality;
    std::optional<metrics::MetricReport> noisy_quality;
};

/// Learns a dictionary on the noisy image's own mean-removed patches,
/// re-encodes them with the final dictionary, and rebuilds the image by
/// overlap averaging.
DenoiseResult denoise(const Tensor3& noisy, const TrainConfig& cfg, const PatchGrid& grid,
                      const std::optional<Tensor3>& clean = std::nullopt);

/// Piecewise-constant multi-band test image in [0, 255]: axis-aligned
/// rectangles and discs with band-dependent intensities.
Tensor3 synthetic_msi(Index height, Index width, Index bands, std::uint64_t seed);

}  // namespace sc2d
