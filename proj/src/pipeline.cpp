#include "sc2d/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace sc2d {

// ---------------------------------------------------------------------------
// Alternating minimization

void TrainConfig::validate() const
{
    if (atoms < 1) throw ConfigError("atom count must be at least 1");
    if (outer_iters < 1) throw ConfigError("outer iteration count must be at least 1");
    SolverConfig s = inner;
    s.beta = beta;
    s.validate();
}

Tensor3 random_dictionary(Index m, Index r, Index k, std::uint64_t seed)
{
    if (m < 1 || r < 1 || k < 1) throw ShapeError("random_dictionary: extents must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Tensor3 d(m, r, k);
    for (double& v : d.data()) v = normal(rng);
    const auto norms = atom_norms(d);
    for (Index j = 0; j < r; ++j)
        for (Index l = 0; l < k; ++l) d.slice(l).col(j) /= norms[static_cast<std::size_t>(j)];
    return d;
}

namespace {

TrainTraceRow trace_row(int iter, const Tensor3& x, const Tensor3& d, const Tensor3& b, double beta)
{
    TrainTraceRow row;
    row.iter = iter;
    row.data_term = objective(x, d, b, 0.0);
    row.l1_term = beta * b.l1_norm();
    row.objective = row.data_term + row.l1_term;
    row.sparsity = b.size() == 0 ? 1.0
                                 : static_cast<double>(b.count_zeros()) / static_cast<double>(b.size());
    return row;
}

}  // namespace

TrainResult train(const Tensor3& x, const TrainConfig& cfg)
{
    cfg.validate();
    if (x.depth() < 1 || x.rows() < 1) throw ShapeError("train: data must have positive extents");

    SolverConfig inner = cfg.inner;
    inner.beta = cfg.beta;

    TrainResult out;
    out.dict = random_dictionary(x.rows(), cfg.atoms, x.depth(), cfg.seed);
    out.coeffs = Tensor3(cfg.atoms, x.cols(), x.depth());
    out.lambda = Vector::Ones(cfg.atoms);
    out.trace.push_back(trace_row(0, x, out.dict, out.coeffs, cfg.beta));

    for (int it = 1; it <= cfg.outer_iters; ++it) {
        auto coded = ista_t(x, out.dict, inner, out.coeffs);
        out.coeffs = std::move(coded.coeffs);

        auto upd = dict_update(x, out.coeffs, out.dict, out.lambda, cfg.newton);
        out.dict = std::move(upd.dict);
        if (!upd.skipped) out.lambda = upd.dual.lambda;
        if (upd.kept_incumbent) ++out.kept_incumbent;
        out.dead_atoms = upd.dead_atoms;

        out.trace.push_back(trace_row(it, x, out.dict, out.coeffs, cfg.beta));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Patches

PatchGrid PatchGrid::make(Index height, Index width, Index bands, Index side, Index stride,
                          Index depth, Index band_stride)
{
    PatchGrid g;
    g.height = height;
    g.width = width;
    g.bands = bands;
    g.side = side;
    g.stride = stride;
    g.depth = depth == 0 ? bands : depth;
    g.band_stride = band_stride;
    if (side < 1 || stride < 1 || band_stride < 1 || g.depth < 1)
        throw ShapeError("patch side, depth and strides must be positive");
    if (side > height || side > width || g.depth > bands)
        throw ShapeError("patch " + std::to_string(side) + "x" + std::to_string(side) + "x" +
                         std::to_string(g.depth) + " is larger than image " + std::to_string(height) +
                         "x" + std::to_string(width) + "x" + std::to_string(bands));
    return g;
}

Tensor3 extract_patches(const Tensor3& image, const PatchGrid& grid)
{
    if (image.rows() != grid.height || image.cols() != grid.width || image.depth() != grid.bands)
        throw ShapeError("extract_patches: image extents do not match the grid");
    const Index p = grid.side;
    const Index nx = grid.positions_x(), ny = grid.positions_y(), nz = grid.positions_z();
    Tensor3 out(grid.patch_rows(), grid.count(), grid.depth);

#pragma omp parallel for collapse(2) schedule(static)
    for (Index pz = 0; pz < nz; ++pz)
        for (Index py = 0; py < ny; ++py)
            for (Index px = 0; px < nx; ++px) {
                const Index idx = (pz * ny + py) * nx + px;
                const Index y0 = py * grid.stride, x0 = px * grid.stride, z0 = pz * grid.band_stride;
                for (Index dz = 0; dz < grid.depth; ++dz)
                    for (Index dx = 0; dx < p; ++dx)
                        for (Index dy = 0; dy < p; ++dy)
                            out(dy + p * dx, idx, dz) = image(y0 + dy, x0 + dx, z0 + dz);
            }
    return out;
}

namespace {

// Grid positions along one axis whose window [pos*stride, pos*stride+len)
// covers coordinate c.
std::pair<Index, Index> covering(Index c, Index len, Index stride, Index positions)
{
    const Index hi = std::min(c / stride, positions - 1);
    const Index lo_num = c - len + 1;
    const Index lo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
    return {lo, hi};
}

}  // namespace

Reconstruction reconstruct_from_patches(const Tensor3& patches, const PatchGrid& grid)
{
    if (patches.cols() != grid.count() || patches.rows() != grid.patch_rows() ||
        patches.depth() != grid.depth)
        throw ShapeError("reconstruct_from_patches: patch tensor " + std::to_string(patches.rows()) +
                         "x" + std::to_string(patches.cols()) + "x" + std::to_string(patches.depth()) +
                         " does not match grid of " + std::to_string(grid.count()) + " patches");
    const Index p = grid.side;
    const Index nx = grid.positions_x(), ny = grid.positions_y(), nz = grid.positions_z();
    Reconstruction rec;
    rec.image = Tensor3(grid.height, grid.width, grid.bands);
    rec.uncovered.assign(static_cast<std::size_t>(rec.image.size()), 0);

    // Gather per pixel in a fixed order over covering patches.
#pragma omp parallel for collapse(2) schedule(static)
    for (Index z = 0; z < grid.bands; ++z)
        for (Index x = 0; x < grid.width; ++x) {
            const auto [z_lo, z_hi] = covering(z, grid.depth, grid.band_stride, nz);
            const auto [x_lo, x_hi] = covering(x, p, grid.stride, nx);
            for (Index y = 0; y < grid.height; ++y) {
                const auto [y_lo, y_hi] = covering(y, p, grid.stride, ny);
                double sum = 0.0;
                Index hits = 0;
                for (Index pz = z_lo; pz <= z_hi; ++pz)
                    for (Index py = y_lo; py <= y_hi; ++py)
                        for (Index px = x_lo; px <= x_hi; ++px) {
                            const Index idx = (pz * ny + py) * nx + px;
                            const Index dy = y - py * grid.stride;
                            const Index dx = x - px * grid.stride;
                            const Index dz = z - pz * grid.band_stride;
                            sum += patches(dy + p * dx, idx, dz);
                            ++hits;
                        }
                const Index off = (z * grid.width + x) * grid.height + y;
                if (hits > 0) {
                    rec.image.data()[off] = sum / static_cast<double>(hits);
                } else {
                    rec.uncovered[static_cast<std::size_t>(off)] = 1;
                }
            }
        }

    const Index cov_y = (ny - 1) * grid.stride + p;
    const Index cov_x = (nx - 1) * grid.stride + p;
    const Index cov_z = (nz - 1) * grid.band_stride + grid.depth;
    for (Index z = 0; z < grid.bands; ++z)
        for (Index x = 0; x < grid.width; ++x)
            for (Index y = 0; y < grid.height; ++y) {
                const Index off = (z * grid.width + x) * grid.height + y;
                if (!rec.uncovered[static_cast<std::size_t>(off)]) continue;
                ++rec.uncovered_count;
                rec.image(y, x, z) = rec.image(std::min(y, cov_y - 1), std::min(x, cov_x - 1),
                                               std::min(z, cov_z - 1));
            }
    return rec;
}

std::vector<double> remove_patch_means(Tensor3& patches)
{
    const Index per = patches.rows() * patches.depth();
    std::vector<double> means(static_cast<std::size_t>(patches.cols()), 0.0);
    if (per == 0) return means;
    for (Index j = 0; j < patches.cols(); ++j) {
        double s = 0.0;
        for (Index l = 0; l < patches.depth(); ++l) s += patches.slice(l).col(j).sum();
        const double mean = s / static_cast<double>(per);
        means[static_cast<std::size_t>(j)] = mean;
        for (Index l = 0; l < patches.depth(); ++l) patches.slice(l).col(j).array() -= mean;
    }
    return means;
}

void restore_patch_means(Tensor3& patches, const std::vector<double>& means)
{
    if (static_cast<Index>(means.size()) != patches.cols())
        throw ShapeError("restore_patch_means: mean count does not match patch count");
    for (Index j = 0; j < patches.cols(); ++j)
        for (Index l = 0; l < patches.depth(); ++l)
            patches.slice(l).col(j).array() += means[static_cast<std::size_t>(j)];
}

// ---------------------------------------------------------------------------
// Noise and denoising

Tensor3 add_gaussian_noise(const Tensor3& image, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be nonnegative");
    Tensor3 out = image;
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& v : out.data()) v += normal(rng);
    return out;
}

std::optional<double> reference_beta(double sigma)
{
    static constexpr std::pair<double, double> kPairs[] = {
        {5.0, 10.0}, {10.0, 28.0}, {20.0, 200.0}, {30.0, 220.0}, {50.0, 290.0}};
    for (const auto& [s, b] : kPairs)
        if (s == sigma) return b;
    return std::nullopt;
}

double scaled_beta(double beta, Index patch_count)
{
    if (patch_count < 1) throw ConfigError("scaled_beta: patch count must be positive");
    return beta * std::sqrt(static_cast<double>(patch_count) / static_cast<double>(kReferencePatchCount));
}

DenoiseResult denoise(const Tensor3& noisy, const TrainConfig& cfg, const PatchGrid& grid,
                      const std::optional<Tensor3>& clean)
{
    cfg.validate();
    if (clean && !clean->same_shape(noisy)) throw ShapeError("denoise: clean reference extents differ");

    Tensor3 patches = extract_patches(noisy, grid);
    const auto means = remove_patch_means(patches);

    TrainResult trained = train(patches, cfg);

    SolverConfig inner = cfg.inner;
    inner.beta = cfg.beta;
    auto coded = ista_t(patches, trained.dict, inner, trained.coeffs);

    Tensor3 approx = tprod(trained.dict, coded.coeffs);
    restore_patch_means(approx, means);
    auto rec = reconstruct_from_patches(approx, grid);

    DenoiseResult out;
    out.estimate = std::move(rec.image);
    out.uncovered_pixels = rec.uncovered_count;
    out.dict = std::move(trained.dict);
    out.trace = std::move(trained.trace);
    if (clean) {
        out.quality = metrics::evaluate(*clean, out.estimate);
        out.noisy_quality = metrics::evaluate(*clean, noisy);
    }
    return out;
}

Tensor3 synthetic_msi(Index height, Index width, Index bands, std::uint64_t seed)
{
    if (height < 1 || width < 1 || bands < 1) throw ShapeError("synthetic_msi: extents must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> level(30.0, 225.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Tensor3 img(height, width, bands);
    for (Index l = 0; l < bands; ++l) img.slice(l).setConstant(level(rng));

    const int shapes = 10;
    for (int s = 0; s < shapes; ++s) {
        std::vector<double> tone(static_cast<std::size_t>(bands));
        for (double& t : tone) t = level(rng);
        const double cy = unit(rng) * static_cast<double>(height);
        const double cx = unit(rng) * static_cast<double>(width);
        const double ry = (0.1 + 0.25 * unit(rng)) * static_cast<double>(height);
        const double rx = (0.1 + 0.25 * unit(rng)) * static_cast<double>(width);
        const bool disc = s % 3 == 2;
        for (Index x = 0; x < width; ++x)
            for (Index y = 0; y < height; ++y) {
                const double dy = (static_cast<double>(y) - cy) / ry;
                const double dx = (static_cast<double>(x) - cx) / rx;
                const bool inside = disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
                if (!inside) continue;
                for (Index l = 0; l < bands; ++l) img(y, x, l) = tone[static_cast<std::size_t>(l)];
            }
    }
    return img;
}

}  // namespace sc2d
