#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "checks.hpp"
#include "sc2d/io.hpp"
#include "sc2d/metrics.hpp"
#include "sc2d/pipeline.hpp"
#include "sc2d/sparse_solver.hpp"

#ifndef SC2D_VERSION
#define SC2D_VERSION "0.0.0"
#endif

namespace sc2d::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError(dir.string() + ": cannot create output directory");
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(path.string() + ": cannot open for writing");
    f << text;
    if (!f) throw IoError(path.string() + ": write failed");
}

void write_train_trace(const fs::path& path, const std::vector<TrainTraceRow>& rows)
{
    std::ostringstream s;
    s << "iter,objective,data_term,l1_term,sparsity\n";
    for (const auto& r : rows)
        s << r.iter << ',' << num(r.objective) << ',' << num(r.data_term) << ',' << num(r.l1_term) << ','
          << num(r.sparsity) << '\n';
    write_text(path, s.str());
}

Json manifest(const std::string& command)
{
    Json m;
    m["command"] = command;
    m["version"] = SC2D_VERSION;
    return m;
}

void finish_manifest(const fs::path& dir, Json m, Clock::time_point t0)
{
    m["threads"] = omp_get_max_threads();
    m["seconds"] = seconds_since(t0);
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void apply_threads(int threads)
{
    if (threads == 0) {
        if (const char* env = std::getenv("SC2D_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 1)
                throw ConfigError(std::string("SC2D_THREADS must be a positive integer, got '") + env + "'");
            threads = static_cast<int>(v);
        }
    }
    if (threads < 0) throw ConfigError("--threads must be positive");
    if (threads > 0) omp_set_num_threads(threads);
}

SolverMode mode_from(const std::string& s) { return parse_solver_mode(s); }

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string input, out;
    Index atoms = 30;
    double beta = 0.1;
    int outer = 30;
    int inner_iters = 100;
    std::string mode = "fista";
    double eta = 1.0;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out)
{
    const auto t0 = Clock::now();
    TrainConfig cfg;
    cfg.atoms = a.atoms;
    cfg.beta = a.beta;
    cfg.outer_iters = a.outer;
    cfg.inner.max_iters = a.inner_iters;
    cfg.inner.mode = mode_from(a.mode);
    cfg.inner.eta = a.eta;
    cfg.inner.rel_tol = a.tol;
    cfg.seed = a.seed;
    cfg.validate();

    const Tensor3 x = io::read_t3b(a.input);
    const fs::path dir = a.out;
    ensure_dir(dir);
    const auto res = train(x, cfg);

    io::write_t3b(dir / "dict.t3b", res.dict);
    io::write_t3b(dir / "coeffs.t3b", res.coeffs);
    write_train_trace(dir / "trace.csv", res.trace);

    Json m = manifest("train");
    m["config"] = {{"atoms", a.atoms},   {"beta", a.beta},   {"outer", a.outer},
                   {"inner_iters", a.inner_iters}, {"mode", a.mode}, {"eta", a.eta},
                   {"tol", a.tol}};
    m["seed"] = a.seed;
    m["inputs"] = {{"input", a.input}};
    m["outputs"] = {{"dict", (dir / "dict.t3b").string()},
                    {"coeffs", (dir / "coeffs.t3b").string()},
                    {"trace", (dir / "trace.csv").string()}};
    m["shape"] = {x.rows(), x.cols(), x.depth()};
    m["dead_atoms"] = res.dead_atoms;
    finish_manifest(dir, std::move(m), t0);

    out << "train: " << x.rows() << "x" << x.cols() << "x" << x.depth() << ", " << a.atoms
        << " atoms, objective " << num(res.trace.front().objective) << " -> " << num(res.trace.back().objective)
        << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
    std::string input, dict, out;
    double beta = 0.1;
    int iters = 100;
    std::string mode = "fista";
    double eta = 1.0;
    double tol = 1e-6;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out)
{
    const auto t0 = Clock::now();
    SolverConfig cfg;
    cfg.beta = a.beta;
    cfg.max_iters = a.iters;
    cfg.mode = mode_from(a.mode);
    cfg.eta = a.eta;
    cfg.rel_tol = a.tol;
    cfg.validate();

    const Tensor3 x = io::read_t3b(a.input);
    const Tensor3 d = io::read_t3b(a.dict);
    if (d.rows() != x.rows() || d.depth() != x.depth())
        throw ShapeError("dictionary " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + "x" +
                         std::to_string(d.depth()) + " does not conform with data " + std::to_string(x.rows()) +
                         "x" + std::to_string(x.cols()) + "x" + std::to_string(x.depth()));
    const fs::path dir = a.out;
    ensure_dir(dir);
    const auto res = ista_t(x, d, cfg);

    io::write_t3b(dir / "coeffs.t3b", res.coeffs);
    std::ostringstream s;
    s << "iter,objective\n";
    for (std::size_t p = 0; p < res.report.objective_trace.size(); ++p)
        s << p << ',' << num(res.report.objective_trace[p]) << '\n';
    write_text(dir / "trace.csv", s.str());

    Json m = manifest("encode");
    m["config"] = {{"beta", a.beta}, {"iters", a.iters}, {"mode", a.mode}, {"eta", a.eta}, {"tol", a.tol}};
    m["inputs"] = {{"input", a.input}, {"dict", a.dict}};
    m["outputs"] = {{"coeffs", (dir / "coeffs.t3b").string()}, {"trace", (dir / "trace.csv").string()}};
    m["iterations_run"] = res.report.iterations_run;
    m["sparsity"] = res.report.final_sparsity;
    m["lipschitz"] = res.report.lipschitz_used;
    finish_manifest(dir, std::move(m), t0);

    out << "encode: " << res.report.iterations_run << " iterations, objective "
        << num(res.report.objective_trace.back()) << ", sparsity " << num(res.report.final_sparsity) << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct DenoiseArgs {
    std::string noisy, clean, out;
    std::optional<double> sigma;
    std::optional<double> beta;
    bool scale_beta = false;
    Index patch = 5;
    Index stride = 1;
    Index depth = 0;
    Index band_stride = 1;
    Index atoms = 30;
    int outer = 30;
    int inner_iters = 100;
    std::string mode = "fista";
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::uint64_t noise_seed = 0;
    bool clip = false;
};

int cmd_denoise(const DenoiseArgs& a, std::ostream& out, std::ostream& err)
{
    const auto t0 = Clock::now();
    if (a.sigma && !(*a.sigma >= 0.0)) throw ConfigError("--sigma must be nonnegative");

    std::optional<Tensor3> clean;
    if (!a.clean.empty()) clean = io::load_band_stack(a.clean);

    Tensor3 noisy;
    bool synthesized = false;
    if (!a.noisy.empty()) {
        noisy = io::load_band_stack(a.noisy);
    } else if (clean && a.sigma) {
        noisy = add_gaussian_noise(*clean, *a.sigma, a.noise_seed);
        synthesized = true;
        err << "denoise: no --noisy given; adding N(0, " << *a.sigma << "^2) noise to --clean with seed "
            << a.noise_seed << "\n";
    } else {
        throw ConfigError("denoise needs --noisy, or --clean together with --sigma");
    }

    double beta = 0.0;
    if (a.beta) {
        beta = *a.beta;
    } else if (a.sigma && reference_beta(*a.sigma)) {
        beta = *reference_beta(*a.sigma);
        err << "denoise: using reference beta " << beta << " for sigma " << *a.sigma << "\n";
    } else {
        throw ConfigError("--beta is required unless --sigma is one of 5, 10, 20, 30, 50");
    }

    const auto grid = PatchGrid::make(noisy.rows(), noisy.cols(), noisy.depth(), a.patch, a.stride, a.depth,
                                      a.band_stride);
    if (a.scale_beta) {
        const double scaled = scaled_beta(beta, grid.count());
        err << "denoise: beta " << beta << " scaled to " << scaled << " for " << grid.count() << " patches\n";
        beta = scaled;
    }

    TrainConfig cfg;
    cfg.atoms = a.atoms;
    cfg.beta = beta;
    cfg.outer_iters = a.outer;
    cfg.inner.max_iters = a.inner_iters;
    cfg.inner.mode = mode_from(a.mode);
    cfg.inner.rel_tol = a.tol;
    cfg.seed = a.seed;
    cfg.validate();

    const fs::path dir = a.out;
    ensure_dir(dir);
    const auto res = denoise(noisy, cfg, grid, clean);
    const double secs = seconds_since(t0);

    io::write_t3b(dir / "denoised.t3b", res.estimate);
    io::write_t3b(dir / "dict.t3b", res.dict);
    write_train_trace(dir / "trace.csv", res.trace);
    const double psnr = res.quality ? res.quality->psnr : std::nan("");
    const double ssim = res.quality ? res.quality->ssim : std::nan("");
    write_text(dir / "metrics.csv", "sigma,beta,psnr,ssim,seconds\n" + num(a.sigma.value_or(std::nan(""))) + "," +
                                        num(beta) + "," + num(psnr) + "," + num(ssim) + "," + num(secs) + "\n");
    if (a.clip) {
        Tensor3 shown = res.estimate;
        for (double& v : shown.data()) v = std::clamp(v, 0.0, 255.0);
        io::save_band_stack_pgm(dir / "denoised_pgm", shown);
    }

    Json m = manifest("denoise");
    m["config"] = {{"sigma", a.sigma ? Json(*a.sigma) : Json(nullptr)},
                   {"beta", beta},
                   {"scale_beta", a.scale_beta},
                   {"patch", a.patch},
                   {"stride", a.stride},
                   {"depth", grid.depth},
                   {"band_stride", a.band_stride},
                   {"atoms", a.atoms},
                   {"outer", a.outer},
                   {"inner_iters", a.inner_iters},
                   {"mode", a.mode},
                   {"tol", a.tol},
                   {"clip", a.clip}};
    m["seed"] = a.seed;
    m["noise_seed"] = a.noise_seed;
    m["inputs"] = {{"noisy", synthesized ? Json(nullptr) : Json(a.noisy)},
                   {"clean", a.clean.empty() ? Json(nullptr) : Json(a.clean)}};
    m["outputs"] = {{"denoised", (dir / "denoised.t3b").string()},
                    {"dict", (dir / "dict.t3b").string()},
                    {"trace", (dir / "trace.csv").string()},
                    {"metrics", (dir / "metrics.csv").string()}};
    m["uncovered_pixels"] = res.uncovered_pixels;
    if (res.quality) {
        m["quality"] = {{"psnr", res.quality->psnr},
                        {"ssim", res.quality->ssim},
                        {"noisy_psnr", res.noisy_quality->psnr},
                        {"noisy_ssim", res.noisy_quality->ssim}};
    }
    finish_manifest(dir, std::move(m), t0);

    out << "denoise: " << grid.count() << " patches, beta " << num(beta);
    if (res.quality)
        out << ", psnr " << res.noisy_quality->psnr << " -> " << res.quality->psnr << " dB, ssim "
            << res.noisy_quality->ssim << " -> " << res.quality->ssim;
    out << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
    std::string image, out;
    Index patch = 5;
    Index stride = 1;
    Index depth = 0;
    Index band_stride = 1;
    bool remove_mean = false;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out)
{
    const auto t0 = Clock::now();
    const Tensor3 img = io::load_band_stack(a.image);
    const auto grid = PatchGrid::make(img.rows(), img.cols(), img.depth(), a.patch, a.stride, a.depth,
                                      a.band_stride);
    Tensor3 patches = extract_patches(img, grid);
    const fs::path dir = a.out;
    ensure_dir(dir);
    if (a.remove_mean) {
        const auto means = remove_patch_means(patches);
        std::ostringstream s;
        s << "patch,mean\n";
        for (std::size_t j = 0; j < means.size(); ++j) s << j << ',' << num(means[j]) << '\n';
        write_text(dir / "means.csv", s.str());
    }
    io::write_t3b(dir / "patches.t3b", patches);

    Json m = manifest("extract-patches");
    m["config"] = {{"patch", a.patch},
                   {"stride", a.stride},
                   {"depth", grid.depth},
                   {"band_stride", a.band_stride},
                   {"remove_mean", a.remove_mean}};
    m["inputs"] = {{"image", a.image}};
    m["outputs"] = {{"patches", (dir / "patches.t3b").string()}};
    m["shape"] = {patches.rows(), patches.cols(), patches.depth()};
    finish_manifest(dir, std::move(m), t0);

    out << "extract-patches: " << patches.rows() << "x" << patches.cols() << "x" << patches.depth() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::string ref, test;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out)
{
    const Tensor3 ref = io::load_band_stack(a.ref);
    const Tensor3 test = io::load_band_stack(a.test);
    const auto rep = metrics::evaluate(ref, test);
    out << "band,psnr,ssim\n";
    for (std::size_t b = 0; b < rep.band_psnr.size(); ++b)
        out << b << ',' << num(rep.band_psnr[b]) << ',' << num(rep.band_ssim[b]) << '\n';
    out << "all," << num(rep.psnr) << ',' << num(rep.ssim) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
    int trials = 50;
    std::uint64_t seed = 1;
    bool inject = false;
};

int cmd_check(const CheckArgs& a, std::ostream& out)
{
    if (a.trials < 1) throw ConfigError("--trials must be at least 1");
    CheckOptions opts;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.inject_failure = a.inject;
    const auto results = run_checks(opts);
    bool all = true;
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %7s %12s %10s  %s\n", "check", "trials", "worst", "tol", "result");
    out << line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-18s %7d %12.3e %10.1e  %s\n", r.name.c_str(), r.trials, r.worst,
                      r.tolerance, r.passed ? "PASS" : "FAIL");
        out << line;
        all = all && r.passed;
    }
    return all ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    Index m = 25, r = 30, k = 5;
    std::vector<Index> n{1000, 2000, 4000, 8000};
    int iters = 20;
    int repeats = 3;
    std::uint64_t seed = 1;
    bool dense = false;
    std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    if (a.m < 1 || a.r < 1 || a.k < 1 || a.iters < 1 || a.repeats < 1)
        throw ConfigError("bench extents, --iters and --repeats must be positive");
    for (Index n : a.n)
        if (n < 1) throw ConfigError("--n values must be positive");
    std::ostringstream s;
    s << "m,r,k,n,iters,seconds,us_per_sample\n";
    for (Index n : a.n) {
        const double secs = time_encode(a.m, a.r, a.k, n, a.iters, a.repeats, a.seed);
        s << a.m << ',' << a.r << ',' << a.k << ',' << n << ',' << a.iters << ',' << num(secs) << ','
          << num(1e6 * secs / static_cast<double>(n)) << '\n';
    }
    if (a.dense) {
        const Index n = a.n.back();
        const double tensor = time_encode(a.m, a.r, 1, n, a.iters, a.repeats, a.seed);
        const double dense = time_dense_encode(a.m, a.r, n, a.iters, a.repeats, a.seed);
        s << "\nn,k1_tensor_seconds,dense_seconds,ratio\n"
          << n << ',' << num(tensor) << ',' << num(dense) << ',' << num(tensor / dense) << '\n';
    }
    out << s.str();
    if (!a.out.empty()) write_text(a.out, s.str());
    return kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    Index height = 64, width = 64, bands = 5;
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::uint64_t noise_seed = 0;
    std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out)
{
    const auto t0 = Clock::now();
    if (!(a.sigma >= 0.0)) throw ConfigError("--sigma must be nonnegative");
    const Tensor3 clean = synthetic_msi(a.height, a.width, a.bands, a.seed);
    const fs::path dir = a.out;
    ensure_dir(dir);
    io::write_t3b(dir / "clean.t3b", clean);
    io::save_band_stack_pgm(dir / "clean", clean);
    Json outputs = {{"clean", (dir / "clean.t3b").string()}};
    if (a.sigma > 0.0) {
        const Tensor3 noisy = add_gaussian_noise(clean, a.sigma, a.noise_seed);
        io::write_t3b(dir / "noisy.t3b", noisy);
        outputs["noisy"] = (dir / "noisy.t3b").string();
    }
    Json m = manifest("synth");
    m["config"] = {{"height", a.height}, {"width", a.width}, {"bands", a.bands}, {"sigma", a.sigma}};
    m["seed"] = a.seed;
    m["noise_seed"] = a.noise_seed;
    m["outputs"] = outputs;
    finish_manifest(dir, std::move(m), t0);
    out << "synth: " << a.height << "x" << a.width << "x" << a.bands << " written to " << dir.string() << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"2-D sparse coding with the t-product", "sc2d"};
    app.set_version_flag("--version", SC2D_VERSION);
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: SC2D_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "learn a dictionary from a T3B data tensor");
    train_cmd->add_option("--input", ta.input, "data tensor (T3B)")->required();
    train_cmd->add_option("--out", ta.out, "output directory")->required();
    train_cmd->add_option("--atoms", ta.atoms, "number of atoms")->capture_default_str();
    train_cmd->add_option("--beta", ta.beta, "l1 weight")->capture_default_str();
    train_cmd->add_option("--outer", ta.outer, "outer iterations")->capture_default_str();
    train_cmd->add_option("--inner-iters", ta.inner_iters, "coefficient iterations per outer step")
        ->capture_default_str();
    train_cmd->add_option("--mode", ta.mode, "ista or fista")->capture_default_str();
    train_cmd->add_option("--eta", ta.eta, "step constant multiplier (>= 1)")->capture_default_str();
    train_cmd->add_option("--tol", ta.tol, "relative objective change stopping tolerance")->capture_default_str();
    train_cmd->add_option("--seed", ta.seed, "dictionary initialization seed")->capture_default_str();

    EncodeArgs ea;
    auto* encode_cmd = app.add_subcommand("encode", "sparse coefficients for a fixed dictionary");
    encode_cmd->add_option("--input", ea.input, "data tensor (T3B)")->required();
    encode_cmd->add_option("--dict", ea.dict, "dictionary tensor (T3B)")->required();
    encode_cmd->add_option("--out", ea.out, "output directory")->required();
    encode_cmd->add_option("--beta", ea.beta, "l1 weight")->capture_default_str();
    encode_cmd->add_option("--iters", ea.iters, "maximum iterations")->capture_default_str();
    encode_cmd->add_option("--mode", ea.mode, "ista or fista")->capture_default_str();
    encode_cmd->add_option("--eta", ea.eta, "step constant multiplier (>= 1)")->capture_default_str();
    encode_cmd->add_option("--tol", ea.tol, "relative objective change stopping tolerance")->capture_default_str();

    DenoiseArgs da;
    auto* denoise_cmd = app.add_subcommand("denoise", "learn a dictionary on noisy patches and reconstruct");
    denoise_cmd->add_option("--noisy", da.noisy, "noisy band stack (directory with bands.txt, or T3B)");
    denoise_cmd->add_option("--clean", da.clean, "clean reference band stack for metrics");
    denoise_cmd->add_option("--out", da.out, "output directory")->required();
    denoise_cmd->add_option("--sigma", da.sigma, "noise level; synthesizes noise when --noisy is absent");
    denoise_cmd->add_option("--beta", da.beta, "l1 weight (default: reference value for --sigma)");
    denoise_cmd->add_flag("--scale-beta", da.scale_beta, "rescale beta by sqrt(patches / 508^2)");
    denoise_cmd->add_option("--patch", da.patch, "patch side")->capture_default_str();
    denoise_cmd->add_option("--stride", da.stride, "spatial stride")->capture_default_str();
    denoise_cmd->add_option("--depth", da.depth, "bands per patch (0: all)")->capture_default_str();
    denoise_cmd->add_option("--band-stride", da.band_stride, "band stride")->capture_default_str();
    denoise_cmd->add_option("--atoms", da.atoms, "number of atoms")->capture_default_str();
    denoise_cmd->add_option("--outer", da.outer, "outer iterations")->capture_default_str();
    denoise_cmd->add_option("--inner-iters", da.inner_iters, "coefficient iterations per outer step")
        ->capture_default_str();
    denoise_cmd->add_option("--mode", da.mode, "ista or fista")->capture_default_str();
    denoise_cmd->add_option("--tol", da.tol, "relative objective change stopping tolerance")->capture_default_str();
    denoise_cmd->add_option("--seed", da.seed, "dictionary initialization seed")->capture_default_str();
    denoise_cmd->add_option("--noise-seed", da.noise_seed, "seed for synthesized noise")->capture_default_str();
    denoise_cmd->add_flag("--clip", da.clip, "also export the result clipped to [0,255] as PGM bands");

    ExtractArgs xa;
    auto* extract_cmd = app.add_subcommand("extract-patches", "cut a band stack into a patch tensor");
    extract_cmd->add_option("--image", xa.image, "band stack (directory with bands.txt, or T3B)")->required();
    extract_cmd->add_option("--out", xa.out, "output directory")->required();
    extract_cmd->add_option("--patch", xa.patch, "patch side")->capture_default_str();
    extract_cmd->add_option("--stride", xa.stride, "spatial stride")->capture_default_str();
    extract_cmd->add_option("--depth", xa.depth, "bands per patch (0: all)")->capture_default_str();
    extract_cmd->add_option("--band-stride", xa.band_stride, "band stride")->capture_default_str();
    extract_cmd->add_flag("--remove-mean", xa.remove_mean, "subtract per-patch means (written to means.csv)");

    MetricsArgs ma;
    auto* metrics_cmd = app.add_subcommand("metrics", "PSNR and SSIM between two band stacks");
    metrics_cmd->add_option("--ref", ma.ref, "reference band stack")->required();
    metrics_cmd->add_option("--test", ma.test, "test band stack")->required();

    CheckArgs ca;
    auto* check_cmd = app.add_subcommand("check", "run the randomized oracle suite");
    check_cmd->add_option("--trials", ca.trials, "random instances per check")->capture_default_str();
    check_cmd->add_option("--seed", ca.seed, "base seed")->capture_default_str();
    check_cmd->add_flag("--inject-failure", ca.inject, "perturb the fast t-product so checks must fail");

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "encode wall time versus sample count (CSV)");
    bench_cmd->add_option("--m", ba.m, "atom height")->capture_default_str();
    bench_cmd->add_option("--r", ba.r, "atom count")->capture_default_str();
    bench_cmd->add_option("--k", ba.k, "depth")->capture_default_str();
    bench_cmd->add_option("--n", ba.n, "sample counts")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--iters", ba.iters, "solver iterations per timing")->capture_default_str();
    bench_cmd->add_option("--repeats", ba.repeats, "timings per point (median reported)")->capture_default_str();
    bench_cmd->add_option("--seed", ba.seed, "data seed")->capture_default_str();
    bench_cmd->add_flag("--dense", ba.dense, "add a k=1 tensor versus dense solver comparison");
    bench_cmd->add_option("--out", ba.out, "also write the CSV to this file");

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic piecewise-constant multi-band image");
    synth_cmd->add_option("--out", sa.out, "output directory")->required();
    synth_cmd->add_option("--height", sa.height, "rows")->capture_default_str();
    synth_cmd->add_option("--width", sa.width, "columns")->capture_default_str();
    synth_cmd->add_option("--bands", sa.bands, "bands")->capture_default_str();
    synth_cmd->add_option("--seed", sa.seed, "image seed")->capture_default_str();
    synth_cmd->add_option("--sigma", sa.sigma, "also write a noisy copy at this level")->capture_default_str();
    synth_cmd->add_option("--noise-seed", sa.noise_seed, "noise seed")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadArgs;
    }

    try {
        apply_threads(threads);
        if (*train_cmd) return cmd_train(ta, out);
        if (*encode_cmd) return cmd_encode(ea, out);
        if (*denoise_cmd) return cmd_denoise(da, out, err);
        if (*extract_cmd) return cmd_extract(xa, out);
        if (*metrics_cmd) return cmd_metrics(ma, out);
        if (*check_cmd) return cmd_check(ca, out);
        if (*bench_cmd) return cmd_bench(ba, out);
        if (*synth_cmd) return cmd_synth(sa, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kBadArgs;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << "\n";
        return kBadArgs;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kSolverError;
    }
    return kBadArgs;
}

}  // namespace sc2d::cli
