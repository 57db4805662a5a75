#include "sc2d/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sc2d::metrics {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

void require_same(const Tensor3& a, const Tensor3& b)
{
    if (!a.same_shape(b)) throw ShapeError("metrics: image extents differ");
    if (a.empty()) throw ShapeError("metrics: empty image");
}

std::array<double, kWindow> gaussian_taps()
{
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        taps[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Separable 'valid' filtering of an h x w column-major plane.
Matrix filter_valid(const Matrix& plane, const std::array<double, kWindow>& taps)
{
    const Index h = plane.rows(), w = plane.cols();
    const Index oh = h - kWindow + 1, ow = w - kWindow + 1;
    Matrix rows_done(oh, w);
    for (Index x = 0; x < w; ++x)
        for (Index y = 0; y < oh; ++y) {
            double acc = 0.0;
            for (int t = 0; t < kWindow; ++t) acc += taps[t] * plane(y + t, x);
            rows_done(y, x) = acc;
        }
    Matrix out(oh, ow);
    for (Index x = 0; x < ow; ++x)
        for (Index y = 0; y < oh; ++y) {
            double acc = 0.0;
            for (int t = 0; t < kWindow; ++t) acc += taps[t] * rows_done(y, x + t);
            out(y, x) = acc;
        }
    return out;
}

double ssim_plane(const Matrix& a, const Matrix& b, double peak)
{
    const auto taps = gaussian_taps();
    const double c1 = (kK1 * peak) * (kK1 * peak);
    const double c2 = (kK2 * peak) * (kK2 * peak);

    const Matrix mu_a = filter_valid(a, taps);
    const Matrix mu_b = filter_valid(b, taps);
    const Matrix e_aa = filter_valid(a.cwiseProduct(a), taps);
    const Matrix e_bb = filter_valid(b.cwiseProduct(b), taps);
    const Matrix e_ab = filter_valid(a.cwiseProduct(b), taps);

    double total = 0.0;
    for (Index x = 0; x < mu_a.cols(); ++x)
        for (Index y = 0; y < mu_a.rows(); ++y) {
            const double ma = mu_a(y, x), mb = mu_b(y, x);
            const double va = e_aa(y, x) - ma * ma;
            const double vb = e_bb(y, x) - mb * mb;
            const double cov = e_ab(y, x) - ma * mb;
            const double num = (2.0 * (ma * mb) + c1) * (2.0 * cov + c2);
            const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            total += num / den;
        }
    return total / static_cast<double>(mu_a.size());
}

}  // namespace

double mse(const Tensor3& ref, const Tensor3& test)
{
    require_same(ref, test);
    double s = 0.0;
    for (Index i = 0; i < ref.size(); ++i) {
        const double d = ref.data()[i] - test.data()[i];
        s += d * d;
    }
    return s / static_cast<double>(ref.size());
}

double psnr_from_mse(double err, double peak)
{
    if (err <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / err));
}

double psnr(const Tensor3& ref, const Tensor3& test, double peak)
{
    return psnr_from_mse(mse(ref, test), peak);
}

std::vector<double> ssim_bands(const Tensor3& ref, const Tensor3& test, double peak)
{
    require_same(ref, test);
    if (ref.rows() < kWindow || ref.cols() < kWindow)
        throw ShapeError("ssim: image smaller than the 11x11 window");
    std::vector<double> out(static_cast<std::size_t>(ref.depth()));
#pragma omp parallel for schedule(static)
    for (Index l = 0; l < ref.depth(); ++l) out[l] = ssim_plane(ref.slice(l), test.slice(l), peak);
    return out;
}

double ssim(const Tensor3& ref, const Tensor3& test, double peak)
{
    const auto bands = ssim_bands(ref, test, peak);
    double s = 0.0;
    for (double v : bands) s += v;
    return s / static_cast<double>(bands.size());
}

MetricReport evaluate(const Tensor3& ref, const Tensor3& test, double peak)
{
    MetricReport rep;
    rep.psnr = psnr(ref, test, peak);
    rep.band_ssim = ssim_bands(ref, test, peak);
    double s = 0.0;
    for (double v : rep.band_ssim) s += v;
    rep.ssim = s / static_cast<double>(rep.band_ssim.size());
    for (Index l = 0; l < ref.depth(); ++l) {
        const double err = (ref.slice(l) - test.slice(l)).squaredNorm() /
                           static_cast<double>(ref.slice_size());
        rep.band_psnr.push_back(psnr_from_mse(err, peak));
    }
    return rep;
}

}  // namespace sc2d::metrics
