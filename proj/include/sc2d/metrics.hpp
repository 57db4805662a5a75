#pragma once

#include <vector>

#include "sc2d/tensor.hpp"

// Image-quality metrics on multi-band images stored as height x width x bands.
namespace sc2d::metrics {

inline constexpr double kPeak = 255.0;
/// Returned by psnr() for identical images.
inline constexpr double kPsnrCap = 99.0;

double mse(const Tensor3& ref, const Tensor3& test);

/// 10 log10(peak^2 / MSE) over all bands, capped at kPsnrCap.
double psnr(const Tensor3& ref, const Tensor3& test, double peak = kPeak);
double psnr_from_mse(double mse, double peak = kPeak);

/// Single-scale SSIM per band with an 11-tap Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, evaluated over valid window positions. Returns
/// one value per band.
std::vector<double> ssim_bands(const Tensor3& ref, const Tensor3& test, double peak = kPeak);
/// Mean of ssim_bands.
double ssim(const Tensor3& ref, const Tensor3& test, double peak = kPeak);

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    std::vector<double> band_psnr;
    std::vector<double> band_ssim;
};

MetricReport evaluate(const Tensor3& ref, const Tensor3& test, double peak = kPeak);

}  // namespace sc2d::metrics
