#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sc2d/tensor.hpp"

namespace sc2d::io {

// T3B layout: "T3B1", then m, n, k as little-endian uint32, then m*n*k
// little-endian IEEE-754 doubles in Tensor3 storage order.
inline constexpr char kT3BMagic[4] = {'T', '3', 'B', '1'};

void write_t3b(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_t3b(const std::filesystem::path& path);

std::vector<unsigned char> encode_t3b(const Tensor3& t);
Tensor3 decode_t3b(const std::vector<unsigned char>& bytes);

/// Single-band binary PGM (P5). maxval <= 255 stores one byte per sample,
/// otherwise two big-endian bytes.
struct Pgm {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<double> pixels;  // row-major, height * width
};

Pgm read_pgm(const std::filesystem::path& path);
/// Values are rounded and saturated to [0, maxval].
void write_pgm(const std::filesystem::path& path, const Pgm& image);

/// Name of the manifest inside a band-stack directory: one PGM file name
/// per line, in band order. Blank lines and lines starting with '#' are
/// ignored.
inline constexpr const char* kBandManifest = "bands.txt";

/// A multi-band image is held as a Tensor3 of extent height x width x bands.
/// `path` is either a .t3b file or a band-stack directory.
Tensor3 load_band_stack(const std::filesystem::path& path);

/// Writes one 8-bit PGM per band plus the manifest. Pixel values are rounded
/// and saturated to [0, 255] by the PGM encoder.
void save_band_stack_pgm(const std::filesystem::path& dir, const Tensor3& image,
                         const std::string& stem = "band");

}  // namespace sc2d::io
