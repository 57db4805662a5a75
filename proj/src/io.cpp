#include "sc2d/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

namespace sc2d::io {

namespace fs = std::filesystem;

namespace {

static_assert(std::numeric_limits<double>::is_iec559, "T3B requires IEEE-754 doubles");

void put_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p)
{
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return v;
}

void put_f64(std::vector<unsigned char>& out, double d)
{
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFF));
}

double get_f64(const unsigned char* p)
{
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

std::vector<unsigned char> slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(const std::vector<unsigned char>& buf, std::size_t& pos)
{
    while (pos < buf.size()) {
        if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (std::isspace(buf[pos])) {
            ++pos;
        } else {
            break;
        }
    }
}

int read_pnm_int(const std::vector<unsigned char>& buf, std::size_t& pos, const fs::path& path)
{
    skip_pnm_space(buf, pos);
    if (pos >= buf.size() || !std::isdigit(buf[pos]))
        throw IoError("malformed PGM header in '" + path.string() + "'");
    long v = 0;
    while (pos < buf.size() && std::isdigit(buf[pos])) {
        v = v * 10 + (buf[pos] - '0');
        if (v > 1'000'000'000) throw IoError("PGM header value too large in '" + path.string() + "'");
        ++pos;
    }
    return static_cast<int>(v);
}

}  // namespace

std::vector<unsigned char> encode_t3b(const Tensor3& t)
{
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (t.rows() > kMax || t.cols() > kMax || t.depth() > kMax)
        throw IoError("tensor extent exceeds T3B limit");
    std::vector<unsigned char> out;
    out.reserve(16 + 8 * static_cast<std::size_t>(t.size()));
    out.insert(out.end(), std::begin(kT3BMagic), std::end(kT3BMagic));
    put_u32(out, static_cast<std::uint32_t>(t.rows()));
    put_u32(out, static_cast<std::uint32_t>(t.cols()));
    put_u32(out, static_cast<std::uint32_t>(t.depth()));
    for (double v : t.data()) put_f64(out, v);
    return out;
}

Tensor3 decode_t3b(const std::vector<unsigned char>& bytes)
{
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kT3BMagic, 4) != 0)
        throw IoError("not a T3B tensor (bad magic)");
    const std::uint64_t m = get_u32(bytes.data() + 4);
    const std::uint64_t n = get_u32(bytes.data() + 8);
    const std::uint64_t k = get_u32(bytes.data() + 12);
    const std::uint64_t count = m * n * k;
    if (bytes.size() != 16 + 8 * count)
        throw IoError("T3B payload length " + std::to_string(bytes.size() - 16) +
                      " bytes does not match " + std::to_string(m) + "x" + std::to_string(n) +
                      "x" + std::to_string(k));
    std::vector<double> data(count);
    for (std::uint64_t i = 0; i < count; ++i) data[i] = get_f64(bytes.data() + 16 + 8 * i);
    return Tensor3(static_cast<Index>(m), static_cast<Index>(n), static_cast<Index>(k),
                   std::move(data));
}

void write_t3b(const fs::path& path, const Tensor3& t)
{
    const auto bytes = encode_t3b(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Tensor3 read_t3b(const fs::path& path)
{
    try {
        return decode_t3b(slurp(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Pgm read_pgm(const fs::path& path)
{
    const auto buf = slurp(path);
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5')
        throw IoError("'" + path.string() + "' is not a binary PGM (P5)");
    std::size_t pos = 2;
    Pgm img;
    img.width = read_pnm_int(buf, pos, path);
    img.height = read_pnm_int(buf, pos, path);
    img.maxval = read_pnm_int(buf, pos, path);
    if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
        throw IoError("invalid PGM header in '" + path.string() + "'");
    ++pos;  // single whitespace before raster
    const std::size_t bps = img.maxval < 256 ? 1 : 2;
    const std::size_t count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    if (buf.size() < pos + count * bps)
        throw IoError("truncated PGM raster in '" + path.string() + "'");
    img.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        img.pixels[i] = bps == 1 ? buf[pos + i]
                                 : static_cast<double>((buf[pos + 2 * i] << 8) | buf[pos + 2 * i + 1]);
    }
    return img;
}

void write_pgm(const fs::path& path, const Pgm& image)
{
    if (image.maxval <= 0 || image.maxval > 65535) throw IoError("PGM maxval out of range");
    const std::size_t count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    if (image.pixels.size() != count) throw IoError("PGM pixel count does not match extents");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << image.width << ' ' << image.height << '\n' << image.maxval << '\n';
    const bool wide = image.maxval > 255;
    for (double v : image.pixels) {
        const double clamped = std::clamp(std::round(v), 0.0, static_cast<double>(image.maxval));
        const auto q = static_cast<unsigned>(clamped);
        if (wide) out.put(static_cast<char>((q >> 8) & 0xFF));
        out.put(static_cast<char>(q & 0xFF));
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Tensor3 load_band_stack(const fs::path& path)
{
    if (!fs::exists(path)) throw IoError("input '" + path.string() + "' does not exist");
    if (!fs::is_directory(path)) return read_t3b(path);

    const fs::path manifest = path / kBandManifest;
    std::ifstream in(manifest);
    if (!in) throw IoError("band manifest '" + manifest.string() + "' not found");
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        names.push_back(line.substr(first, last - first + 1));
    }
    if (names.empty()) throw IoError("band manifest '" + manifest.string() + "' lists no bands");

    Tensor3 out;
    for (std::size_t b = 0; b < names.size(); ++b) {
        const Pgm band = read_pgm(path / names[b]);
        if (b == 0) {
            out = Tensor3(band.height, band.width, static_cast<Index>(names.size()));
        } else if (band.height != out.rows() || band.width != out.cols()) {
            throw IoError("band '" + names[b] + "' extents differ from the first band");
        }
        const auto l = static_cast<Index>(b);
        for (Index y = 0; y < out.rows(); ++y)
            for (Index x = 0; x < out.cols(); ++x)
                out(y, x, l) = band.pixels[static_cast<std::size_t>(y * out.cols() + x)];
    }
    return out;
}

void save_band_stack_pgm(const fs::path& dir, const Tensor3& image, const std::string& stem)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "'");
    std::ofstream manifest(dir / kBandManifest, std::ios::trunc);
    if (!manifest) throw IoError("cannot write band manifest in '" + dir.string() + "'");
    for (Index l = 0; l < image.depth(); ++l) {
        std::ostringstream name;
        name << stem << std::setw(2) << std::setfill('0') << l << ".pgm";
        Pgm band;
        band.height = static_cast<int>(image.rows());
        band.width = static_cast<int>(image.cols());
        band.pixels.resize(static_cast<std::size_t>(image.rows() * image.cols()));
        for (Index y = 0; y < image.rows(); ++y)
            for (Index x = 0; x < image.cols(); ++x)
                band.pixels[static_cast<std::size_t>(y * image.cols() + x)] = image(y, x, l);
        write_pgm(dir / name.str(), band);
        manifest << name.str() << '\n';
    }
}

}  // namespace sc2d::io
