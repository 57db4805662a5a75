#include "sc2d/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tube_fft.hpp"

namespace sc2d {

namespace {

// Column blocking for the per-slice products. Fixed so that the work split
// (and hence every floating-point result) does not depend on thread count.
constexpr Index kColumnBlock = 256;

std::string shape_str(const Tensor3& t)
{
    return std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "x" +
           std::to_string(t.depth());
}

void require_nonnegative(Index m, Index n, Index k)
{
    if (m < 0 || n < 0 || k < 0) throw ShapeError("tensor extents must be nonnegative");
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor3

Tensor3::Tensor3(Index m, Index n, Index k) : m_(m), n_(n), k_(k)
{
    require_nonnegative(m, n, k);
    data_.assign(static_cast<std::size_t>(m * n * k), 0.0);
}

Tensor3::Tensor3(Index m, Index n, Index k, std::vector<double> data)
    : m_(m), n_(n), k_(k), data_(std::move(data))
{
    require_nonnegative(m, n, k);
    if (static_cast<Index>(data_.size()) != m * n * k)
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match extents");
}

Tensor3 Tensor3::identity(Index m, Index k)
{
    Tensor3 t(m, m, k);
    if (k > 0) {
        for (Index i = 0; i < m; ++i) t(i, i, 0) = 1.0;
    }
    return t;
}

Tensor3::SliceMap Tensor3::slice(Index l)
{
    return SliceMap(data_.data() + l * m_ * n_, m_, n_);
}

Tensor3::ConstSliceMap Tensor3::slice(Index l) const
{
    return ConstSliceMap(data_.data() + l * m_ * n_, m_, n_);
}

Tensor3 Tensor3::lateral(Index j) const
{
    if (j < 0 || j >= n_) throw ShapeError("lateral slice index out of range");
    Tensor3 out(m_, 1, k_);
    for (Index l = 0; l < k_; ++l)
        for (Index i = 0; i < m_; ++i) out(i, 0, l) = (*this)(i, j, l);
    return out;
}

void Tensor3::set_lateral(Index j, const Tensor3& atom)
{
    if (j < 0 || j >= n_) throw ShapeError("lateral slice index out of range");
    if (atom.rows() != m_ || atom.cols() != 1 || atom.depth() != k_)
        throw ShapeError("lateral slice must be " + std::to_string(m_) + "x1x" +
                         std::to_string(k_) + ", got " + shape_str(atom));
    for (Index l = 0; l < k_; ++l)
        for (Index i = 0; i < m_; ++i) (*this)(i, j, l) = atom(i, 0, l);
}

double Tensor3::squared_norm() const
{
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
}

double Tensor3::frobenius_norm() const { return std::sqrt(squared_norm()); }

double Tensor3::l1_norm() const
{
    double s = 0.0;
    for (double v : data_) s += std::abs(v);
    return s;
}

Index Tensor3::count_zeros() const
{
    return static_cast<Index>(std::count(data_.begin(), data_.end(), 0.0));
}

Tensor3& Tensor3::operator+=(const Tensor3& other)
{
    if (!same_shape(other)) throw ShapeError("shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other)
{
    if (!same_shape(other)) throw ShapeError("shape mismatch in -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double s)
{
    for (double& v : data_) v *= s;
    return *this;
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

double relative_error(const Tensor3& a, const Tensor3& b)
{
    if (!a.same_shape(b)) throw ShapeError("relative_error: shape mismatch");
    double diff = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        diff += d * d;
    }
    const double ref = std::max(b.frobenius_norm(), std::numeric_limits<double>::min());
    return std::sqrt(diff) / ref;
}

double relative_error(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("relative_error: shape mismatch");
    return (a - b).norm() / std::max(b.norm(), std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------------------
// FreqTensor

FreqTensor::FreqTensor(Index m, Index n, Index k) : m_(m), n_(n), k_(k)
{
    require_nonnegative(m, n, k);
    data_.assign(static_cast<std::size_t>(m * n * k), Complex(0.0, 0.0));
}

FreqTensor::SliceMap FreqTensor::slice(Index l)
{
    return SliceMap(data_.data() + l * m_ * n_, m_, n_);
}

FreqTensor::ConstSliceMap FreqTensor::slice(Index l) const
{
    return ConstSliceMap(data_.data() + l * m_ * n_, m_, n_);
}

void FreqTensor::mirror()
{
    for (Index l = half_count(); l < k_; ++l) slice(l) = slice(k_ - l).conjugate();
    symmetric_ = true;
}

double FreqTensor::symmetry_defect() const
{
    double defect = 0.0;
    const Index mn = m_ * n_;
    for (Index l = 0; l < k_; ++l) {
        const Index partner = (k_ - l) % k_;
        if (partner < l) continue;
        const Complex* a = data_.data() + l * mn;
        const Complex* b = data_.data() + partner * mn;
        for (Index t = 0; t < mn; ++t) defect = std::max(defect, std::abs(a[t] - std::conj(b[t])));
    }
    return defect;
}

double FreqTensor::squared_norm() const
{
    double s = 0.0;
    for (const Complex& z : data_) s += std::norm(z);
    return s;
}

// ---------------------------------------------------------------------------
// Operations

Matrix unfold(const Tensor3& x)
{
    const Index m = x.rows();
    Matrix out(m * x.depth(), x.cols());
    for (Index l = 0; l < x.depth(); ++l) out.middleRows(l * m, m) = x.slice(l);
    return out;
}

Tensor3 fold(const Eigen::Ref<const Matrix>& stacked, Index k)
{
    if (k <= 0 || stacked.rows() % k != 0)
        throw ShapeError("fold: row count not divisible by depth");
    const Index m = stacked.rows() / k;
    Tensor3 out(m, stacked.cols(), k);
    for (Index l = 0; l < k; ++l) out.slice(l) = stacked.middleRows(l * m, m);
    return out;
}

Tensor3 transpose_t(const Tensor3& x)
{
    const Index k = x.depth();
    Tensor3 out(x.cols(), x.rows(), k);
    for (Index l = 0; l < k; ++l) out.slice(l) = x.slice((k - l) % k).transpose();
    return out;
}

namespace {

// Runs f(t0, count) over fixed-size batches of tubes.
template <class F>
void for_tube_batches(Index mn, F&& f)
{
    const Index batches = (mn + detail::kTubeBatch - 1) / detail::kTubeBatch;
#pragma omp parallel for schedule(static)
    for (Index bt = 0; bt < batches; ++bt) {
        const Index t0 = bt * detail::kTubeBatch;
        f(t0, std::min<Index>(detail::kTubeBatch, mn - t0));
    }
}

}  // namespace

namespace detail {

FreqTensor dft3_half(const Tensor3& x)
{
    const Index m = x.rows(), n = x.cols(), k = x.depth();
    FreqTensor out(m, n, k);
    if (x.empty()) return out;
    const Index mn = m * n;
    const double* src = x.data().data();
    Complex* dst = out.data().data();
    if (k == 1) {
        for (Index t = 0; t < mn; ++t) dst[t] = src[t];
        return out;
    }
    for_tube_batches(mn, [&](Index t0, Index count) {
        r2c_batch(static_cast<int>(k), mn, count, src + t0, dst + t0);
    });
    return out;
}

Tensor3 idft3_half(const FreqTensor& f)
{
    const Index m = f.rows(), n = f.cols(), k = f.depth();
    Tensor3 out(m, n, k);
    if (out.empty()) return out;
    const Index mn = m * n;
    const Complex* src = f.data().data();
    double* dst = out.data().data();
    if (k == 1) {
        for (Index t = 0; t < mn; ++t) dst[t] = src[t].real();
        return out;
    }
    const double scale = 1.0 / static_cast<double>(k);
    for_tube_batches(mn, [&](Index t0, Index count) {
        c2r_batch(static_cast<int>(k), mn, count, src + t0, dst + t0);
        for (Index l = 0; l < k; ++l)
            for (Index t = t0; t < t0 + count; ++t) dst[l * mn + t] *= scale;
    });
    return out;
}

}  // namespace detail

FreqTensor dft3(const Tensor3& x)
{
    FreqTensor out = detail::dft3_half(x);
    out.mirror();
    return out;
}

FreqTensor dft3_full(const Tensor3& x)
{
    const Index m = x.rows(), n = x.cols(), k = x.depth();
    FreqTensor out(m, n, k);
    if (x.empty()) return out;
    const Index mn = m * n;
    const double* src = x.data().data();
    Complex* dst = out.data().data();
    if (k == 1) {
        for (Index t = 0; t < mn; ++t) dst[t] = src[t];
        return out;
    }
    std::vector<Complex> tmp(src, src + mn * k);
    for_tube_batches(mn, [&](Index t0, Index count) {
        detail::c2c_batch(static_cast<int>(k), mn, count, tmp.data() + t0, dst + t0);
    });
    return out;
}

Tensor3 idft3(const FreqTensor& f)
{
    if (!f.symmetric())
        throw SymmetryError("idft3: frequency tensor is not flagged conjugate-symmetric");
    const double defect = f.symmetry_defect();
    if (!(defect <= kImagResidueTol))
        throw SymmetryError("idft3: conjugate-symmetry defect " + std::to_string(defect) +
                            " exceeds tolerance");
    return detail::idft3_half(f);
}

namespace {

FreqTensor half_product(const FreqTensor& a, const FreqTensor& b)
{
    const Index k = a.depth();
    const Index n = b.cols();
    FreqTensor out(a.rows(), n, k);
    const Index half = out.half_count();
    const Index blocks = (n + kColumnBlock - 1) / kColumnBlock;

#pragma omp parallel for collapse(2) schedule(static)
    for (Index l = 0; l < half; ++l) {
        for (Index blk = 0; blk < blocks; ++blk) {
            const Index c0 = blk * kColumnBlock;
            const Index width = std::min(kColumnBlock, n - c0);
            out.slice(l).middleCols(c0, width).noalias() =
                a.slice(l) * b.slice(l).middleCols(c0, width);
        }
    }
    return out;
}

}  // namespace

FreqTensor slice_product(const FreqTensor& a, const FreqTensor& b)
{
    if (a.cols() != b.rows() || a.depth() != b.depth())
        throw ShapeError("slice_product: inner extent or depth mismatch");
    FreqTensor out = half_product(a, b);
    out.mirror();
    return out;
}

Tensor3 tprod(const Tensor3& a, const Tensor3& b)
{
    if (a.cols() != b.rows() || a.depth() != b.depth())
        throw ShapeError("tprod: cannot multiply " + shape_str(a) + " by " + shape_str(b));
    if (a.depth() == 0) return Tensor3(a.rows(), b.cols(), 0);
    return detail::idft3_half(half_product(detail::dft3_half(a), detail::dft3_half(b)));
}

Matrix circulant_unfold(const Tensor3& d)
{
    const Index m = d.rows(), r = d.cols(), k = d.depth();
    Matrix out(m * k, r * k);
    for (Index p = 0; p < k; ++p)
        for (Index q = 0; q < k; ++q)
            out.block(p * m, q * r, m, r) = d.slice(((p - q) % k + k) % k);
    return out;
}

Tensor3 shift3(const Tensor3& x, std::int64_t s)
{
    const Index k = x.depth();
    Tensor3 out(x.rows(), x.cols(), k);
    if (k == 0) return out;
    const Index shift = ((s % k) + k) % k;
    for (Index l = 0; l < k; ++l) out.slice(l) = x.slice(((l - shift) % k + k) % k);
    return out;
}

std::vector<double> atom_norms(const Tensor3& d)
{
    std::vector<double> norms(static_cast<std::size_t>(d.cols()), 0.0);
    for (Index j = 0; j < d.cols(); ++j) {
        double s = 0.0;
        for (Index l = 0; l < d.depth(); ++l) s += d.slice(l).col(j).squaredNorm();
        norms[static_cast<std::size_t>(j)] = std::sqrt(s);
    }
    return norms;
}

}  // namespace sc2d
