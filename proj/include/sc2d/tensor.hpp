#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sc2d/error.hpp"

namespace sc2d {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// Dense real third-order tensor of extent m x n x k.
///
/// Storage is frontal-slice-major, column-major within a slice: entry
/// (i, j, l) lives at offset l*m*n + j*m + i. This is also the payload
/// order of the T3B file format, so a slice is always a contiguous
/// column-major m x n matrix.
class Tensor3 {
public:
    using SliceMap = Eigen::Map<Matrix>;
    using ConstSliceMap = Eigen::Map<const Matrix>;

    Tensor3() = default;
    Tensor3(Index m, Index n, Index k);
    Tensor3(Index m, Index n, Index k, std::vector<double> data);

    /// Identity of the t-product: first slice is the m x m identity, the
    /// remaining slices are zero.
    static Tensor3 identity(Index m, Index k);

    Index rows() const noexcept { return m_; }
    Index cols() const noexcept { return n_; }
    Index depth() const noexcept { return k_; }
    Index size() const noexcept { return m_ * n_ * k_; }
    Index slice_size() const noexcept { return m_ * n_; }
    bool empty() const noexcept { return size() == 0; }

    double& operator()(Index i, Index j, Index l) { return data_[offset(i, j, l)]; }
    double operator()(Index i, Index j, Index l) const { return data_[offset(i, j, l)]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    /// Frontal slice l as an m x n matrix view.
    SliceMap slice(Index l);
    ConstSliceMap slice(Index l) const;

    /// Lateral slice j, returned as an m x 1 x k tensor.
    Tensor3 lateral(Index j) const;
    void set_lateral(Index j, const Tensor3& atom);

    double squared_norm() const;
    double frobenius_norm() const;
    double l1_norm() const;
    Index count_zeros() const;

    Tensor3& operator+=(const Tensor3& other);
    Tensor3& operator-=(const Tensor3& other);
    Tensor3& operator*=(double s);

    bool same_shape(const Tensor3& other) const noexcept
    {
        return m_ == other.m_ && n_ == other.n_ && k_ == other.k_;
    }

    friend bool operator==(const Tensor3& a, const Tensor3& b) = default;

private:
    Index offset(Index i, Index j, Index l) const noexcept { return (l * n_ + j) * m_ + i; }

    Index m_ = 0;
    Index n_ = 0;
    Index k_ = 0;
    std::vector<double> data_;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(double s, Tensor3 a);

/// ||a - b||_F / max(||b||_F, tiny).
double relative_error(const Tensor3& a, const Tensor3& b);
double relative_error(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

/// Complex frontal slices of a tensor after a DFT along mode 3.
///
/// All k slices are stored. When `symmetric()` is set the slices obey
/// F(l) = conj(F(k - l)) for l = 1..k-1, and only the first half_count()
/// slices carry independent information.
class FreqTensor {
public:
    using SliceMap = Eigen::Map<CMatrix>;
    using ConstSliceMap = Eigen::Map<const CMatrix>;

    FreqTensor() = default;
    FreqTensor(Index m, Index n, Index k);

    Index rows() const noexcept { return m_; }
    Index cols() const noexcept { return n_; }
    Index depth() const noexcept { return k_; }
    Index half_count() const noexcept { return k_ / 2 + 1; }

    SliceMap slice(Index l);
    ConstSliceMap slice(Index l) const;

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    bool symmetric() const noexcept { return symmetric_; }
    void set_symmetric(bool flag) noexcept { symmetric_ = flag; }

    /// Overwrites slices half_count()..k-1 with conjugates of their mirror
    /// partners and marks the tensor symmetric.
    void mirror();

    /// Largest absolute violation of conjugate symmetry, including the
    /// imaginary part of the self-conjugate slices (l = 0 and, for even k,
    /// l = k/2).
    double symmetry_defect() const;

    /// Sum over all slices of ||F(l)||_F^2.
    double squared_norm() const;

    /// Multiplicity of half-spectrum slice l in the full spectrum: 1 for the
    /// DC slice and the Nyquist slice of even k, 2 otherwise.
    static double slice_weight(Index l, Index k) noexcept
    {
        return (l == 0 || 2 * l == k) ? 1.0 : 2.0;
    }

private:
    Index m_ = 0;
    Index n_ = 0;
    Index k_ = 0;
    bool symmetric_ = false;
    std::vector<Complex> data_;
};

/// Stacks frontal slices vertically into an (m*k) x n matrix.
Matrix unfold(const Tensor3& x);
/// Inverse of unfold for a given depth k.
Tensor3 fold(const Eigen::Ref<const Matrix>& stacked, Index k);

/// Tensor transpose: slice 0 is X(0)^T, slice l is X(k - l)^T.
Tensor3 transpose_t(const Tensor3& x);

/// Forward DFT along mode 3 (unnormalized). Only the half spectrum is
/// transformed; the rest is filled by conjugate symmetry.
FreqTensor dft3(const Tensor3& x);
/// Forward DFT computing every slice with a complex transform. The result
/// is not marked symmetric; used to validate the mirrored path.
FreqTensor dft3_full(const Tensor3& x);

/// Inverse DFT along mode 3 with 1/k normalization. Throws SymmetryError if
/// the input is not flagged symmetric or its symmetry defect exceeds
/// kImagResidueTol.
Tensor3 idft3(const FreqTensor& f);

inline constexpr double kImagResidueTol = 1e-8;

/// Per-slice product C(l) = A(l) B(l) over the half spectrum, mirrored.
FreqTensor slice_product(const FreqTensor& a, const FreqTensor& b);

/// t-product of A (m x r x k) and B (r x n x k), computed slice-wise in
/// the frequency domain.
Tensor3 tprod(const Tensor3& a, const Tensor3& b);

namespace detail {
/// Forward transform filling slices 0..k/2 only; the rest stay zero and the
/// result is not flagged symmetric.
FreqTensor dft3_half(const Tensor3& x);
/// Inverse transform reading slices 0..k/2 only, without symmetry checks.
Tensor3 idft3_half(const FreqTensor& f);
}  // namespace detail

/// Block-circulant (m*k) x (r*k) matrix whose block (p, q) is slice
/// (p - q) mod k, so that unfold(tprod(D, B)) = circulant_unfold(D) * unfold(B).
Matrix circulant_unfold(const Tensor3& d);

/// Circular shift along mode 3: output slice l is input slice (l - s) mod k.
Tensor3 shift3(const Tensor3& x, std::int64_t s);

/// Frobenius norm of every lateral slice.
std::vector<double> atom_norms(const Tensor3& d);

}  // namespace sc2d
