#pragma once

#include <optional>
#include <vector>

#include "sc2d/tensor.hpp"

namespace sc2d {

/// Per-frequency-slice constituents of the dictionary subproblem for a
/// fixed coefficient tensor B. Only the half spectrum is kept; slice l of
/// the full spectrum contributes with weight FreqTensor::slice_weight(l, k).
struct SliceCache {
    Index m = 0;  ///< atom height
    Index r = 0;  ///< atom count
    Index k = 0;  ///< depth
    std::vector<CMatrix> gram;   ///< B(l) B(l)^H, r x r, Hermitian PSD
    std::vector<CMatrix> cross;  ///< X(l) B(l)^H, m x r
    /// Diagonal shift applied to slices whose gram is numerically rank
    /// deficient; zero elsewhere. Fixed per slice so the dual stays smooth in lambda.
    std::vector<double> jitter;
    /// sum over all k slices of ||X(l)||_F^2, i.e. k * ||X||_F^2.
    double data_energy = 0.0;

    Index half_count() const noexcept { return k / 2 + 1; }
    double weight(Index l) const noexcept { return FreqTensor::slice_weight(l, k); }
};

SliceCache build_cache(const Tensor3& x, const Tensor3& b);
SliceCache build_cache(const FreqTensor& x_hat, const FreqTensor& b_hat);

/// D(l) = X(l) B(l)^H (B(l) B(l)^H + diag(lambda) + jitter(l) I)^{-1} on every
/// slice. A system that fails to factor throws SolverError.
FreqTensor recover_dhat(const SliceCache& cache, const Vector& lambda);

/// Lagrange dual g(lambda) = min_D L(D, lambda), evaluated in closed form as
/// sum_l [ ||X(l)||^2 - tr(H(l) M(l)^{-1} H(l)^H) ] - k * sum_j lambda_j.
double dual_value(const SliceCache& cache, const Vector& lambda);

struct DualDerivatives {
    double value = 0.0;
    /// d g / d lambda_j = sum_l ||D(l)(:, j)||^2 - k.
    Vector gradient;
    /// Negative semidefinite.
    Matrix hessian;
};

DualDerivatives dual_grad_hess(const SliceCache& cache, const Vector& lambda);

struct NewtonOptions {
    double lambda_min = 1e-9;
    double tol = 1e-9;
    int max_iters = 100;
    int max_halvings = 30;
    double armijo = 1e-4;
};

struct DualState {
    Vector lambda;
    double dual_value = 0.0;
    /// Infinity norm of the projected gradient (KKT residual for lambda >= lambda_min).
    double grad_norm = 0.0;
    /// max_j |lambda_j * (sum_l ||D(l)(:,j)||^2 - k)|.
    double slackness = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Maximizes the dual by projected Newton with Armijo backtracking.
/// Hitting max_iters returns the best iterate with converged == false.
DualState newton_solve(const SliceCache& cache, const Vector& lambda0,
                       const NewtonOptions& opts = {});

struct DictUpdateResult {
    Tensor3 dict;
    DualState dual;
    /// B was all zero; the incumbent was returned untouched.
    bool skipped = false;
    /// The recovered dictionary did not improve on the incumbent.
    bool kept_incumbent = false;
    /// Atoms with zero norm after the update (reported, never replaced).
    Index dead_atoms = 0;
};

/// Dictionary step with B fixed: minimize 0.5 ||X - D * B||^2 subject to
/// ||D(:, j, :)||_F <= 1. Never returns a dictionary with a larger data term
/// than a feasible incumbent.
DictUpdateResult dict_update(const Tensor3& x, const Tensor3& b, const Tensor3& incumbent,
                             const Vector& lambda0, const NewtonOptions& opts = {});

}  // namespace sc2d
