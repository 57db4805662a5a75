#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "sc2d/tensor.hpp"

namespace sc2d {

enum class SolverMode {
    Ista,   ///< plain proximal gradient; objective trace is monotone
    Fista,  ///< with momentum extrapolation
};

std::string_view to_string(SolverMode mode);
SolverMode parse_solver_mode(std::string_view text);

struct SolverConfig {
    double beta = 0.1;
    int max_iters = 100;
    SolverMode mode = SolverMode::Fista;
    /// Safety factor applied to the Lipschitz bound, constant over iterations.
    double eta = 1.0;
    /// Stop once |F(p-1) - F(p)| <= rel_tol * |F(p-1)|. Zero runs max_iters.
    double rel_tol = 1e-6;

    void validate() const;
};

struct SolveReport {
    /// Entry 0 is the objective at the starting point; entry p is the
    /// objective after iteration p.
    std::vector<double> objective_trace;
    int iterations_run = 0;
    /// Fraction of exactly-zero coefficients in the returned tensor.
    double final_sparsity = 0.0;
    double lipschitz_used = 0.0;
};

struct SolveResult {
    Tensor3 coeffs;
    SolveReport report;
};

/// Data term f(B) = 0.5 * ||X - D * B||_F^2 for fixed D and X, with the
/// per-slice Gram blocks D^H D and D^H X cached in the frequency domain.
/// Only the half spectrum is stored.
class DataTerm {
public:
    DataTerm(const Tensor3& dict, const Tensor3& x);

    /// grad f(B) = D' * (D * B - X).
    Tensor3 gradient(const Tensor3& b) const;
    double value(const Tensor3& b) const;
    /// sum over all k slices of ||D(l)^H D(l)||_F.
    double lipschitz() const;

    Index atoms() const noexcept { return r_; }
    Index samples() const noexcept { return n_; }
    Index depth() const noexcept { return k_; }

private:
    Index m_, r_, n_, k_;
    FreqTensor dict_hat_;
    FreqTensor x_hat_;
    std::vector<CMatrix> gram_;
    std::vector<CMatrix> cross_;
    // Real copies for the DC and Nyquist slices; empty elsewhere.
    std::vector<Matrix> real_dict_;
    std::vector<Matrix> real_gram_;
};

Tensor3 grad_f(const Tensor3& dict, const Tensor3& b, const Tensor3& x);

/// Step-size bound sum_l ||D(l)^H D(l)||_F. Throws SolverError for an
/// all-zero dictionary.
double lipschitz(const Tensor3& dict);

/// Entrywise sign(t) * max(|t| - tau, 0).
Tensor3 soft_threshold(const Tensor3& t, double tau);

/// 0.5 * ||X - D * B||_F^2 + beta * ||B||_1.
double objective(const Tensor3& x, const Tensor3& dict, const Tensor3& b, double beta);

/// Proximal-gradient solve of min_B 0.5 ||X - D*B||^2 + beta ||B||_1.
///
/// Starts from zero unless `start` is given. The returned coefficients are
/// the lowest-objective iterate seen, which for ISTA is the last one.
SolveResult ista_t(const Tensor3& x, const Tensor3& dict, const SolverConfig& cfg,
                   const std::optional<Tensor3>& start = std::nullopt);

}  // namespace sc2d
