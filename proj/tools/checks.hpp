#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sc2d/tensor.hpp"

// Randomized oracle comparisons and timing helpers shared by the `check`
// and `bench` commands and the acceptance suite.
namespace sc2d::cli {

struct CheckResult {
    std::string name;
    int trials = 0;
    double worst = 0.0;      ///< largest observed error
    double tolerance = 0.0;
    bool passed = false;
};

struct CheckOptions {
    int trials = 50;
    std::uint64_t seed = 1;
    /// Perturbs the fast t-product before comparison so the suite must fail.
    bool inject_failure = false;
};

CheckResult check_circulant(const CheckOptions& opts);
CheckResult check_naive_tprod(const CheckOptions& opts);
CheckResult check_parseval(const CheckOptions& opts);
CheckResult check_gradient(const CheckOptions& opts);
CheckResult check_dual_gradient(const CheckOptions& opts);
CheckResult check_weak_duality(const CheckOptions& opts);
CheckResult check_shift_invariance(const CheckOptions& opts);
CheckResult check_depth_one(const CheckOptions& opts);

std::vector<CheckResult> run_checks(const CheckOptions& opts);

/// Median wall time in seconds of `iters` fixed-length FISTA iterations on a
/// random m x n x k problem with an m x r x k dictionary.
double time_encode(Index m, Index r, Index k, Index n, int iters, int repeats, std::uint64_t seed);

/// Median wall time of the same iteration count on the dense k = 1 problem.
double time_dense_encode(Index m, Index r, Index n, int iters, int repeats, std::uint64_t seed);

}  // namespace sc2d::cli
