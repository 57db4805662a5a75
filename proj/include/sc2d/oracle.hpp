#pragma once

#include <functional>

#include "sc2d/tensor.hpp"

// Slow, obviously-correct reference implementations. Used by the test
// suites and the `check` command only; nothing in the solver path calls
// into this namespace.
namespace sc2d::oracle {

/// t-product by definition: X(i,j,:) = sum_q A(i,q,:) (*) B(q,j,:), where
/// (*) is circular convolution written out with modular indices.
Tensor3 tprod_naive(const Tensor3& a, const Tensor3& b);

/// 0.5 * ||x - D b||^2 + beta * ||b||_1 on dense (unfolded) quantities.
double dense_sc_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& dict,
                          const Eigen::Ref<const Matrix>& b, double beta);

/// Central-difference gradient of a scalar function of a tensor.
Tensor3 numerical_gradient(const std::function<double(const Tensor3&)>& f, const Tensor3& at,
                           double h = 1e-5);

/// Plain ISTA on the dense problem 0.5 * ||x - D b||^2 + beta * ||b||_1
/// with a caller-supplied step constant. Returns the final objective.
double dense_ista(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& dict,
                  double beta, double lipschitz, int iters, Matrix* solution = nullptr);

}  // namespace sc2d::oracle
