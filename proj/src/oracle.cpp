#include "sc2d/oracle.hpp"

#include <cmath>

namespace sc2d::oracle {

Tensor3 tprod_naive(const Tensor3& a, const Tensor3& b)
{
    if (a.cols() != b.rows() || a.depth() != b.depth())
        throw ShapeError("tprod_naive: shape mismatch");
    const Index m = a.rows(), r = a.cols(), n = b.cols(), k = a.depth();
    Tensor3 x(m, n, k);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
            for (Index q = 0; q < r; ++q) {
                for (Index l = 0; l < k; ++l) {
                    double acc = 0.0;
                    for (Index s = 0; s < k; ++s) acc += a(i, q, s) * b(q, j, ((l - s) % k + k) % k);
                    x(i, j, l) += acc;
                }
            }
        }
    }
    return x;
}

double dense_sc_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& dict,
                          const Eigen::Ref<const Matrix>& b, double beta)
{
    if (dict.cols() != b.rows() || dict.rows() != x.rows() || x.cols() != b.cols())
        throw ShapeError("dense_sc_objective: shape mismatch");
    return 0.5 * (x - dict * b).squaredNorm() + beta * b.cwiseAbs().sum();
}

Tensor3 numerical_gradient(const std::function<double(const Tensor3&)>& f, const Tensor3& at,
                           double h)
{
    if (!(h > 0.0)) throw ConfigError("numerical_gradient: step must be positive");
    Tensor3 grad(at.rows(), at.cols(), at.depth());
    Tensor3 probe = at;
    for (Index e = 0; e < at.size(); ++e) {
        const double saved = probe.data()[e];
        probe.data()[e] = saved + h;
        const double up = f(probe);
        probe.data()[e] = saved - h;
        const double down = f(probe);
        probe.data()[e] = saved;
        grad.data()[e] = (up - down) / (2.0 * h);
    }
    return grad;
}

double dense_ista(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& dict,
                  double beta, double lipschitz, int iters, Matrix* solution)
{
    Matrix b = Matrix::Zero(dict.cols(), x.cols());
    const Matrix gram = dict.transpose() * dict;
    const Matrix cross = dict.transpose() * x;
    const double tau = beta / lipschitz;
    for (int it = 0; it < iters; ++it) {
        const Matrix step = b - (gram * b - cross) / lipschitz;
        b = step.unaryExpr([tau](double v) {
            return v > tau ? v - tau : (v < -tau ? v + tau : 0.0);
        });
    }
    if (solution) *solution = b;
    return dense_sc_objective(x, dict, b, beta);
}

}  // namespace sc2d::oracle
