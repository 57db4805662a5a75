#include "sc2d/sparse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sc2d {

namespace {

constexpr Index kColumnBlock = 256;

Index block_count(Index n) { return (n + kColumnBlock - 1) / kColumnBlock; }

// DC and Nyquist slices of a real tensor are real.
bool real_slice(Index l, Index k) { return l == 0 || 2 * l == k; }

}  // namespace

std::string_view to_string(SolverMode mode)
{
    return mode == SolverMode::Ista ? "ista" : "fista";
}

SolverMode parse_solver_mode(std::string_view text)
{
    if (text == "ista") return SolverMode::Ista;
    if (text == "fista") return SolverMode::Fista;
    throw ConfigError("unknown solver mode '" + std::string(text) + "' (expected ista or fista)");
}

void SolverConfig::validate() const
{
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(eta >= 1.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 1");
    if (!(rel_tol >= 0.0)) throw ConfigError("rel_tol must be nonnegative");
}

DataTerm::DataTerm(const Tensor3& dict, const Tensor3& x)
    : m_(dict.rows()), r_(dict.cols()), n_(x.cols()), k_(dict.depth())
{
    if (x.rows() != m_ || x.depth() != k_)
        throw ShapeError("DataTerm: dictionary " + std::to_string(m_) + "x" + std::to_string(r_) +
                         "x" + std::to_string(k_) + " does not conform with data");
    if (k_ < 1) throw ShapeError("DataTerm: depth must be at least 1");
    dict_hat_ = detail::dft3_half(dict);
    x_hat_ = detail::dft3_half(x);
    const Index half = dict_hat_.half_count();
    gram_.resize(static_cast<std::size_t>(half));
    cross_.resize(static_cast<std::size_t>(half));
    real_dict_.resize(static_cast<std::size_t>(half));
    real_gram_.resize(static_cast<std::size_t>(half));

#pragma omp parallel for schedule(static)
    for (Index l = 0; l < half; ++l) {
        const auto d = dict_hat_.slice(l);
        gram_[l].noalias() = d.adjoint() * d;
        cross_[l].noalias() = d.adjoint() * x_hat_.slice(l);
        if (real_slice(l, k_)) {
            real_dict_[l] = d.real();
            real_gram_[l] = gram_[l].real();
        }
    }
}

Tensor3 DataTerm::gradient(const Tensor3& b) const
{
    if (b.rows() != r_ || b.cols() != n_ || b.depth() != k_)
        throw ShapeError("DataTerm::gradient: coefficient shape mismatch");
    const FreqTensor b_hat = detail::dft3_half(b);
    FreqTensor g_hat(r_, n_, k_);
    const Index half = g_hat.half_count();
    const Index blocks = block_count(n_);

#pragma omp parallel for collapse(2) schedule(static)
    for (Index l = 0; l < half; ++l) {
        for (Index blk = 0; blk < blocks; ++blk) {
            const Index c0 = blk * kColumnBlock;
            const Index w = std::min(kColumnBlock, n_ - c0);
            auto out = g_hat.slice(l).middleCols(c0, w);
            if (real_slice(l, k_)) {
                const Matrix bb = b_hat.slice(l).middleCols(c0, w).real();
                Matrix g = -cross_[l].middleCols(c0, w).real();
                g.noalias() += real_gram_[l] * bb;
                out.real() = g;
                continue;
            }
            out.noalias() = gram_[l] * b_hat.slice(l).middleCols(c0, w);
            out -= cross_[l].middleCols(c0, w);
        }
    }
    return detail::idft3_half(g_hat);
}

double DataTerm::value(const Tensor3& b) const
{
    if (b.rows() != r_ || b.cols() != n_ || b.depth() != k_)
        throw ShapeError("DataTerm::value: coefficient shape mismatch");
    const FreqTensor b_hat = detail::dft3_half(b);
    const Index half = b_hat.half_count();
    const Index blocks = block_count(n_);
    std::vector<double> partial(static_cast<std::size_t>(half * blocks), 0.0);

#pragma omp parallel for collapse(2) schedule(static)
    for (Index l = 0; l < half; ++l) {
        for (Index blk = 0; blk < blocks; ++blk) {
            const Index c0 = blk * kColumnBlock;
            const Index w = std::min(kColumnBlock, n_ - c0);
            double sq = 0.0;
            if (real_slice(l, k_)) {
                const Matrix bb = b_hat.slice(l).middleCols(c0, w).real();
                Matrix resid = x_hat_.slice(l).middleCols(c0, w).real();
                resid.noalias() -= real_dict_[l] * bb;
                sq = resid.squaredNorm();
            } else {
                CMatrix resid = x_hat_.slice(l).middleCols(c0, w);
                resid.noalias() -= dict_hat_.slice(l) * b_hat.slice(l).middleCols(c0, w);
                sq = resid.squaredNorm();
            }
            partial[static_cast<std::size_t>(l * blocks + blk)] = FreqTensor::slice_weight(l, k_) * sq;
        }
    }
    double total = 0.0;
    for (double p : partial) total += p;
    // Parseval with the unnormalized forward transform.
    return 0.5 * total / static_cast<double>(k_);
}

double DataTerm::lipschitz() const
{
    double sum = 0.0;
    for (Index l = 0; l < dict_hat_.half_count(); ++l)
        sum += FreqTensor::slice_weight(l, k_) * gram_[static_cast<std::size_t>(l)].norm();
    return sum;
}

Tensor3 grad_f(const Tensor3& dict, const Tensor3& b, const Tensor3& x)
{
    if (dict.cols() != b.rows() || b.cols() != x.cols())
        throw ShapeError("grad_f: shape mismatch");
    return DataTerm(dict, x).gradient(b);
}

double lipschitz(const Tensor3& dict)
{
    if (dict.depth() < 1) throw ShapeError("lipschitz: depth must be at least 1");
    const FreqTensor d_hat = dft3(dict);
    double sum = 0.0;
    for (Index l = 0; l < d_hat.half_count(); ++l) {
        const auto d = d_hat.slice(l);
        sum += FreqTensor::slice_weight(l, dict.depth()) * (d.adjoint() * d).norm();
    }
    if (!(sum > 0.0)) throw SolverError("lipschitz: dictionary is all zero, no valid step size");
    return sum;
}

namespace {

void shrink_in_place(Tensor3& t, double tau)
{
    auto v = t.data();
    const Index count = t.size();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) v[i] = v[i] > tau ? v[i] - tau : (v[i] < -tau ? v[i] + tau : 0.0);
}

// c = b + momentum * (b - b_prev), reusing c's storage.
void extrapolate(const Tensor3& b, const Tensor3& b_prev, double momentum, Tensor3& c)
{
    const auto cur = b.data();
    const auto prev = b_prev.data();
    auto out = c.data();
    const Index count = b.size();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) out[i] = cur[i] + momentum * (cur[i] - prev[i]);
}

}  // namespace

Tensor3 soft_threshold(const Tensor3& t, double tau)
{
    if (!(tau >= 0.0)) throw ConfigError("soft_threshold: tau must be nonnegative");
    Tensor3 out = t;
    shrink_in_place(out, tau);
    return out;
}

double objective(const Tensor3& x, const Tensor3& dict, const Tensor3& b, double beta)
{
    const Tensor3 resid = x - tprod(dict, b);
    return 0.5 * resid.squared_norm() + beta * b.l1_norm();
}

SolveResult ista_t(const Tensor3& x, const Tensor3& dict, const SolverConfig& cfg,
                   const std::optional<Tensor3>& start)
{
    cfg.validate();
    const DataTerm data(dict, x);
    const double base = data.lipschitz();
    if (!(base > 0.0)) throw SolverError("ista_t: dictionary is all zero, no valid step size");
    const double lip = cfg.eta * base;
    const double step = 1.0 / lip;
    const double tau = cfg.beta / lip;

    Tensor3 b = start ? *start : Tensor3(data.atoms(), data.samples(), data.depth());
    if (b.rows() != data.atoms() || b.cols() != data.samples() || b.depth() != data.depth())
        throw ShapeError("ista_t: starting coefficients have the wrong shape");

    SolveResult result;
    auto& report = result.report;
    report.lipschitz_used = lip;

    double f_prev = data.value(b) + cfg.beta * b.l1_norm();
    if (!std::isfinite(f_prev)) throw SolverError("ista_t: non-finite objective at start");
    report.objective_trace.push_back(f_prev);

    Tensor3 best = b;
    double best_f = f_prev;
    Tensor3 b_prev = b;
    Tensor3 c = b;
    double t = 1.0;

    for (int p = 1; p <= cfg.max_iters; ++p) {
        Tensor3 g = data.gradient(c);
        g *= -step;
        g += c;
        shrink_in_place(g, tau);
        std::swap(b_prev, b);
        b = std::move(g);

        const double f = data.value(b) + cfg.beta * b.l1_norm();
        if (!std::isfinite(f))
            throw SolverError("ista_t: non-finite objective at iteration " + std::to_string(p) +
                              " (step bound invalid)");
        report.objective_trace.push_back(f);
        report.iterations_run = p;
        if (f < best_f) {
            best_f = f;
            best = b;
        }

        if (cfg.mode == SolverMode::Fista) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            extrapolate(b, b_prev, (t - 1.0) / t_next, c);
            t = t_next;
        } else {
            c = b;
        }

        const double change = std::abs(f_prev - f);
        const bool stalled = cfg.rel_tol > 0.0 && change <= cfg.rel_tol * std::abs(f_prev);
        const bool at_zero = f == 0.0 && f_prev == 0.0;
        f_prev = f;
        if (stalled || at_zero) break;
    }

    result.coeffs = std::move(best);
    report.final_sparsity = result.coeffs.size() == 0
                                ? 1.0
                                : static_cast<double>(result.coeffs.count_zeros()) /
                                      static_cast<double>(result.coeffs.size());
    return result;
}

}  // namespace sc2d
