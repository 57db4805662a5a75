#include "sc2d/dict_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sc2d/sparse_solver.hpp"

namespace sc2d {

namespace {

// Relative eigenvalue floor below which G is treated as rank deficient.
constexpr double kPivotRatio = 1e-12;
constexpr double kJitter = 1e-10;

void check_lambda(const SliceCache& cache, const Vector& lambda)
{
    if (lambda.size() != cache.r)
        throw ShapeError("lambda has " + std::to_string(lambda.size()) + " entries, expected " +
                         std::to_string(cache.r));
    if ((lambda.array() < 0.0).any() || !lambda.allFinite())
        throw ConfigError("lambda must be finite and nonnegative");
}

// 1e-10 * trace(G)/r when G is numerically rank deficient, else 0.
double slice_jitter(const CMatrix& gram)
{
    const Index r = gram.rows();
    if (r == 0) return 0.0;
    const double tr = gram.trace().real();
    if (!(tr > 0.0)) return 0.0;
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const Vector ev = eig.eigenvalues();
    if (ev.minCoeff() > kPivotRatio * ev.maxCoeff()) return 0.0;
    return kJitter * tr / static_cast<double>(r);
}

Eigen::LLT<CMatrix> factor_slice(const CMatrix& gram, const Vector& lambda, double jitter)
{
    CMatrix sys = gram;
    sys.diagonal() += lambda.cast<Complex>();
    sys.diagonal().array() += jitter;
    Eigen::LLT<CMatrix> llt(sys);
    if (llt.info() != Eigen::Success)
        throw SolverError("dictionary system is singular; lambda too small for rank-deficient B");
    return llt;
}

struct SliceSolution {
    CMatrix dict;     // m x r
    CMatrix inverse;  // (G + Lambda)^{-1}, only when requested
};

SliceSolution solve_slice(const SliceCache& cache, Index l, const Vector& lambda, bool want_inverse)
{
    const auto& gram = cache.gram[static_cast<std::size_t>(l)];
    const auto& cross = cache.cross[static_cast<std::size_t>(l)];
    const double jitter = cache.jitter.empty() ? 0.0 : cache.jitter[static_cast<std::size_t>(l)];
    const auto llt = factor_slice(gram, lambda, jitter);
    SliceSolution s;
    // D (G + L) = H  <=>  (G + L) D^H = H^H.
    s.dict = llt.solve(cross.adjoint()).adjoint();
    if (want_inverse) s.inverse = llt.solve(CMatrix::Identity(cache.r, cache.r));
    return s;
}

double atom_energy(const CMatrix& d, Index j) { return d.col(j).squaredNorm(); }

}  // namespace

SliceCache build_cache(const FreqTensor& x_hat, const FreqTensor& b_hat)
{
    if (x_hat.cols() != b_hat.cols() || x_hat.depth() != b_hat.depth())
        throw ShapeError("build_cache: data and coefficients do not conform");
    if (x_hat.depth() < 1) throw ShapeError("build_cache: depth must be at least 1");
    SliceCache cache;
    cache.m = x_hat.rows();
    cache.r = b_hat.rows();
    cache.k = x_hat.depth();
    const Index half = cache.half_count();
    cache.gram.resize(static_cast<std::size_t>(half));
    cache.cross.resize(static_cast<std::size_t>(half));
    cache.jitter.resize(static_cast<std::size_t>(half));
    std::vector<double> energy(static_cast<std::size_t>(half));

#pragma omp parallel for schedule(static)
    for (Index l = 0; l < half; ++l) {
        const auto b = b_hat.slice(l);
        const auto x = x_hat.slice(l);
        cache.gram[l].noalias() = b * b.adjoint();
        cache.cross[l].noalias() = x * b.adjoint();
        cache.jitter[l] = slice_jitter(cache.gram[l]);
        energy[l] = cache.weight(l) * x.squaredNorm();
    }
    for (double e : energy) cache.data_energy += e;
    return cache;
}

SliceCache build_cache(const Tensor3& x, const Tensor3& b)
{
    if (x.cols() != b.cols() || x.depth() != b.depth())
        throw ShapeError("build_cache: data and coefficients do not conform");
    return build_cache(dft3(x), dft3(b));
}

FreqTensor recover_dhat(const SliceCache& cache, const Vector& lambda)
{
    check_lambda(cache, lambda);
    FreqTensor out(cache.m, cache.r, cache.k);
    const Index half = cache.half_count();
    std::vector<std::string> failures(static_cast<std::size_t>(half));

#pragma omp parallel for schedule(static)
    for (Index l = 0; l < half; ++l) {
        try {
            out.slice(l) = solve_slice(cache, l, lambda, false).dict;
        } catch (const SolverError& e) {
            failures[l] = e.what();
        }
    }
    for (Index l = 0; l < half; ++l)
        if (!failures[l].empty())
            throw SolverError("slice " + std::to_string(l) + ": " + failures[l]);
    out.mirror();
    return out;
}

DualDerivatives dual_grad_hess(const SliceCache& cache, const Vector& lambda)
{
    check_lambda(cache, lambda);
    const Index half = cache.half_count();
    const Index r = cache.r;
    std::vector<double> fit(static_cast<std::size_t>(half));
    std::vector<Vector> energy(static_cast<std::size_t>(half));
    std::vector<Matrix> curvature(static_cast<std::size_t>(half));
    std::vector<std::string> failures(static_cast<std::size_t>(half));

#pragma omp parallel for schedule(static)
    for (Index l = 0; l < half; ++l) {
        try {
            const auto s = solve_slice(cache, l, lambda, true);
            const auto& h = cache.cross[l];
            const double w = cache.weight(l);
            fit[l] = w * (s.dict.array() * h.array().conjugate()).sum().real();
            Vector e(r);
            for (Index j = 0; j < r; ++j) e(j) = w * atom_energy(s.dict, j);
            energy[l] = std::move(e);
            const CMatrix dd = s.dict.adjoint() * s.dict;
            // d^2 g / d lambda_i d lambda_j = -2 Re[(D^H D)_{ji} (M^{-1})_{ij}]
            curvature[l] = -2.0 * w * (dd.transpose().array() * s.inverse.array()).real().matrix();
        } catch (const SolverError& e) {
            failures[l] = e.what();
        }
    }
    for (Index l = 0; l < half; ++l)
        if (!failures[l].empty())
            throw SolverError("slice " + std::to_string(l) + ": " + failures[l]);

    DualDerivatives out;
    out.gradient = Vector::Constant(r, -static_cast<double>(cache.k));
    out.hessian = Matrix::Zero(r, r);
    double fitted = 0.0;
    for (Index l = 0; l < half; ++l) {
        fitted += fit[l];
        out.gradient += energy[l];
        out.hessian += curvature[l];
    }
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
    out.value = cache.data_energy - fitted - static_cast<double>(cache.k) * lambda.sum();
    return out;
}

double dual_value(const SliceCache& cache, const Vector& lambda)
{
    check_lambda(cache, lambda);
    const Index half = cache.half_count();
    std::vector<double> fit(static_cast<std::size_t>(half));
    std::vector<std::string> failures(static_cast<std::size_t>(half));

#pragma omp parallel for schedule(static)
    for (Index l = 0; l < half; ++l) {
        try {
            const auto s = solve_slice(cache, l, lambda, false);
            fit[l] = cache.weight(l) *
                     (s.dict.array() * cache.cross[l].array().conjugate()).sum().real();
        } catch (const SolverError& e) {
            failures[l] = e.what();
        }
    }
    double fitted = 0.0;
    for (Index l = 0; l < half; ++l) {
        if (!failures[l].empty()) throw SolverError("slice " + std::to_string(l) + ": " + failures[l]);
        fitted += fit[l];
    }
    return cache.data_energy - fitted - static_cast<double>(cache.k) * lambda.sum();
}

namespace {

double projected_gradient_norm(const Vector& lambda, const Vector& grad, double lambda_min)
{
    double worst = 0.0;
    for (Index j = 0; j < lambda.size(); ++j) {
        const bool clamped = lambda(j) <= lambda_min;
        const double g = clamped ? std::max(grad(j), 0.0) : std::abs(grad(j));
        worst = std::max(worst, g);
    }
    return worst;
}

double slackness(const Vector& lambda, const Vector& grad)
{
    return lambda.size() == 0 ? 0.0 : (lambda.array() * grad.array()).abs().maxCoeff();
}

}  // namespace

DualState newton_solve(const SliceCache& cache, const Vector& lambda0, const NewtonOptions& opts)
{
    check_lambda(cache, lambda0);
    const Index r = cache.r;
    const double lmin = opts.lambda_min;

    DualState state;
    Vector lambda = lambda0.cwiseMax(lmin);
    DualDerivatives d = dual_grad_hess(cache, lambda);

    for (int it = 0; it <= opts.max_iters; ++it) {
        state.iterations = it;
        const double kkt = projected_gradient_norm(lambda, d.gradient, lmin);
        if (kkt <= opts.tol) {
            state.converged = true;
            break;
        }
        if (it == opts.max_iters) break;

        // Free set: variables off the clamp, or on it with an ascent gradient.
        std::vector<Index> free;
        for (Index j = 0; j < r; ++j)
            if (lambda(j) > lmin || d.gradient(j) > 0.0) free.push_back(j);

        Vector dir = Vector::Zero(r);
        if (!free.empty()) {
            const auto nf = static_cast<Index>(free.size());
            Matrix a(nf, nf);
            Vector g(nf);
            for (Index p = 0; p < nf; ++p) {
                g(p) = d.gradient(free[p]);
                for (Index q = 0; q < nf; ++q) a(p, q) = -d.hessian(free[p], free[q]);
            }
            const double ridge = 1e-12 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
            a.diagonal().array() += ridge;
            Eigen::LDLT<Matrix> ldlt(a);
            Vector step = ldlt.info() == Eigen::Success ? Vector(ldlt.solve(g)) : g;
            if (!step.allFinite() || step.dot(g) <= 0.0) step = g;
            for (Index p = 0; p < nf; ++p) dir(free[p]) = step(p);
        }

        bool accepted = false;
        bool stalled = false;
        double alpha = 1.0;
        for (int h = 0; h <= opts.max_halvings; ++h, alpha *= 0.5) {
            const Vector trial = (lambda + alpha * dir).cwiseMax(lmin);
            DualDerivatives dt;
            try {
                dt = dual_grad_hess(cache, trial);
            } catch (const SolverError&) {
                continue;
            }
            const double predicted = d.gradient.dot(trial - lambda);
            const bool armijo = dt.value >= d.value + opts.armijo * predicted;
            // Near the optimum the value change drops below its own rounding
            // error; accept a step that reduces the KKT residual without a
            // meaningful loss in value.
            const bool roundoff =
                dt.value >= d.value - 1e-13 * std::abs(d.value) &&
                projected_gradient_norm(trial, dt.gradient, lmin) < kkt;
            if (armijo || roundoff) {
                // Steps below the resolution of lambda cannot make progress.
                stalled = (trial - lambda).norm() <= 1e-15 * lambda.norm();
                lambda = trial;
                d = std::move(dt);
                accepted = true;
                break;
            }
        }
        if (!accepted || stalled) break;
    }

    state.lambda = lambda;
    state.dual_value = d.value;
    state.grad_norm = projected_gradient_norm(lambda, d.gradient, lmin);
    state.slackness = slackness(lambda, d.gradient);
    if (state.grad_norm <= opts.tol) state.converged = true;
    return state;
}

DictUpdateResult dict_update(const Tensor3& x, const Tensor3& b, const Tensor3& incumbent,
                             const Vector& lambda0, const NewtonOptions& opts)
{
    if (incumbent.rows() != x.rows() || incumbent.cols() != b.rows() ||
        incumbent.depth() != x.depth())
        throw ShapeError("dict_update: incumbent dictionary shape mismatch");

    DictUpdateResult out;
    if (b.l1_norm() == 0.0) {
        out.dict = incumbent;
        out.skipped = true;
        out.dual.lambda = lambda0;
        return out;
    }

    const SliceCache cache = build_cache(x, b);
    out.dual = newton_solve(cache, lambda0, opts);
    FreqTensor d_hat = recover_dhat(cache, out.dual.lambda);

    // Pull any atom that overshoots the bound by Newton tolerance back onto it.
    const Index k = cache.k;
    for (Index j = 0; j < cache.r; ++j) {
        double e = 0.0;
        for (Index l = 0; l < d_hat.half_count(); ++l) e += cache.weight(l) * d_hat.slice(l).col(j).squaredNorm();
        if (e > static_cast<double>(k)) {
            const double s = std::sqrt(static_cast<double>(k) / e);
            for (Index l = 0; l < d_hat.half_count(); ++l) d_hat.slice(l).col(j) *= s;
        }
    }
    d_hat.mirror();
    Tensor3 dict = idft3(d_hat);

    // Same guard in the time domain against rounding in the inverse transform.
    const auto norms = atom_norms(dict);
    for (Index j = 0; j < dict.cols(); ++j) {
        const double nj = norms[static_cast<std::size_t>(j)];
        if (nj > 1.0) {
            for (Index l = 0; l < k; ++l) dict.slice(l).col(j) /= nj;
        }
    }

    const auto inc_norms = atom_norms(incumbent);
    const bool incumbent_feasible =
        std::all_of(inc_norms.begin(), inc_norms.end(), [](double v) { return v * v <= 1.0 + 1e-8; });
    if (incumbent_feasible) {
        const double before = objective(x, incumbent, b, 0.0);
        const double after = objective(x, dict, b, 0.0);
        if (after > before) {
            out.dict = incumbent;
            out.kept_incumbent = true;
        }
    }
    if (!out.kept_incumbent) out.dict = std::move(dict);

    for (double nj : atom_norms(out.dict))
        if (nj == 0.0) ++out.dead_atoms;
    return out;
}

}  // namespace sc2d
