#include "tube_fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "sc2d/error.hpp"

namespace sc2d::detail {

namespace {

enum class Kind { R2C, C2R, C2C };

using Key = std::tuple<Kind, int, long, long>;

struct PlanCache {
    std::mutex mutex;
    std::map<Key, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& [key, p] : plans) fftw_destroy_plan(p);
    }
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const std::complex<double>* p)
{
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

// FFTW_ESTIMATE keeps plan selection deterministic and leaves the arrays
// untouched during planning, so the caller's buffers can be passed in.
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_plan plan_for(Kind kind, int k, long stride, long count, void* in, void* out)
{
    auto& c = cache();
    std::lock_guard lock(c.mutex);
    const Key key{kind, k, stride, count};
    if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;

    int n[] = {k};
    const int s = static_cast<int>(stride);
    const int howmany = static_cast<int>(count);
    fftw_plan p = nullptr;
    switch (kind) {
    case Kind::R2C:
        p = fftw_plan_many_dft_r2c(1, n, howmany, static_cast<double*>(in), nullptr, s, 1,
                                   static_cast<fftw_complex*>(out), nullptr, s, 1, kFlags);
        break;
    case Kind::C2R:
        p = fftw_plan_many_dft_c2r(1, n, howmany, static_cast<fftw_complex*>(in), nullptr, s, 1,
                                   static_cast<double*>(out), nullptr, s, 1, kFlags | FFTW_PRESERVE_INPUT);
        break;
    case Kind::C2C:
        p = fftw_plan_many_dft(1, n, howmany, static_cast<fftw_complex*>(in), nullptr, s, 1,
                               static_cast<fftw_complex*>(out), nullptr, s, 1, FFTW_FORWARD, kFlags);
        break;
    }
    if (!p) throw Error("FFTW could not create a plan for tube length " + std::to_string(k));
    c.plans.emplace(key, p);
    return p;
}

}  // namespace

void r2c_batch(int k, long stride, long count, const double* in, std::complex<double>* out)
{
    double* src = const_cast<double*>(in);  // r2c does not modify its input
    fftw_plan p = plan_for(Kind::R2C, k, stride, count, src, as_fftw(out));
    fftw_execute_dft_r2c(p, src, as_fftw(out));
}

void c2r_batch(int k, long stride, long count, const std::complex<double>* in, double* out)
{
    fftw_plan p = plan_for(Kind::C2R, k, stride, count, as_fftw(in), out);
    fftw_execute_dft_c2r(p, as_fftw(in), out);
}

void c2c_batch(int k, long stride, long count, const std::complex<double>* in, std::complex<double>* out)
{
    fftw_plan p = plan_for(Kind::C2C, k, stride, count, as_fftw(in), as_fftw(out));
    fftw_execute_dft(p, as_fftw(in), as_fftw(out));
}

}  // namespace sc2d::detail
