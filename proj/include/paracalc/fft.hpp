#pragma once

// Thin FFTW wrapper. Plans are created once per (shape, direction) under a
// mutex and executed through the new-array interface, which FFTW documents
// as thread-safe.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace paracalc::fft {

using cplx = std::complex<double>;

namespace detail {

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<int, int, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }
};

inline PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

inline fftw_plan plan_for(int rank, int n, int sign) {
    auto& c = cache();
    std::lock_guard lock(c.mutex);
    const auto key = std::make_tuple(rank, n, sign);
    if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;
    std::vector<cplx> in(static_cast<std::size_t>(rank == 1 ? n : n * n));
    std::vector<cplx> out(in.size());
    int dims[2] = {n, n};
    fftw_plan p = fftw_plan_dft(rank, dims, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    c.plans.emplace(key, p);
    return p;
}

}  // namespace detail

/// Unnormalized transform out[k] = sum_j in[j] exp(sign * 2 pi i j.k / n)
/// over a rank-1 or rank-2 array of n points per axis.
inline void execute(int rank, int n, int sign, std::span<const cplx> in, std::span<cplx> out) {
    fftw_plan p = detail::plan_for(rank, n, sign);
    // FFTW's new-array execute takes non-const input; it does not write to it
    // for out-of-place plans.
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace paracalc::fft
