#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "spns/field.hpp"

namespace spns {

namespace detail {
// FFTW plan creation is not thread-safe; execution is.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

// Complex-to-complex 2D transform of one fixed size. Owns its buffers and
// plans, so one instance must not be shared across threads.
class Transform2d {
public:
    explicit Transform2d(int n) : n_(n), buf_(static_cast<size_t>(n) * n) {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
        fwd_ = fftw_plan_dft_2d(n_, n_, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(n_, n_, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Transform2d() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    Transform2d(const Transform2d&) = delete;
    Transform2d& operator=(const Transform2d&) = delete;

    int size() const { return n_; }
    std::vector<Complex>& buffer() { return buf_; }

    // In-place unnormalized DFT, exponent exp(-i 2pi jk/n).
    void forward() { fftw_execute(fwd_); }
    // In-place unnormalized inverse DFT, exponent exp(+i 2pi jk/n).
    void backward() { fftw_execute(bwd_); }

private:
    int n_;
    std::vector<Complex> buf_;
    fftw_plan fwd_, bwd_;
};

// Per-thread transform cache keyed by grid size. Fields are immutable values;
// all scratch lives here, so concurrent callers never share mutable state.
inline Transform2d& transform_for(int n) {
    thread_local std::map<int, std::unique_ptr<Transform2d>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Transform2d>(n)).first;
    return *it->second;
}

// Evaluates f on the physical grid of size n_phys >= N (zero-padded modes).
// Output is row-major real values at x_j = (j1,j2) * L / n_phys.
inline std::vector<double> to_physical(const SpectralScalar& f, int n_phys) {
    const int N = f.N();
    if (n_phys < N) throw std::invalid_argument("fft: physical grid smaller than spectral grid");
    Transform2d& tr = transform_for(n_phys);
    auto& buf = tr.buffer();
    std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
    for (int i1 = 0; i1 < N; ++i1) {
        const int n1 = f.grid().mode(i1);
        const int j1 = n1 >= 0 ? n1 : n1 + n_phys;
        for (int i2 = 0; i2 < N; ++i2) {
            const int n2 = f.grid().mode(i2);
            const int j2 = n2 >= 0 ? n2 : n2 + n_phys;
            buf[static_cast<size_t>(j1) * n_phys + j2] = f.at(i1, i2);
        }
    }
    tr.backward();
    std::vector<double> out(static_cast<size_t>(n_phys) * n_phys);
    for (size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
    return out;
}

// Projects physical samples on an n_phys grid back to the N-mode coefficient
// array (Galerkin truncation), then pins the reality invariants.
inline SpectralScalar from_physical(const std::vector<double>& values, const Grid& g, int n_phys) {
    if (values.size() != static_cast<size_t>(n_phys) * n_phys)
        throw std::invalid_argument("fft: sample count does not match grid");
    Transform2d& tr = transform_for(n_phys);
    auto& buf = tr.buffer();
    for (size_t i = 0; i < values.size(); ++i) buf[i] = Complex(values[i], 0.0);
    tr.forward();
    const double scale = 1.0 / (static_cast<double>(n_phys) * n_phys);
    SpectralScalar f(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const int n1 = g.mode(i1);
        const int j1 = n1 >= 0 ? n1 : n1 + n_phys;
        for (int i2 = 0; i2 < g.N; ++i2) {
            const int n2 = g.mode(i2);
            const int j2 = n2 >= 0 ? n2 : n2 + n_phys;
            f.at(i1, i2) = scale * buf[static_cast<size_t>(j1) * n_phys + j2];
        }
    }
    f.project_real();
    return f;
}

inline std::vector<double> to_physical(const SpectralScalar& f) { return to_physical(f, f.N()); }

inline SpectralScalar from_physical(const std::vector<double>& values, const Grid& g) {
    return from_physical(values, g, g.N);
}

} // namespace spns
