#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spns/grid.hpp"

namespace spns {

using Complex = std::complex<double>;

// Mean-zero real-valued periodic scalar field stored as Fourier coefficients:
//   f(x) = sum_n c(n) exp(i kappa_n . x),  c(-n) = conj(c(n)),  c(0) = 0.
// Row-major storage, index (i1,i2) -> i1*N+i2 in FFT mode layout.
class SpectralScalar {
public:
    SpectralScalar() = default;
    explicit SpectralScalar(const Grid& g) : grid_(g), c_(static_cast<size_t>(g.N) * g.N) {}

    const Grid& grid() const { return grid_; }
    int N() const { return grid_.N; }

    Complex& at(int i1, int i2) { return c_[static_cast<size_t>(i1) * grid_.N + i2]; }
    const Complex& at(int i1, int i2) const { return c_[static_cast<size_t>(i1) * grid_.N + i2]; }

    // Access by signed mode numbers.
    Complex& mode(int n1, int n2) { return at(grid_.index_of(n1), grid_.index_of(n2)); }
    const Complex& mode(int n1, int n2) const { return at(grid_.index_of(n1), grid_.index_of(n2)); }

    std::vector<Complex>& data() { return c_; }
    const std::vector<Complex>& data() const { return c_; }

    void set_zero() { std::fill(c_.begin(), c_.end(), Complex(0.0, 0.0)); }

    // Pins the invariants: zero mean, zero Nyquist rows, Hermitian symmetry.
    // Symmetry is imposed by averaging c(n) with conj(c(-n)).
    void project_real() {
        const int N = grid_.N;
        at(0, 0) = Complex(0.0, 0.0);
        for (int i = 0; i < N; ++i) {
            at(N / 2, i) = Complex(0.0, 0.0);
            at(i, N / 2) = Complex(0.0, 0.0);
        }
        for (int i1 = 0; i1 < N; ++i1) {
            if (grid_.is_nyquist(i1)) continue;
            const int j1 = (N - i1) % N;
            for (int i2 = 0; i2 < N; ++i2) {
                if (grid_.is_nyquist(i2)) continue;
                const int j2 = (N - i2) % N;
                if (i1 * N + i2 >= j1 * N + j2) continue;
                const Complex a = at(i1, i2);
                const Complex b = at(j1, j2);
                const Complex avg = 0.5 * (a + std::conj(b));
                at(i1, i2) = avg;
                at(j1, j2) = std::conj(avg);
            }
        }
        // Self-conjugate entries (n = -n mod N excluding Nyquist): only (0,0), already pinned.
        at(0, 0) = Complex(0.0, 0.0);
    }

    // Max deviation from Hermitian symmetry; diagnostic only.
    double hermitian_defect() const {
        const int N = grid_.N;
        double worst = 0.0;
        for (int i1 = 0; i1 < N; ++i1) {
            const int j1 = (N - i1) % N;
            for (int i2 = 0; i2 < N; ++i2) {
                const int j2 = (N - i2) % N;
                worst = std::max(worst, std::abs(at(i1, i2) - std::conj(at(j1, j2))));
            }
        }
        return worst;
    }

    SpectralScalar& operator+=(const SpectralScalar& o) {
        check_same_grid(o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    SpectralScalar& operator-=(const SpectralScalar& o) {
        check_same_grid(o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    SpectralScalar& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }

    friend SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b) { return a += b; }
    friend SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b) { return a -= b; }
    friend SpectralScalar operator*(double s, SpectralScalar a) { return a *= s; }

    void check_same_grid(const SpectralScalar& o) const {
        if (grid_ != o.grid_) throw std::invalid_argument("field: grid mismatch");
    }

private:
    Grid grid_;
    std::vector<Complex> c_;
};

// Two-component vector field sharing one grid.
class SpectralVector {
public:
    SpectralVector() = default;
    explicit SpectralVector(const Grid& g) : x_(g), y_(g) {}
    SpectralVector(SpectralScalar x, SpectralScalar y) : x_(std::move(x)), y_(std::move(y)) {
        if (x_.grid() != y_.grid()) throw std::invalid_argument("field: component grid mismatch");
    }

    const Grid& grid() const { return x_.grid(); }

    SpectralScalar& x() { return x_; }
    SpectralScalar& y() { return y_; }
    const SpectralScalar& x() const { return x_; }
    const SpectralScalar& y() const { return y_; }

    SpectralScalar& comp(int j) { return j == 0 ? x_ : y_; }
    const SpectralScalar& comp(int j) const { return j == 0 ? x_ : y_; }

    void set_zero() { x_.set_zero(); y_.set_zero(); }
    void project_real() { x_.project_real(); y_.project_real(); }

    SpectralVector& operator+=(const SpectralVector& o) { x_ += o.x_; y_ += o.y_; return *this; }
    SpectralVector& operator-=(const SpectralVector& o) { x_ -= o.x_; y_ -= o.y_; return *this; }
    SpectralVector& operator*=(double s) { x_ *= s; y_ *= s; return *this; }

    friend SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
    friend SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
    friend SpectralVector operator*(double s, SpectralVector a) { return a *= s; }

private:
    SpectralScalar x_, y_;
};

} // namespace spns
