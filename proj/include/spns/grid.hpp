#pragma once

#include <cmath>
#include <stdexcept>

namespace spns {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on (0,L)^2 with N Fourier modes per dimension.
// Wavevectors are kappa_n = (2*pi/L) * n for n in {-N/2,...,N/2-1}^2;
// the Nyquist rows n_i = -N/2 are kept identically zero so that real
// fields stay real under spectral differentiation.
struct Grid {
    double L = kTwoPi;
    int N = 32;
    double dealias_pad = 1.5;

    Grid() = default;
    Grid(double L_, int N_, double pad = 1.5) : L(L_), N(N_), dealias_pad(pad) {
        validate();
    }

    void validate() const {
        if (L <= 0.0) throw std::invalid_argument("grid: L must be positive");
        if (N < 8 || N % 2 != 0) throw std::invalid_argument("grid: N must be even and >= 8");
        if (dealias_pad < 1.5) throw std::invalid_argument("grid: dealias_pad must be >= 3/2");
    }

    // Signed mode number for storage index i in FFT layout 0,1,...,N/2-1,-N/2,...,-1.
    int mode(int i) const { return i < N / 2 ? i : i - N; }

    // Storage index of signed mode n (n in [-N/2, N/2-1]).
    int index_of(int n) const { return n >= 0 ? n : n + N; }

    double kappa(int n) const { return kTwoPi / L * static_cast<double>(n); }

    bool is_nyquist(int i) const { return i == N / 2; }

    // Physical grid size used for dealiased products; even, >= ceil(pad*N).
    int padded() const {
        int m = static_cast<int>(std::ceil(dealias_pad * static_cast<double>(N)));
        if (m % 2 != 0) ++m;
        return m;
    }

    bool operator==(const Grid& o) const {
        return L == o.L && N == o.N && dealias_pad == o.dealias_pad;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

} // namespace spns
