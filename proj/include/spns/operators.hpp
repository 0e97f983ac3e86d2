#pragma once

#include <cmath>
#include <string>

#include "spns/fft.hpp"

namespace spns {

inline SpectralVector gradient(const SpectralScalar& f) {
    const Grid& g = f.grid();
    SpectralVector out(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            const Complex c = f.at(i1, i2);
            out.x().at(i1, i2) = Complex(0.0, k1) * c;
            out.y().at(i1, i2) = Complex(0.0, k2) * c;
        }
    }
    out.project_real();
    return out;
}

inline SpectralScalar divergence(const SpectralVector& u) {
    const Grid& g = u.grid();
    SpectralScalar out(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            out.at(i1, i2) = Complex(0.0, k1) * u.x().at(i1, i2) + Complex(0.0, k2) * u.y().at(i1, i2);
        }
    }
    out.project_real();
    return out;
}

inline SpectralScalar laplacian(const SpectralScalar& f) {
    const Grid& g = f.grid();
    SpectralScalar out(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            out.at(i1, i2) = -(k1 * k1 + k2 * k2) * f.at(i1, i2);
        }
    }
    out.project_real();
    return out;
}

inline SpectralVector laplacian(const SpectralVector& u) {
    return SpectralVector(laplacian(u.x()), laplacian(u.y()));
}

inline double l2_norm(const SpectralScalar& f);

namespace detail {
inline void require_mean_free(const SpectralScalar& f, const char* op) {
    const double mean = std::abs(f.mode(0, 0));
    if (mean > 1e-12 * std::max(l2_norm(f), 1e-300))
        throw std::invalid_argument(std::string(op) + ": field has nonzero spatial average");
}
} // namespace detail

// Inverse of the (negative-definite) Laplacian on mean-zero fields; the
// kernel mode stays pinned at zero.
inline SpectralScalar inv_laplacian(const SpectralScalar& f) {
    detail::require_mean_free(f, "inv_laplacian");
    const Grid& g = f.grid();
    SpectralScalar out(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            if (i1 == 0 && i2 == 0) continue;
            const double k2 = g.kappa(g.mode(i2));
            const double k2sum = k1 * k1 + k2 * k2;
            if (k2sum > 0.0) out.at(i1, i2) = -f.at(i1, i2) / k2sum;
        }
    }
    out.project_real();
    return out;
}

inline SpectralVector inv_laplacian(const SpectralVector& u) {
    return SpectralVector(inv_laplacian(u.x()), inv_laplacian(u.y()));
}

// Helmholtz--Leray projection onto divergence-free fields: per mode n != 0,
// u_hat -> (I - kappa kappa^T / |kappa|^2) u_hat.
inline SpectralVector leray_project(const SpectralVector& u) {
    const Grid& g = u.grid();
    SpectralVector out(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            const double ks = k1 * k1 + k2 * k2;
            const Complex ux = u.x().at(i1, i2);
            const Complex uy = u.y().at(i1, i2);
            if (ks == 0.0) continue;
            const Complex kdotu = (k1 * ux + k2 * uy) / ks;
            out.x().at(i1, i2) = ux - k1 * kdotu;
            out.y().at(i1, i2) = uy - k2 * kdotu;
        }
    }
    out.project_real();
    return out;
}

// L2 inner product (f,g) = integral over the period cell.
inline double inner(const SpectralScalar& f, const SpectralScalar& g) {
    f.check_same_grid(g);
    const double L2 = f.grid().L * f.grid().L;
    double acc = 0.0;
    const auto& a = f.data();
    const auto& b = g.data();
    for (size_t i = 0; i < a.size(); ++i)
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return L2 * acc;
}

inline double inner(const SpectralVector& u, const SpectralVector& v) {
    return inner(u.x(), v.x()) + inner(u.y(), v.y());
}

// Sobolev norm of order s on the A^{s/2} scale:
//   ||f||_s^2 = L^2 * sum_n |kappa_n|^{2s} |f_hat(n)|^2.
// s = 0 is the L2 norm; s < 0 requires a mean-free field.
inline double sobolev_norm(const SpectralScalar& f, double s) {
    if (s < 0.0) detail::require_mean_free(f, "sobolev_norm");
    const Grid& g = f.grid();
    double acc = 0.0;
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            const double ks = k1 * k1 + k2 * k2;
            const double a = std::norm(f.at(i1, i2));
            if (ks == 0.0) {
                if (s == 0.0) acc += a;
                continue;
            }
            acc += std::pow(ks, s) * a;
        }
    }
    return g.L * std::sqrt(acc);
}

inline double sobolev_norm(const SpectralVector& u, double s) {
    const double nx = sobolev_norm(u.x(), s);
    const double ny = sobolev_norm(u.y(), s);
    return std::sqrt(nx * nx + ny * ny);
}

inline double l2_norm(const SpectralScalar& f) {
    const double L2 = f.grid().L * f.grid().L;
    double acc = 0.0;
    for (const auto& c : f.data()) acc += std::norm(c);
    return std::sqrt(L2 * acc);
}

inline double l2_norm(const SpectralVector& u) {
    const double nx = l2_norm(u.x());
    const double ny = l2_norm(u.y());
    return std::sqrt(nx * nx + ny * ny);
}

// ||grad f|| in L2, equal to sobolev_norm(f, 1).
inline double h1_norm(const SpectralScalar& f) { return sobolev_norm(f, 1.0); }
inline double h1_norm(const SpectralVector& u) { return sobolev_norm(u, 1.0); }

// Full W^{1,2} norm (L2 part plus gradient part), used for V-norm diagnostics.
inline double w12_norm(const SpectralVector& u) {
    const double a = l2_norm(u);
    const double b = h1_norm(u);
    return std::sqrt(a * a + b * b);
}

// L4 norm by 4th-power quadrature on the dealias-padded physical grid.
inline double l4_norm(const SpectralScalar& f) {
    const int np = f.grid().padded();
    const auto vals = to_physical(f, np);
    double acc = 0.0;
    for (double v : vals) acc += v * v * v * v;
    const double cell = (f.grid().L / np) * (f.grid().L / np);
    return std::pow(cell * acc, 0.25);
}

// Vector L4 norm of the pointwise Euclidean magnitude.
inline double l4_norm(const SpectralVector& u) {
    const int np = u.grid().padded();
    const auto vx = to_physical(u.x(), np);
    const auto vy = to_physical(u.y(), np);
    double acc = 0.0;
    for (size_t i = 0; i < vx.size(); ++i) {
        const double m2 = vx[i] * vx[i] + vy[i] * vy[i];
        acc += m2 * m2;
    }
    const double cell = (u.grid().L / np) * (u.grid().L / np);
    return std::pow(cell * acc, 0.25);
}

enum class NormKind { L2, L4 };

inline double norm(const SpectralScalar& f, NormKind kind) {
    return kind == NormKind::L2 ? l2_norm(f) : l4_norm(f);
}
inline double norm(const SpectralVector& u, NormKind kind) {
    return kind == NormKind::L2 ? l2_norm(u) : l4_norm(u);
}
inline double norm(const SpectralScalar& f, double s) { return sobolev_norm(f, s); }
inline double norm(const SpectralVector& u, double s) { return sobolev_norm(u, s); }

} // namespace spns
