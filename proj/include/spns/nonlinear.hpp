#pragma once

#include "spns/operators.hpp"

namespace spns {

namespace detail {

inline SpectralScalar partial(const SpectralScalar& f, int dim) {
    const Grid& g = f.grid();
    SpectralScalar out(g);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            out.at(i1, i2) = Complex(0.0, dim == 0 ? k1 : k2) * f.at(i1, i2);
        }
    }
    out.project_real();
    return out;
}

struct ConvectionSamples {
    int np;
    std::vector<double> ux, uy, divu;
    std::vector<double> vx, vy;
    std::vector<double> dvx_dx, dvx_dy, dvy_dx, dvy_dy;
};

// Physical-space samples of everything B/B~ needs, on the padded grid so the
// quadratic products are alias-free after truncation back to N modes.
inline ConvectionSamples convection_samples(const SpectralVector& u, const SpectralVector& v,
                                            bool with_div) {
    u.x().check_same_grid(v.x());
    ConvectionSamples s;
    s.np = u.grid().padded();
    s.ux = to_physical(u.x(), s.np);
    s.uy = to_physical(u.y(), s.np);
    s.dvx_dx = to_physical(partial(v.x(), 0), s.np);
    s.dvx_dy = to_physical(partial(v.x(), 1), s.np);
    s.dvy_dx = to_physical(partial(v.y(), 0), s.np);
    s.dvy_dy = to_physical(partial(v.y(), 1), s.np);
    if (with_div) {
        s.divu = to_physical(divergence(u), s.np);
        s.vx = to_physical(v.x(), s.np);
        s.vy = to_physical(v.y(), s.np);
    }
    return s;
}

inline void convection_products(const ConvectionSamples& s, bool with_div,
                                std::vector<double>& w1, std::vector<double>& w2) {
    const size_t n = s.ux.size();
    w1.resize(n);
    w2.resize(n);
    for (size_t i = 0; i < n; ++i) {
        w1[i] = s.ux[i] * s.dvx_dx[i] + s.uy[i] * s.dvx_dy[i];
        w2[i] = s.ux[i] * s.dvy_dx[i] + s.uy[i] * s.dvy_dy[i];
    }
    if (with_div) {
        for (size_t i = 0; i < n; ++i) {
            w1[i] += 0.5 * s.divu[i] * s.vx[i];
            w2[i] += 0.5 * s.divu[i] * s.vy[i];
        }
    }
}

inline SpectralVector convection_apply(const SpectralVector& u, const SpectralVector& v,
                                       bool with_div) {
    ConvectionSamples s = convection_samples(u, v, with_div);
    std::vector<double> w1, w2;
    convection_products(s, with_div, w1, w2);
    const Grid& g = u.grid();
    return SpectralVector(from_physical(w1, g, s.np), from_physical(w2, g, s.np));
}

} // namespace detail

// B(u,v) = [u.grad]v, Galerkin-truncated back to N modes.
inline SpectralVector b_apply(const SpectralVector& u, const SpectralVector& v) {
    return detail::convection_apply(u, v, false);
}

// Skew-symmetrized convection B~(u,v) = [u.grad]v + (div u)v/2. The div
// correction makes the associated trilinear form vanish on its diagonal even
// for non-solenoidal u, which the penalized schemes rely on.
inline SpectralVector b_tilde_apply(const SpectralVector& u, const SpectralVector& v) {
    return detail::convection_apply(u, v, true);
}

// b~(u,v,w) = <B~(u,v), w>, evaluated as padded physical quadrature of the
// full (untruncated) product against band-limited w. Cubic integrands of
// Nyquist-free fields are exact on the 3/2-padded grid, so this route agrees
// with pairing the truncated B~ coefficients to roundoff.
inline double trilinear(const SpectralVector& u, const SpectralVector& v,
                        const SpectralVector& w) {
    u.x().check_same_grid(w.x());
    detail::ConvectionSamples s = detail::convection_samples(u, v, true);
    std::vector<double> w1, w2;
    detail::convection_products(s, true, w1, w2);
    const auto wx = to_physical(w.x(), s.np);
    const auto wy = to_physical(w.y(), s.np);
    double acc = 0.0;
    for (size_t i = 0; i < w1.size(); ++i) acc += w1[i] * wx[i] + w2[i] * wy[i];
    const double cell = (u.grid().L / s.np) * (u.grid().L / s.np);
    return cell * acc;
}

} // namespace spns
