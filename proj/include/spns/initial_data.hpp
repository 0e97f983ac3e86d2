#pragma once

#include "spns/operators.hpp"
#include "spns/rng.hpp"

namespace spns {

// Classical Taylor--Green vortex u = a (cos x sin y, -sin x cos y) scaled to
// period L; a single (+-1,+-1) mode pair, an exact eigenfield of the Stokes
// operator whose convective term is a pure gradient.
inline SpectralVector taylor_green(const Grid& g, double amplitude = 1.0) {
    SpectralVector u(g);
    // cos x sin y = (e^{ix}+e^{-ix})(e^{iy}-e^{-iy})/(4i)
    const Complex quarter_over_i(0.0, -0.25);
    for (int s1 : {1, -1}) {
        for (int s2 : {1, -1}) {
            const double sy = s2 > 0 ? 1.0 : -1.0;
            u.x().mode(s1, s2) = amplitude * sy * quarter_over_i;
            const double sx = s1 > 0 ? 1.0 : -1.0;
            u.y().mode(s1, s2) = -amplitude * sx * quarter_over_i;
        }
    }
    u.project_real();
    return u;
}

// Exact Taylor--Green amplitude decay factor at time t.
inline double taylor_green_decay(double nu, const Grid& g, double t) {
    const double k = kTwoPi / g.L;
    return std::exp(-2.0 * nu * k * k * t);
}

// Mean-zero random solenoidal field with spectral decay |kappa|^{-decay},
// normalized to unit L2 norm. Deterministic per seed.
inline SpectralVector random_solenoidal(const Grid& g, uint64_t seed, int max_mode = 0,
                                        double decay = 2.0) {
    if (max_mode <= 0) max_mode = g.N / 4;
    CounterRng rng(substream_key(mix64(seed), 0xA11CE));
    SpectralVector u(g);
    uint64_t draw = 0;
    for (int n1 = -max_mode; n1 <= max_mode; ++n1) {
        for (int n2 = -max_mode; n2 <= max_mode; ++n2) {
            if (n1 == 0 && n2 == 0) continue;
            const double amp = std::pow(static_cast<double>(n1 * n1 + n2 * n2), -decay / 2.0);
            u.x().mode(n1, n2) = amp * Complex(rng.gaussian(draw), rng.gaussian(draw + 1));
            u.y().mode(n1, n2) = amp * Complex(rng.gaussian(draw + 2), rng.gaussian(draw + 3));
            draw += 4;
        }
    }
    u.project_real();
    SpectralVector sol = leray_project(u);
    const double n = l2_norm(sol);
    if (n > 0.0) sol *= 1.0 / n;
    return sol;
}

// Random mean-zero scalar with the same decay profile, unit L2 norm.
inline SpectralScalar random_scalar(const Grid& g, uint64_t seed, int max_mode = 0,
                                    double decay = 2.0) {
    if (max_mode <= 0) max_mode = g.N / 4;
    CounterRng rng(substream_key(mix64(seed), 0x5CA1A));
    SpectralScalar f(g);
    uint64_t draw = 0;
    for (int n1 = -max_mode; n1 <= max_mode; ++n1) {
        for (int n2 = -max_mode; n2 <= max_mode; ++n2) {
            if (n1 == 0 && n2 == 0) continue;
            const double amp = std::pow(static_cast<double>(n1 * n1 + n2 * n2), -decay / 2.0);
            f.mode(n1, n2) = amp * Complex(rng.gaussian(draw), rng.gaussian(draw + 1));
            draw += 2;
        }
    }
    f.project_real();
    const double n = l2_norm(f);
    if (n > 0.0) f *= 1.0 / n;
    return f;
}

} // namespace spns
