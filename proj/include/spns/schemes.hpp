#pragma once

#include <cstdio>
#include <functional>
#include <optional>
#include <string>

#include "spns/noise.hpp"
#include "spns/nonlinear.hpp"

namespace spns {

struct SchemeParams {
    double nu = 1.0;       // viscosity
    double k = 0.5 / 64;   // time step
    int M = 64;            // step count, k*M = T
    double epsilon = 0.1;  // penalty parameter (used when uncoupled)
    double eta = 0.4;      // coupling exponent, 0 < eta < 1/2
    double alpha = 1.5;    // projection stabilizer, alpha > 1
    bool couple_eps_to_k = true;
    bool lagged_advection = false;  // semi-implicit variant: advecting field lagged one step

    double T() const { return k * M; }

    double eps() const { return couple_eps_to_k ? std::pow(k, eta) : epsilon; }

    void validate() const {
        if (nu <= 0.0) throw std::invalid_argument("scheme.nu: must be positive");
        if (k <= 0.0) throw std::invalid_argument("scheme.k: must be positive");
        if (M < 0) throw std::invalid_argument("scheme.M: must be nonnegative");
        if (!(alpha > 1.0)) throw std::invalid_argument("scheme.alpha: must exceed 1");
        if (!(eta > 0.0 && eta < 0.5))
            throw std::invalid_argument("scheme.eta: must lie in the open interval (0, 1/2)");
        if (!couple_eps_to_k && epsilon <= 0.0)
            throw std::invalid_argument("scheme.epsilon: must be positive");
    }
};

struct SolverOpts {
    double picard_tol = 1e-11;
    int picard_max_iter = 100;
    double divergence_guard = 1e6;  // max ||u|| growth factor per step
};

struct PicardDivergedError : std::runtime_error {
    int step;
    int iterations;
    PicardDivergedError(int step_, int iters)
        : std::runtime_error("picard iteration diverged at step " + std::to_string(step_) +
                             " after " + std::to_string(iters) + " iterations"),
          step(step_), iterations(iters) {}
};

struct BlowUpError : std::runtime_error {
    int step;
    explicit BlowUpError(int step_)
        : std::runtime_error("trajectory blew up at step " + std::to_string(step_)), step(step_) {}
};

// State advanced by the penalized schemes: the projected velocity u^l, the
// projector potential phi^l, the pressure p^l, and the last intermediates.
struct PenaltyState {
    SpectralVector u;
    SpectralScalar phi;
    SpectralScalar p;
    SpectralVector u_tilde;
    SpectralScalar p_tilde;
    int step = 0;
    int last_picard_iters = 0;
};

// Builds the step-0 state. Initial data carrying more than roundoff
// divergence is Leray-projected (analytic initializers may be slightly off).
inline PenaltyState make_penalty_state(const SpectralVector& u0) {
    SpectralVector u = u0;
    const double div_rel = l2_norm(divergence(u)) / std::max(h1_norm(u), 1e-300);
    if (div_rel > 1e-12) {
        std::fprintf(stderr, "warning: initial data has divergence %.3e, projecting\n", div_rel);
        u = leray_project(u);
    }
    PenaltyState s;
    s.u = u;
    s.phi = SpectralScalar(u.grid());
    s.p = SpectralScalar(u.grid());
    s.u_tilde = u;
    s.p_tilde = SpectralScalar(u.grid());
    s.step = 0;
    return s;
}

namespace detail {

// Per-mode exact inverse of (1 + nu k |kappa|^2) I + (k/eps) kappa kappa^T.
inline SpectralVector penalty_block_solve(const SpectralVector& b, double nu, double k,
                                          double eps) {
    const Grid& g = b.grid();
    SpectralVector out(g);
    const double c = k / eps;
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            const double ks = k1 * k1 + k2 * k2;
            const double a = 1.0 + nu * k * ks;
            const Complex bx = b.x().at(i1, i2);
            const Complex by = b.y().at(i1, i2);
            const Complex kdotb = k1 * bx + k2 * by;
            const double gfac = c / (a + c * ks);
            out.x().at(i1, i2) = (bx - gfac * k1 * kdotb) / a;
            out.y().at(i1, i2) = (by - gfac * k2 * kdotb) / a;
        }
    }
    out.project_real();
    return out;
}

// Diagonal inverse of (1 + nu k |kappa|^2) after Leray projection.
inline SpectralVector stokes_diagonal_solve(const SpectralVector& b, double nu, double k) {
    const Grid& g = b.grid();
    SpectralVector out = leray_project(b);
    for (int i1 = 0; i1 < g.N; ++i1) {
        const double k1 = g.kappa(g.mode(i1));
        for (int i2 = 0; i2 < g.N; ++i2) {
            const double k2 = g.kappa(g.mode(i2));
            const double a = 1.0 + nu * k * (k1 * k1 + k2 * k2);
            out.x().at(i1, i2) /= a;
            out.y().at(i1, i2) /= a;
        }
    }
    return out;
}

enum class Advection { None, Self, Shifted };

// Picard loop shared by all implicit solves. solve(rhs) inverts the linear
// part exactly; nonlinearity is evaluated at the previous iterate (fully
// lagged) or with a frozen advecting field when lagged_advection is set.
template <class LinearSolve>
SpectralVector picard_solve(const SpectralVector& rhs0, const SpectralVector& guess,
                            double k, Advection adv, bool lagged,
                            const SpectralVector* shift_now, const SpectralVector* shift_prev,
                            const SpectralVector* prev_time_field, const SolverOpts& opts,
                            int step, int& iters_out, LinearSolve&& solve) {
    if (adv == Advection::None) {
        iters_out = 0;
        return solve(rhs0);
    }
    SpectralVector it = guess;
    double prev_diff = -1.0;
    int grew = 0;
    for (int m = 1; m <= opts.picard_max_iter; ++m) {
        SpectralVector transported = it;
        if (adv == Advection::Shifted) transported += *shift_now;
        SpectralVector advecting = transported;
        if (lagged) {
            advecting = *prev_time_field;
            if (adv == Advection::Shifted) advecting += *shift_prev;
        }
        SpectralVector rhs = rhs0;
        SpectralVector conv = b_tilde_apply(advecting, transported);
        conv *= k;
        rhs -= conv;
        SpectralVector next = solve(rhs);
        SpectralVector delta = next - it;
        const double diff = l2_norm(delta);
        const double scale = std::max(l2_norm(next), 1e-300);
        if (!std::isfinite(diff)) throw PicardDivergedError(step, m);
        if (diff <= opts.picard_tol * scale) {
            iters_out = m;
            return next;
        }
        if (prev_diff >= 0.0 && diff > prev_diff) {
            if (++grew >= 3) throw PicardDivergedError(step, m);
        } else {
            grew = 0;
        }
        prev_diff = diff;
        it = std::move(next);
    }
    throw PicardDivergedError(step, opts.picard_max_iter);
}

struct PenaltyStepSpec {
    Advection adv = Advection::Self;
    const SpectralVector* forcing = nullptr;     // Wiener increment, may be null
    const SpectralVector* shift_now = nullptr;   // z~^l for the v-scheme
    const SpectralVector* shift_prev = nullptr;  // z~^{l-1} for lagged advection
};

// One penalization + projection step shared by the main algorithm, the
// linear z-scheme, and the deterministic v-scheme.
inline PenaltyState penalized_step(const PenaltyState& prev, const SchemeParams& params,
                                   const SolverOpts& opts, const PenaltyStepSpec& spec) {
    const Grid& g = prev.u.grid();
    const double k = params.k;
    const double eps = params.eps();
    const int step = prev.step + 1;

    // Step 1 (penalization): solve for the intermediate velocity.
    SpectralVector rhs0 = prev.u;
    if (spec.forcing) rhs0 += *spec.forcing;
    SpectralVector grad_phi = gradient(prev.phi);
    grad_phi *= k;
    rhs0 -= grad_phi;

    int iters = 0;
    SpectralVector u_tilde = picard_solve(
        rhs0, prev.u, k, spec.adv, params.lagged_advection, spec.shift_now, spec.shift_prev,
        &prev.u_tilde, opts, step, iters,
        [&](const SpectralVector& rhs) { return penalty_block_solve(rhs, params.nu, k, eps); });

    SpectralScalar div_ut = divergence(u_tilde);
    SpectralScalar p_tilde = div_ut;
    p_tilde *= -1.0 / eps;

    // Step 2: potential update via the exact spectral Poisson solve.
    SpectralScalar phi_inc = inv_laplacian(div_ut);
    phi_inc *= 1.0 / (params.alpha * k);
    SpectralScalar phi = prev.phi + phi_inc;

    // Step 3 (projection).
    SpectralVector grad_inc = gradient(phi_inc);
    grad_inc *= params.alpha * k;
    SpectralVector u = u_tilde - grad_inc;

    SpectralScalar p = p_tilde + phi;
    SpectralScalar phi_scaled = phi_inc;
    phi_scaled *= params.alpha;
    p += phi_scaled;

    const double unorm = l2_norm(u);
    if (!std::isfinite(unorm) ||
        unorm > opts.divergence_guard * std::max(l2_norm(prev.u), 1.0))
        throw BlowUpError(step);

    PenaltyState next;
    next.u = std::move(u);
    next.phi = std::move(phi);
    next.p = std::move(p);
    next.u_tilde = std::move(u_tilde);
    next.p_tilde = std::move(p_tilde);
    next.step = step;
    next.last_picard_iters = iters;
    return next;
}

} // namespace detail

// Main algorithm: one step of the penalty--projection scheme driven by the
// Wiener increment dW.
inline PenaltyState penalty_step(const PenaltyState& prev, const SchemeParams& params,
                                 const SpectralVector& dW, const SolverOpts& opts) {
    detail::PenaltyStepSpec spec;
    spec.adv = detail::Advection::Self;
    spec.forcing = &dW;
    return detail::penalized_step(prev, params, opts, spec);
}

// First auxiliary algorithm: the linear stochastic Stokes companion (z^0 = 0,
// no convection). A single exact block solve, no iteration.
inline PenaltyState stokes_penalty_step(const PenaltyState& prev, const SchemeParams& params,
                                        const SpectralVector& dW, const SolverOpts& opts) {
    detail::PenaltyStepSpec spec;
    spec.adv = detail::Advection::None;
    spec.forcing = &dW;
    return detail::penalized_step(prev, params, opts, spec);
}

// Second auxiliary algorithm: deterministic, nonlinearity evaluated on the
// shifted field v~ + z~ with the same-step z intermediate, zero forcing.
inline PenaltyState deterministic_penalty_step(const PenaltyState& prev,
                                               const SchemeParams& params,
                                               const SpectralVector& z_tilde_now,
                                               const SpectralVector& z_tilde_prev,
                                               const SolverOpts& opts) {
    detail::PenaltyStepSpec spec;
    spec.adv = detail::Advection::Shifted;
    spec.shift_now = &z_tilde_now;
    spec.shift_prev = &z_tilde_prev;
    return detail::penalized_step(prev, params, opts, spec);
}

struct DirectStepResult {
    SpectralVector u;
    SpectralScalar p;
    int picard_iters = 0;
};

// Direct divergence-free discretization (reference scheme). The velocity is
// solved in the solenoidal subspace; the pressure is recovered from the
// gradient part of the convection term.
inline DirectStepResult direct_step(const SpectralVector& u_prev, const SchemeParams& params,
                                    const SpectralVector& dW, const SolverOpts& opts,
                                    bool with_nonlinearity = true, int step = 0) {
    SpectralVector rhs0 = u_prev + dW;
    int iters = 0;
    SpectralVector u = detail::picard_solve(
        rhs0, u_prev, params.k,
        with_nonlinearity ? detail::Advection::Self : detail::Advection::None,
        params.lagged_advection, nullptr, nullptr, &u_prev, opts, step, iters,
        [&](const SpectralVector& rhs) {
            return detail::stokes_diagonal_solve(rhs, params.nu, params.k);
        });

    DirectStepResult out;
    out.p = SpectralScalar(u_prev.grid());
    if (with_nonlinearity) {
        SpectralScalar div_conv = divergence(b_tilde_apply(u, u));
        out.p = inv_laplacian(div_conv);
        out.p *= -1.0;
    }
    const double unorm = l2_norm(u);
    if (!std::isfinite(unorm) ||
        unorm > opts.divergence_guard * std::max(l2_norm(u_prev), 1.0))
        throw BlowUpError(step);
    out.u = std::move(u);
    out.picard_iters = iters;
    return out;
}

} // namespace spns
