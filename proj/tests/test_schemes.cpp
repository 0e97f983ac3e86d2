#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "spns/trajectory.hpp"
#include "test_util.hpp"

using namespace spns;
using namespace spns::testing;

namespace {

const Grid kGrid(kTwoPi, 32);

PenaltyState zero_state() { return make_penalty_state(SpectralVector(kGrid)); }

SchemeParams default_params(int M, double T = 0.5) {
    SchemeParams p;
    p.nu = 1.0;
    p.M = M;
    p.k = T / M;
    p.eta = 0.4;
    p.alpha = 1.5;
    p.couple_eps_to_k = true;
    return p;
}

TEST(SchemeParams, ValidatesRanges) {
    SchemeParams p = default_params(64);
    p.alpha = 1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.alpha = 1.5;
    p.eta = 0.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.eta = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.eta = 0.4;
    EXPECT_NO_THROW(p.validate());
}

TEST(SchemeParams, CoupledEpsilonIsExactPower) {
    SchemeParams p = default_params(64);
    EXPECT_EQ(p.eps(), std::pow(p.k, 0.4));
    p.couple_eps_to_k = false;
    p.epsilon = 0.01;
    EXPECT_EQ(p.eps(), 0.01);
}

TEST(PenaltyStep, ZeroIsAFixedPoint) {
    SchemeParams p = default_params(8);
    PenaltyState s = zero_state();
    SpectralVector dW(kGrid);
    for (int ell = 1; ell <= 8; ++ell) {
        s = penalty_step(s, p, dW, SolverOpts{});
        EXPECT_EQ(l2_norm(s.u), 0.0);
        EXPECT_EQ(l2_norm(s.p), 0.0);
        EXPECT_EQ(l2_norm(s.phi), 0.0);
    }
}

TEST(StokesStep, MatchesHandInverted2x2Block) {
    // kappa = (1,0), nu = 1, k = 0.01, eps = 0.1:
    // block matrix (1 + nu k)I + (k/eps) kappa kappa^T = diag(1.11, 1.01)
    // in the (kappa, kappa-perp) frame at this mode.
    SchemeParams p = default_params(1);
    p.k = 0.01;
    p.M = 1;
    p.couple_eps_to_k = false;
    p.epsilon = 0.1;

    // phi^0 = cos(x) makes the rhs non-solenoidal through -k grad(phi^0);
    // dW = c cos(x) e_y is solenoidal.
    PenaltyState prev = zero_state();
    prev.phi = make_cos(kGrid, 1, 0);
    const double c = 0.8;
    SpectralVector dW(kGrid);
    dW.y() = make_cos(kGrid, 1, 0, c);

    PenaltyState next = stokes_penalty_step(prev, p, dW, SolverOpts{});

    // rhs coefficient at mode (1,0): x: -k * i*0.5, y: c*0.5
    const Complex rx = Complex(0.0, -0.01 * 0.5);
    const Complex ry = Complex(0.5 * c, 0.0);
    const Complex ux_want = rx / 1.11;
    const Complex uy_want = ry / 1.01;
    EXPECT_LT(std::abs(next.u_tilde.x().mode(1, 0) - ux_want), 1e-15);
    EXPECT_LT(std::abs(next.u_tilde.y().mode(1, 0) - uy_want), 1e-15);

    // penalty relation and projection constraint
    SpectralScalar pen = divergence(next.u_tilde);
    SpectralScalar scaled = next.p_tilde;
    scaled *= p.eps();
    pen += scaled;
    EXPECT_LT(l2_norm(pen), 1e-15);
    EXPECT_LT(l2_norm(divergence(next.u)), 1e-14 * h1_norm(next.u));

    // the projected velocity equals the Leray projection of the intermediate
    EXPECT_LT(rel_err(next.u, leray_project(next.u_tilde)), 1e-12);
}

TEST(StokesStep, ZeroNoiseKeepsZAtZero) {
    SchemeParams p = default_params(16);
    PenaltyState z = zero_state();
    SpectralVector dW(kGrid);
    for (int ell = 1; ell <= 16; ++ell) {
        z = stokes_penalty_step(z, p, dW, SolverOpts{});
        EXPECT_EQ(l2_norm(z.u), 0.0);
    }
}

TEST(PenaltyStep, DiscreteConstraintsHoldEveryStep) {
    SchemeParams p = default_params(16);
    NoiseModel model(kGrid, 8, 3.0);
    WienerIncrements fine = sample_increments(model, 16, 0.5, 1234, 0);
    PenaltyState s = make_penalty_state(random_solenoidal(kGrid, 55));
    for (int ell = 1; ell <= 16; ++ell) {
        s = penalty_step(s, p, increment_field(model, fine, ell), SolverOpts{});
        const double div_rel = l2_norm(divergence(s.u)) / h1_norm(s.u);
        EXPECT_LT(div_rel, 1e-12) << "step " << ell;
        SpectralScalar pen = divergence(s.u_tilde);
        SpectralScalar scaled = s.p_tilde;
        scaled *= p.eps();
        pen += scaled;
        EXPECT_LT(l2_norm(pen) / std::max(l2_norm(s.p_tilde), 1e-30), 1e-12) << "step " << ell;
    }
}

TEST(PenaltyStep, ZeroNoiseEnergyNonincreasing) {
    SchemeParams p = default_params(32);
    SpectralVector dW(kGrid);
    PenaltyState s = make_penalty_state(random_solenoidal(kGrid, 77));
    double prev_energy = l2_norm(s.u);
    for (int ell = 1; ell <= 32; ++ell) {
        s = penalty_step(s, p, dW, SolverOpts{});
        const double e = l2_norm(s.u);
        EXPECT_LE(e, prev_energy * (1.0 + 1e-12)) << "step " << ell;
        prev_energy = e;
    }
}

TEST(DirectStep, ZeroDataStaysZero) {
    SchemeParams p = default_params(4);
    SpectralVector u(kGrid), dW(kGrid);
    auto r = direct_step(u, p, dW, SolverOpts{});
    EXPECT_EQ(l2_norm(r.u), 0.0);
    EXPECT_EQ(l2_norm(r.p), 0.0);
}

TEST(DirectStep, TaylorGreenFollowsImplicitEulerRecursion) {
    SchemeParams p = default_params(32, 0.5);
    SpectralVector u = taylor_green(kGrid);
    SpectralVector dW(kGrid);
    double amp = 1.0;
    for (int ell = 1; ell <= p.M; ++ell) {
        auto r = direct_step(u, p, dW, SolverOpts{}, true, ell);
        u = std::move(r.u);
        amp /= 1.0 + 2.0 * p.nu * p.k;
        SpectralVector want = taylor_green(kGrid, amp);
        EXPECT_LT(rel_err(u, want), 1e-9) << "step " << ell;
    }
    // O(k) distance from the exact decay e^{-2 nu t}
    const double exact = taylor_green_decay(p.nu, kGrid, 0.5);
    EXPECT_NEAR(amp, exact, 5.0 * p.k * exact);
}

TEST(DirectStep, TaylorGreenPressureMatchesClassicalProfile) {
    SchemeParams p = default_params(8, 0.1);
    SpectralVector u = taylor_green(kGrid);
    SpectralVector dW(kGrid);
    double amp = 1.0;
    SpectralScalar pres(kGrid);
    for (int ell = 1; ell <= p.M; ++ell) {
        auto r = direct_step(u, p, dW, SolverOpts{}, true, ell);
        u = std::move(r.u);
        pres = std::move(r.p);
        amp /= 1.0 + 2.0 * p.nu * p.k;
    }
    // p = -(a^2/4)(cos 2x + cos 2y)
    SpectralScalar want = make_cos(kGrid, 2, 0) + make_cos(kGrid, 0, 2);
    want *= -amp * amp / 4.0;
    EXPECT_LT(rel_err(pres, want), 1e-8);
}

TEST(DeterministicStep, ZeroShiftZeroDataStaysZero) {
    SchemeParams p = default_params(8);
    PenaltyState v = zero_state();
    SpectralVector z_tilde(kGrid);
    for (int ell = 1; ell <= 8; ++ell) {
        v = deterministic_penalty_step(v, p, z_tilde, z_tilde, SolverOpts{});
        EXPECT_EQ(l2_norm(v.u), 0.0);
    }
}

TEST(Decomposition, MainEqualsZPlusV) {
    // Running the main scheme and the two auxiliary schemes on the same
    // increments reproduces u = z + v, p = pi + rho, phi = xi + psi up to
    // the Picard tolerance.
    SchemeParams p = default_params(16);
    SolverOpts opts;
    opts.picard_tol = 1e-11;
    NoiseModel model(kGrid, 8, 3.0);
    WienerIncrements fine = sample_increments(model, 16, 0.5, 999, 0);
    SpectralVector u0 = random_solenoidal(kGrid, 3);

    PenaltyState main_s = make_penalty_state(u0);
    PenaltyState z = zero_state();
    PenaltyState v = make_penalty_state(u0);
    EXPECT_EQ(l2_norm(z.phi), 0.0);  // xi^0 = psi^0 = phi^0 = 0
    EXPECT_EQ(l2_norm(v.phi), 0.0);
    EXPECT_EQ(l2_norm(main_s.phi), 0.0);

    for (int ell = 1; ell <= 16; ++ell) {
        SpectralVector dW = increment_field(model, fine, ell);
        main_s = penalty_step(main_s, p, dW, opts);
        SpectralVector z_tilde_prev = z.u_tilde;
        z = stokes_penalty_step(z, p, dW, opts);
        v = deterministic_penalty_step(v, p, z.u_tilde, z_tilde_prev, opts);

        const double scale = l2_norm(z.u) + l2_norm(v.u);
        EXPECT_LT(l2_norm(main_s.u - (z.u + v.u)), 10.0 * opts.picard_tol * scale)
            << "step " << ell;
        const double pscale = l2_norm(z.p) + l2_norm(v.p);
        EXPECT_LT(l2_norm(main_s.p - (z.p + v.p)), 100.0 * opts.picard_tol * pscale)
            << "step " << ell;
        const double fscale = std::max(l2_norm(z.phi) + l2_norm(v.phi), 1e-30);
        EXPECT_LT(l2_norm(main_s.phi - (z.phi + v.phi)), 100.0 * opts.picard_tol * fscale)
            << "step " << ell;
    }
}

TEST(PicardFailure, ReportsDivergenceWithStepIndex) {
    SchemeParams p = default_params(4);
    p.nu = 1e-6;
    p.k = 2.0;
    p.couple_eps_to_k = false;
    p.epsilon = 1.0;
    SolverOpts opts;
    opts.picard_max_iter = 30;
    PenaltyState s = make_penalty_state(50.0 * random_solenoidal(kGrid, 5));
    SpectralVector dW(kGrid);
    try {
        s = penalty_step(s, p, dW, opts);
        FAIL() << "expected PicardDivergedError";
    } catch (const PicardDivergedError& e) {
        EXPECT_EQ(e.step, 1);
    }
}

TEST(BlowUpGuard, TripsOnExcessiveGrowth) {
    SchemeParams p = default_params(4);
    SolverOpts opts;
    opts.divergence_guard = 1e-12;
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 4, 0.5, 31, 0);
    PenaltyState s = zero_state();
    EXPECT_THROW(penalty_step(s, p, increment_field(model, fine, 1), opts), BlowUpError);
}

TEST(Trajectory, ZeroStepsRecordsOnlyInitialState) {
    SchemeParams p = default_params(64);
    p.M = 0;
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 1, 0.5, 1, 0);
    auto rec = run_trajectory(SchemeTag::Main, p, random_solenoidal(kGrid, 9), model, fine, 1);
    EXPECT_EQ(rec.diagnostics.size(), 1u);
    EXPECT_EQ(rec.final_state.step, 0);
}

TEST(Trajectory, HooksDoNotPerturbTheRun) {
    SchemeParams p = default_params(8);
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 8, 0.5, 21, 0);
    SpectralVector u0 = random_solenoidal(kGrid, 13);

    auto plain = run_trajectory(SchemeTag::Main, p, u0, model, fine, 1);
    TrajectoryOptions opts;
    int calls = 0;
    opts.on_step = [&](const StepDiagnostics&) { ++calls; };
    opts.on_snapshot = [&](int, const SpectralVector&, const SpectralScalar&) {};
    auto hooked = run_trajectory(SchemeTag::Main, p, u0, model, fine, 1, opts);

    EXPECT_EQ(calls, 9);
    EXPECT_EQ(max_coeff_diff(plain.final_state.u, hooked.final_state.u), 0.0);
    EXPECT_EQ(max_coeff_diff(plain.final_state.p, hooked.final_state.p), 0.0);
}

TEST(Trajectory, CheckpointRestartIsBitIdentical) {
    SchemeParams p = default_params(12);
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 12, 0.5, 61, 2);
    SpectralVector u0 = random_solenoidal(kGrid, 17);

    auto full = run_trajectory(SchemeTag::Main, p, u0, model, fine, 1);

    // run to step 5, checkpoint, reload, run the rest
    PenaltyState s = make_penalty_state(u0);
    WienerIncrements incs = coarsen(fine, 1);
    for (int ell = 1; ell <= 5; ++ell)
        s = penalty_step(s, p, increment_field(model, incs, ell), SolverOpts{});
    const std::string path =
        (std::filesystem::temp_directory_path() / "spns_ckpt.fld").string();
    save_checkpoint(path, SchemeTag::Main, s, model, fine);
    LoadedCheckpoint loaded = load_checkpoint(path);
    EXPECT_EQ(loaded.state.step, 5);
    EXPECT_EQ(loaded.fine.raw(), fine.raw());

    auto resumed = resume_trajectory(SchemeTag::Main, p, loaded.state, loaded.model,
                                     loaded.fine, 1);
    EXPECT_EQ(max_coeff_diff(full.final_state.u, resumed.final_state.u), 0.0);
    EXPECT_EQ(max_coeff_diff(full.final_state.phi, resumed.final_state.phi), 0.0);
    EXPECT_EQ(max_coeff_diff(full.final_state.p, resumed.final_state.p), 0.0);
    std::remove(path.c_str());
}

TEST(Trajectory, LevelFactorMatchesManualCoarsening) {
    SchemeParams p = default_params(8, 0.5);
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 16, 0.5, 91, 0);
    SpectralVector u0 = random_solenoidal(kGrid, 37);

    auto rec = run_trajectory(SchemeTag::Main, p, u0, model, fine, 2);

    WienerIncrements coarse = coarsen(fine, 2);
    PenaltyState s = make_penalty_state(u0);
    for (int ell = 1; ell <= 8; ++ell)
        s = penalty_step(s, p, increment_field(model, coarse, ell), SolverOpts{});
    EXPECT_EQ(max_coeff_diff(rec.final_state.u, s.u), 0.0);
}

TEST(Trajectory, LadderLevelMismatchThrows) {
    SchemeParams p = default_params(8, 0.5);
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 16, 0.5, 92, 0);
    EXPECT_THROW(run_trajectory(SchemeTag::Main, p, SpectralVector(kGrid), model, fine, 4),
                 std::invalid_argument);
}

TEST(Trajectory, NonSolenoidalInitialDataIsProjected) {
    SpectralVector bad = random_solenoidal(kGrid, 19) + gradient(random_scalar(kGrid, 23));
    PenaltyState s = make_penalty_state(bad);
    EXPECT_LT(l2_norm(divergence(s.u)), 1e-12 * h1_norm(s.u));
}

TEST(Trajectory, LaggedAdvectionVariantRuns) {
    SchemeParams p = default_params(8);
    p.lagged_advection = true;
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements fine = sample_increments(model, 8, 0.5, 71, 0);
    auto rec = run_trajectory(SchemeTag::Main, p, random_solenoidal(kGrid, 29), model, fine, 1);
    EXPECT_EQ(rec.final_state.step, 8);
    for (const auto& d : rec.diagnostics)
        if (d.step > 0) EXPECT_LT(d.div_residual, 1e-12);
}

} // namespace
