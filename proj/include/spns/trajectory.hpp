#pragma once

#include <functional>

#include "spns/schemes.hpp"

namespace spns {

enum class SchemeTag { Main, Direct, StokesZ };

inline const char* scheme_name(SchemeTag t) {
    switch (t) {
        case SchemeTag::Main: return "main";
        case SchemeTag::Direct: return "direct";
        case SchemeTag::StokesZ: return "stokes";
    }
    return "?";
}

struct StepDiagnostics {
    int step = 0;
    double t = 0.0;
    double energy = 0.0;            // ||u||^2 / 2
    double enstrophy = 0.0;         // ||grad u||^2 / 2
    double div_residual = 0.0;      // ||div u|| / max(||u||_1, tiny)
    double penalty_residual = 0.0;  // ||div u~ + eps p~|| / max(||p~||, tiny)
    int picard_iters = 0;
    double u_norm = 0.0;
    double u_grad_norm = 0.0;
    double u_tilde_grad_norm = 0.0;
    double p_norm = 0.0;
};

// Observers get read-only views; they cannot perturb the trajectory.
using StepHook = std::function<void(const StepDiagnostics&)>;
using SnapshotHook =
    std::function<void(int step, const SpectralVector& u, const SpectralScalar& p)>;

struct TrajectoryOptions {
    SolverOpts solver;
    StepHook on_step;        // called once per step incl. step 0
    SnapshotHook on_snapshot;
    bool record_diagnostics = true;
};

struct TrajectoryRecord {
    SchemeTag tag = SchemeTag::Main;
    std::vector<StepDiagnostics> diagnostics;
    PenaltyState final_state;  // u/p always set; phi meaningful for penalized schemes
};

namespace detail {

inline StepDiagnostics diagnose(const PenaltyState& s, const SchemeParams& params, double eps,
                                bool penalized) {
    StepDiagnostics d;
    d.step = s.step;
    d.t = params.k * s.step;
    const double un = l2_norm(s.u);
    d.u_norm = un;
    d.energy = 0.5 * un * un;
    d.u_grad_norm = h1_norm(s.u);
    d.enstrophy = 0.5 * d.u_grad_norm * d.u_grad_norm;
    d.div_residual = l2_norm(divergence(s.u)) / std::max(d.u_grad_norm, 1e-300);
    if (penalized && s.step > 0) {
        SpectralScalar pen = divergence(s.u_tilde);
        SpectralScalar scaled = s.p_tilde;
        scaled *= eps;
        pen += scaled;
        d.penalty_residual = l2_norm(pen) / std::max(l2_norm(s.p_tilde), 1e-30);
        d.u_tilde_grad_norm = h1_norm(s.u_tilde);
    }
    d.p_norm = l2_norm(s.p);
    d.picard_iters = s.last_picard_iters;
    return d;
}

} // namespace detail

// Advances M steps of the tagged scheme from an existing state (start_state
// may come from a checkpoint; its step index says where to resume). The
// increment ladder is coarsened by level_factor before use, and the ladder's
// step count divided by level_factor must equal params.M.
inline TrajectoryRecord resume_trajectory(SchemeTag tag, const SchemeParams& params,
                                          const PenaltyState& start_state,
                                          const NoiseModel& model, const WienerIncrements& fine,
                                          int level_factor, const TrajectoryOptions& opts = {}) {
    params.validate();
    if (params.M > 0 &&
        (fine.steps() % level_factor != 0 || fine.steps() / level_factor != params.M))
        throw std::invalid_argument("trajectory: ladder does not match params.M at this level");
    WienerIncrements incs = params.M > 0 ? coarsen(fine, level_factor) : fine;
    const double eps = params.eps();
    const bool penalized = tag != SchemeTag::Direct;

    TrajectoryRecord rec;
    rec.tag = tag;
    PenaltyState state = start_state;

    auto emit = [&](const PenaltyState& s) {
        StepDiagnostics d = detail::diagnose(s, params, eps, penalized);
        if (opts.record_diagnostics) rec.diagnostics.push_back(d);
        if (opts.on_step) opts.on_step(d);
        if (opts.on_snapshot) opts.on_snapshot(s.step, s.u, s.p);
    };
    emit(state);

    for (int ell = state.step + 1; ell <= params.M; ++ell) {
        SpectralVector dW = increment_field(model, incs, ell);
        switch (tag) {
            case SchemeTag::Main:
                state = penalty_step(state, params, dW, opts.solver);
                break;
            case SchemeTag::StokesZ:
                state = stokes_penalty_step(state, params, dW, opts.solver);
                break;
            case SchemeTag::Direct: {
                DirectStepResult r = direct_step(state.u, params, dW, opts.solver, true, ell);
                state.u = std::move(r.u);
                state.p = std::move(r.p);
                state.u_tilde = state.u;
                state.step = ell;
                state.last_picard_iters = r.picard_iters;
                break;
            }
        }
        emit(state);
    }
    rec.final_state = std::move(state);
    return rec;
}

inline TrajectoryRecord run_trajectory(SchemeTag tag, const SchemeParams& params,
                                       const SpectralVector& u0, const NoiseModel& model,
                                       const WienerIncrements& fine, int level_factor,
                                       const TrajectoryOptions& opts = {}) {
    PenaltyState s0 = tag == SchemeTag::StokesZ ? make_penalty_state(SpectralVector(u0.grid()))
                                                : make_penalty_state(u0);
    return resume_trajectory(tag, params, s0, model, fine, level_factor, opts);
}

// Checkpoint container: step index, scheme tag, grid, noise/seed metadata
// (the RNG cursor is implicit: streams are counter-based in the step index),
// then the full penalty state.
inline void save_checkpoint(const std::string& path, SchemeTag tag, const PenaltyState& s,
                            const NoiseModel& model, const WienerIncrements& fine) {
    snapshot::Writer w(path);
    w.f64(s.u.grid().L);
    w.u32(static_cast<uint32_t>(s.u.grid().N));
    w.u8(static_cast<uint8_t>(snapshot::Kind::Checkpoint));
    w.u8(static_cast<uint8_t>(tag));
    w.u32(static_cast<uint32_t>(s.step));
    w.u64(fine.base_seed());
    w.u64(fine.path_index());
    w.u32(static_cast<uint32_t>(fine.steps()));
    w.u32(static_cast<uint32_t>(model.J()));
    w.f64(model.gamma());
    w.f64(fine.T());
    w.vector_payload(s.u);
    w.scalar_payload(s.phi);
    w.scalar_payload(s.p);
    w.vector_payload(s.u_tilde);
    w.scalar_payload(s.p_tilde);
    w.finish();
}

struct LoadedCheckpoint {
    SchemeTag tag;
    PenaltyState state;
    NoiseModel model;
    WienerIncrements fine;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    snapshot::Reader r(path);
    const double L = r.f64();
    const int N = static_cast<int>(r.u32());
    const Grid g(L, N);
    if (r.u8() != static_cast<uint8_t>(snapshot::Kind::Checkpoint))
        throw std::runtime_error("snapshot: not a checkpoint: " + path);
    const SchemeTag tag = static_cast<SchemeTag>(r.u8());
    const int step = static_cast<int>(r.u32());
    const uint64_t base_seed = r.u64();
    const uint64_t path_index = r.u64();
    const int M_fine = static_cast<int>(r.u32());
    const int J = static_cast<int>(r.u32());
    const double gamma = r.f64();
    const double T = r.f64();

    LoadedCheckpoint out{tag, PenaltyState{}, NoiseModel(g, J, gamma), WienerIncrements{}};
    out.state.u = r.vector_payload(g);
    out.state.phi = r.scalar_payload(g);
    out.state.p = r.scalar_payload(g);
    out.state.u_tilde = r.vector_payload(g);
    out.state.p_tilde = r.scalar_payload(g);
    out.state.step = step;
    out.fine = sample_increments(out.model, M_fine, T, base_seed, path_index);
    return out;
}

} // namespace spns
