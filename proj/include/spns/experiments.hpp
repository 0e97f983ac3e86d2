#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>
#include <vector>

#include "spns/initial_data.hpp"
#include "spns/trajectory.hpp"

namespace spns {

// Per-path, per-level realization of the error functionals:
//   EM  = max_m ||e^m||^2 + nu k sum ||grad e^l||^2 + k sum ||q^l||^2
//   tEM = max_m ||e^m||^2 + sqrt(nu k sum ||grad e^l||^2) + sqrt(k sum ||q^l||^2)
struct ErrorReport {
    int path = 0;
    int level = 0;       // index into the study's level list
    double k = 0.0;
    double eps = 0.0;
    double max_term = 0.0;
    double grad_term = 0.0;
    double pressure_term = 0.0;
    bool blew_up = false;

    double EM() const { return max_term + grad_term + pressure_term; }
    double tEM() const { return max_term + std::sqrt(grad_term) + std::sqrt(pressure_term); }
};

// Velocity/pressure samples of one trajectory on its coarse time grid,
// with the coupling metadata needed to detect mismatched comparisons.
struct TrajectorySamples {
    std::vector<SpectralVector> u;  // indices 0..M
    std::vector<SpectralScalar> p;
    double k = 0.0;
    double eps = 0.0;
    uint64_t base_seed = 0;
    uint64_t path_index = 0;
};

inline ErrorReport compute_error_functionals(const TrajectorySamples& coarse,
                                             const TrajectorySamples& ref, double nu) {
    if (coarse.u.size() != ref.u.size() || coarse.p.size() != ref.p.size() ||
        coarse.u.size() != coarse.p.size())
        throw std::invalid_argument("error functionals: time-grid mismatch");
    if (coarse.base_seed != ref.base_seed || coarse.path_index != ref.path_index)
        throw std::invalid_argument("error functionals: trajectories drive different noise paths");
    ErrorReport r;
    r.k = coarse.k;
    r.eps = coarse.eps;
    const size_t M = coarse.u.size() - 1;
    for (size_t ell = 1; ell <= M; ++ell) {
        SpectralVector e = ref.u[ell] - coarse.u[ell];
        SpectralScalar q = ref.p[ell] - coarse.p[ell];
        const double en = l2_norm(e);
        r.max_term = std::max(r.max_term, en * en);
        const double ge = h1_norm(e);
        r.grad_term += nu * coarse.k * ge * ge;
        const double qn = l2_norm(q);
        r.pressure_term += coarse.k * qn * qn;
    }
    return r;
}

// Raw per-path statistics behind the sample subsets: membership in
// Omega_{kappa_i} is stat_i <= kappa_i.
struct SampleStats {
    int path = 0;
    int level = 0;
    double omega1 = 0.0;  // sup_t ||u||_V^2 + k sum ||u(t_l)||_1^2
    double omega2 = 0.0;  // z-scheme error functional incl. pressure sum
    double omega3 = 0.0;  // max_l ||u(t_{l-1})-u(t_l)||_L4^2 / k^{2 eta}
};

struct SampleSetStats {
    double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
    std::vector<bool> in_omega1, in_omega2, in_omega3;
    double complement_prob1 = 0.0, complement_prob2 = 0.0, complement_prob3 = 0.0;
};

inline SampleSetStats sample_set_membership(const std::vector<SampleStats>& stats,
                                            double kappa1, double kappa2, double kappa3) {
    if (stats.empty()) throw std::invalid_argument("sample sets: no diagnostics recorded");
    SampleSetStats out;
    out.kappa1 = kappa1;
    out.kappa2 = kappa2;
    out.kappa3 = kappa3;
    size_t out1 = 0, out2 = 0, out3 = 0;
    for (const auto& s : stats) {
        const bool m1 = s.omega1 <= kappa1;
        const bool m2 = s.omega2 <= kappa2;
        const bool m3 = s.omega3 <= kappa3;
        out.in_omega1.push_back(m1);
        out.in_omega2.push_back(m2);
        out.in_omega3.push_back(m3);
        out1 += !m1;
        out2 += !m2;
        out3 += !m3;
    }
    const double n = static_cast<double>(stats.size());
    out.complement_prob1 = out1 / n;
    out.complement_prob2 = out2 / n;
    out.complement_prob3 = out3 / n;
    return out;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS residual of the log-log fit
    size_t points_used = 0;
};

// Least-squares line through (log k_i, log r_i). Nonpositive responses are
// excluded with a warning; fewer than 3 surviving points is an error.
inline RateFit fit_rate(const std::vector<double>& levels, const std::vector<double>& responses) {
    if (levels.size() != responses.size())
        throw std::invalid_argument("fit_rate: size mismatch");
    std::vector<double> xs, ys;
    for (size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0)) throw std::invalid_argument("fit_rate: levels must be positive");
        if (!(responses[i] > 0.0) || !std::isfinite(responses[i])) {
            std::fprintf(stderr, "warning: fit_rate dropping nonpositive response at level %zu\n",
                         i);
            continue;
        }
        xs.push_back(std::log(levels[i]));
        ys.push_back(std::log(responses[i]));
    }
    if (xs.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 positive responses");
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    RateFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double rss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double d = ys[i] - (f.intercept + f.slope * xs[i]);
        rss += d * d;
    }
    f.residual = std::sqrt(rss / n);
    f.points_used = xs.size();
    return f;
}

struct ExceedancePoint {
    int level = 0;
    double k = 0.0;
    double C = 0.0;
    double r = 0.0;
    double fraction = 0.0;
    double ci_half_width = 0.0;  // 95% binomial
};

// Empirical P[EM >= C k^r] over one level's reports. Blown-up paths count as
// exceedances.
inline ExceedancePoint estimate_exceedance(const std::vector<ErrorReport>& level_reports,
                                           double C, double r) {
    if (level_reports.empty()) throw std::invalid_argument("exceedance: no reports");
    ExceedancePoint out;
    out.level = level_reports.front().level;
    out.k = level_reports.front().k;
    out.C = C;
    out.r = r;
    const double threshold = C * std::pow(out.k, r);
    size_t count = 0;
    for (const auto& rep : level_reports)
        if (rep.blew_up || rep.EM() >= threshold) ++count;
    const double n = static_cast<double>(level_reports.size());
    out.fraction = count / n;
    out.ci_half_width = 1.96 * std::sqrt(out.fraction * (1.0 - out.fraction) / n);
    return out;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile of empty set");
    std::sort(v.begin(), v.end());
    const double idx = q * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(idx));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

enum class InitialData { RandomSolenoidal, TaylorGreen, Zero };

struct StudyConfig {
    Grid grid = Grid(kTwoPi, 32);
    int J = 8;
    double gamma = 3.0;
    double T = 0.5;
    double nu = 1.0;
    double eta = 0.4;
    double alpha = 1.5;
    bool couple_eps_to_k = true;
    double epsilon = 0.1;  // used when uncoupled
    bool lagged_advection = false;
    std::vector<int> levels = {16, 32, 64, 128};
    int M_ref = 1024;
    int paths = 64;
    uint64_t base_seed = 20240101;
    uint64_t u0_seed = 1;
    InitialData u0_kind = InitialData::RandomSolenoidal;
    double u0_amplitude = 1.0;
    bool stokes_only = false;   // z-scheme vs direct Stokes reference
    bool sample_sets = true;    // record Omega_kappa statistics (full study only)
    double noise_scale = 1.0;   // 0 silences the noise for deterministic sweeps
    SolverOpts solver;
    int threads = 0;  // 0 = hardware concurrency

    // The convergence CLI additionally requires >= 3 levels for rate fits.
    void validate() const {
        grid.validate();
        if (levels.empty())
            throw std::invalid_argument("study.levels: need at least one level");
        for (int M : levels) {
            if (M < 1) throw std::invalid_argument("study.levels: step counts must be positive");
            if (M_ref % M != 0)
                throw std::invalid_argument("study.levels: every M must divide M_ref");
        }
        if (M_ref < 1) throw std::invalid_argument("study.M_ref: must be positive");
        if (paths < 1) throw std::invalid_argument("study.paths: must be positive");
        if (T <= 0.0) throw std::invalid_argument("study.T: must be positive");
        SchemeParams probe = scheme_params_for(levels.front());
        probe.validate();
    }

    SchemeParams scheme_params_for(int M) const {
        SchemeParams p;
        p.nu = nu;
        p.M = M;
        p.k = T / M;
        p.eta = eta;
        p.alpha = alpha;
        p.couple_eps_to_k = couple_eps_to_k;
        p.epsilon = epsilon;
        p.lagged_advection = lagged_advection;
        return p;
    }

    SpectralVector initial_field() const {
        switch (u0_kind) {
            case InitialData::TaylorGreen: return taylor_green(grid, u0_amplitude);
            case InitialData::Zero: return SpectralVector(grid);
            case InitialData::RandomSolenoidal: break;
        }
        SpectralVector u = random_solenoidal(grid, u0_seed);
        u *= u0_amplitude;
        return u;
    }
};

struct McStudyResult {
    std::vector<ErrorReport> reports;      // level-major, path-minor order
    std::vector<SampleStats> sample_stats; // same order; empty unless enabled
    bool coupling_verified = false;

    std::vector<ErrorReport> level_reports(int level) const {
        std::vector<ErrorReport> out;
        for (const auto& r : reports)
            if (r.level == level) out.push_back(r);
        return out;
    }

    double level_mean(int level, double (ErrorReport::*term)() const) const {
        double acc = 0.0;
        size_t n = 0;
        for (const auto& r : reports) {
            if (r.level != level || r.blew_up) continue;
            acc += (r.*term)();
            ++n;
        }
        return n ? acc / n : std::numeric_limits<double>::quiet_NaN();
    }

    double mean_EM(int level) const { return level_mean(level, &ErrorReport::EM); }
    double mean_tEM(int level) const { return level_mean(level, &ErrorReport::tEM); }
};

namespace detail {

// Reference fine trajectory sampled at the union of all coarse time grids.
struct ReferenceSamples {
    std::map<int, SpectralVector> u;  // keyed by fine step
    std::map<int, SpectralScalar> p;
    double sup_V2 = 0.0;              // running max of ||u||_V^2 over fine steps
    bool blew_up = false;
};

inline ReferenceSamples run_reference(const StudyConfig& cfg, const NoiseModel& model,
                                      const WienerIncrements& fine, const SpectralVector& u0,
                                      bool with_nonlinearity) {
    ReferenceSamples out;
    std::vector<bool> wanted(static_cast<size_t>(cfg.M_ref) + 1, false);
    for (int M : cfg.levels) {
        const int stride = cfg.M_ref / M;
        for (int ell = 0; ell <= M; ++ell) wanted[static_cast<size_t>(ell) * stride] = true;
    }
    SchemeParams params = cfg.scheme_params_for(cfg.M_ref);
    SpectralVector u = leray_project(u0);
    SpectralScalar p(cfg.grid);
    if (wanted[0]) {
        out.u.emplace(0, u);
        out.p.emplace(0, p);
    }
    const double w0 = w12_norm(u);
    out.sup_V2 = w0 * w0;
    try {
        for (int ell = 1; ell <= cfg.M_ref; ++ell) {
            SpectralVector dW = increment_field(model, fine, ell);
            DirectStepResult r = direct_step(u, params, dW, cfg.solver, with_nonlinearity, ell);
            u = std::move(r.u);
            p = std::move(r.p);
            const double w = w12_norm(u);
            out.sup_V2 = std::max(out.sup_V2, w * w);
            if (wanted[ell]) {
                out.u.emplace(ell, u);
                out.p.emplace(ell, p);
            }
        }
    } catch (const std::runtime_error&) {
        out.blew_up = true;
    }
    return out;
}

struct LevelOutcome {
    ErrorReport report;
    SampleStats stats;
};

// One coarse level of one path: advance the penalized scheme against the
// reference samples and accumulate the error functional terms on the fly.
inline LevelOutcome run_level(const StudyConfig& cfg, const NoiseModel& model,
                              const WienerIncrements& fine, const ReferenceSamples& ref,
                              const SpectralVector& u0, int level_index, int path) {
    const int M = cfg.levels[level_index];
    const int stride = cfg.M_ref / M;
    SchemeParams params = cfg.scheme_params_for(M);
    LevelOutcome out;
    out.report.path = path;
    out.report.level = level_index;
    out.report.k = params.k;
    out.report.eps = params.eps();
    out.stats.path = path;
    out.stats.level = level_index;

    if (ref.blew_up) {
        out.report.blew_up = true;
        out.stats.omega1 = std::numeric_limits<double>::infinity();
        out.stats.omega2 = std::numeric_limits<double>::infinity();
        out.stats.omega3 = std::numeric_limits<double>::infinity();
        return out;
    }

    // Reference-only sample statistics, valid whether or not the coarse
    // scheme survives: the V-norm envelope plus the coarse-grid H1 sum, and
    // the L4 Hoelder quotient over adjacent discrete times.
    double h1_ref_sum = 0.0;
    double omega3 = 0.0;
    for (int ell = 1; ell <= M; ++ell) {
        const SpectralVector& uref = ref.u.at(ell * stride);
        const double h1r = h1_norm(uref);
        h1_ref_sum += params.k * h1r * h1r;
        const SpectralVector& uprev = ref.u.at((ell - 1) * stride);
        const double holder = l4_norm(uref - uprev);
        omega3 = std::max(omega3, holder * holder / std::pow(params.k, 2.0 * cfg.eta));
    }
    out.stats.omega1 = ref.sup_V2 + h1_ref_sum;
    out.stats.omega3 = omega3;

    WienerIncrements incs = coarsen(fine, stride);
    PenaltyState s = cfg.stokes_only ? make_penalty_state(SpectralVector(cfg.grid))
                                     : make_penalty_state(u0);
    try {
        for (int ell = 1; ell <= M; ++ell) {
            SpectralVector dW = increment_field(model, incs, ell);
            s = cfg.stokes_only ? stokes_penalty_step(s, params, dW, cfg.solver)
                                : penalty_step(s, params, dW, cfg.solver);
            const SpectralVector& uref = ref.u.at(ell * stride);
            const SpectralScalar& pref = ref.p.at(ell * stride);
            SpectralVector e = uref - s.u;
            const double en = l2_norm(e);
            out.report.max_term = std::max(out.report.max_term, en * en);
            const double ge = h1_norm(e);
            out.report.grad_term += cfg.nu * params.k * ge * ge;
            SpectralScalar q = pref - s.p;
            const double qn = l2_norm(q);
            out.report.pressure_term += params.k * qn * qn;
        }
    } catch (const std::runtime_error&) {
        out.report.blew_up = true;
        out.report.max_term = std::numeric_limits<double>::infinity();
    }
    return out;
}

// z-scheme error functional vs a direct Stokes reference on the same path;
// this is the Omega_{kappa_2} statistic of the full study.
inline double run_z_diagnostic(const StudyConfig& cfg, const NoiseModel& model,
                               const WienerIncrements& fine, const ReferenceSamples& stokes_ref,
                               int level_index) {
    const int M = cfg.levels[level_index];
    const int stride = cfg.M_ref / M;
    SchemeParams params = cfg.scheme_params_for(M);
    WienerIncrements incs = coarsen(fine, stride);
    PenaltyState z = make_penalty_state(SpectralVector(cfg.grid));
    double max_e2 = 0.0, grad_sum = 0.0, press_sum = 0.0;
    for (int ell = 1; ell <= M; ++ell) {
        SpectralVector dW = increment_field(model, incs, ell);
        z = stokes_penalty_step(z, params, dW, cfg.solver);
        SpectralVector e = stokes_ref.u.at(ell * stride) - z.u;
        const double en = l2_norm(e);
        max_e2 = std::max(max_e2, en * en);
        const double ge = h1_norm(e);
        grad_sum += cfg.nu * params.k * ge * ge;
        // Stokes pressure of solenoidal forcing vanishes; the error is -pi^l.
        const double pn = l2_norm(z.p);
        press_sum += params.k * pn * pn;
    }
    return max_e2 + grad_sum + press_sum;
}

} // namespace detail

// Monte Carlo convergence study. Paths run concurrently; output is
// deterministic given base_seed regardless of thread count.
inline McStudyResult run_mc_study(const StudyConfig& cfg) {
    cfg.validate();
    NoiseModel model(cfg.grid, cfg.J, cfg.gamma);
    // The z companion starts from zero by definition.
    const SpectralVector u0 =
        cfg.stokes_only ? SpectralVector(cfg.grid) : cfg.initial_field();
    const size_t n_levels = cfg.levels.size();
    const bool with_stats = cfg.sample_sets && !cfg.stokes_only;

    std::vector<detail::LevelOutcome> outcomes(n_levels * cfg.paths);
    std::atomic<int> next_path{0};
    std::atomic<bool> coupling_ok{true};

    auto worker = [&] {
        for (int path = next_path.fetch_add(1); path < cfg.paths;
             path = next_path.fetch_add(1)) {
            WienerIncrements fine =
                sample_increments(model, cfg.M_ref, cfg.T, cfg.base_seed, path);
            if (cfg.noise_scale != 1.0)
                for (auto& chan : fine.raw())
                    for (double& v : chan) v *= cfg.noise_scale;
            detail::ReferenceSamples ref =
                detail::run_reference(cfg, model, fine, u0, !cfg.stokes_only);
            detail::ReferenceSamples stokes_ref;
            if (with_stats) stokes_ref = detail::run_reference(cfg, model, fine, u0, false);

            // coupling check: nested coarsening telescopes bit-exactly
            for (size_t i = 0; i + 1 < n_levels; ++i) {
                const int fi = cfg.M_ref / cfg.levels[i];
                const int fj = cfg.M_ref / cfg.levels[i + 1];
                if (fi % fj == 0) {
                    WienerIncrements direct = coarsen(fine, fi);
                    WienerIncrements nested = coarsen(coarsen(fine, fj), fi / fj);
                    if (direct.raw() != nested.raw()) coupling_ok.store(false);
                }
            }

            for (size_t i = 0; i < n_levels; ++i) {
                detail::LevelOutcome o =
                    detail::run_level(cfg, model, fine, ref, u0, static_cast<int>(i), path);
                if (with_stats && !ref.blew_up && !stokes_ref.blew_up)
                    o.stats.omega2 = detail::run_z_diagnostic(cfg, model, fine, stokes_ref,
                                                              static_cast<int>(i));
                outcomes[i * cfg.paths + path] = std::move(o);
            }
        }
    };

    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::max(1, std::min(nthreads, cfg.paths));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    McStudyResult result;
    result.coupling_verified = coupling_ok.load();
    for (auto& o : outcomes) {
        result.reports.push_back(o.report);
        if (with_stats) result.sample_stats.push_back(o.stats);
    }
    return result;
}

// Empirical analogue of the discrete stability bounds: Monte Carlo means of
// the velocity, intermediate-gradient, and pressure functionals per level.
struct StabilityRow {
    int level = 0;
    double k = 0.0;
    double eps = 0.0;
    double mean_max_u2 = 0.0;       // E max_m ||u^m||^2
    double mean_grad_sum = 0.0;     // E nu k sum ||grad u~^l||^2
    double mean_pressure_sum = 0.0; // E k sum ||p^l||^2
    int paths = 0;
};

inline std::vector<StabilityRow> run_stability_sweep(const StudyConfig& cfg) {
    NoiseModel model(cfg.grid, cfg.J, cfg.gamma);
    const SpectralVector u0 = cfg.initial_field();
    std::vector<StabilityRow> rows(cfg.levels.size());
    std::vector<std::vector<std::array<double, 3>>> acc(
        cfg.levels.size(), std::vector<std::array<double, 3>>(cfg.paths, {0, 0, 0}));

    std::atomic<int> next_path{0};
    auto worker = [&] {
        for (int path = next_path.fetch_add(1); path < cfg.paths;
             path = next_path.fetch_add(1)) {
            for (size_t i = 0; i < cfg.levels.size(); ++i) {
                const int M = cfg.levels[i];
                SchemeParams params = cfg.scheme_params_for(M);
                WienerIncrements fine =
                    sample_increments(model, M, cfg.T, cfg.base_seed, path);
                if (cfg.noise_scale != 1.0)
                    for (auto& chan : fine.raw())
                        for (double& v : chan) v *= cfg.noise_scale;
                PenaltyState s = make_penalty_state(u0);
                double max_u2 = 0.0, grad_sum = 0.0, press_sum = 0.0;
                for (int ell = 1; ell <= M; ++ell) {
                    s = penalty_step(s, params, increment_field(model, fine, ell), cfg.solver);
                    const double un = l2_norm(s.u);
                    max_u2 = std::max(max_u2, un * un);
                    const double gt = h1_norm(s.u_tilde);
                    grad_sum += cfg.nu * params.k * gt * gt;
                    const double pn = l2_norm(s.p);
                    press_sum += params.k * pn * pn;
                }
                acc[i][path] = {max_u2, grad_sum, press_sum};
            }
        }
    };
    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::max(1, std::min(nthreads, cfg.paths));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (size_t i = 0; i < cfg.levels.size(); ++i) {
        StabilityRow& row = rows[i];
        row.level = static_cast<int>(i);
        SchemeParams params = cfg.scheme_params_for(cfg.levels[i]);
        row.k = params.k;
        row.eps = params.eps();
        row.paths = cfg.paths;
        for (int path = 0; path < cfg.paths; ++path) {
            row.mean_max_u2 += acc[i][path][0];
            row.mean_grad_sum += acc[i][path][1];
            row.mean_pressure_sum += acc[i][path][2];
        }
        row.mean_max_u2 /= cfg.paths;
        row.mean_grad_sum /= cfg.paths;
        row.mean_pressure_sum /= cfg.paths;
    }
    return rows;
}

// Deterministic Taylor--Green validation: direct scheme, zero noise, levels
// of M; returns max_l ||u^l - u_exact(t_l)|| per level.
struct TaylorGreenRow {
    int M = 0;
    double k = 0.0;
    double max_error = 0.0;
};

inline std::vector<TaylorGreenRow> run_taylor_green(const Grid& grid, double nu, double T,
                                                    const std::vector<int>& levels,
                                                    const SolverOpts& solver = {}) {
    std::vector<TaylorGreenRow> rows;
    for (int M : levels) {
        SchemeParams params;
        params.nu = nu;
        params.M = M;
        params.k = T / M;
        SpectralVector u = taylor_green(grid);
        SpectralVector dW(grid);
        double worst = 0.0;
        for (int ell = 1; ell <= M; ++ell) {
            DirectStepResult r = direct_step(u, params, dW, solver, true, ell);
            u = std::move(r.u);
            SpectralVector exact = taylor_green(grid, taylor_green_decay(nu, grid, ell * params.k));
            worst = std::max(worst, l2_norm(u - exact));
        }
        rows.push_back({M, params.k, worst});
    }
    return rows;
}

// Runs main vs z+v with shared noise and reports the worst decomposition
// residual relative to max_l (||z^l|| + ||v^l||).
struct DecompositionReport {
    double max_residual = 0.0;        // max_l ||u - (z+v)||
    double max_scale = 0.0;           // max_l (||z|| + ||v||)
    std::vector<double> residuals;    // per step
};

inline DecompositionReport run_decomposition_check(const StudyConfig& cfg, int M) {
    NoiseModel model(cfg.grid, cfg.J, cfg.gamma);
    SchemeParams params = cfg.scheme_params_for(M);
    WienerIncrements fine = sample_increments(model, M, cfg.T, cfg.base_seed, 0);
    if (cfg.noise_scale != 1.0)
        for (auto& chan : fine.raw())
            for (double& v : chan) v *= cfg.noise_scale;
    const SpectralVector u0 = cfg.initial_field();

    PenaltyState main_s = make_penalty_state(u0);
    PenaltyState z = make_penalty_state(SpectralVector(cfg.grid));
    PenaltyState v = make_penalty_state(u0);
    DecompositionReport rep;
    for (int ell = 1; ell <= M; ++ell) {
        SpectralVector dW = increment_field(model, fine, ell);
        main_s = penalty_step(main_s, params, dW, cfg.solver);
        SpectralVector z_tilde_prev = z.u_tilde;
        z = stokes_penalty_step(z, params, dW, cfg.solver);
        v = deterministic_penalty_step(v, params, z.u_tilde, z_tilde_prev, cfg.solver);
        const double res = l2_norm(main_s.u - (z.u + v.u));
        rep.residuals.push_back(res);
        rep.max_residual = std::max(rep.max_residual, res);
        rep.max_scale = std::max(rep.max_scale, l2_norm(z.u) + l2_norm(v.u));
    }
    return rep;
}

} // namespace spns
