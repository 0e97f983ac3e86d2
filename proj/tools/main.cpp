// Command-line front end: configuration, subcommand dispatch, CSV emission.
// Exit codes: 0 success, 1 validation failure, 2 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"

#include "spns/config.hpp"
#include "spns/csv.hpp"
#include "spns/experiments.hpp"

using namespace spns;

namespace {

std::string hex_hash(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig build_config(const std::string& config_path, const std::vector<std::string>& sets) {
    RunConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file: " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
    }
    for (const std::string& s : sets) {
        const size_t eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value: " + s);
        const std::string full = s.substr(0, eq);
        const size_t dot = full.find('.');
        if (dot == std::string::npos) throw ConfigError("--set expects section.key=value: " + s);
        apply_config_entry(cfg, full.substr(0, dot), full.substr(dot + 1), s.substr(eq + 1));
    }
    if (const char* env = std::getenv("SPNS_OUTPUT_DIR"); env && *env) cfg.dir = env;
    cfg.validate();
    return cfg;
}

void write_manifest(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.dir);
    std::ofstream out(std::filesystem::path(cfg.dir) / "manifest.txt", std::ios::binary);
    out << "# " << kVersionTag << "\n";
    out << "# manifest_hash=" << hex_hash(manifest_hash(cfg)) << "\n";
    out << canonical_config(cfg);
}

std::string out_path(const RunConfig& cfg, const char* name) {
    return (std::filesystem::path(cfg.dir) / name).string();
}

WienerIncrements scaled_increments(const NoiseModel& model, const RunConfig& cfg, int M,
                                   uint64_t path) {
    WienerIncrements incs = sample_increments(model, M, cfg.T, cfg.base_seed, path);
    if (cfg.scale != 1.0)
        for (auto& chan : incs.raw())
            for (double& v : chan) v *= cfg.scale;
    return incs;
}

int cmd_simulate(const RunConfig& cfg) {
    const Grid grid = cfg.grid();
    NoiseModel model(grid, cfg.resolved_J(), cfg.gamma);
    WienerIncrements fine = scaled_increments(model, cfg, cfg.M, 0);
    SchemeParams params = cfg.scheme_params();
    SchemeTag tag = SchemeTag::Main;
    if (cfg.scheme == "direct") tag = SchemeTag::Direct;
    if (cfg.scheme == "stokes") tag = SchemeTag::StokesZ;
    SpectralVector u0(grid);
    if (cfg.u0_kind() == InitialData::TaylorGreen) u0 = taylor_green(grid, cfg.u0_amplitude);
    if (cfg.u0_kind() == InitialData::RandomSolenoidal) {
        u0 = random_solenoidal(grid, cfg.u0_seed);
        u0 *= cfg.u0_amplitude;
    }
    TrajectoryOptions opts;
    opts.solver = cfg.solver_opts();
    TrajectoryRecord rec = run_trajectory(tag, params, u0, model, fine, 1, opts);

    CsvTable t({"step", "t", "energy", "enstrophy", "div_residual", "penalty_residual",
                "picard_iters"});
    for (const auto& d : rec.diagnostics)
        t.add_row({int64_t{d.step}, d.t, d.energy, d.enstrophy, d.div_residual,
                   d.penalty_residual, int64_t{d.picard_iters}});
    write_csv(t, out_path(cfg, "trajectory.csv"), hex_hash(manifest_hash(cfg)));
    std::printf("simulate: %d steps of %s scheme, final energy %.6g\n", params.M,
                scheme_name(tag), rec.diagnostics.back().energy);
    return 0;
}

int cmd_convergence(const RunConfig& cfg) {
    if (cfg.levels.size() < 3) {
        std::fprintf(stderr, "convergence: need at least 3 refinement levels, got %zu\n",
                     cfg.levels.size());
        return 1;
    }
    StudyConfig study = cfg.study_config();
    McStudyResult result = run_mc_study(study);
    const std::string manifest = hex_hash(manifest_hash(cfg));

    CsvTable errors({"path", "level", "k", "eps", "EM", "tEM", "EM_max_term", "EM_grad_term",
                     "EM_pressure_term", "blew_up"});
    for (const auto& r : result.reports)
        errors.add_row({int64_t{r.path}, int64_t{r.level}, r.k, r.eps, r.EM(), r.tEM(),
                        r.max_term, r.grad_term, r.pressure_term, int64_t{r.blew_up ? 1 : 0}});
    write_csv(errors, out_path(cfg, "errors.csv"), manifest);

    std::vector<double> ks, mean_em, mean_tem;
    for (size_t i = 0; i < cfg.levels.size(); ++i) {
        ks.push_back(cfg.T / cfg.levels[i]);
        mean_em.push_back(result.mean_EM(static_cast<int>(i)));
        mean_tem.push_back(result.mean_tEM(static_cast<int>(i)));
    }
    CsvTable rates({"response", "slope", "intercept", "residual"});
    RateFit fit_em = fit_rate(ks, mean_em);
    RateFit fit_tem = fit_rate(ks, mean_tem);
    rates.add_row({std::string("mean_EM"), fit_em.slope, fit_em.intercept, fit_em.residual});
    rates.add_row({std::string("mean_tEM"), fit_tem.slope, fit_tem.intercept, fit_tem.residual});
    write_csv(rates, out_path(cfg, "rates.csv"), manifest);

    // exceedance: C defaults to the empirical median of EM at the coarsest level
    size_t coarsest = 0;
    for (size_t i = 1; i < cfg.levels.size(); ++i)
        if (cfg.levels[i] < cfg.levels[coarsest]) coarsest = i;
    double C = cfg.exceedance_C;
    if (C == 0.0) {
        std::vector<double> ems;
        for (const auto& r : result.level_reports(static_cast<int>(coarsest)))
            ems.push_back(r.blew_up ? std::numeric_limits<double>::infinity() : r.EM());
        C = median(ems);
    }
    CsvTable exceedance({"level", "k", "C", "r", "fraction", "ci_half_width"});
    for (size_t i = 0; i < cfg.levels.size(); ++i) {
        ExceedancePoint p =
            estimate_exceedance(result.level_reports(static_cast<int>(i)), C, cfg.exceedance_r);
        exceedance.add_row(
            {int64_t{static_cast<int64_t>(i)}, p.k, p.C, p.r, p.fraction, p.ci_half_width});
    }
    write_csv(exceedance, out_path(cfg, "exceedance.csv"), manifest);

    if (!result.sample_stats.empty()) {
        CsvTable sets({"level", "k", "kappa1", "kappa2", "kappa3", "excluded1", "excluded2",
                       "excluded3"});
        for (size_t i = 0; i < cfg.levels.size(); ++i) {
            std::vector<SampleStats> level_stats;
            for (const auto& s : result.sample_stats)
                if (s.level == static_cast<int>(i)) level_stats.push_back(s);
            const double k = cfg.T / cfg.levels[i];
            double k1, k2, k3;
            if (cfg.kappa_schedule == "asymptotic") {
                k1 = std::log(std::pow(k, -cfg.mu / 2.0));
                k2 = std::pow(k, cfg.mu + cfg.exceedance_r);
                k3 = std::pow(k, -cfg.eta);
            } else {
                std::vector<double> s1, s2, s3;
                for (const auto& s : level_stats) {
                    s1.push_back(s.omega1);
                    s2.push_back(s.omega2);
                    s3.push_back(s.omega3);
                }
                k1 = quantile(s1, cfg.kappa_quantile);
                k2 = quantile(s2, cfg.kappa_quantile);
                k3 = quantile(s3, cfg.kappa_quantile);
            }
            SampleSetStats m = sample_set_membership(level_stats, k1, k2, k3);
            sets.add_row({int64_t{static_cast<int64_t>(i)}, k, k1, k2, k3, m.complement_prob1,
                          m.complement_prob2, m.complement_prob3});
        }
        write_csv(sets, out_path(cfg, "sample_sets.csv"), manifest);
    }

    std::printf("convergence: %d paths, %zu levels; slope(mean_EM) = %.4f, slope(mean_tEM) = "
                "%.4f, coupling %s\n",
                cfg.paths, cfg.levels.size(), fit_em.slope, fit_tem.slope,
                result.coupling_verified ? "verified" : "VIOLATED");
    return result.coupling_verified ? 0 : 2;
}

int cmd_stability(const RunConfig& cfg) {
    StudyConfig study = cfg.study_config();
    auto rows = run_stability_sweep(study);
    CsvTable t({"level", "k", "eps", "mean_max_u2", "mean_grad_sum", "mean_pressure_sum",
                "paths"});
    for (const auto& r : rows)
        t.add_row({int64_t{r.level}, r.k, r.eps, r.mean_max_u2, r.mean_grad_sum,
                   r.mean_pressure_sum, int64_t{r.paths}});
    write_csv(t, out_path(cfg, "stability.csv"), hex_hash(manifest_hash(cfg)));
    for (const auto& r : rows)
        std::printf("stability: k=%.6g eps=%.6g E[max||u||^2]=%.6g E[nu k sum||grad "
                    "u~||^2]=%.6g E[k sum||p||^2]=%.6g\n",
                    r.k, r.eps, r.mean_max_u2, r.mean_grad_sum, r.mean_pressure_sum);
    return 0;
}

int cmd_taylor_green(const RunConfig& cfg) {
    auto rows = run_taylor_green(cfg.grid(), cfg.nu, cfg.T, cfg.levels, cfg.solver_opts());
    const std::string manifest = hex_hash(manifest_hash(cfg));
    CsvTable t({"M", "k", "max_error"});
    std::vector<double> ks, errs;
    for (const auto& r : rows) {
        t.add_row({int64_t{r.M}, r.k, r.max_error});
        ks.push_back(r.k);
        errs.push_back(r.max_error);
    }
    write_csv(t, out_path(cfg, "taylor_green.csv"), manifest);
    RateFit fit = fit_rate(ks, errs);
    CsvTable rates({"response", "slope", "intercept", "residual"});
    rates.add_row({std::string("tg_max_error"), fit.slope, fit.intercept, fit.residual});
    write_csv(rates, out_path(cfg, "rates.csv"), manifest);
    std::printf("taylor-green: fitted temporal slope %.4f (implicit Euler expects 1.0)\n",
                fit.slope);
    return 0;
}

int cmd_decompose(const RunConfig& cfg) {
    StudyConfig study = cfg.study_config();
    DecompositionReport rep = run_decomposition_check(study, cfg.M);
    CsvTable t({"step", "residual"});
    for (size_t i = 0; i < rep.residuals.size(); ++i)
        t.add_row({int64_t{static_cast<int64_t>(i + 1)}, rep.residuals[i]});
    write_csv(t, out_path(cfg, "decompose.csv"), hex_hash(manifest_hash(cfg)));
    const double bound = 10.0 * cfg.picard_tol * rep.max_scale;
    std::printf("decompose: max ||u - (z+v)|| = %.3e, bound %.3e\n", rep.max_residual, bound);
    return rep.max_residual <= bound ? 0 : 2;
}

int cmd_noise_check(const RunConfig& cfg) {
    const Grid grid = cfg.grid();
    NoiseModel model(grid, cfg.resolved_J(), cfg.gamma);
    CsvTable t({"check", "value", "bound", "pass"});
    bool ok = true;
    auto record = [&](const char* name, double value, double bound, bool pass) {
        t.add_row({std::string(name), value, bound, int64_t{pass ? 1 : 0}});
        std::printf("noise-check: %-24s %.6g (bound %.6g) %s\n", name, value, bound,
                    pass ? "ok" : "FAIL");
        ok = ok && pass;
    };

    double worst_gram = 0.0, worst_div = 0.0;
    for (size_t i = 0; i < model.num_modes(); ++i) {
        for (int ci = 0; ci < 2; ++ci) {
            SpectralVector ei = model.basis_field(i, ci);
            worst_div = std::max(worst_div, l2_norm(divergence(ei)));
            for (size_t j = i; j < model.num_modes(); ++j) {
                for (int cj = (j == i ? ci : 0); cj < 2; ++cj) {
                    const double want = (i == j && ci == cj) ? 1.0 : 0.0;
                    worst_gram = std::max(
                        worst_gram, std::abs(inner(ei, model.basis_field(j, cj)) - want));
                }
            }
        }
    }
    record("basis_divergence", worst_div, 1e-12, worst_div <= 1e-12);
    record("gram_identity", worst_gram, 1e-12, worst_gram <= 1e-12);

    const int n_var = 10000;
    WienerIncrements var_incs = sample_increments(model, n_var, 10.0, cfg.base_seed, 0);
    double acc = 0.0;
    for (int s = 0; s < n_var; ++s) {
        const double x = var_incs.entry(0, 0, s);
        acc += x * x;
    }
    const double var_ratio = acc / n_var / ((10.0 / n_var) * model.modes()[0].q);
    record("single_mode_variance", var_ratio, 0.05, std::abs(var_ratio - 1.0) <= 0.05);

    const int n_field = 1000;
    WienerIncrements field_incs = sample_increments(model, n_field, 1.0, cfg.base_seed, 1);
    double field_acc = 0.0;
    for (int ell = 1; ell <= n_field; ++ell) {
        const double nrm = l2_norm(increment_field(model, field_incs, ell));
        field_acc += nrm * nrm;
    }
    const double field_ratio = field_acc / n_field / ((1.0 / n_field) * model.trace());
    record("field_energy_ratio", field_ratio, 0.1, std::abs(field_ratio - 1.0) <= 0.1);

    WienerIncrements tele = sample_increments(model, 1024, cfg.T, cfg.base_seed, 2);
    bool tele_ok = true;
    for (int factor : {2, 8, 64}) {
        WienerIncrements nested = coarsen(coarsen(tele, 2), factor / 2);
        WienerIncrements direct = coarsen(tele, factor);
        if (nested.raw() != direct.raw()) tele_ok = false;
    }
    record("telescoping_bit_exact", tele_ok ? 1.0 : 0.0, 1.0, tele_ok);

    write_csv(t, out_path(cfg, "noise.csv"), hex_hash(manifest_hash(cfg)));
    return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral penalty-projection solver for the stochastic "
                 "incompressible Navier-Stokes equations on the 2D torus"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "configuration file (key = value sections)");
    app.add_option("--set", sets, "override entries as section.key=value")->type_size(1);

    auto* sim = app.add_subcommand("simulate", "run one path of one scheme");
    auto* conv = app.add_subcommand("convergence", "Monte Carlo convergence study");
    auto* stab = app.add_subcommand("stability", "stability sweep over time steps");
    auto* tg = app.add_subcommand("taylor-green", "deterministic Taylor-Green validation");
    auto* dec = app.add_subcommand("decompose", "verify the z+v decomposition identity");
    auto* noise = app.add_subcommand("noise-check", "Wiener increment statistics suite");
    for (auto* sub : {sim, conv, stab, tg, dec, noise}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = build_config(config_path, sets);
        write_manifest(cfg);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (conv->parsed()) return cmd_convergence(cfg);
        if (stab->parsed()) return cmd_stability(cfg);
        if (tg->parsed()) return cmd_taylor_green(cfg);
        if (dec->parsed()) return cmd_decompose(cfg);
        if (noise->parsed()) return cmd_noise_check(cfg);
        std::fprintf(stderr, "unknown subcommand\n");
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
}
