// polcorr command-line front end.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "polcorr/config.hpp"
#include "polcorr/errors.hpp"
#include "polcorr/event_io.hpp"
#include "polcorr/physics.hpp"
#include "polcorr/pipeline.hpp"

namespace
{
using namespace polcorr;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Globals
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_prefix;
    bool quiet = false;
};

// Flags that default from the config file when omitted
struct AnalysisFlags
{
    std::optional<double> theta1_min, theta1_max, theta2_min, theta2_max;
    std::optional<int> bins, mix;
};

RunConfig effective_config(Globals const& g)
{
    RunConfig cfg = g.config_path.empty() ? parse_config("") : load_config(g.config_path);
    if (g.seed)
        cfg.master_seed = *g.seed;
    if (g.out_prefix)
        cfg.output_prefix = *g.out_prefix;
    cfg.resolve();
    return cfg;
}

void apply(AnalysisFlags const& f, RunConfig& cfg)
{
    auto& w = cfg.analysis.windows;
    if (f.theta1_min)
        w.theta1.lo_deg = *f.theta1_min;
    if (f.theta1_max)
        w.theta1.hi_deg = *f.theta1_max;
    if (f.theta2_min)
        w.theta2.lo_deg = *f.theta2_min;
    if (f.theta2_max)
        w.theta2.hi_deg = *f.theta2_max;
    if (f.bins)
        cfg.analysis.binning = DeltaPhiBinning::centered(*f.bins);
    if (f.mix)
        cfg.analysis.n_mix = *f.mix;
    cfg.resolve();
}

void add_analysis_flags(CLI::App* app, AnalysisFlags& f)
{
    app->add_option("--theta1-min", f.theta1_min, "Lower theta window edge for A (deg)");
    app->add_option("--theta1-max", f.theta1_max, "Upper theta window edge for A (deg)");
    app->add_option("--theta2-min", f.theta2_min, "Lower theta window edge for B (deg)");
    app->add_option("--theta2-max", f.theta2_max, "Upper theta window edge for B (deg)");
    app->add_option("--bins", f.bins, "Number of delta-phi bins");
    app->add_option("--mix", f.mix, "Mixed partners per event");
}

void note(Globals const& g, std::string const& text)
{
    if (!g.quiet)
        std::cout << text << '\n';
}

// Turn argument-domain failures of pure calculations into usage errors
template<class F>
auto as_usage(F&& f)
{
    try
    {
        return f();
    }
    catch (DomainError const& e)
    {
        throw ConfigError(e.what());
    }
}

void emit(Globals const& g, std::string const& suffix, std::string const& text)
{
    if (g.out_prefix)
        write_text_file(*g.out_prefix + suffix, text);
    else
        std::cout << text;
}

//---------------------------------------------------------------------------//
struct PredictFlags
{
    std::vector<double> thetas;
    double step = 1.0;
    double energy = kElectronMassKeV;
    double kappa = 1.0;
};

void cmd_predict(Globals const& g, PredictFlags const& f)
{
    std::vector<double> thetas = f.thetas;
    if (thetas.empty())
    {
        if (!(f.step > 0 && f.step <= 180))
            throw ConfigError(fmt::format("--step {} must be in (0, 180]", f.step));
        for (int i = 0; i * f.step <= 180.0 + 1e-9; ++i)
            thetas.push_back(std::min(180.0, i * f.step));
    }

    std::string kin = "theta_deg,F,G,A_511,A_E2\n";
    std::string mod = "theta1,theta2,mu,R\n";
    as_usage([&] {
        for (double t : thetas)
        {
            auto const k = kinematic_factors(t);
            kin += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n",
                               t,
                               k.F,
                               k.G,
                               analyzing_power(kElectronMassKeV, t),
                               analyzing_power(f.energy, t));
        }
        for (double t1 : thetas)
        {
            for (double t2 : thetas)
            {
                auto const p = theory_modulation(kElectronMassKeV, t1, f.energy, t2, f.kappa);
                mod += fmt::format("{},{},{:.6f},{:.6f}\n", t1, t2, p.mu, p.R);
            }
        }
        return 0;
    });
    if (g.out_prefix)
    {
        write_text_file(*g.out_prefix + "_kinematics.csv", kin);
        write_text_file(*g.out_prefix + "_modulation.csv", mod);
    }
    else
    {
        std::cout << kin << '\n' << mod;
    }
}

//---------------------------------------------------------------------------//
struct OracleFlags
{
    double theta1_min = 72, theta1_max = 90, theta2_min = 72, theta2_max = 90;
    double e1 = kElectronMassKeV, e2 = kElectronMassKeV, kappa = 1.0;
    int bins = 24;
    int order = 16;
};

void cmd_oracle(Globals const& g, OracleFlags const& f)
{
    auto const pred = as_usage([&] {
        AcceptanceOptions opts;
        opts.bins = f.bins;
        opts.low_edge_deg = DeltaPhiBinning::centered(f.bins).low_edge_deg;
        opts.order = f.order;
        return integrate_acceptance({f.theta1_min, f.theta1_max},
                                    {f.theta2_min, f.theta2_max},
                                    f.e1,
                                    f.e2,
                                    f.kappa,
                                    opts);
    });
    std::string out = fmt::format("mu,R\n{:.8f},{:.8f}\n\nbin_low_deg,bin_high_deg,probability\n", pred.mu, pred.R);
    for (std::size_t k = 0; k < pred.density.size(); ++k)
        out += fmt::format("{:.4f},{:.4f},{:.8f}\n", pred.bin_low_deg[k], pred.bin_high_deg[k], pred.density[k]);
    emit(g, "_oracle.csv", out);
}

//---------------------------------------------------------------------------//
struct RunFlags
{
    bool truth = false;
    unsigned workers = 0;
    std::string in;
    std::string manifest;
    std::optional<double> systematic;
};

void cmd_simulate(Globals const& g, RunFlags const& f)
{
    auto const cfg = effective_config(g);
    auto const sim = simulate(cfg, f.workers);
    auto const path = artifact_paths(cfg.output_prefix).events;
    write_events_file(path, sim.events, f.truth);
    note(g, fmt::format("simulated {} pairs, {} events written to {}", sim.n_pairs, sim.events.size(), path));
}

void cmd_select(Globals const& g, RunFlags const& f)
{
    auto const cfg = effective_config(g);
    auto const events = read_events_file(f.in);
    bool const truth = !events.empty() && events.front().truth.has_value();
    auto const sel = select_events(events, cfg.selection);
    auto const paths = artifact_paths(cfg.output_prefix);
    write_events_file(paths.selected, sel.accepted, truth);
    write_cutflow_file(paths.cutflow, sel.cutflow);
    note(g, fmt::format("selected {} of {} events", sel.accepted.size(), events.size()));
    if (!g.quiet)
        std::cout << format_cutflow(sel.cutflow);
}

void cmd_analyze(Globals const& g, RunFlags const& f, AnalysisFlags const& af)
{
    auto cfg = effective_config(g);
    apply(af, cfg);
    auto const events = read_events_file(f.in);
    auto const recos = reconstruct_selected(cfg, events);
    auto const result = analyze_events(cfg, recos);
    auto const paths = artifact_paths(cfg.output_prefix);
    write_histogram_file(paths.histogram, result.histogram);
    write_text_file(paths.fit, fit_json(result.fit, result.n_events));
    note(g,
         fmt::format("mu = {:.4f} +- {:.4f}, R = {:.3f} +- {:.3f}, chi2/ndf = {:.1f}/{}, n = {}",
                     result.fit.mu,
                     result.fit.sigma_mu,
                     result.fit.R,
                     result.fit.sigma_R,
                     result.fit.chi2,
                     result.fit.ndf,
                     result.n_events));
    if (f.systematic)
    {
        auto const sys = estimate_theta_systematic(
            recos, cfg.analysis, *f.systematic, derive_stream(cfg.master_seed, StreamPurpose::mixing, 0));
        std::cout << fmt::format("systematic sigma_theta={} mu_nominal={:.6f} mu_widened={:.6f} relative_change={:.6f}\n",
                                 *f.systematic,
                                 sys.mu_nominal,
                                 sys.mu_widened,
                                 sys.relative_change);
    }
}

void cmd_run(Globals const& g, RunFlags const& f)
{
    RunConfig cfg;
    if (!f.manifest.empty())
    {
        cfg = config_from_manifest(f.manifest);
        if (g.seed)
            cfg.master_seed = *g.seed;
        if (g.out_prefix)
            cfg.output_prefix = *g.out_prefix;
        cfg.resolve();
    }
    else
    {
        cfg = effective_config(g);
    }
    auto const result = run_pipeline(cfg, f.workers);
    auto const paths = write_artifacts(cfg, result, f.truth);
    auto const& fit = result.analysis.fit;
    note(g,
         fmt::format("{} pairs, {} events, {} selected, {} analyzed; mu = {:.4f} +- {:.4f}, R = {:.3f} +- {:.3f}",
                     result.simulation.n_pairs,
                     result.simulation.events.size(),
                     result.selection.accepted.size(),
                     result.analysis.n_events,
                     fit.mu,
                     fit.sigma_mu,
                     fit.R,
                     fit.sigma_R));
    note(g, fmt::format("manifest: {}", paths.manifest));
}

std::string one_line(std::string s)
{
    for (auto& c : s)
    {
        if (c == '\n' || c == '\r')
            c = ' ';
        if (c == '"')
            c = '\'';
    }
    return s;
}

int fail(int code, char const* kind, std::string const& message)
{
    std::cerr << fmt::format("polcorr: error kind={} code={} message=\"{}\"\n", kind, code, one_line(message));
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Compton polarimetry simulation and analysis of annihilation-photon correlations"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Globals g;
    app.add_option("--config", g.config_path, "INI configuration file");
    app.add_option("--seed", g.seed, "Override rng.master_seed");
    app.add_option("--out-prefix", g.out_prefix, "Override output.prefix");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    PredictFlags pf;
    auto* predict = app.add_subcommand("predict", "Analytic F, G, A, mu and R tables");
    predict->add_option("--theta", pf.thetas, "Scattering angle(s) in degrees")->delimiter(',');
    predict->add_option("--step", pf.step, "Grid step when --theta is absent (deg)");
    predict->add_option("--energy", pf.energy, "Energy of the second photon (keV)");
    predict->add_option("--kappa", pf.kappa, "Correlation retention");

    OracleFlags of;
    auto* oracle = app.add_subcommand("oracle", "Finite-window quadrature prediction");
    oracle->add_option("--theta1-min", of.theta1_min);
    oracle->add_option("--theta1-max", of.theta1_max);
    oracle->add_option("--theta2-min", of.theta2_min);
    oracle->add_option("--theta2-max", of.theta2_max);
    oracle->add_option("--e1", of.e1, "Energy of photon 1 (keV)");
    oracle->add_option("--e2", of.e2, "Energy of photon 2 (keV)");
    oracle->add_option("--kappa", of.kappa);
    oracle->add_option("--bins", of.bins);
    oracle->add_option("--order", of.order, "Gauss-Legendre nodes per panel");

    RunFlags rf;
    AnalysisFlags af;
    auto* sim = app.add_subcommand("simulate", "Generate and digitize annihilation pairs");
    sim->add_flag("--truth", rf.truth, "Write truth columns");
    sim->add_option("--workers", rf.workers, "Worker threads (default rng.streams)");

    auto* sel = app.add_subcommand("select", "Apply the event selection to an event file");
    sel->add_option("--in", rf.in, "Event CSV")->required();

    auto* ana = app.add_subcommand("analyze", "Delta-phi histogram, event mixing and fit");
    ana->add_option("--in", rf.in, "Selected event CSV")->required();
    add_analysis_flags(ana, af);
    ana->add_option("--systematic", rf.systematic, "Also report the theta-window systematic for this sigma (deg)");

    auto* run = app.add_subcommand("run", "Full pipeline: simulate, select, analyze");
    run->add_flag("--truth", rf.truth, "Write truth columns");
    run->add_option("--workers", rf.workers, "Worker threads (default rng.streams)");
    run->add_option("--manifest", rf.manifest, "Replay the run recorded in a manifest");

    // Global flags are accepted after the subcommand too
    for (auto* sub : {predict, oracle, sim, sel, ana, run})
        sub->fallthrough();

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        return fail(kExitConfig, "usage", e.what());
    }

    try
    {
        if (*predict)
            cmd_predict(g, pf);
        else if (*oracle)
            cmd_oracle(g, of);
        else if (*sim)
            cmd_simulate(g, rf);
        else if (*sel)
            cmd_select(g, rf);
        else if (*ana)
            cmd_analyze(g, rf, af);
        else if (*run)
            cmd_run(g, rf);
    }
    catch (ConfigError const& e)
    {
        return fail(kExitConfig, "config", e.what());
    }
    catch (IoError const& e)
    {
        return fail(kExitRuntime, "io", e.what());
    }
    catch (std::exception const& e)
    {
        return fail(kExitRuntime, "runtime", e.what());
    }
    return 0;
}
