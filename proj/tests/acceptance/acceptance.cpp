// Acceptance suite: one PASS/FAIL line per criterion.
//
//   polcorr_acceptance [--report FILE] [--strict] [--quick]
//
// Exit status is 0 once every criterion has been evaluated; --strict makes
// any FAIL a non-zero exit. --quick runs the end-to-end criteria at 10^6
// pairs instead of 10^7 (diagnostic only, tolerances unchanged).

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "polcorr/analysis.hpp"
#include "polcorr/angles.hpp"
#include "polcorr/config.hpp"
#include "polcorr/event_io.hpp"
#include "polcorr/geometry.hpp"
#include "polcorr/physics.hpp"
#include "polcorr/pipeline.hpp"
#include "polcorr/random.hpp"
#include "polcorr/sampling.hpp"
#include "stats.hpp"

using namespace polcorr;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    bool pass;
    std::string detail;
};

struct Criterion
{
    int id;
    char const* name;
    std::function<Outcome()> check;
};

// Tolerances
constexpr double kTolR1 = 0.05;
constexpr double kTolRHalf = 0.02;
constexpr double kTolOptimal = 0.5;
constexpr double kTolIdentity = 1e-12;
constexpr double kMinP = 0.01;
constexpr double kMomentSigmas = 3.0;
constexpr double kRecoverySigmas = 3.0;
constexpr int kRecoveryMinInside = 99;
constexpr double kSigmaScalingTol = 0.10;
constexpr double kMixingSigmas = 3.0;
constexpr double kCoverageTol = 0.3;
constexpr double kMuLow = 0.25;
constexpr double kMuHigh = 0.45;
constexpr double kCompatSigmas = 2.0;
constexpr double kDecoheredSigmas = 3.0;
constexpr double kSysLow = 0.01;
constexpr double kSysHigh = 0.15;

constexpr std::uint64_t kSeed = 1;
std::uint64_t g_pairs = 10'000'000;

RandomStream stream(std::uint64_t index)
{
    return RandomStream(derive_stream(kSeed, StreamPurpose::test, index));
}

std::string config_path(char const* name)
{
    return std::string(POLCORR_CONFIG_DIR) + "/" + name;
}

RunConfig bundled(char const* name)
{
    auto cfg = load_config(config_path(name));
    cfg.n_pairs = g_pairs;
    return cfg;
}

//---------------------------------------------------------------------------//
Outcome theory_points()
{
    double const r1 = theory_modulation(511, 82, 511, 82, 1.0).R;
    double const r05 = theory_modulation(511, 82, 511, 82, 0.5).R;
    return {std::abs(r1 - 2.84) <= kTolR1 && std::abs(r05 - 1.63) <= kTolRHalf,
            fmt::format("R(k=1)={:.4f} (2.84+-{}), R(k=0.5)={:.4f} (1.63+-{})", r1, kTolR1, r05, kTolRHalf)};
}

Outcome energy_kinematics()
{
    double const e30 = scattered_energy(511, 30);
    double const e50 = scattered_energy(511, 50);
    return {e30 >= 450 && e30 <= 451 && e50 >= 376 && e50 <= 377,
            fmt::format("E(30)={:.3f} in [450,451], E(50)={:.3f} in [376,377]", e30, e50)};
}

Outcome optimal_angles()
{
    double const t511 = optimal_theta(511);
    double const t450 = optimal_theta(450);
    double const t376 = optimal_theta(376);
    bool const ok = std::abs(t511 - 82) <= kTolOptimal && std::abs(t450 - 83) <= kTolOptimal
                    && std::abs(t376 - 84) <= kTolOptimal;
    return {ok, fmt::format("theta_opt = {:.3f}, {:.3f}, {:.3f} (82, 83, 84 +-{})", t511, t450, t376, kTolOptimal)};
}

Outcome identities()
{
    double worst_a = 0;
    for (int i = 0; i <= 1800; ++i)
    {
        double const theta = 0.1 * i;
        auto const k = kinematic_factors(theta);
        worst_a = std::max(worst_a, std::abs(analyzing_power(511, theta) - k.G / k.F));
    }
    double worst_r = 0;
    for (int i = -99; i <= 99; ++i)
    {
        double const mu = 0.01 * i;
        worst_r = std::max(worst_r, std::abs(mu_from_R(ratio_R(mu, 0).R) - mu));
        double const r = 0.05 + 0.05 * (i + 99);
        worst_r = std::max(worst_r, std::abs(ratio_R(mu_from_R(r), 0).R - r) / r);
    }
    return {worst_a <= kTolIdentity && worst_r <= kTolIdentity,
            fmt::format("max |A - G/F| = {:.2e}, max R<->mu error = {:.2e}", worst_a, worst_r)};
}

Outcome sampler_vs_oracle()
{
    PairModel model;
    model.theta1_window = AngleWindow{72, 90};
    model.theta2_window = AngleWindow{72, 90};
    PairSampler const sampler(model);
    auto rng = stream(5);
    DeltaPhiHistogram h;
    for (int i = 0; i < 1'000'000; ++i)
    {
        auto const p = sampler(rng);
        h.fill_raw(wrap_degrees(p.phi1_deg - p.phi2_deg));
    }
    AcceptanceOptions opts;
    opts.low_edge_deg = h.binning.low_edge_deg;
    auto const oracle = integrate_acceptance({72, 90}, {72, 90}, 511, 511, 1.0, opts);
    auto const chi2 = test::pearson(h.raw, oracle.density);
    return {chi2.p > kMinP,
            fmt::format("chi2/ndf = {:.1f}/{}, p = {:.3f} (oracle mu {:.5f})", chi2.chi2, chi2.ndf, chi2.p, oracle.mu)};
}

Outcome moments()
{
    bool ok = true;
    std::string detail;
    int k = 0;
    for (double mu : {0.0, 0.24, 0.478})
    {
        auto rng = stream(60 + k++);
        int const n = 1'000'000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i)
        {
            double const c = std::cos(2.0 * deg_to_rad(sample_delta_phi(mu, rng)));
            s += c;
            s2 += c * c;
        }
        double const mean = s / n;
        double const err = std::sqrt((s2 / n - mean * mean) / n);
        double const pull = (mean + mu / 2) / err;
        ok = ok && std::abs(pull) < kMomentSigmas;
        detail += fmt::format("{}<cos2dphi>={:.5f} vs {:.5f} ({:+.2f} sigma)", detail.empty() ? "" : "; ", mean, -mu / 2, pull);
    }
    return {ok, detail};
}

FitResult poisson_fit(double mu, std::size_t n, RandomStream& rng)
{
    DeltaPhiHistogram h;
    for (std::size_t i = 0; i < n; ++i)
        h.fill_raw(sample_delta_phi(mu, rng));
    std::vector<FitPoint> pts;
    for (int k = 0; k < h.bins(); ++k)
        pts.push_back({h.binning.low(k), h.binning.high(k), h.raw[k], std::sqrt(std::max(h.raw[k], 1.0))});
    return fit_modulation(pts);
}

Outcome fit_recovery()
{
    bool ok = true;
    std::string detail = "inside 3 sigma:";
    std::uint64_t index = 100;
    for (double mu : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5})
    {
        int inside = 0;
        for (int rep = 0; rep < 100; ++rep)
        {
            auto rng = stream(index++);
            auto const fit = poisson_fit(mu, 100'000, rng);
            inside += std::abs(fit.mu - mu) < kRecoverySigmas * fit.sigma_mu;
        }
        ok = ok && inside >= kRecoveryMinInside;
        detail += fmt::format(" {}:{}/100", mu, inside);
    }
    auto r1 = stream(1000);
    auto r4 = stream(1001);
    double const s1 = poisson_fit(0.3, 100'000, r1).sigma_mu;
    double const s4 = poisson_fit(0.3, 400'000, r4).sigma_mu;
    double const ratio = s1 / s4;
    ok = ok && std::abs(ratio / 2.0 - 1.0) <= kSigmaScalingTol;
    detail += fmt::format("; sigma(1e5)/sigma(4e5) = {:.3f}", ratio);
    return {ok, detail};
}

Outcome mixing_flatness()
{
    auto rng = stream(8);
    // continuous azimuths and pixel-grid azimuths, both uncorrelated
    double const grid[] = {0, 90, 180, -90, 45, 135, -45, -135, 26.565, 63.435, -26.565, -63.435};
    bool ok = true;
    std::string detail;
    for (bool discrete : {false, true})
    {
        std::vector<PairReco> ev;
        for (int i = 0; i < 50'000; ++i)
        {
            PairReco r;
            r.a.theta_deg = r.b.theta_deg = 80;
            r.a.phi_deg = discrete ? grid[rng.below(12)] : rng.uniform(-180, 180);
            r.b.phi_deg = discrete ? grid[rng.below(12)] : rng.uniform(-180, 180);
            ev.push_back(r);
        }
        AnalysisOptions opts;
        auto const res = analyze(ev, opts, rng);
        double const pull = res.fit.mu / res.fit.sigma_mu;
        ok = ok && std::abs(pull) < kMixingSigmas;
        detail += fmt::format("{}{}: mu = {:.4f} +- {:.4f} ({:+.2f} sigma)",
                              detail.empty() ? "" : "; ",
                              discrete ? "grid" : "continuous",
                              res.fit.mu,
                              res.fit.sigma_mu,
                              pull);
    }
    return {ok, detail};
}

Outcome geometry()
{
    DetectorGeometry g;
    double const c50 = angular_coverage(g);
    g.distance_to_scatterer_mm = 75;
    double const c75 = angular_coverage(g);
    return {std::abs(c50 - 10.0) <= kCoverageTol && std::abs(c75 - 6.7) <= kCoverageTol,
            fmt::format("coverage {:.3f} deg at 50 mm (10.0+-0.3), {:.3f} deg at 75 mm (6.7+-0.3)", c50, c75)};
}

//---------------------------------------------------------------------------//
// End-to-end runs, shared by criteria 10 and 11
struct EndToEnd
{
    FitResult fit;
    std::size_t n_events = 0;
    std::vector<PairReco> recos;
};

EndToEnd run_config(char const* name, bool keep_recos)
{
    auto const cfg = bundled(name);
    auto r = run_pipeline(cfg, 1);
    EndToEnd out{r.analysis.fit, r.analysis.n_events, {}};
    if (keep_recos)
        out.recos = std::move(r.recos);
    return out;
}

EndToEnd g_direct;

Outcome table_dichotomy()
{
    g_direct = run_config("direct.cfg", true);
    std::vector<std::pair<char const*, FitResult>> fits{{"direct", g_direct.fit}};
    for (auto const* name : {"scat0.cfg", "scat10.cfg", "scat30.cfg"})
        fits.emplace_back(name, run_config(name, false).fit);
    auto const decohered = run_config("scat30_decohered.cfg", false).fit;

    bool in_range = true;
    std::string detail;
    for (auto const& [name, fit] : fits)
    {
        in_range = in_range && fit.mu >= kMuLow && fit.mu <= kMuHigh;
        detail += fmt::format("{}={:.4f}+-{:.4f} ", fs::path(name).stem().string(), fit.mu, fit.sigma_mu);
    }
    double worst = 0;
    for (std::size_t i = 0; i < fits.size(); ++i)
    {
        for (std::size_t j = i + 1; j < fits.size(); ++j)
        {
            double const s = std::hypot(fits[i].second.sigma_mu, fits[j].second.sigma_mu);
            worst = std::max(worst, std::abs(fits[i].second.mu - fits[j].second.mu) / s);
        }
    }
    bool const compatible = worst < kCompatSigmas;
    double const pull0 = decohered.mu / decohered.sigma_mu;
    bool const null = std::abs(pull0) < kDecoheredSigmas;
    detail += fmt::format("| in [{},{}]: {}; max pairwise {:.2f} sigma (<{}): {}; kappa=0: {:.4f}+-{:.4f} ({:+.2f} sigma): {}",
                          kMuLow,
                          kMuHigh,
                          in_range ? "yes" : "no",
                          worst,
                          kCompatSigmas,
                          compatible ? "yes" : "no",
                          decohered.mu,
                          decohered.sigma_mu,
                          pull0,
                          null ? "yes" : "no");
    return {in_range && compatible && null, detail};
}

Outcome systematic_direction()
{
    if (g_direct.recos.empty())
        g_direct = run_config("direct.cfg", true);
    auto const cfg = bundled("direct.cfg");
    auto const sys = estimate_theta_systematic(
        g_direct.recos, cfg.analysis, 6.5, derive_stream(cfg.master_seed, StreamPurpose::mixing, 0));
    return {sys.relative_change >= kSysLow && sys.relative_change <= kSysHigh,
            fmt::format("mu {:.4f} -> {:.4f}, relative decrease {:.2f}% (in [{}%, {}%])",
                        sys.mu_nominal,
                        sys.mu_widened,
                        100 * sys.relative_change,
                        100 * kSysLow,
                        100 * kSysHigh)};
}

Outcome determinism()
{
    auto const dir = fs::temp_directory_path() / fmt::format("polcorr_acceptance_{}", ::getpid());
    fs::create_directories(dir);
    auto cfg = parse_config("[run]\npairs = 300000\n[model]\nmode = active\ntheta_scat_deg = 30\n");

    auto run = [&](std::string const& tag, unsigned workers) {
        cfg.output_prefix = (dir / tag).string();
        auto const result = run_pipeline(cfg, workers);
        return write_artifacts(cfg, result, true);
    };
    auto const a = run("a", 1);
    auto const b = run("b", 1);
    auto const c = run("c", 8);

    auto same = [](ArtifactPaths const& x, ArtifactPaths const& y) {
        return read_text_file(x.events) == read_text_file(y.events)
               && read_text_file(x.selected) == read_text_file(y.selected)
               && read_text_file(x.cutflow) == read_text_file(y.cutflow)
               && read_text_file(x.histogram) == read_text_file(y.histogram)
               && read_text_file(x.fit) == read_text_file(y.fit);
    };
    bool const repeat = same(a, b);
    bool const workers = same(a, c);
    auto const bytes = fs::file_size(a.events);
    fs::remove_all(dir);
    return {repeat && workers,
            fmt::format("repeat run identical: {}; 1 vs 8 workers identical: {} ({} event bytes)",
                        repeat ? "yes" : "no",
                        workers ? "yes" : "no",
                        bytes)};
}

} // namespace

int main(int argc, char** argv)
{
    std::string report_path;
    bool strict = false;
    for (int i = 1; i < argc; ++i)
    {
        if (!std::strcmp(argv[i], "--report") && i + 1 < argc)
            report_path = argv[++i];
        else if (!std::strcmp(argv[i], "--strict"))
            strict = true;
        else if (!std::strcmp(argv[i], "--quick"))
            g_pairs = 1'000'000;
        else
        {
            std::cerr << "usage: polcorr_acceptance [--report FILE] [--strict] [--quick]\n";
            return 2;
        }
    }

    std::vector<Criterion> const criteria{
        {1, "theory point values", theory_points},
        {2, "energy kinematics", energy_kinematics},
        {3, "optimal angles", optimal_angles},
        {4, "identity suite", identities},
        {5, "sampler vs oracle", sampler_vs_oracle},
        {6, "moment check", moments},
        {7, "fit recovery", fit_recovery},
        {8, "event-mixing flatness", mixing_flatness},
        {9, "geometry", geometry},
        {10, "end-to-end dichotomy", table_dichotomy},
        {11, "systematic direction", systematic_direction},
        {12, "determinism", determinism},
    };

    std::string report;
    int failed = 0;
    for (auto const& c : criteria)
    {
        auto const start = std::chrono::steady_clock::now();
        Outcome out;
        try
        {
            out = c.check();
        }
        catch (std::exception const& e)
        {
            out = {false, fmt::format("error: {}", e.what())};
        }
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !out.pass;
        auto const line = fmt::format("{} {:>2} {}: {} [{:.1f} s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail, secs);
        std::cout << line << std::flush;
        report += line;
    }
    auto const summary = fmt::format("acceptance: {}/{} criteria passed\n", criteria.size() - failed, criteria.size());
    std::cout << summary;
    report += summary;
    if (!report_path.empty())
        write_text_file(report_path, report);
    return strict && failed ? 1 : 0;
}
