#include "polcorr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "polcorr/errors.hpp"
#include "polcorr/event_io.hpp"
#include "polcorr/random.hpp"
#include "polcorr/sampling.hpp"

namespace polcorr
{
SimulationResult simulate(RunConfig const& cfg, unsigned workers)
{
    if (workers == 0)
        workers = cfg.streams;
    PairSampler const sampler(cfg.pair_model());
    Digitizer const digitizer(cfg.geometry, cfg.mode, cfg.transport);

    std::uint64_t const n_blocks = (cfg.n_pairs + kSimulationBlock - 1) / kSimulationBlock;
    std::vector<std::vector<EventRecord>> blocks(n_blocks);

    auto run_block = [&](std::uint64_t b) {
        RandomStream sample_rng(derive_stream(cfg.master_seed, StreamPurpose::sampling, b));
        RandomStream digi_rng(derive_stream(cfg.master_seed, StreamPurpose::digitization, b));
        std::uint64_t const first = b * kSimulationBlock;
        std::uint64_t const last = std::min(cfg.n_pairs, first + kSimulationBlock);
        auto& out = blocks[b];
        for (std::uint64_t id = first; id < last; ++id)
        {
            auto ev = digitizer(sampler(sample_rng), id, digi_rng);
            if (!ev.hits.empty())
                out.push_back(std::move(ev));
        }
    };

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try
        {
            for (std::uint64_t b = next++; b < n_blocks; b = next++)
                run_block(b);
        }
        catch (...)
        {
            std::lock_guard lock(failure_mutex);
            if (!failure)
                failure = std::current_exception();
            next = n_blocks;
        }
    };

    unsigned const n_threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_blocks));
    if (n_threads <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < n_threads; ++t)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    SimulationResult result;
    result.n_pairs = cfg.n_pairs;
    std::size_t total = 0;
    for (auto const& b : blocks)
        total += b.size();
    result.events.reserve(total);
    for (auto& b : blocks)
        std::move(b.begin(), b.end(), std::back_inserter(result.events));
    return result;
}

std::vector<PairReco> reconstruct_selected(RunConfig const& cfg, std::span<EventRecord const> selected)
{
    return reconstruct_events(selected, cfg.selection.pixel_threshold_kev, cfg.geometry.a.pitch_mm);
}

AnalysisResult analyze_events(RunConfig const& cfg, std::span<PairReco const> recos)
{
    RandomStream rng(derive_stream(cfg.master_seed, StreamPurpose::mixing, 0));
    return analyze(recos, cfg.analysis, rng);
}

PipelineResult run_pipeline(RunConfig const& cfg, unsigned workers)
{
    PipelineResult r;
    r.simulation = simulate(cfg, workers);
    r.selection = select_events(r.simulation.events, cfg.selection);
    r.recos = reconstruct_selected(cfg, r.selection.accepted);
    r.analysis = analyze_events(cfg, r.recos);
    return r;
}

ArtifactPaths artifact_paths(std::string const& prefix)
{
    return {prefix + "_events.csv",
            prefix + "_selected.csv",
            prefix + "_cutflow.txt",
            prefix + "_hist.csv",
            prefix + "_fit.json",
            prefix + "_manifest.json"};
}

std::string manifest_json(RunConfig const& cfg, PipelineResult const& result, ArtifactPaths const& paths)
{
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash(cfg);
    j["master_seed"] = cfg.master_seed;
    j["n_pairs"] = result.simulation.n_pairs;
    j["n_events_written"] = result.simulation.events.size();
    j["n_selected"] = result.selection.accepted.size();
    j["n_analyzed"] = result.analysis.n_events;
    j["mu"] = result.analysis.fit.mu;
    j["sigma_mu"] = result.analysis.fit.sigma_mu;
    j["artifacts"] = {{"events", paths.events},
                      {"selected", paths.selected},
                      {"cutflow", paths.cutflow},
                      {"histogram", paths.histogram},
                      {"fit", paths.fit}};
    j["config"] = serialize_config(cfg);
    return j.dump(2) + "\n";
}

ArtifactPaths write_artifacts(RunConfig const& cfg, PipelineResult const& result, bool with_truth)
{
    auto const paths = artifact_paths(cfg.output_prefix);
    write_events_file(paths.events, result.simulation.events, with_truth);
    write_events_file(paths.selected, result.selection.accepted, with_truth);
    write_cutflow_file(paths.cutflow, result.selection.cutflow);
    write_histogram_file(paths.histogram, result.analysis.histogram);
    write_text_file(paths.fit, fit_json(result.analysis.fit, result.analysis.n_events));
    write_text_file(paths.manifest, manifest_json(cfg, result, paths));
    return paths;
}

RunConfig config_from_manifest(std::string const& path)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(read_text_file(path));
    }
    catch (nlohmann::json::exception const& e)
    {
        throw ConfigError(fmt::format("manifest '{}': {}", path, e.what()));
    }
    if (!j.contains("config") || !j["config"].is_string())
        throw ConfigError(fmt::format("manifest '{}' has no embedded config", path));
    auto cfg = parse_config(j["config"].get<std::string>());
    if (j.contains("config_hash") && j["config_hash"] != config_hash(cfg))
        throw ConfigError(fmt::format("manifest '{}': config hash mismatch", path));
    return cfg;
}

} // namespace polcorr
