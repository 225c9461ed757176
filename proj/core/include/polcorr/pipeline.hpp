#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polcorr/analysis.hpp"
#include "polcorr/config.hpp"
#include "polcorr/detector.hpp"
#include "polcorr/selection.hpp"

namespace polcorr
{
//! Pairs per independently seeded block. Block b draws from stream b, so
//! output is identical for any number of worker threads.
inline constexpr std::uint64_t kSimulationBlock = 4096;

struct SimulationResult
{
    std::uint64_t n_pairs = 0;
    std::vector<EventRecord> events;  //!< events with at least one fired pixel
};

//! workers == 0 uses cfg.streams.
SimulationResult simulate(RunConfig const& cfg, unsigned workers = 0);

//! Reconstruct selected events with the configured threshold and pitch.
std::vector<PairReco> reconstruct_selected(RunConfig const& cfg, std::span<EventRecord const> selected);

//! Analysis with the mixing stream derived from the master seed.
AnalysisResult analyze_events(RunConfig const& cfg, std::span<PairReco const> recos);

struct PipelineResult
{
    SimulationResult simulation;
    SelectionOutput selection;
    std::vector<PairReco> recos;
    AnalysisResult analysis;
};

PipelineResult run_pipeline(RunConfig const& cfg, unsigned workers = 0);

struct ArtifactPaths
{
    std::string events;
    std::string selected;
    std::string cutflow;
    std::string histogram;
    std::string fit;
    std::string manifest;
};

ArtifactPaths artifact_paths(std::string const& prefix);

//! Write every artifact plus a manifest that replays the run.
ArtifactPaths write_artifacts(RunConfig const& cfg, PipelineResult const& result, bool with_truth);

std::string manifest_json(RunConfig const& cfg, PipelineResult const& result, ArtifactPaths const& paths);

//! Configuration embedded in a manifest file.
RunConfig config_from_manifest(std::string const& path);

} // namespace polcorr
