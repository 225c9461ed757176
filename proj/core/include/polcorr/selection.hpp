#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polcorr/detector.hpp"

namespace polcorr
{
struct SelectionConfig
{
    double pixel_threshold_kev = 100.0;
    double sum_window_half_width_kev = 70.0;  //!< 3 sigma at 511 keV
    double sum_window_sigmas = 3.0;
    double timing_window_ns = 1.95;
    double theta_scat_nominal_deg = 0.0;
    double scatterer_window_sigmas = 3.0;
    double scatterer_threshold_kev = 1.0;
    double fwhm_b = 0.081;  //!< resolution for B windows away from 511 keV
    double fwhm_c = 0.121;  //!< scatterer resolution
    Mode mode = Mode::direct;
};

void validate(SelectionConfig const& cfg);

enum class Reason
{
    accepted,
    not_triggered,
    multiplicity,
    no_scatterer_hit,
    pixel_threshold,
    sum_window,
    kinematics,
    scatterer_fired,
    timing,
};

std::string_view to_string(Reason r);

//! Ordered cutflow stages; an event rejected for a reason stops before the
//! stage of that reason.
enum class CutStage
{
    triggered,
    multiplicity2,
    pixel_threshold,
    sum_window,
    kinematics,
    timing,
    accepted,
};

inline constexpr std::size_t kNumCutStages = 7;

std::string_view to_string(CutStage s);
CutStage stage_of(Reason r);

struct Verdict
{
    Reason reason = Reason::accepted;

    bool accepted() const { return reason == Reason::accepted; }
    explicit operator bool() const { return accepted(); }
};

struct CutflowReport
{
    std::uint64_t input = 0;
    std::array<std::uint64_t, kNumCutStages> counts{};

    void record(Verdict v);
    std::uint64_t count(CutStage s) const { return counts[static_cast<std::size_t>(s)]; }
};

// A and (B or C); the scatterer is ignored in passive mode
bool trigger(EventRecord const& event, Mode mode);

// Two fired pixels over threshold; for A (or B in direct mode) the 511 +- 70 keV sum window
Verdict select_module_compton(EventRecord const& event, DetectorId id, SelectionConfig const& cfg);

// B + C chain for an active scatterer at theta_scat_nominal
Verdict select_scattered_chain(EventRecord const& event, SelectionConfig const& cfg);

// Correlation baseline: C silent, A and B in the 511 keV windows
Verdict select_baseline_zero_deg(EventRecord const& event, SelectionConfig const& cfg);

// Passive scatterer: A, B window at the scattered energy, timing coincidence
Verdict select_passive(EventRecord const& event, SelectionConfig const& cfg);

//! Full event selection for the configured mode.
Verdict select_event(EventRecord const& event, SelectionConfig const& cfg);

struct SelectionOutput
{
    std::vector<EventRecord> accepted;
    CutflowReport cutflow;
};

SelectionOutput select_events(std::span<EventRecord const> events, SelectionConfig const& cfg);

//! One line per cut: name, count, fraction of input events.
std::string format_cutflow(CutflowReport const& report);

//! Energy window centred on the scattered-photon energy for theta_scat.
struct EnergyWindow
{
    double center_kev;
    double half_width_kev;

    bool contains(double e) const { return e >= center_kev - half_width_kev && e <= center_kev + half_width_kev; }
};

EnergyWindow scatterer_window(SelectionConfig const& cfg);
EnergyWindow passive_b_window(SelectionConfig const& cfg);

} // namespace polcorr
