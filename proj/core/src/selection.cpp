#include "polcorr/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "polcorr/errors.hpp"
#include "polcorr/physics.hpp"

namespace polcorr
{
void validate(SelectionConfig const& cfg)
{
    if (!(cfg.pixel_threshold_kev > 0) || !(cfg.sum_window_half_width_kev > 0)
        || !(cfg.sum_window_sigmas > 0) || !(cfg.timing_window_ns > 0)
        || !(cfg.scatterer_window_sigmas > 0) || !(cfg.scatterer_threshold_kev >= 0))
    {
        throw ConfigError("selection: thresholds and windows must be positive");
    }
    if (!(cfg.theta_scat_nominal_deg >= 0 && cfg.theta_scat_nominal_deg < 180))
        throw ConfigError("selection: theta_scat outside [0, 180)");
}

std::string_view to_string(Reason r)
{
    switch (r)
    {
        case Reason::accepted: return "accepted";
        case Reason::not_triggered: return "not_triggered";
        case Reason::multiplicity: return "multiplicity";
        case Reason::no_scatterer_hit: return "no_scatterer_hit";
        case Reason::pixel_threshold: return "pixel_threshold";
        case Reason::sum_window: return "sum_window";
        case Reason::kinematics: return "kinematics";
        case Reason::scatterer_fired: return "scatterer_fired";
        case Reason::timing: return "timing";
    }
    return "unknown";
}

std::string_view to_string(CutStage s)
{
    switch (s)
    {
        case CutStage::triggered: return "triggered";
        case CutStage::multiplicity2: return "multiplicity2";
        case CutStage::pixel_threshold: return "pixel_threshold";
        case CutStage::sum_window: return "sum_window";
        case CutStage::kinematics: return "kinematics";
        case CutStage::timing: return "timing";
        case CutStage::accepted: return "accepted";
    }
    return "unknown";
}

CutStage stage_of(Reason r)
{
    switch (r)
    {
        case Reason::not_triggered: return CutStage::triggered;
        case Reason::multiplicity:
        case Reason::no_scatterer_hit: return CutStage::multiplicity2;
        case Reason::pixel_threshold: return CutStage::pixel_threshold;
        case Reason::sum_window: return CutStage::sum_window;
        case Reason::kinematics:
        case Reason::scatterer_fired: return CutStage::kinematics;
        case Reason::timing: return CutStage::timing;
        case Reason::accepted: return CutStage::accepted;
    }
    return CutStage::accepted;
}

void CutflowReport::record(Verdict v)
{
    ++input;
    auto const stop = static_cast<std::size_t>(stage_of(v.reason));
    for (std::size_t s = 0; s < stop; ++s)
        ++counts[s];
    if (v.accepted())
        ++counts[static_cast<std::size_t>(CutStage::accepted)];
}

namespace
{
struct ModuleSummary
{
    std::size_t raw = 0;
    std::size_t fired = 0;
    double sum = 0;
    double first_time = std::numeric_limits<double>::infinity();
};

ModuleSummary summarize(EventRecord const& event, DetectorId id, double threshold)
{
    ModuleSummary s;
    for (auto const& h : event.hits)
    {
        if (h.detector != id)
            continue;
        ++s.raw;
        if (h.energy_kev >= threshold)
        {
            ++s.fired;
            s.sum += h.energy_kev;
            s.first_time = std::min(s.first_time, h.time_ns);
        }
    }
    return s;
}

Reason module_reason(ModuleSummary const& s, std::optional<EnergyWindow> window)
{
    if (s.raw < 2 || s.fired > 2)
        return Reason::multiplicity;
    if (s.fired < 2)
        return Reason::pixel_threshold;
    if (window && !window->contains(s.sum))
        return Reason::sum_window;
    return Reason::accepted;
}

EnergyWindow annihilation_window(SelectionConfig const& cfg)
{
    return {kElectronMassKeV, cfg.sum_window_half_width_kev};
}

// Earliest stage wins; ties keep the first reason
Verdict first_failure(std::initializer_list<Reason> reasons)
{
    Reason worst = Reason::accepted;
    for (Reason r : reasons)
    {
        if (stage_of(r) < stage_of(worst))
            worst = r;
    }
    return {worst};
}

std::optional<double> scatterer_energy(EventRecord const& event, double threshold)
{
    std::optional<double> e;
    for (auto const& h : event.hits)
    {
        if (h.detector == DetectorId::C && h.energy_kev > threshold)
            e = e.value_or(0.0) + h.energy_kev;
    }
    return e;
}
} // namespace

EnergyWindow scatterer_window(SelectionConfig const& cfg)
{
    double const expected
        = kElectronMassKeV - scattered_energy(kElectronMassKeV, cfg.theta_scat_nominal_deg);
    return {expected, cfg.scatterer_window_sigmas * energy_sigma(expected, cfg.fwhm_c)};
}

EnergyWindow passive_b_window(SelectionConfig const& cfg)
{
    double const center = scattered_energy(kElectronMassKeV, cfg.theta_scat_nominal_deg);
    return {center, cfg.sum_window_sigmas * energy_sigma(center, cfg.fwhm_b)};
}

bool trigger(EventRecord const& event, Mode mode)
{
    bool const a = event.count(DetectorId::A) > 0;
    bool const b = event.count(DetectorId::B) > 0;
    bool const c = mode != Mode::passive && event.count(DetectorId::C) > 0;
    return a && (b || c);
}

Verdict select_module_compton(EventRecord const& event, DetectorId id, SelectionConfig const& cfg)
{
    std::optional<EnergyWindow> window;
    if (id == DetectorId::A || (id == DetectorId::B && cfg.mode == Mode::direct))
        window = annihilation_window(cfg);
    return {module_reason(summarize(event, id, cfg.pixel_threshold_kev), window)};
}

Verdict select_scattered_chain(EventRecord const& event, SelectionConfig const& cfg)
{
    auto const b = summarize(event, DetectorId::B, cfg.pixel_threshold_kev);
    Reason const b_reason = module_reason(b, std::nullopt);
    auto const e_c = scatterer_energy(event, cfg.scatterer_threshold_kev);
    if (!e_c)
        return first_failure({b_reason, Reason::no_scatterer_hit});
    if (b_reason != Reason::accepted)
        return {b_reason};
    if (!annihilation_window(cfg).contains(*e_c + b.sum))
        return {Reason::sum_window};
    if (!scatterer_window(cfg).contains(*e_c))
        return {Reason::kinematics};
    return {Reason::accepted};
}

Verdict select_baseline_zero_deg(EventRecord const& event, SelectionConfig const& cfg)
{
    auto const window = annihilation_window(cfg);
    Reason const a = module_reason(summarize(event, DetectorId::A, cfg.pixel_threshold_kev), window);
    Reason const b = module_reason(summarize(event, DetectorId::B, cfg.pixel_threshold_kev), window);
    Reason const c = scatterer_energy(event, cfg.scatterer_threshold_kev) ? Reason::scatterer_fired
                                                                           : Reason::accepted;
    return first_failure({a, b, c});
}

Verdict select_passive(EventRecord const& event, SelectionConfig const& cfg)
{
    auto const a = summarize(event, DetectorId::A, cfg.pixel_threshold_kev);
    auto const b = summarize(event, DetectorId::B, cfg.pixel_threshold_kev);
    Reason const ra = module_reason(a, annihilation_window(cfg));
    Reason const rb = module_reason(b, passive_b_window(cfg));
    auto v = first_failure({ra, rb});
    if (!v.accepted())
        return v;
    if (!(std::abs(a.first_time - b.first_time) < cfg.timing_window_ns))
        return {Reason::timing};
    return {Reason::accepted};
}

Verdict select_event(EventRecord const& event, SelectionConfig const& cfg)
{
    if (!trigger(event, cfg.mode))
        return {Reason::not_triggered};
    switch (cfg.mode)
    {
        case Mode::direct:
            return first_failure({select_module_compton(event, DetectorId::A, cfg).reason,
                                  select_module_compton(event, DetectorId::B, cfg).reason});
        case Mode::active:
            if (cfg.theta_scat_nominal_deg == 0)
                return select_baseline_zero_deg(event, cfg);
            return first_failure({select_module_compton(event, DetectorId::A, cfg).reason,
                                  select_scattered_chain(event, cfg).reason});
        case Mode::passive: return select_passive(event, cfg);
    }
    return {Reason::not_triggered};
}

SelectionOutput select_events(std::span<EventRecord const> events, SelectionConfig const& cfg)
{
    validate(cfg);
    SelectionOutput out;
    for (auto const& event : events)
    {
        auto const v = select_event(event, cfg);
        out.cutflow.record(v);
        if (v.accepted())
            out.accepted.push_back(event);
    }
    return out;
}

std::string format_cutflow(CutflowReport const& report)
{
    std::string out = fmt::format("# events {}\n", report.input);
    for (std::size_t s = 0; s < kNumCutStages; ++s)
    {
        double const frac
            = report.input > 0 ? static_cast<double>(report.counts[s]) / static_cast<double>(report.input)
                               : 0.0;
        out += fmt::format(
            "{} {} {:.6f}\n", to_string(static_cast<CutStage>(s)), report.counts[s], frac);
    }
    return out;
}

} // namespace polcorr
