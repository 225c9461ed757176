#include "polcorr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "polcorr/angles.hpp"
#include "polcorr/errors.hpp"
#include "polcorr/geometry.hpp"

namespace polcorr
{
//---------------------------------------------------------------------------//
// Reconstruction
//---------------------------------------------------------------------------//
std::optional<ReconstructedScatter>
reconstruct_compton(PixelHit const& first, PixelHit const& second, double pitch_mm)
{
    if (!(first.energy_kev > 0) || !(second.energy_kev > 0))
        return std::nullopt;
    if (first.ix == second.ix && first.iy == second.iy)
        return std::nullopt;

    bool const ordered = first.energy_kev <= second.energy_kev;
    PixelHit const& recoil = ordered ? first : second;
    PixelHit const& photon = ordered ? second : first;

    double const e_sum = recoil.energy_kev + photon.energy_kev;
    double const cos_theta
        = kElectronMassKeV / e_sum - kElectronMassKeV / photon.energy_kev + 1.0;
    if (!(cos_theta >= -1.0 && cos_theta <= 1.0))
        return std::nullopt;

    double const dx = (photon.ix - recoil.ix) * pitch_mm;
    double const dy = (photon.iy - recoil.iy) * pitch_mm;

    ReconstructedScatter out;
    out.theta_deg = rad_to_deg(std::acos(cos_theta));
    out.phi_deg = wrap_degrees(rad_to_deg(std::atan2(dy, dx)));
    out.e_sum_kev = e_sum;
    out.lower_energy_first = first.energy_kev != second.energy_kev;
    return out;
}

namespace
{
std::optional<ReconstructedScatter>
reconstruct_module(EventRecord const& event, DetectorId id, double threshold, double pitch_mm)
{
    PixelHit const* fired[2] = {nullptr, nullptr};
    int n = 0;
    for (auto const& h : event.hits)
    {
        if (h.detector != id || h.energy_kev < threshold)
            continue;
        if (n == 2)
            return std::nullopt;
        fired[n++] = &h;
    }
    if (n != 2)
        return std::nullopt;
    return reconstruct_compton(*fired[0], *fired[1], pitch_mm);
}
} // namespace

std::optional<PairReco>
reconstruct_event(EventRecord const& event, double pixel_threshold_kev, double pitch_mm)
{
    auto a = reconstruct_module(event, DetectorId::A, pixel_threshold_kev, pitch_mm);
    if (!a)
        return std::nullopt;
    auto b = reconstruct_module(event, DetectorId::B, pixel_threshold_kev, pitch_mm);
    if (!b)
        return std::nullopt;
    return PairReco{event.event_id, *a, *b};
}

std::vector<PairReco> reconstruct_events(std::span<EventRecord const> events,
                                         double pixel_threshold_kev,
                                         double pitch_mm)
{
    std::vector<PairReco> out;
    out.reserve(events.size());
    for (auto const& e : events)
    {
        if (auto r = reconstruct_event(e, pixel_threshold_kev, pitch_mm))
            out.push_back(*r);
    }
    return out;
}

//---------------------------------------------------------------------------//
// Windows and binning
//---------------------------------------------------------------------------//
bool ThetaWindows::contains(PairReco const& r) const
{
    return r.a.theta_deg > theta1.lo_deg && r.a.theta_deg < theta1.hi_deg
           && r.b.theta_deg > theta2.lo_deg && r.b.theta_deg < theta2.hi_deg;
}

ThetaWindows ThetaWindows::widened(double sigma_deg) const
{
    auto widen = [sigma_deg](AngleWindow w) {
        return AngleWindow{std::max(0.0, w.lo_deg - sigma_deg),
                           std::min(180.0, w.hi_deg + sigma_deg)};
    };
    return {widen(theta1), widen(theta2)};
}

ThetaWindows default_theta_windows(double theta_scat_deg)
{
    double const e2 = scattered_energy(kElectronMassKeV, theta_scat_deg);
    double const lo2 = std::round(optimal_theta(e2)) - 10.0;
    return {{72.0, 90.0}, {lo2, 90.0}};
}

DeltaPhiBinning DeltaPhiBinning::centered(int bins)
{
    if (bins < 1)
        throw DomainError("binning: need at least one bin");
    return {bins, -180.0 - 180.0 / bins};
}

int DeltaPhiBinning::find(double delta_phi_deg) const
{
    double const x = wrap_degrees(delta_phi_deg, low_edge_deg);
    int const k = static_cast<int>((x - low_edge_deg) / width());
    return std::clamp(k, 0, bins - 1);
}

DeltaPhiHistogram::DeltaPhiHistogram(DeltaPhiBinning b)
    : binning(b)
    , raw(b.bins, 0.0)
    , mixed(b.bins, 0.0)
    , corrected(b.bins, 0.0)
    , corrected_err(b.bins, 0.0)
    , usable(b.bins, false)
{
    if (b.bins < 1)
        throw DomainError("histogram: need at least one bin");
}

void DeltaPhiHistogram::fill_raw(double delta_phi_deg, double w)
{
    raw[binning.find(delta_phi_deg)] += w;
}

void DeltaPhiHistogram::fill_mixed(double delta_phi_deg, double w)
{
    mixed[binning.find(delta_phi_deg)] += w;
}

double DeltaPhiHistogram::raw_total() const
{
    double s = 0;
    for (double v : raw)
        s += v;
    return s;
}

double DeltaPhiHistogram::mixed_total() const
{
    double s = 0;
    for (double v : mixed)
        s += v;
    return s;
}

double delta_phi(ReconstructedScatter const& a, ReconstructedScatter const& b)
{
    return wrap_degrees(a.phi_deg - b.phi_deg);
}

DeltaPhiHistogram accumulate_delta_phi(std::span<PairReco const> events,
                                       ThetaWindows const& windows,
                                       DeltaPhiBinning const& binning)
{
    DeltaPhiHistogram h(binning);
    for (auto const& r : events)
    {
        if (windows.contains(r))
            h.fill_raw(delta_phi(r.a, r.b));
    }
    return h;
}

DeltaPhiHistogram event_mixing(std::span<PairReco const> events,
                               ThetaWindows const& windows,
                               int n_mix,
                               RandomStream& rng,
                               DeltaPhiBinning const& binning)
{
    if (n_mix < 1)
        throw DomainError("event_mixing: n_mix must be positive");
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < events.size(); ++i)
    {
        if (windows.contains(events[i]))
            selected.push_back(i);
    }
    if (selected.size() < 2)
    {
        throw DomainError(
            fmt::format("event_mixing: need at least 2 events, have {}", selected.size()));
    }

    DeltaPhiHistogram h(binning);
    auto const n = static_cast<std::uint64_t>(selected.size());
    for (std::uint64_t pos = 0; pos < n; ++pos)
    {
        auto const& a = events[selected[pos]].a;
        for (int m = 0; m < n_mix; ++m)
        {
            // Uniform over the other events
            std::uint64_t k = rng.below(n - 1);
            if (k >= pos)
                ++k;
            h.fill_mixed(delta_phi(a, events[selected[k]].b));
        }
    }
    return h;
}

DeltaPhiHistogram acceptance_correct(DeltaPhiHistogram const& raw, DeltaPhiHistogram const& mixed)
{
    if (raw.binning.bins != mixed.binning.bins
        || raw.binning.low_edge_deg != mixed.binning.low_edge_deg)
    {
        throw DomainError("acceptance_correct: histograms have different binning");
    }
    double const mixed_total = mixed.mixed_total();
    if (!(mixed_total > 0))
        throw DomainError("acceptance_correct: mixed histogram is empty");

    DeltaPhiHistogram out(raw.binning);
    out.raw = raw.raw;
    out.mixed = mixed.mixed;
    out.mixed_scale = raw.raw_total() / mixed_total;
    for (int k = 0; k < out.bins(); ++k)
    {
        double const m = out.mixed[k];
        double const r = out.raw[k];
        if (m <= 0)
        {
            out.usable[k] = false;
            continue;
        }
        out.usable[k] = true;
        double const denom = m * out.mixed_scale;
        if (r > 0)
        {
            out.corrected[k] = r / denom;
            out.corrected_err[k] = out.corrected[k] * std::sqrt(1.0 / r + 1.0 / m);
        }
        else
        {
            // Empty raw bin: one-count Poisson scale
            out.corrected[k] = 0.0;
            out.corrected_err[k] = 1.0 / denom;
        }
    }
    return out;
}

//---------------------------------------------------------------------------//
// Fit
//---------------------------------------------------------------------------//
double FitResult::p_value() const
{
    if (ndf <= 0)
        return std::numeric_limits<double>::quiet_NaN();
    return boost::math::gamma_q(0.5 * ndf, 0.5 * std::max(0.0, chi2));
}

FitResult fit_modulation(std::span<FitPoint const> points)
{
    if (points.size() < 4)
        throw FitError(fmt::format("fit_modulation: need at least 4 bins, have {}", points.size()));

    double s00 = 0, s01 = 0, s11 = 0, t0 = 0, t1 = 0;
    for (auto const& p : points)
    {
        if (!(p.sigma > 0))
            throw FitError("fit_modulation: bin uncertainties must be positive");
        double const w = 1.0 / (p.sigma * p.sigma);
        double const c = bin_average_cos2(p.lo_deg, p.hi_deg);
        s00 += w;
        s01 += w * c;
        s11 += w * c * c;
        t0 += w * p.y;
        t1 += w * c * p.y;
    }
    double const det = s00 * s11 - s01 * s01;
    if (!(det > 1e-12 * s00 * s11))
        throw FitError("fit_modulation: singular normal matrix");

    double const a = (s11 * t0 - s01 * t1) / det;
    double const b = (s00 * t1 - s01 * t0) / det;
    if (a == 0)
        throw FitError("fit_modulation: zero amplitude");
    double const v_aa = s11 / det;
    double const v_bb = s00 / det;
    double const v_ab = -s01 / det;

    FitResult out;
    out.M = a;
    out.mu = -b / a;
    // Jacobian of mu = -b/a with respect to (a, b)
    double const j_a = b / (a * a);
    double const j_b = -1.0 / a;
    out.sigma_mu = std::sqrt(std::max(0.0, j_a * j_a * v_aa + j_b * j_b * v_bb + 2 * j_a * j_b * v_ab));
    for (auto const& p : points)
    {
        double const c = bin_average_cos2(p.lo_deg, p.hi_deg);
        double const r = (p.y - a - b * c) / p.sigma;
        out.chi2 += r * r;
    }
    out.ndf = static_cast<int>(points.size()) - 2;
    if (out.mu > -1 && out.mu < 1)
    {
        auto const rr = ratio_R(out.mu, out.sigma_mu);
        out.R = rr.R;
        out.sigma_R = rr.sigma_R;
    }
    else
    {
        out.R = std::numeric_limits<double>::quiet_NaN();
        out.sigma_R = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

FitResult fit_modulation(DeltaPhiHistogram const& h)
{
    std::vector<FitPoint> points;
    for (int k = 0; k < h.bins(); ++k)
    {
        if (h.usable[k])
            points.push_back({h.binning.low(k), h.binning.high(k), h.corrected[k], h.corrected_err[k]});
    }
    return fit_modulation(points);
}

//---------------------------------------------------------------------------//
AnalysisResult analyze(std::span<PairReco const> events, AnalysisOptions const& opts, RandomStream& rng)
{
    auto raw = accumulate_delta_phi(events, opts.windows, opts.binning);
    auto mixed = event_mixing(events, opts.windows, opts.n_mix, rng, opts.binning);
    AnalysisResult out{acceptance_correct(raw, mixed), {}, 0};
    out.fit = fit_modulation(out.histogram);
    out.n_events = static_cast<std::size_t>(raw.raw_total());
    return out;
}

SystematicResult estimate_theta_systematic(std::span<PairReco const> events,
                                           AnalysisOptions const& opts,
                                           double sigma_theta_deg,
                                           RandomStreamSpec spec)
{
    if (!(sigma_theta_deg >= 0))
        throw DomainError("estimate_theta_systematic: sigma_theta must be non-negative");
    SystematicResult out;
    {
        RandomStream rng(spec);
        out.mu_nominal = analyze(events, opts, rng).fit.mu;
    }
    {
        AnalysisOptions wide = opts;
        wide.windows = opts.windows.widened(sigma_theta_deg);
        RandomStream rng(spec);
        out.mu_widened = analyze(events, wide, rng).fit.mu;
    }
    out.relative_change = (out.mu_nominal - out.mu_widened) / out.mu_nominal;
    return out;
}

} // namespace polcorr
