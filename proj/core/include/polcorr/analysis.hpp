#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polcorr/detector.hpp"
#include "polcorr/physics.hpp"
#include "polcorr/random.hpp"

namespace polcorr
{
//---------------------------------------------------------------------------//
// Reconstruction
//---------------------------------------------------------------------------//
struct ReconstructedScatter
{
    double theta_deg = 0;
    double phi_deg = 0;
    double e_sum_kev = 0;
    bool lower_energy_first = true;
};

/*!
 * Compton angle and azimuth from a two-pixel event.
 *
 * The lower-energy pixel is taken as the recoil electron and the other as
 * the absorbed photon; phi points from the first to the second pixel.
 * Returns nullopt when the smeared energies are kinematically impossible.
 */
std::optional<ReconstructedScatter>
reconstruct_compton(PixelHit const& first, PixelHit const& second, double pitch_mm = 2.2);

struct PairReco
{
    std::uint64_t event_id = 0;
    ReconstructedScatter a;
    ReconstructedScatter b;
};

//! Reconstruct A and B from their fired pixels (exactly two each above threshold).
std::optional<PairReco>
reconstruct_event(EventRecord const& event, double pixel_threshold_kev, double pitch_mm = 2.2);

std::vector<PairReco> reconstruct_events(std::span<EventRecord const> events,
                                         double pixel_threshold_kev,
                                         double pitch_mm = 2.2);

//---------------------------------------------------------------------------//
// Histograms
//---------------------------------------------------------------------------//
struct ThetaWindows
{
    AngleWindow theta1{72.0, 90.0};
    AngleWindow theta2{72.0, 90.0};

    bool contains(PairReco const& r) const;
    ThetaWindows widened(double sigma_deg) const;
};

//! Default polarimeter windows for a prior scatter angle: 72-90 deg for A;
//! for B the lower edge sits 10 deg below the optimal angle at the scattered energy.
ThetaWindows default_theta_windows(double theta_scat_deg);

/*!
 * Uniform delta-phi binning.
 *
 * The default centres bins on multiples of 15 deg, so the discrete angles of
 * the pixel grid (0, 45, 90, ...) land in bin interiors.
 */
struct DeltaPhiBinning
{
    int bins = 24;
    double low_edge_deg = -187.5;

    static DeltaPhiBinning centered(int bins);
    double width() const { return 360.0 / bins; }
    double low(int k) const { return low_edge_deg + k * width(); }
    double high(int k) const { return low_edge_deg + (k + 1) * width(); }
    int find(double delta_phi_deg) const;
};

struct DeltaPhiHistogram
{
    DeltaPhiBinning binning;
    std::vector<double> raw;
    std::vector<double> mixed;        //!< unnormalised mixed-event counts
    double mixed_scale = 1.0;         //!< raw total / mixed total
    std::vector<double> corrected;
    std::vector<double> corrected_err;
    std::vector<bool> usable;         //!< false where mixed = 0

    explicit DeltaPhiHistogram(DeltaPhiBinning b = {});

    void fill_raw(double delta_phi_deg, double w = 1.0);
    void fill_mixed(double delta_phi_deg, double w = 1.0);
    double raw_total() const;
    double mixed_total() const;
    int bins() const { return binning.bins; }
};

//! Delta-phi difference phi1 - phi2 wrapped into the binning range.
double delta_phi(ReconstructedScatter const& a, ReconstructedScatter const& b);

DeltaPhiHistogram accumulate_delta_phi(std::span<PairReco const> events,
                                       ThetaWindows const& windows,
                                       DeltaPhiBinning const& binning = {});

//! Mixed-event histogram: for every event in the windows, n_mix partners
//! drawn uniformly with replacement among the others.
DeltaPhiHistogram event_mixing(std::span<PairReco const> events,
                               ThetaWindows const& windows,
                               int n_mix,
                               RandomStream& rng,
                               DeltaPhiBinning const& binning = {});

//! N_cor = raw / (mixed normalised to the raw total), bin by bin.
DeltaPhiHistogram acceptance_correct(DeltaPhiHistogram const& raw, DeltaPhiHistogram const& mixed);

//---------------------------------------------------------------------------//
// Fit
//---------------------------------------------------------------------------//
struct FitResult
{
    double M = 0;
    double mu = 0;
    double sigma_mu = 0;
    double chi2 = 0;
    int ndf = 0;
    double R = 1;
    double sigma_R = 0;

    //! Upper-tail chi-square probability.
    double p_value() const;
};

struct FitPoint
{
    double lo_deg;
    double hi_deg;
    double y;
    double sigma;
};

/*!
 * Weighted least squares of M [1 - mu cos 2dphi].
 *
 * Linear in the basis {1, <cos 2dphi>_bin}, where the second column is the
 * bin average of cos 2dphi, so exactly representable binned signals are
 * recovered exactly. sigma_mu follows from the parameter covariance.
 */
FitResult fit_modulation(std::span<FitPoint const> points);

//! Fit the usable bins of an acceptance-corrected histogram.
FitResult fit_modulation(DeltaPhiHistogram const& corrected);

//---------------------------------------------------------------------------//
struct AnalysisOptions
{
    ThetaWindows windows;
    DeltaPhiBinning binning;
    int n_mix = 100;
};

struct AnalysisResult
{
    DeltaPhiHistogram histogram;
    FitResult fit;
    std::size_t n_events = 0;  //!< events inside the theta windows
};

//! Histogram, mix, correct and fit.
AnalysisResult analyze(std::span<PairReco const> events, AnalysisOptions const& opts, RandomStream& rng);

struct SystematicResult
{
    double mu_nominal = 0;
    double mu_widened = 0;
    double relative_change = 0;  //!< (mu_nominal - mu_widened) / mu_nominal
};

//! Re-analyse with both theta windows widened by sigma_theta on each edge
//! (clipped to [0, 180]). Both passes use mixing streams built from \c spec.
SystematicResult estimate_theta_systematic(std::span<PairReco const> events,
                                           AnalysisOptions const& opts,
                                           double sigma_theta_deg,
                                           RandomStreamSpec spec);

} // namespace polcorr
