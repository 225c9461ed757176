#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "polcorr/geometry.hpp"
#include "polcorr/random.hpp"
#include "polcorr/sampling.hpp"

namespace polcorr
{
enum class DetectorId : char
{
    A = 'A',
    B = 'B',
    C = 'C',
};

struct PixelHit
{
    DetectorId detector = DetectorId::A;
    int ix = 0;
    int iy = 0;
    double energy_kev = 0;
    double time_ns = 0;
    //! 1: first interaction (recoil electron), 2: absorbed photon, 0: unknown
    int truth_order = 0;
};

//! Truth summary carried with an event (and written as optional CSV columns).
struct TruthBlock
{
    double theta1_deg = 0;
    double theta2_deg = 0;
    double delta_phi_deg = 0;
    double theta_scat_deg = 0;
};

struct EventRecord
{
    std::uint64_t event_id = 0;
    std::vector<PixelHit> hits;
    std::optional<TruthBlock> truth;

    std::size_t count(DetectorId id) const;
};

//! Attenuation and timing constants of the simplified transport.
struct TransportConfig
{
    double lambda511_mm = 20.0;   //!< first-interaction length
    double lambda_abs_mm = 10.0;  //!< absorption length of the scattered photon
    double sigma_t_ns = 0.3;      //!< per-hit Gaussian time jitter
};

void validate(TransportConfig const& t);

// FWHM to sigma for a Gaussian
inline constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

// Resolution model sigma(E) = (fwhm * 511 / 2.3548) sqrt(E / 511)
double energy_sigma(double energy_kev, double fwhm_at_511);

// Gaussian smearing with the 1/sqrt(E) model; negative results clamp to 0
double smear_energy(double e_true_kev, double fwhm_at_511, RandomStream& rng);

//! Energy deposit before smearing.
struct Deposit
{
    DetectorId detector;
    PixelIndex pixel;
    double energy_kev;
    int order;
};

/*!
 * Two-interaction transport of one photon into a polarimeter.
 *
 * Compton scatter at an exponentially distributed depth (recoil energy
 * deposited in the pixel containing the vertex), then photo-absorption of
 * the scattered photon after an exponential free path. Returns zero, one or
 * two deposits; a landing point in the first pixel merges into one deposit.
 */
std::vector<Deposit> transport_photon(DetectorId id,
                                      Vec3 origin,
                                      Vec3 dir,
                                      double energy_kev,
                                      double theta_deg,
                                      double phi_deg,
                                      Placement const& place,
                                      DetectorGeometry const& geom,
                                      TransportConfig const& transport,
                                      RandomStream& rng);

//! Converts pair truth into digitized event records.
class Digitizer
{
  public:
    Digitizer(SetupGeometry setup, Mode mode, TransportConfig transport);

    // Truth-level deposits of all detectors
    std::vector<Deposit> deposits(PairTruth const& pair, RandomStream& rng) const;

    EventRecord operator()(PairTruth const& pair, std::uint64_t event_id, RandomStream& rng) const;

    SetupGeometry const& setup() const { return setup_; }

  private:
    SetupGeometry setup_;
    Mode mode_;
    TransportConfig transport_;
    Placement place_a_;
    Placement place_b_;
};

EventRecord digitize(PairTruth const& pair,
                     SetupGeometry const& setup,
                     Mode mode,
                     TransportConfig const& transport,
                     std::uint64_t event_id,
                     RandomStream& rng);

//! Round energies to 1 eV and times to 0.1 ps, the precision of the event file.
double quantize_energy(double e_kev);
double quantize_time(double t_ns);

} // namespace polcorr
