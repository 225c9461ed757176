#include "polcorr/detector.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "polcorr/angles.hpp"
#include "polcorr/errors.hpp"
#include "polcorr/physics.hpp"

namespace polcorr
{
std::size_t EventRecord::count(DetectorId id) const
{
    return static_cast<std::size_t>(
        std::count_if(hits.begin(), hits.end(), [id](PixelHit const& h) { return h.detector == id; }));
}

void validate(TransportConfig const& t)
{
    if (!(t.lambda511_mm > 0) || !(t.lambda_abs_mm > 0))
        throw ConfigError("transport: attenuation lengths must be positive");
    if (!(t.sigma_t_ns >= 0))
        throw ConfigError("timing: sigma_ns must be non-negative");
}

double energy_sigma(double energy_kev, double fwhm_at_511)
{
    if (energy_kev <= 0)
        return 0;
    return fwhm_at_511 * kElectronMassKeV * kFwhmToSigma * std::sqrt(energy_kev / kElectronMassKeV);
}

double smear_energy(double e_true_kev, double fwhm_at_511, RandomStream& rng)
{
    if (e_true_kev < 0)
        throw DomainError(fmt::format("smear_energy: negative energy {}", e_true_kev));
    double const sigma = energy_sigma(e_true_kev, fwhm_at_511);
    double const z = rng.normal();
    if (e_true_kev == 0)
        return 0;
    return std::max(0.0, e_true_kev + sigma * z);
}

double quantize_energy(double e_kev)
{
    return std::round(e_kev * 1000.0) / 1000.0 + 0.0;
}

double quantize_time(double t_ns)
{
    return std::round(t_ns * 10000.0) / 10000.0 + 0.0;
}

std::vector<Deposit> transport_photon(DetectorId id,
                                      Vec3 origin,
                                      Vec3 dir,
                                      double energy_kev,
                                      double theta_deg,
                                      double phi_deg,
                                      Placement const& place,
                                      DetectorGeometry const& geom,
                                      TransportConfig const& transport,
                                      RandomStream& rng)
{
    std::vector<Deposit> out;
    // Draws are made unconditionally so the stream advances identically
    double const path1 = rng.exponential(transport.lambda511_mm);
    double const path2 = rng.exponential(transport.lambda_abs_mm);

    auto const t_face = distance_to_face(origin, dir, place);
    if (!t_face)
        return out;
    Vec3 const entry = origin + (*t_face) * dir;
    Vec3 const entry_local = to_local(entry, place);
    double const hw = geom.half_width_mm();
    if (!(std::abs(entry_local.x) < hw && std::abs(entry_local.y) < hw))
        return out;

    Vec3 const vertex = entry + path1 * dir;
    Vec3 const vertex_local = to_local(vertex, place);
    if (vertex_local.z > geom.crystal_length_mm)
        return out;
    auto const first = pixel_at(vertex_local.x, vertex_local.y, geom);
    if (!first)
        return out;

    double const scattered = scattered_energy(energy_kev, theta_deg);

    auto const frame = transverse_frame(dir, place.u, place.v);
    Vec3 const dir_out = rotate_direction(dir, frame, theta_deg, phi_deg);
    Vec3 const landing = vertex + path2 * dir_out;
    Vec3 const landing_local = to_local(landing, place);
    std::optional<PixelIndex> second;
    if (landing_local.z >= 0 && landing_local.z <= geom.crystal_length_mm)
        second = pixel_at(landing_local.x, landing_local.y, geom);

    if (second && *second == *first)
    {
        out.push_back({id, *first, energy_kev, 1});
        return out;
    }
    out.push_back({id, *first, energy_kev - scattered, 1});
    if (second)
        out.push_back({id, *second, scattered, 2});
    return out;
}

Digitizer::Digitizer(SetupGeometry setup, Mode mode, TransportConfig transport)
    : setup_(std::move(setup))
    , mode_(mode)
    , transport_(transport)
    , place_a_(placement_a(setup_))
    , place_b_(placement_b(setup_))
{
    validate(setup_.a);
    validate(setup_.b);
    validate(setup_.scatterer);
    validate(transport_);
}

std::vector<Deposit> Digitizer::deposits(PairTruth const& pair, RandomStream& rng) const
{
    auto out = transport_photon(DetectorId::A,
                                Vec3{},
                                pair.dir1,
                                pair.e1_kev,
                                pair.theta1_deg,
                                pair.phi1_deg,
                                place_a_,
                                setup_.a,
                                transport_,
                                rng);
    auto b = transport_photon(DetectorId::B,
                              pair.origin2,
                              pair.dir2,
                              pair.e2_after_scatter_kev,
                              pair.theta2_deg,
                              pair.phi2_deg,
                              place_b_,
                              setup_.b,
                              transport_,
                              rng);
    out.insert(out.end(), b.begin(), b.end());
    if (pair.prior_scatter && mode_ == Mode::active)
        out.push_back({DetectorId::C, PixelIndex{0, 0}, pair.scatterer_deposit_kev(), 1});
    return out;
}

EventRecord Digitizer::operator()(PairTruth const& pair, std::uint64_t event_id, RandomStream& rng) const
{
    EventRecord event;
    event.event_id = event_id;
    for (auto const& dep : deposits(pair, rng))
    {
        double const fwhm = dep.detector == DetectorId::A   ? setup_.a.energy_resolution_fwhm_at_511
                            : dep.detector == DetectorId::B ? setup_.b.energy_resolution_fwhm_at_511
                                                            : setup_.scatterer.energy_resolution_fwhm_at_511;
        PixelHit hit;
        hit.detector = dep.detector;
        hit.ix = dep.pixel.ix;
        hit.iy = dep.pixel.iy;
        hit.energy_kev = quantize_energy(smear_energy(dep.energy_kev, fwhm, rng));
        hit.time_ns = quantize_time(rng.normal(0.0, transport_.sigma_t_ns));
        hit.truth_order = dep.order;
        event.hits.push_back(hit);
    }
    event.truth = TruthBlock{pair.theta1_deg,
                             pair.theta2_deg,
                             wrap_degrees(pair.phi1_deg - pair.phi2_deg),
                             pair.theta_scat_true_deg};
    return event;
}

EventRecord digitize(PairTruth const& pair,
                     SetupGeometry const& setup,
                     Mode mode,
                     TransportConfig const& transport,
                     std::uint64_t event_id,
                     RandomStream& rng)
{
    return Digitizer(setup, mode, transport)(pair, event_id, rng);
}

} // namespace polcorr
