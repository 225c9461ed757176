#include "polcorr/geometry.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "polcorr/angles.hpp"
#include "polcorr/errors.hpp"

namespace polcorr
{
double angle_between_deg(Vec3 a, Vec3 b)
{
    return rad_to_deg(std::acos(std::clamp(dot(a, b), -1.0, 1.0)));
}

TransverseFrame transverse_frame(Vec3 dir, Vec3 u, Vec3 v)
{
    // Gram-Schmidt against the detector axes rather than a cross product, so
    // that phi keeps the detector's (u, v) handedness for either beam direction.
    Vec3 e1 = u - dot(u, dir) * dir;
    if (norm(e1) < 1e-9)
        e1 = v - dot(v, dir) * dir;
    e1 = normalized(e1);
    Vec3 e2 = v - dot(v, dir) * dir - dot(v, e1) * e1;
    if (norm(e2) < 1e-9)
    {
        // dir parallel to v: complete with the cross product
        e2 = Vec3{dir.y * e1.z - dir.z * e1.y,
                  dir.z * e1.x - dir.x * e1.z,
                  dir.x * e1.y - dir.y * e1.x};
    }
    return {e1, normalized(e2)};
}

Vec3 rotate_direction(Vec3 dir, TransverseFrame const& frame, double theta_deg, double phi_deg)
{
    double const t = deg_to_rad(theta_deg);
    double const p = deg_to_rad(phi_deg);
    double const st = std::sin(t);
    return normalized(std::cos(t) * dir + st * std::cos(p) * frame.e1
                      + st * std::sin(p) * frame.e2);
}

void validate(DetectorGeometry const& g)
{
    if (g.pixels_per_side < 1)
        throw ConfigError("detector: pixels_per_side must be >= 1");
    if (!(g.crystal_side_mm > 0) || !(g.pitch_mm > g.crystal_side_mm))
        throw ConfigError(fmt::format("detector: pitch {} mm must exceed crystal side {} mm",
                                      g.pitch_mm,
                                      g.crystal_side_mm));
    if (!(g.crystal_length_mm > 0))
        throw ConfigError("detector: crystal length must be positive");
    if (!(g.distance_to_scatterer_mm > 0))
        throw ConfigError("detector: distance to scatterer must be positive");
    if (!(g.energy_resolution_fwhm_at_511 > 0 && g.energy_resolution_fwhm_at_511 < 1))
        throw ConfigError("detector: energy resolution must be in (0, 1)");
    if (!(g.rotation_theta_scat_deg >= 0 && g.rotation_theta_scat_deg <= 180))
        throw ConfigError("detector: rotation must be in [0, 180] deg");
}

void validate(ScattererSpec const& s)
{
    if (!(s.side_mm > 0) || !(s.length_mm > 0))
        throw ConfigError("scatterer: crystal dimensions must be positive");
    if (!(s.energy_resolution_fwhm_at_511 > 0 && s.energy_resolution_fwhm_at_511 < 1))
        throw ConfigError("scatterer: energy resolution must be in (0, 1)");
    if (!(s.source_distance_mm > 0))
        throw ConfigError("scatterer: source distance must be positive");
}

double angular_coverage(DetectorGeometry const& g)
{
    return rad_to_deg(std::atan(g.half_width_mm() / g.distance_to_scatterer_mm));
}

Placement placement_a(SetupGeometry const& setup)
{
    Placement p;
    p.normal = {0, 0, -1};
    p.face_center = setup.scatterer_center() + setup.a.distance_to_scatterer_mm * p.normal;
    p.u = {1, 0, 0};
    p.v = {0, 1, 0};
    return p;
}

Placement placement_b(SetupGeometry const& setup)
{
    double const t = deg_to_rad(setup.b.rotation_theta_scat_deg);
    Placement p;
    p.normal = {std::sin(t), 0, std::cos(t)};
    p.face_center = setup.scatterer_center() + setup.b.distance_to_scatterer_mm * p.normal;
    p.u = {std::cos(t), 0, -std::sin(t)};
    p.v = {0, 1, 0};
    return p;
}

double pixel_center_mm(int index, DetectorGeometry const& g)
{
    return (index + 0.5 - 0.5 * g.pixels_per_side) * g.pitch_mm;
}

std::optional<PixelIndex> pixel_at(double x_mm, double y_mm, DetectorGeometry const& g)
{
    double const fx = x_mm / g.pitch_mm + 0.5 * g.pixels_per_side;
    double const fy = y_mm / g.pitch_mm + 0.5 * g.pixels_per_side;
    if (!(fx >= 0 && fy >= 0 && fx < g.pixels_per_side && fy < g.pixels_per_side))
        return std::nullopt;
    return PixelIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

Vec3 to_local(Vec3 point, Placement const& p)
{
    Vec3 const d = point - p.face_center;
    return {dot(d, p.u), dot(d, p.v), dot(d, p.normal)};
}

std::optional<double> distance_to_face(Vec3 origin, Vec3 dir, Placement const& p)
{
    double const cos_in = dot(dir, p.normal);
    if (!(cos_in > 0))
        return std::nullopt;
    double const t = dot(p.face_center - origin, p.normal) / cos_in;
    if (t < 0)
        return std::nullopt;
    return t;
}

} // namespace polcorr
