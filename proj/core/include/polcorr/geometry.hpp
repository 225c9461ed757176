#pragma once

#include <cmath>
#include <optional>

namespace polcorr
{
//! Acquisition mode: direct photons, read-out scatterer, or unread scatterer.
enum class Mode
{
    direct,
    active,
    passive,
};

//---------------------------------------------------------------------------//
struct Vec3
{
    double x = 0;
    double y = 0;
    double z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
    friend bool operator==(Vec3 const&, Vec3 const&) = default;
};

inline double dot(Vec3 a, Vec3 b)
{
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(Vec3 a)
{
    return std::sqrt(dot(a, a));
}

inline Vec3 normalized(Vec3 a)
{
    return (1.0 / norm(a)) * a;
}

//! Angle between two unit vectors [deg]
double angle_between_deg(Vec3 a, Vec3 b);

//! Orthonormal frame (e1, e2) perpendicular to \c dir, aligned as closely as
//! possible with the detector axes (u, v).
struct TransverseFrame
{
    Vec3 e1;
    Vec3 e2;
};

TransverseFrame transverse_frame(Vec3 dir, Vec3 u, Vec3 v);

//! Direction at polar angle theta and azimuth phi about \c dir.
Vec3 rotate_direction(Vec3 dir, TransverseFrame const& frame, double theta_deg, double phi_deg);

//---------------------------------------------------------------------------//
/*!
 * Pixelated single-layer polarimeter.
 *
 * Defaults are the 8x8 GAGG:Ce matrix: 1.9 x 1.9 x 20 mm^3 crystals on a
 * 2.2 mm pitch, 50 mm from the scatterer, 8.1% FWHM at 511 keV.
 */
struct DetectorGeometry
{
    int pixels_per_side = 8;
    double pitch_mm = 2.2;
    double crystal_side_mm = 1.9;
    double crystal_length_mm = 20.0;
    double distance_to_scatterer_mm = 50.0;
    double rotation_theta_scat_deg = 0.0;
    double energy_resolution_fwhm_at_511 = 0.081;

    double half_width_mm() const { return 0.5 * pixels_per_side * pitch_mm; }
};

//! Throws ConfigError on violated invariants.
void validate(DetectorGeometry const& g);

//! Half-angle subtended by the matrix seen from the scatterer [deg].
double angular_coverage(DetectorGeometry const& g);

//! Single-crystal scatterer (detector C).
struct ScattererSpec
{
    double side_mm = 3.0;
    double length_mm = 20.0;
    double energy_resolution_fwhm_at_511 = 0.121;
    bool active = true;
    double source_distance_mm = 10.0;
};

void validate(ScattererSpec const& s);

//! Source, scatterer and both polarimeters.
struct SetupGeometry
{
    DetectorGeometry a;
    DetectorGeometry b;
    ScattererSpec scatterer;

    //! Source at the origin; the scatterer centre lies on +z.
    Vec3 scatterer_center() const { return {0, 0, scatterer.source_distance_mm}; }
};

//---------------------------------------------------------------------------//
//! Position and orientation of a polarimeter face in the lab frame.
struct Placement
{
    Vec3 face_center;
    Vec3 normal;  //!< into the crystals
    Vec3 u;       //!< local x (pixel ix)
    Vec3 v;       //!< local y (pixel iy)
};

//! Detector A faces the source from -z; B sits on the +z side rotated by
//! rotation_theta_scat about the vertical (y) axis through the scatterer.
Placement placement_a(SetupGeometry const& setup);
Placement placement_b(SetupGeometry const& setup);

struct PixelIndex
{
    int ix = 0;
    int iy = 0;
    friend bool operator==(PixelIndex const&, PixelIndex const&) = default;
};

//! Pixel centre in local coordinates: (i + 0.5 - n/2) * pitch
double pixel_center_mm(int index, DetectorGeometry const& g);

//! Pixel containing the local coordinate, or nullopt if outside the matrix.
std::optional<PixelIndex> pixel_at(double x_mm, double y_mm, DetectorGeometry const& g);

//! Local (x, y, depth) of a lab-frame point.
Vec3 to_local(Vec3 point, Placement const& p);

//! Ray/face intersection: distance along \c dir to the face plane, if the ray
//! travels into the detector.
std::optional<double> distance_to_face(Vec3 origin, Vec3 dir, Placement const& p);

} // namespace polcorr
