#pragma once

#include <cmath>
#include <numbers>

namespace polcorr
{
inline constexpr double deg_to_rad(double deg)
{
    return deg * (std::numbers::pi / 180.0);
}

inline constexpr double rad_to_deg(double rad)
{
    return rad * (180.0 / std::numbers::pi);
}

//! Wrap an angle into [low, low + 360).
inline double wrap_degrees(double deg, double low = -180.0)
{
    double x = std::fmod(deg - low, 360.0);
    if (x < 0)
        x += 360.0;
    // fmod of a value just below a multiple of 360 can round up to 360
    if (x >= 360.0)
        x -= 360.0;
    return low + x;
}

} // namespace polcorr
