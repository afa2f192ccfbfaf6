#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace driveframe {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Signed shortest-arc difference b - a in degrees, result in [-180, 180).
inline double shortest_arc_deg(double a, double b) {
    double d = std::fmod(b - a, 360.0);
    if (d < -180.0) d += 360.0;
    if (d >= 180.0) d -= 360.0;
    return d;
}

// Magnitude of the mean unit vector of a set of angles (radians).
inline double mean_resultant_length(std::span<const double> angles_rad) {
    if (angles_rad.empty()) return 0.0;
    double c = 0.0, s = 0.0;
    for (double a : angles_rad) {
        c += std::cos(a);
        s += std::sin(a);
    }
    c /= static_cast<double>(angles_rad.size());
    s /= static_cast<double>(angles_rad.size());
    return std::sqrt(c * c + s * s);
}

// Circular mean of angles in radians, result in [0, 2*pi).
inline double circular_mean_rad(std::span<const double> angles_rad) {
    double c = 0.0, s = 0.0;
    for (double a : angles_rad) {
        c += std::cos(a);
        s += std::sin(a);
    }
    double m = std::atan2(s, c);
    if (m < 0.0) m += 2.0 * std::numbers::pi;
    return m;
}

// Circular standard deviation in degrees: sqrt(-2 ln Rbar) * 180/pi.
// Rbar is clamped away from zero so near-uniform dispersions stay finite.
inline double circular_std_deg(std::span<const double> angles_rad) {
    double r = mean_resultant_length(angles_rad);
    if (r >= 1.0) return 0.0;
    if (r < 1e-12) r = 1e-12;
    return std::sqrt(-2.0 * std::log(r)) * kRadToDeg;
}

} // namespace driveframe
