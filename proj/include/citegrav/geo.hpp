#pragma once

#include <algorithm>
#include <cmath>

#include "citegrav/error.hpp"

namespace citegrav {

// IUGG mean Earth radius, km. All distances in this library are great-circle
// distances on a sphere of this radius.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.14159265358979323846;
// Largest possible great-circle distance (antipodal points).
inline constexpr double kMaxDistanceKm = kPi * kEarthRadiusKm;

// Point on the sphere in degrees. Latitude is validated to [-90, 90];
// longitude is wrapped to [-180, 180). Both must be finite.
class GeoPoint {
  public:
    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg) : lat_(lat_deg) {
        if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
            throw DataError("non-finite coordinate");
        if (lat_deg < -90.0 || lat_deg > 90.0)
            throw DataError("latitude out of range: " + std::to_string(lat_deg));
        lon_ = std::fmod(lon_deg, 360.0);
        if (lon_ < -180.0)
            lon_ += 360.0;
        else if (lon_ >= 180.0)
            lon_ -= 360.0;
    }

    double lat() const { return lat_; }
    double lon() const { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

  private:
    double lat_ = 0.0;
    double lon_ = 0.0;
};

inline double radians(double degrees) { return degrees * (kPi / 180.0); }

// Great-circle distance in km via the haversine formula. Total, symmetric
// (absolute deltas keep it bitwise so), zero on identical points, and bounded
// by pi*R. Numerically stable near both the zero and antipodal limits.
inline double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
    double phi1 = radians(a.lat());
    double phi2 = radians(b.lat());
    double dphi = std::fabs(phi2 - phi1);
    double dlam = std::fabs(radians(b.lon()) - radians(a.lon()));
    double sp = std::sin(dphi * 0.5);
    double sl = std::sin(dlam * 0.5);
    double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace citegrav
