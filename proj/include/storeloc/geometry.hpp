#pragma once

// Coordinates and distances. Everything downstream of I/O works in a local
// planar frame measured in meters; geographic coordinates only appear when
// reading seeds and writing results.

#include <string>

namespace storeloc {

inline constexpr double kEarthRadiusM = 6371000.0;

// WGS84 latitude/longitude in degrees. Construction validates the ranges.
class GeoPoint {
public:
    GeoPoint(double lat, double lon);

    double lat() const { return lat_; }
    double lon() const { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_;
    double lon_;
};

// Meters east (x) and north (y) of a region origin.
struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

struct Region {
    GeoPoint origin;
    std::string name;
};

bool is_finite(const PlanarPoint& p);

// Local equirectangular projection about region.origin.
PlanarPoint project(const GeoPoint& g, const Region& region);
GeoPoint unproject(const PlanarPoint& p, const Region& region);

double dist(const PlanarPoint& a, const PlanarPoint& b);

// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine(const GeoPoint& a, const GeoPoint& b);

}  // namespace storeloc
